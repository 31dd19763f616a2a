"""Command-line front-end: ``supertree-tw <command> FILE...``.

Exit codes: 0 compatible or success, 1 incompatible, 2 not applicable or
unknown, 64 usage error, 65 malformed input, 66 unreadable file.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence, TextIO

from .algo import CaseLabel, NotApplicable, Supertree, supertree_tw2
from .dgraph import DisplayGraph, build_display, cleanup, components, to_dot
from .families import KINDS, FamilySpec, generate, witness_supertree
from .oracle import MAX_ORACLE_TAXA, MAX_TREEWIDTH_VERTICES, brute_force_compatible, exact_treewidth
from .phylo import NewickError, PhyloTree, read_newick_file, write_newick
from .planar import embed, face_census, minimally_adjacent_faces
from .tw2 import K4Witness, is_tw_le_2, k4_witness

EXIT_OK = 0
EXIT_INCOMPATIBLE = 1
EXIT_UNKNOWN = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_NOINPUT = 66

TRACE = 5
LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG, "trace": TRACE}

REPORT_SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["verdict", "supertree", "tw2", "k4_witness", "case_trace", "timings"],
    "properties": {
        "verdict": {"enum": ["compatible", "incompatible", "not_applicable"]},
        "supertree": {"type": ["string", "null"]},
        "tw2": {"type": "boolean"},
        "k4_witness": {
            "type": ["array", "null"],
            "minItems": 4,
            "maxItems": 4,
            "items": {"type": "array", "minItems": 1, "items": {"type": "string"}},
        },
        "case_trace": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["depth", "case", "separator"],
                "properties": {
                    "depth": {"type": "integer", "minimum": 0},
                    "case": {"enum": [c.value for c in CaseLabel]},
                    "separator": {"type": "array", "items": {"type": "string"}},
                },
            },
        },
        "timings": {"type": "object", "additionalProperties": {"type": "number"}},
    },
}

log = logging.getLogger("supertree_tw")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse exits 2 by default; we reserve 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunReport:
    verdict: str
    supertree: str | None = None
    tw2: bool = False
    k4_witness: list[list[str]] | None = None
    case_trace: list[dict[str, Any]] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)

    def as_json(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict,
            "supertree": self.supertree,
            "tw2": self.tw2,
            "k4_witness": self.k4_witness,
            "case_trace": self.case_trace,
            "timings": {k: round(v, 3) for k, v in self.timings.items()},
        }

    def as_text(self) -> str:
        lines = [f"verdict: {self.verdict}", f"tw<=2: {str(self.tw2).lower()}"]
        if self.supertree is not None:
            lines.append(f"supertree: {self.supertree}")
        if self.k4_witness is not None:
            lines.append("k4 witness: " + " | ".join(",".join(s) for s in self.k4_witness))
        for step in self.case_trace:
            lines.append(f"case: depth={step['depth']} {step['case']} separator={','.join(step['separator'])}")
        return "\n".join(lines)

    @property
    def exit_code(self) -> int:
        return {"compatible": EXIT_OK, "incompatible": EXIT_INCOMPATIBLE}.get(self.verdict, EXIT_UNKNOWN)


def _witness_names(d: DisplayGraph, witness: K4Witness) -> list[list[str]]:
    return [sorted(d.describe(v) for v in s) for s in witness.branch_sets]


def _timed(timings: dict[str, float], phase: str, fn: Callable[[], Any]) -> Any:
    start = time.perf_counter()
    try:
        return fn()
    finally:
        timings[phase] = timings.get(phase, 0.0) + (time.perf_counter() - start) * 1000


def load_trees(paths: Sequence[str]) -> list[PhyloTree]:
    trees: list[PhyloTree] = []
    for p in paths:
        try:
            trees += read_newick_file(p)
        except NewickError as exc:
            raise NewickError(f"{p}: {exc.message}", exc.position, exc.line) from exc
    if not trees:
        raise UsageError("no trees in input")
    return trees


def _require_binary(trees: Sequence[PhyloTree]) -> None:
    for i, t in enumerate(trees):
        if not t.is_binary():
            raise DataError(f"tree {i + 1} is not binary: {write_newick(t)}")


def run_check(trees: list[PhyloTree], use_oracle: bool = False) -> RunReport:
    """Run the construction, optionally falling back to the exhaustive oracle."""
    _require_binary(trees)
    timings: dict[str, float] = {}
    result = _timed(timings, "solve", lambda: supertree_tw2(trees))
    if isinstance(result, Supertree):
        return RunReport(
            "compatible",
            supertree=write_newick(result.tree),
            tw2=True,
            case_trace=[{"depth": dep, "case": c, "separator": list(sep)} for dep, c, sep in result.case_trace],
            timings=timings,
        )
    assert isinstance(result, NotApplicable)
    report = RunReport("not_applicable", tw2=False, k4_witness=_witness_names(result.graph, result.witness), timings=timings)
    n_taxa = len(set().union(*(t.taxa for t in trees)))
    if use_oracle and n_taxa <= MAX_ORACLE_TAXA:
        found = _timed(timings, "oracle", lambda: brute_force_compatible(trees))
        if found is None:
            report.verdict = "incompatible"
        else:
            report.verdict = "compatible"
            report.supertree = write_newick(found)
    elif use_oracle:
        log.info("oracle skipped: %d taxa exceeds the ceiling of %d", n_taxa, MAX_ORACLE_TAXA)
    return report


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _batches(args: argparse.Namespace) -> list[tuple[str, list[PhyloTree]]]:
    if getattr(args, "per_file", False):
        return [(p, load_trees([p])) for p in args.files]
    return [("", load_trees(args.files))]


def cmd_check(args: argparse.Namespace, out: TextIO) -> int:
    batches = _batches(args)
    reports = [(name, run_check(trees, args.oracle)) for name, trees in batches]
    if args.json:
        if args.per_file:
            payload: Any = [{"file": name, **r.as_json()} for name, r in reports]
        else:
            payload = reports[0][1].as_json()
        out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        for name, r in reports:
            if args.per_file:
                out.write(f"== {name}\n")
            out.write(r.as_text() + "\n")
    return max(r.exit_code for _, r in reports)


def cmd_supertree(args: argparse.Namespace, out: TextIO) -> int:
    report = run_check(load_trees(args.files))
    if report.supertree is not None:
        out.write(report.supertree + "\n")
    else:
        out.write("no supertree: display graph has treewidth above 2\n")
    return report.exit_code


def cmd_tw(args: argparse.Namespace, out: TextIO) -> int:
    d = build_display(load_trees(args.files))
    ok, _ = is_tw_le_2(d)
    cleaned, _ = cleanup(d)
    out.write(f"tw<=2: {str(ok).lower()}\n")
    out.write(f"tw<=2 after cleanup: {str(is_tw_le_2(cleaned)[0]).lower()}\n")
    witness = "none" if ok else " | ".join(",".join(s) for s in _witness_names(d, k4_witness(d)))
    out.write(f"k4 witness: {witness}\n")
    if args.exact:
        if d.n_vertices > MAX_TREEWIDTH_VERTICES:
            out.write(f"exact treewidth: skipped ({d.n_vertices} vertices > {MAX_TREEWIDTH_VERTICES})\n")
        else:
            out.write(f"exact treewidth: {exact_treewidth(d)}\n")
    return EXIT_OK


def cmd_faces(args: argparse.Namespace, out: TextIO) -> int:
    d = build_display(load_trees(args.files))
    if args.clean:
        d, _ = cleanup(d)
    code = EXIT_OK
    parts = components(d)
    if not parts:
        out.write("faces: 0 (empty display graph)\n")
    for i, comp in enumerate(parts):
        ok, trace = is_tw_le_2(comp)
        if len(parts) > 1:
            out.write(f"component {i}: {comp.n_vertices} vertices\n")
        if not ok:
            out.write("not embeddable by reduction: treewidth above 2\n")
            code = EXIT_UNKNOWN
            continue
        system = embed(comp, trace)
        census = face_census(system)
        out.write(f"faces: {len(census)}\n")
        for face, label in census:
            walk = " ".join(comp.describe(v) for v, _ in face.boundary)
            tag = " outer" if face.is_outer else ""
            out.write(f"  F{face.index} label={label} length={face.length}{tag}: {walk}\n")
        try:
            f1, f2, path = minimally_adjacent_faces(system, comp)
        except ValueError as exc:
            out.write(f"pair: none ({exc})\n")
            continue
        out.write(f"pair: F{f1.index} F{f2.index} path={'-'.join(comp.describe(v) for v in path.vertices)}\n")
    return code


def cmd_gen(args: argparse.Namespace, out: TextIO) -> int:
    spec = FamilySpec(args.kind, args.k)
    trees = generate(spec)
    lines = [f"# kind={spec.kind} k={len(trees)}"]
    if spec.kind == "compatible_tw3":
        lines.append("# expected: compatible, tw=3")
        lines.append(f"# witness: {write_newick(witness_supertree(spec))}")
    elif spec.kind == "incompatible_tw3":
        lines.append("# expected: incompatible (first three trees), tw=3")
    else:
        lines.append("# expected: incompatible, tw=3")
    text = "\n".join(lines + [write_newick(t) for t in trees]) + "\n"
    _emit(text, args.output, out)
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace, out: TextIO) -> int:
    trees = load_trees(args.files)
    _require_binary(trees)
    n_taxa = len(set().union(*(t.taxa for t in trees)))
    d = build_display(trees)
    if d.n_vertices <= MAX_TREEWIDTH_VERTICES:
        out.write(f"exact treewidth: {exact_treewidth(d)}\n")
    else:
        out.write(f"exact treewidth: skipped ({d.n_vertices} vertices > {MAX_TREEWIDTH_VERTICES})\n")
    if n_taxa > MAX_ORACLE_TAXA:
        out.write(f"compatibility: unknown ({n_taxa} taxa > {MAX_ORACLE_TAXA})\n")
        return EXIT_UNKNOWN
    found = brute_force_compatible(trees)
    if found is None:
        out.write("compatibility: incompatible\n")
        return EXIT_INCOMPATIBLE
    out.write(f"compatibility: compatible\nsupertree: {write_newick(found)}\n")
    return EXIT_OK


def cmd_dot(args: argparse.Namespace, out: TextIO) -> int:
    d = build_display(load_trees(args.files))
    notes = None
    if args.faces:
        ok, trace = is_tw_le_2(d)
        if not ok:
            raise UsageError("--faces needs a display graph of treewidth <= 2")
        notes = {}
        for face, _ in face_census(embed(d, trace)):
            for e in face.edges:
                notes[e] = f"{notes[e]}/F{face.index}" if e in notes else f"F{face.index}"
    _emit(to_dot(d, edge_notes=notes), args.output, out)
    return EXIT_OK


def _emit(text: str, path: str | None, out: TextIO) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        out.write(text)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="supertree-tw", description="Supertree compatibility via display-graph treewidth.")
    ap.add_argument("--seed", type=int, default=None, help="reserved; generators are deterministic")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def files(p: argparse.ArgumentParser) -> None:
        p.add_argument("files", nargs="+", metavar="FILE", help="Newick files, one tree per line")

    p = sub.add_parser("check", help="decide compatibility and build a supertree when tw <= 2")
    files(p)
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.add_argument("--oracle", action="store_true", help=f"exhaustive fallback for <= {MAX_ORACLE_TAXA} taxa")
    p.add_argument("--per-file", action="store_true", help="treat each file as its own instance")
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("supertree", help="print the constructed supertree")
    files(p)
    p.set_defaults(run=cmd_supertree)

    p = sub.add_parser("tw", help="treewidth <= 2 test and K4 witness")
    files(p)
    p.add_argument("--exact", action="store_true", help=f"exact treewidth for <= {MAX_TREEWIDTH_VERTICES} vertices")
    p.set_defaults(run=cmd_tw)

    p = sub.add_parser("faces", help="face census and minimally adjacent pair")
    files(p)
    p.add_argument("--clean", action="store_true", help="clean the display graph first")
    p.set_defaults(run=cmd_faces)

    p = sub.add_parser("gen", help="write a generated family instance")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("k", type=int, nargs="?", default=3)
    p.add_argument("-o", "--output", help="output file (default stdout)")
    p.set_defaults(run=cmd_gen)

    p = sub.add_parser("oracle", help="exhaustive compatibility and exact treewidth")
    files(p)
    p.set_defaults(run=cmd_oracle)

    p = sub.add_parser("dot", help="display graph in Graphviz DOT")
    files(p)
    p.add_argument("--faces", action="store_true", help="label edges with their faces")
    p.add_argument("-o", "--output", help="output file (default stdout)")
    p.set_defaults(run=cmd_dot)
    return ap


def _configure_logging() -> None:
    logging.addLevelName(TRACE, "TRACE")
    level = os.environ.get("SUPERTREE_TW_LOG", "error").lower()
    logging.basicConfig(level=LOG_LEVELS.get(level, logging.ERROR), format="%(levelname)s %(name)s: %(message)s")


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    _configure_logging()
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.run(args, out)
    except NewickError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DataError as exc:
        print(f"bad input: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return EXIT_NOINPUT
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

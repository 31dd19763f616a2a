"""Random restriction corpus for the treewidth-2 supertree construction.

Samples a binary supertree on 6..10 taxa, cuts k random restrictions of at
least four taxa each, and keeps instances whose cleaned display graph has
treewidth <= 2.  Prints case counts and failures.
"""

from __future__ import annotations

import argparse
import time
from collections import Counter

from supertree_tw.algo import Supertree, supertree_tw2
from supertree_tw.families import tw2_corpus
from supertree_tw.phylo import displays


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    cases: Counter[str] = Counter()
    start = time.perf_counter()
    failures = 0
    for i, (_, parts) in enumerate(tw2_corpus(args.count, args.seed)):
        try:
            res = supertree_tw2(parts)
        except Exception as exc:  # report and keep going
            failures += 1
            print(f"instance {i}: {type(exc).__name__}: {exc}")
            print("  " + " ".join(str(t) for t in parts))
            continue
        assert isinstance(res, Supertree) and all(displays(res.tree, t) for t in parts)
        cases.update(label for _, label, _ in res.case_trace)
    print(f"{args.count} instances, {failures} failures, {time.perf_counter() - start:.1f}s")
    for label, n in sorted(cases.items()):
        print(f"  {label}: {n}")


if __name__ == "__main__":
    main()

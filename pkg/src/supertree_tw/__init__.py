"""Supertree compatibility through the treewidth of the display graph."""

from .algo import (
    CaseLabel,
    Incompatible,
    NotApplicable,
    Supertree,
    supertree_tw2,
    theorem1_check,
    two_tree_compatible,
)
from .dgraph import DisplayGraph, build_display, cleanup
from .phylo import PhyloTree, displays, parse_newick, restrict, write_newick
from .tw2 import is_tw_le_2, k4_witness, verify_k4_witness

__all__ = [
    "CaseLabel",
    "DisplayGraph",
    "Incompatible",
    "NotApplicable",
    "PhyloTree",
    "Supertree",
    "build_display",
    "cleanup",
    "displays",
    "is_tw_le_2",
    "k4_witness",
    "parse_newick",
    "restrict",
    "supertree_tw2",
    "theorem1_check",
    "two_tree_compatible",
    "verify_k4_witness",
    "write_newick",
]

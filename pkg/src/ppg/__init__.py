"""Finitely presented pro-p groups: cup products, Kummerian orientations,
Massey products and the graded algebras of their Zassenhaus filtrations."""
from __future__ import annotations

from .cohomology import CupTable, cup, cup_table, quadraticity_report
from .graded import dual_matches_cohomology, koszul_check, mildness_check, quadratic_dual
from .kummer import cyclotomicity_search, is_kummerian, ktheta_module, twisted_derivative
from .massey import find_lift, massey_verdict, strong_vanishing_scan, verify_homomorphism
from .presentations import (Orientation, Presentation, make_chain_amalgam, make_demushkin, make_f1, make_f2,
                            parse_dsl, parse_family_spec, to_dsl)
from .subgroups import abelianization, enumerate_index_p, rewrite_index_p

__all__ = [
    "CupTable", "cup", "cup_table", "quadraticity_report",
    "dual_matches_cohomology", "koszul_check", "mildness_check", "quadratic_dual",
    "cyclotomicity_search", "is_kummerian", "ktheta_module", "twisted_derivative",
    "find_lift", "massey_verdict", "strong_vanishing_scan", "verify_homomorphism",
    "Orientation", "Presentation", "make_chain_amalgam", "make_demushkin", "make_f1", "make_f2",
    "parse_dsl", "parse_family_spec", "to_dsl",
    "abelianization", "enumerate_index_p", "rewrite_index_p",
]

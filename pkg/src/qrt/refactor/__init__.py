"""Behaviour-preserving transformations of Q# programs."""

from .base import EditResult, Precondition
from .engine import CATALOG, CATALOG_ROWS, ArgSpec, CatalogEntry, RefactoringRequest, apply_refactoring, catalog
from .gaterules import GATE_RULES, MERGE_RULES, SUBSTITUTION_RULES, GateApp, GateRule, verify_rules

__all__ = [
    "ArgSpec", "CATALOG", "CatalogEntry", "EditResult", "GATE_RULES", "GateApp", "GateRule",
    "MERGE_RULES", "Precondition", "RefactoringRequest", "SUBSTITUTION_RULES", "CATALOG_ROWS",
    "apply_refactoring", "catalog", "verify_rules",
]

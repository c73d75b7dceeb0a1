"""Refactoring toolkit for a Q# subset: parser, dependence analysis, refactorings, simulator."""

__version__ = "0.1.0"

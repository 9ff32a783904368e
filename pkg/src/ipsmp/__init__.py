"""Inductive predicate synthesis modulo programs: parsing, Boolean decision procedure and CHC encodings."""

__version__ = "0.1.0"

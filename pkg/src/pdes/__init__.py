"""Peer data exchange systems with trust relationships and SQL-style
nulls: null-aware query answering, a restricted chase, repairs,
recursive peer solutions, peer-consistent answers, an import-case
solver, and disjunctive logic programs capturing the solutions."""

__version__ = "0.1.0"

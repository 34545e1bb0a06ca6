"""Relational core: schemas, instances, the reserved null constant.

Constants are plain strings; the single reserved token ``null`` plays the
role of the SQL NULL. Atoms and instances are immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple

NULL = "null"

#: default bound on explored candidates in exhaustive searches
DEFAULT_CAP = 2 ** 22


class CapExceeded(RuntimeError):
    """Raised when a search would exceed the configured candidate cap."""

    def __init__(self, cap: int, needed: int):
        super().__init__("search space of %d candidates exceeds cap %d"
                         % (needed, cap))
        self.cap = cap
        self.needed = needed


def is_null(c: str) -> bool:
    return c == NULL


def _const_sort_key(c: str):
    # numbers before words, numerically; null last for readability
    try:
        return (0, int(c), "")
    except ValueError:
        return (2, 0, c) if c == NULL else (1, 0, c)


def const_leq(c1: str, c2: str) -> bool:
    """Total order used by <,<=,>,>= builtins: numeric when both sides are
    integers, lexicographic otherwise. Callers must exclude null."""
    try:
        return int(c1) <= int(c2)
    except ValueError:
        return c1 <= c2


class Atom(NamedTuple):
    pred: str
    args: tuple[str, ...]

    def __str__(self) -> str:
        return "%s(%s)" % (self.pred, ",".join(self.args))


def atom(pred: str, *args: str) -> Atom:
    return Atom(pred, tuple(str(a) for a in args))


def atom_sort_key(a: Atom):
    return (a.pred, tuple(_const_sort_key(c) for c in a.args))


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class Schema:
    """Predicate name -> arity, optionally with peer ownership."""

    arities: Mapping[str, int]
    owners: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "arities", dict(self.arities))
        object.__setattr__(self, "owners", dict(self.owners))

    def __contains__(self, pred: str) -> bool:
        return pred in self.arities

    def arity(self, pred: str) -> int:
        if pred not in self.arities:
            raise SchemaError("unknown predicate %r" % pred)
        return self.arities[pred]

    def preds(self) -> list[str]:
        return sorted(self.arities)

    def union(self, other: "Schema") -> "Schema":
        for p, k in other.arities.items():
            if p in self.arities and self.arities[p] != k:
                raise SchemaError("arity clash on %r" % p)
        return Schema({**self.arities, **other.arities},
                      {**self.owners, **other.owners})

    def restrict(self, preds: Iterable[str]) -> "Schema":
        preds = set(preds)
        unknown = preds - set(self.arities)
        if unknown:
            raise SchemaError("unknown predicates %s" % sorted(unknown))
        return Schema({p: k for p, k in self.arities.items() if p in preds},
                      {p: q for p, q in self.owners.items() if p in preds})


@dataclass(frozen=True)
class Instance:
    atoms: frozenset[Atom]
    schema: Schema

    def __post_init__(self):
        object.__setattr__(self, "atoms", frozenset(self.atoms))
        for a in self.atoms:
            if a.pred not in self.schema:
                raise SchemaError("atom %s not in schema" % (a,))
            if len(a.args) != self.schema.arity(a.pred):
                raise SchemaError("arity mismatch in %s" % (a,))

    def __contains__(self, a: Atom) -> bool:
        return a in self.atoms

    def __iter__(self) -> Iterator[Atom]:
        return iter(sorted(self.atoms, key=atom_sort_key))

    def __len__(self) -> int:
        return len(self.atoms)

    def with_atoms(self, extra: Iterable[Atom]) -> "Instance":
        return Instance(self.atoms | set(extra), self.schema)

    def without_atoms(self, gone: Iterable[Atom]) -> "Instance":
        return Instance(self.atoms - set(gone), self.schema)

    def by_pred(self, pred: str) -> list[Atom]:
        return sorted((a for a in self.atoms if a.pred == pred), key=atom_sort_key)


def instance(atoms: Iterable[Atom], schema: Schema) -> Instance:
    return Instance(frozenset(atoms), schema)


def active_domain(d: Instance) -> set[str]:
    return {c for a in d.atoms for c in a.args}


def restrict(d: Instance, preds: Iterable[str]) -> Instance:
    sub = d.schema.restrict(preds)
    return Instance(frozenset(a for a in d.atoms if a.pred in sub), sub)


def symmetric_difference(d1: Instance, d2: Instance) -> frozenset[Atom]:
    if set(d1.schema.arities) != set(d2.schema.arities):
        raise SchemaError("schema mismatch in symmetric difference")
    return d1.atoms ^ d2.atoms


def union(d1: Instance, d2: Instance) -> Instance:
    return Instance(d1.atoms | d2.atoms, d1.schema.union(d2.schema))

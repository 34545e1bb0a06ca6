"""Repair enumeration: the information order on tuples, the null-aware
closeness preorder bounded by the restricted chase, null-based repairs,
and the symmetric-difference (delta) alternative.

The enumerator is a violation-driven branch search: from the base
instance, every violated ground instantiation branches into deleting one
antecedent atom or inserting one consequent disjunct; satisfying leaves
are then filtered for global minimality under the active preorder.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Iterable

from .core import (DEFAULT_CAP, NULL, Atom, CapExceeded, Instance, Schema,
                   atom_sort_key)
from .lang import Constraint, relevant_vars
from .nullsem import (classical_holds, eval_builtin_classical, eval_builtin_n,
                      ground_atom, holds_instantiation, join, n_holds,
                      working_universe)
from .chase import SigmaSplit, r_chase, split_sigma

NULL_BASED = "null"
SYMMETRIC_DELTA = "delta"


# ----------------------------------------------------- information order

def info_leq(s1, s2) -> bool:
    """c provides at most the information of d iff c is null or c = d;
    pointwise on equal-length sequences."""
    if isinstance(s1, str):
        return s1 == NULL or s1 == s2
    if len(s1) != len(s2):
        raise ValueError("length mismatch in information order")
    return all(c == NULL or c == d for c, d in zip(s1, s2))


def info_lt(s1, s2) -> bool:
    return info_leq(s1, s2) and tuple(s1) != tuple(s2)


# ----------------------------------------------------- closeness preorder

def closer_leq(d1: Instance, d2: Instance, base: Instance,
               split: SigmaSplit, bound: frozenset[Atom] | None = None) -> bool:
    """d1 is at least as close to base as d2: either d2 escapes the chase
    bound, or every change in d1 is matched by an at-least-as-informative
    change in d2 that (when strictly more informative) is not itself a
    change of d1."""
    if bound is None:
        bound = r_chase(base, split).atoms
    if not d2.atoms <= bound:
        return True
    delta1 = base.atoms ^ d1.atoms
    delta2 = base.atoms ^ d2.atoms
    for a in delta1:
        if not any(b.pred == a.pred and len(b.args) == len(a.args)
                   and info_leq(a.args, b.args)
                   and (a.args == b.args or b not in delta1)
                   for b in delta2):
            return False
    return True


def closer_lt(d1: Instance, d2: Instance, base: Instance,
              split: SigmaSplit, bound: frozenset[Atom] | None = None) -> bool:
    if bound is None:
        bound = r_chase(base, split).atoms
    return closer_leq(d1, d2, base, split, bound) and \
        not closer_leq(d2, d1, base, split, bound)


def delta_leq(d1: Instance, d2: Instance, base: Instance) -> bool:
    return (base.atoms ^ d1.atoms) <= (base.atoms ^ d2.atoms)


def delta_lt(d1: Instance, d2: Instance, base: Instance) -> bool:
    return (base.atoms ^ d1.atoms) < (base.atoms ^ d2.atoms)


@dataclass(frozen=True)
class RepairSet:
    repairs: tuple[Instance, ...]
    base: Instance
    sigma: tuple[Constraint, ...]


def _sorted_instances(instances, base) -> tuple[Instance, ...]:
    def key(inst):
        delta = base.atoms ^ inst.atoms
        return (len(delta), tuple(sorted(map(atom_sort_key, inst.atoms))))
    return tuple(sorted(instances, key=key))


# ----------------------------------------------------- branch search core

def _violations(d: Instance, sigma, universe, classical: bool):
    for c in sigma:
        rel = relevant_vars(c)
        for s in join(d, c.body, {}):
            missing = [v for v in c.univ_vars if v not in s]
            for combo in product(sorted(universe), repeat=len(missing)):
                full = {**s, **dict(zip(missing, combo))}
                if not holds_instantiation(d, c, full, rel, classical):
                    yield c, full


def _insert_options(c: Constraint, s, universe, pool, classical: bool):
    """Atom sets that satisfy one consequent disjunct of the violated
    instantiation, with existentials ranging over the universe and every
    inserted atom drawn from the admissible pool (None = unrestricted)."""
    ev = eval_builtin_classical if classical else eval_builtin_n
    for disj in c.head:
        if not disj.atoms:
            continue  # builtin-only disjunct cannot be satisfied by inserts
        for combo in product(sorted(universe), repeat=len(disj.exist_vars)):
            full = {**s, **dict(zip(disj.exist_vars, combo))}
            if not all(ev(b, full) for b in disj.builtins):
                continue
            atoms = frozenset(ground_atom(a, full) for a in disj.atoms)
            if pool is not None and not atoms <= pool:
                continue
            yield atoms


def _branch_search(base: Instance, sigma, universe, pool,
                   frozen_preds: frozenset[str], classical: bool,
                   cap: int,
                   frozen_atoms: frozenset[Atom] = frozenset()) -> list[Instance]:
    """All satisfying instances reachable by single-violation moves."""
    schema = base.schema
    if pool is not None:
        arities = {a.pred: len(a.args) for a in pool}
        schema = schema.union(Schema(arities))
    start = frozenset(base.atoms)
    seen = {start}
    stack = [start]
    found: list[Instance] = []
    while stack:
        state = stack.pop()
        inst = Instance(state, schema)
        viol = next(iter(_violations(inst, sigma, universe, classical)), None)
        if viol is None:
            found.append(inst)
            continue
        c, s = viol
        nexts: list[frozenset[Atom]] = []
        for a in c.body:
            ga = ground_atom(a, s)
            if ga.pred not in frozen_preds and ga not in frozen_atoms \
                    and ga in state:
                nexts.append(state - {ga})
        for atoms in _insert_options(c, s, universe, pool, classical):
            if any(a.pred in frozen_preds for a in atoms - state):
                continue
            if atoms - state:
                nexts.append(state | atoms)
        for n in nexts:
            if n not in seen:
                if len(seen) >= cap:
                    raise CapExceeded(cap, len(seen) + 1)
                seen.add(n)
                stack.append(n)
    return found


def _minimal(candidates, beats: Callable) -> list[Instance]:
    out = []
    for r in candidates:
        if not any(c.atoms != r.atoms and beats(c, r) for c in candidates):
            out.append(r)
    # collapse duplicates
    uniq = {c.atoms: c for c in out}
    return list(uniq.values())


# --------------------------------------------------------- entry points

def null_repairs(base: Instance, sigma,
                 frozen_preds: Iterable[str] = (),
                 cap: int = DEFAULT_CAP,
                 frozen_atoms: Iterable[Atom] = ()) -> RepairSet:
    """Null-semantics repairs minimal under the chase-bounded closeness
    preorder; insertions are confined to restricted-chase atoms."""
    sigma = tuple(sigma)
    split = split_sigma(sigma)
    chased = r_chase(base, split)
    bound = chased.atoms
    universe = set()
    for c in sigma:
        universe |= working_universe(chased, c)
    universe |= {NULL}
    frozen = frozenset(frozen_preds)
    cands = _branch_search(Instance(base.atoms, chased.schema), sigma,
                           universe, bound, frozen, classical=False, cap=cap,
                           frozen_atoms=frozenset(frozen_atoms))
    minimal = _minimal(cands, lambda c, r: closer_lt(c, r, base, split, bound))
    return RepairSet(_sorted_instances(minimal, base), base, sigma)


def delta_repairs(base: Instance, sigma,
                  frozen_preds: Iterable[str] = (),
                  classical: bool = True,
                  universe: Iterable[str] | None = None,
                  cap: int = DEFAULT_CAP,
                  frozen_atoms: Iterable[Atom] = ()) -> RepairSet:
    """Repairs minimal under set inclusion of the symmetric difference;
    insertions range over the working universe."""
    sigma = tuple(sigma)
    uni = set(universe) if universe is not None else set()
    if universe is None:
        for c in sigma:
            uni |= working_universe(base, c)
    frozen = frozenset(frozen_preds)
    cands = _branch_search(base, sigma, uni, None, frozen,
                           classical=classical, cap=cap,
                           frozen_atoms=frozenset(frozen_atoms))
    minimal = _minimal(cands, lambda c, r: delta_lt(c, r, base))
    return RepairSet(_sorted_instances(minimal, base), base, sigma)


# ------------------------------------------------- exhaustive oracle

def exhaustive_null_repairs(base: Instance, sigma,
                            cap: int = DEFAULT_CAP) -> RepairSet:
    """Reference enumeration over every subset of the chase instance;
    exponential, for cross-checking only."""
    sigma = tuple(sigma)
    split = split_sigma(sigma)
    chased = r_chase(base, split)
    bound = sorted(chased.atoms, key=atom_sort_key)
    if 2 ** len(bound) > cap:
        raise CapExceeded(cap, 2 ** len(bound))
    sat = []
    for mask in range(2 ** len(bound)):
        atoms = frozenset(a for i, a in enumerate(bound) if mask >> i & 1)
        inst = Instance(atoms, chased.schema)
        if all(n_holds(inst, c) for c in sigma):
            sat.append(inst)
    minimal = _minimal(
        sat, lambda c, r: closer_lt(c, r, base, split, chased.atoms))
    return RepairSet(_sorted_instances(minimal, base), base, sigma)

"""Reduced ordered binary decision diagrams over a fixed variable universe.

Every base variable ``v`` exists in three copies: plain ``v`` (copy 0),
primed ``v'`` (copy 1) and double-primed ``v''`` (copy 2).  The three copies
of one base variable sit on adjacent levels, so the order is
``v0, v0', v0'', v1, v1', v1'', ...`` and it never changes.

Nodes live in a per-universe arena with structural hashing: two formulas are
logically equivalent exactly when they share the same node id.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

PLAIN, PRIMED, DOUBLE = 0, 1, 2
COPIES = (PLAIN, PRIMED, DOUBLE)
_SUFFIX = {PLAIN: "", PRIMED: "'", DOUBLE: "''"}

FALSE_ID, TRUE_ID = 0, 1


class UniverseMismatch(ValueError):
    """Raised when formulas from different universes are combined."""


class NonInjectiveRename(ValueError):
    """Raised when a renaming maps two variables onto the same target."""


class Universe:
    """A fixed, ordered set of base variables and the node arena for them."""

    def __init__(self, names: Sequence[str]):
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names in universe")
        self.names: Tuple[str, ...] = tuple(names)
        self._index: Dict[str, int] = {n: i for i, n in enumerate(self.names)}
        self._terminal_level = 3 * len(self.names)
        # arena: parallel lists, ids 0 and 1 are the terminals
        self._level: List[int] = [self._terminal_level, self._terminal_level]
        self._lo: List[int] = [-1, -1]
        self._hi: List[int] = [-1, -1]
        self._unique: Dict[Tuple[int, int, int], int] = {}
        self._and_cache: Dict[Tuple[int, int], int] = {}
        self._not_cache: Dict[int, int] = {}
        self._exists_cache: Dict[Tuple[int, frozenset], int] = {}
        self._rename_cache: Dict[Tuple[int, Tuple[Tuple[int, int], ...]], int] = {}
        self.false = Formula(self, FALSE_ID)
        self.true = Formula(self, TRUE_ID)

    # -- levels ---------------------------------------------------------
    def level(self, name: str, copy: int = PLAIN) -> int:
        try:
            return 3 * self._index[name] + copy
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    def levels(self, names: Iterable[str], copy: int = PLAIN) -> frozenset:
        return frozenset(self.level(n, copy) for n in names)

    def level_name(self, level: int) -> str:
        base, copy = divmod(level, 3)
        return self.names[base] + _SUFFIX[copy]

    def __len__(self) -> int:
        return len(self.names)

    # -- node construction ---------------------------------------------
    def _mk(self, level: int, lo: int, hi: int) -> int:
        if lo == hi:
            return lo
        key = (level, lo, hi)
        node = self._unique.get(key)
        if node is None:
            node = len(self._level)
            self._level.append(level)
            self._lo.append(lo)
            self._hi.append(hi)
            self._unique[key] = node
        return node

    def node_count(self) -> int:
        return len(self._level)

    def var(self, name: str, copy: int = PLAIN) -> "Formula":
        return Formula(self, self._mk(self.level(name, copy), FALSE_ID, TRUE_ID))

    def const(self, value: bool) -> "Formula":
        return self.true if value else self.false

    # -- core algorithms on node ids -------------------------------------
    def _not(self, a: int) -> int:
        if a <= TRUE_ID:
            return 1 - a
        r = self._not_cache.get(a)
        if r is None:
            r = self._mk(self._level[a], self._not(self._lo[a]), self._not(self._hi[a]))
            self._not_cache[a] = r
        return r

    def _and(self, a: int, b: int) -> int:
        if a == FALSE_ID or b == FALSE_ID:
            return FALSE_ID
        if a == TRUE_ID:
            return b
        if b == TRUE_ID or a == b:
            return a
        if a > b:
            a, b = b, a
        key = (a, b)
        r = self._and_cache.get(key)
        if r is not None:
            return r
        la, lb = self._level[a], self._level[b]
        top = min(la, lb)
        a0, a1 = (self._lo[a], self._hi[a]) if la == top else (a, a)
        b0, b1 = (self._lo[b], self._hi[b]) if lb == top else (b, b)
        r = self._mk(top, self._and(a0, b0), self._and(a1, b1))
        self._and_cache[key] = r
        return r

    def _or(self, a: int, b: int) -> int:
        return self._not(self._and(self._not(a), self._not(b)))

    def _exists(self, a: int, levels: frozenset) -> int:
        if a <= TRUE_ID:
            return a
        key = (a, levels)
        r = self._exists_cache.get(key)
        if r is not None:
            return r
        lvl = self._level[a]
        lo = self._exists(self._lo[a], levels)
        hi = self._exists(self._hi[a], levels)
        r = self._or(lo, hi) if lvl in levels else self._mk(lvl, lo, hi)
        self._exists_cache[key] = r
        return r

    def _ite_var(self, level: int, hi: int, lo: int) -> int:
        v = self._mk(level, FALSE_ID, TRUE_ID)
        return self._or(self._and(v, hi), self._and(self._not(v), lo))

    def _rename(self, a: int, mapping: Tuple[Tuple[int, int], ...], table: Mapping[int, int]) -> int:
        if a <= TRUE_ID:
            return a
        key = (a, mapping)
        r = self._rename_cache.get(key)
        if r is not None:
            return r
        lvl = self._level[a]
        lo = self._rename(self._lo[a], mapping, table)
        hi = self._rename(self._hi[a], mapping, table)
        r = self._ite_var(table.get(lvl, lvl), hi, lo)
        self._rename_cache[key] = r
        return r

    def _support(self, a: int) -> set:
        seen, out, stack = set(), set(), [a]
        while stack:
            n = stack.pop()
            if n <= TRUE_ID or n in seen:
                continue
            seen.add(n)
            out.add(self._level[n])
            stack.append(self._lo[n])
            stack.append(self._hi[n])
        return out

    # -- public helpers -------------------------------------------------
    def conj(self, formulas: Iterable["Formula"]) -> "Formula":
        out = self.true
        for f in formulas:
            out = out & f
        return out

    def disj(self, formulas: Iterable["Formula"]) -> "Formula":
        out = self.false
        for f in formulas:
            out = out | f
        return out

    def keep(self, names: Iterable[str], src: int = PLAIN, dst: int = PRIMED) -> "Formula":
        """Frame condition: each named variable keeps its value from ``src`` to ``dst`` copy."""
        out = self.true
        for n in sorted(set(names), key=self._index.__getitem__, reverse=True):
            a, b = self.var(n, src), self.var(n, dst)
            out = out & a.iff(b)
        return out

    def cube(self, assignment: Mapping[str, bool], copy: int = PLAIN) -> "Formula":
        node = TRUE_ID
        for n in sorted(assignment, key=self._index.__getitem__, reverse=True):
            lvl = self.level(n, copy)
            node = self._mk(lvl, FALSE_ID, node) if assignment[n] else self._mk(lvl, node, FALSE_ID)
        return Formula(self, node)


@dataclass(frozen=True, eq=False)
class Formula:
    """A canonical Boolean formula: a node id inside a universe."""

    universe: Universe
    node: int

    def _check(self, other: "Formula") -> None:
        if not isinstance(other, Formula):
            raise TypeError(f"expected Formula, got {type(other).__name__}")
        if other.universe is not self.universe:
            raise UniverseMismatch("formulas belong to different universes")

    # connectives
    def __and__(self, other: "Formula") -> "Formula":
        self._check(other)
        return Formula(self.universe, self.universe._and(self.node, other.node))

    def __or__(self, other: "Formula") -> "Formula":
        self._check(other)
        return Formula(self.universe, self.universe._or(self.node, other.node))

    def __invert__(self) -> "Formula":
        return Formula(self.universe, self.universe._not(self.node))

    def implies(self, other: "Formula") -> "Formula":
        return ~self | other

    def iff(self, other: "Formula") -> "Formula":
        return (self & other) | (~self & ~other)

    def __xor__(self, other: "Formula") -> "Formula":
        return ~self.iff(other)

    # identity is semantic thanks to canonicity
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Formula):
            return NotImplemented
        self._check(other)
        return self.node == other.node

    def __hash__(self) -> int:
        return hash((id(self.universe), self.node))

    def is_false(self) -> bool:
        return self.node == FALSE_ID

    def is_true(self) -> bool:
        return self.node == TRUE_ID

    def entails(self, other: "Formula") -> bool:
        """Validity of ``self => other``."""
        return (self & ~other).is_false()

    def support(self) -> List[Tuple[str, int]]:
        u = self.universe
        return [(u.names[l // 3], l % 3) for l in sorted(u._support(self.node))]

    def evaluate(self, env: Mapping[Tuple[str, int], bool]) -> bool:
        u, n = self.universe, self.node
        while n > TRUE_ID:
            lvl = u._level[n]
            key = (u.names[lvl // 3], lvl % 3)
            n = u._hi[n] if env.get(key, False) else u._lo[n]
        return n == TRUE_ID

    def __repr__(self) -> str:
        if self.is_false():
            return "Formula(false)"
        if self.is_true():
            return "Formula(true)"
        return f"Formula(node={self.node}, support={[self.universe.level_name(self.universe.level(n, c)) for n, c in self.support()]})"


# -- module-level operations ---------------------------------------------

def _same(f: Formula, g: Formula) -> None:
    f._check(g)


def and_(f: Formula, g: Formula) -> Formula:
    return f & g


def or_(f: Formula, g: Formula) -> Formula:
    return f | g


def not_(f: Formula) -> Formula:
    return ~f


def implies(f: Formula, g: Formula) -> Formula:
    return f.implies(g)


def is_false(f: Formula) -> bool:
    return f.is_false()


def equal(f: Formula, g: Formula) -> bool:
    return f == g


def elim(f: Formula, variables: Iterable[Tuple[str, int]]) -> Formula:
    """Existentially quantify the given ``(name, copy)`` variables out of ``f``."""
    u = f.universe
    levels = frozenset(u.level(n, c) for n, c in variables)
    if not levels:
        return f
    return Formula(u, u._exists(f.node, levels))


def rename(f: Formula, mapping: Mapping[Tuple[str, int], Tuple[str, int]]) -> Formula:
    """Simultaneous substitution of variables by variables."""
    u = f.universe
    table = {u.level(*src): u.level(*dst) for src, dst in mapping.items() if src != dst}
    if len(set(table.values())) != len(table):
        raise NonInjectiveRename("two variables renamed to the same target")
    if not table:
        return f
    key = tuple(sorted(table.items()))
    return Formula(u, u._rename(f.node, key, table))


def rename_copy(f: Formula, src: int, dst: int, names: Optional[Iterable[str]] = None) -> Formula:
    """Move every variable (or just ``names``) from copy ``src`` to copy ``dst``."""
    u = f.universe
    names = u.names if names is None else tuple(names)
    return rename(f, {(n, src): (n, dst) for n in names})


def shift_up(f: Formula) -> Formula:
    """The star idiom ``R[V'/V''][V/V']``: plain becomes primed, primed becomes double-primed."""
    u = f.universe
    mapping = {(n, PRIMED): (n, DOUBLE) for n in u.names}
    mapping.update({(n, PLAIN): (n, PRIMED) for n in u.names})
    return rename(f, mapping)


def keep(universe: Universe, names: Iterable[str], src: int = PLAIN, dst: int = PRIMED) -> Formula:
    return universe.keep(names, src, dst)


def copies(names: Iterable[str], copy: int) -> List[Tuple[str, int]]:
    return [(n, copy) for n in names]


def sat_assignments(f: Formula, variables: Sequence[Tuple[str, int]]) -> List[Dict[str, bool]]:
    """All satisfying assignments over ``variables`` in lexicographic order; for debugging and tests.

    ``f`` must not depend on variables outside the list.
    """
    names = [n + _SUFFIX[c] for n, c in variables]
    return [dict(zip(names, bits)) for bits in sorted(iter_models(f, variables))]


def iter_models(f: Formula, variables: Sequence[Tuple[str, int]]) -> Iterator[Tuple[bool, ...]]:
    """Enumerate satisfying assignments over ``variables`` by walking diagram paths.

    Yields value tuples aligned with ``variables``; variables off a path are
    expanded to both values.  ``f`` must not depend on unlisted variables.
    """
    u = f.universe
    order = [u.level(n, c) for n, c in variables]
    pos = {lvl: k for k, lvl in enumerate(order)}
    unlisted = u._support(f.node) - set(order)
    if unlisted:
        raise ValueError(f"formula depends on unlisted variables {sorted(u.level_name(l) for l in unlisted)}")

    def walk(node: int, partial: Dict[int, bool]) -> Iterator[Dict[int, bool]]:
        if node == FALSE_ID:
            return
        if node == TRUE_ID:
            yield partial
            return
        lvl = u._level[node]
        partial[lvl] = False
        yield from walk(u._lo[node], partial)
        partial[lvl] = True
        yield from walk(u._hi[node], partial)
        del partial[lvl]

    for partial in walk(f.node, {}):
        free = [lvl for lvl in order if lvl not in partial]
        fixed = [None] * len(order)
        for lvl, val in partial.items():
            fixed[pos[lvl]] = val
        for bits in product((False, True), repeat=len(free)):
            vals = list(fixed)
            for lvl, b in zip(free, bits):
                vals[pos[lvl]] = b
            yield tuple(vals)

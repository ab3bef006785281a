"""Finite relational structures: digraphs, posets, colored posets, linear orders.

Vertex ids are plain integers; creation order is integer order, and every
"earliest" or "least" choice elsewhere in the package is resolved by it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Mapping

OUT, IN, INC = "out", "in", "inc"
LT, GT = "lt", "gt"


@dataclass(frozen=True)
class Violation:
    axiom: str
    witness: tuple

    def to_dict(self):
        return {"axiom": self.axiom, "witness": list(self.witness)}


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def axioms(self) -> set[str]:
        return {v.axiom for v in self.violations}


@dataclass(frozen=True, eq=False)
class Digraph:
    """Oriented simple graph stored as successor sets; ``u -> v`` iff ``v in succ[u]``."""

    vertices: tuple[int, ...]
    succ: Mapping[int, frozenset[int]]
    provenance: Mapping[int, Any] = field(default_factory=dict)

    @classmethod
    def from_arcs(cls, vertices: Iterable[int], arcs: Iterable[tuple[int, int]], provenance=None):
        vs = tuple(sorted(set(vertices)))
        succ: dict[int, set[int]] = {v: set() for v in vs}
        for u, v in arcs:
            succ.setdefault(u, set()).add(v)
        return cls(vs, {u: frozenset(s) for u, s in succ.items()}, dict(provenance or {}))

    @cached_property
    def vertex_set(self) -> frozenset[int]:
        return frozenset(self.vertices)

    @cached_property
    def pred(self) -> dict[int, frozenset[int]]:
        pred: dict[int, set[int]] = {v: set() for v in self.vertices}
        for u, out in self.succ.items():
            for v in out:
                pred.setdefault(v, set()).add(u)
        return {v: frozenset(s) for v, s in pred.items()}

    def arcs(self):
        for u in self.vertices:
            for v in sorted(self.succ.get(u, ())):
                yield (u, v)

    def arc_count(self) -> int:
        return sum(len(s) for s in self.succ.values())

    def edge(self, u: int, v: int) -> str:
        if v in self.succ.get(u, ()):
            return OUT
        if u in self.succ.get(v, ()):
            return IN
        return INC

    relation = edge

    def __len__(self):
        return len(self.vertices)

    def __eq__(self, other):
        if not isinstance(other, Digraph) or type(other) is not type(self):
            return NotImplemented
        return self.vertices == other.vertices and set(self.arcs()) == set(other.arcs())

    def __repr__(self):
        return f"Digraph(|V|={len(self.vertices)}, |E|={self.arc_count()})"


@dataclass(frozen=True, eq=False)
class Poset:
    """Strict partial order; ``(u, v) in lt`` means ``u < v``. Incomparability is implicit."""

    vertices: tuple[int, ...]
    lt: frozenset[tuple[int, int]]
    provenance: Mapping[int, Any] = field(default_factory=dict)

    @classmethod
    def from_pairs(cls, vertices: Iterable[int], pairs: Iterable[tuple[int, int]], provenance=None):
        return cls(tuple(sorted(set(vertices))), frozenset(pairs), dict(provenance or {}))

    @cached_property
    def vertex_set(self) -> frozenset[int]:
        return frozenset(self.vertices)

    @cached_property
    def up(self) -> dict[int, frozenset[int]]:
        """Strict up-sets."""
        up: dict[int, set[int]] = {v: set() for v in self.vertices}
        for a, b in self.lt:
            up.setdefault(a, set()).add(b)
        return {v: frozenset(s) for v, s in up.items()}

    @cached_property
    def down(self) -> dict[int, frozenset[int]]:
        down: dict[int, set[int]] = {v: set() for v in self.vertices}
        for a, b in self.lt:
            down.setdefault(b, set()).add(a)
        return {v: frozenset(s) for v, s in down.items()}

    def less(self, u: int, v: int) -> bool:
        return (u, v) in self.lt

    def incomparable(self, u: int, v: int) -> bool:
        return u != v and (u, v) not in self.lt and (v, u) not in self.lt

    def relation(self, u: int, v: int) -> str:
        if (u, v) in self.lt:
            return LT
        if (v, u) in self.lt:
            return GT
        return INC

    def incomparable_pairs(self):
        """Explicit form of the implicit incomparability relation."""
        vs = self.vertices
        for i, u in enumerate(vs):
            for v in vs[i + 1:]:
                if self.incomparable(u, v):
                    yield (u, v)

    def covers(self):
        """Hasse-diagram edges."""
        for a, b in sorted(self.lt):
            if not (self.up[a] & self.down[b]):
                yield (a, b)

    def __len__(self):
        return len(self.vertices)

    def __eq__(self, other):
        if not isinstance(other, Poset):
            return NotImplemented
        return self.vertices == other.vertices and self.lt == other.lt

    def __repr__(self):
        return f"{type(self).__name__}(|V|={len(self.vertices)}, |<|={len(self.lt)})"


class LinearOrder(Poset):
    """A poset whose order is total on distinct pairs."""

    @classmethod
    def chain(cls, n: int, start: int = 0):
        vs = list(range(start, start + n))
        return cls.from_pairs(vs, [(a, b) for i, a in enumerate(vs) for b in vs[i + 1:]])

    def sequence(self) -> list[int]:
        return sorted(self.vertices, key=lambda v: len(self.down[v]))


@dataclass(frozen=True, eq=False)
class ColoredPoset:
    poset: Poset
    color: Mapping[int, int]

    @property
    def vertices(self):
        return self.poset.vertices

    @property
    def provenance(self):
        return self.poset.provenance

    def relation(self, u, v):
        return self.poset.relation(u, v)

    def __len__(self):
        return len(self.poset)

    def __eq__(self, other):
        if not isinstance(other, ColoredPoset):
            return NotImplemented
        return self.poset == other.poset and dict(self.color) == dict(other.color)

    def __repr__(self):
        return f"ColoredPoset(|V|={len(self)}, |<|={len(self.poset.lt)})"


def labels(s) -> dict[int, Any] | None:
    """Vertex labels that an automorphism must preserve (colors), or None."""
    if isinstance(s, ColoredPoset):
        return dict(s.color)
    return None


# ---------------------------------------------------------------- validation

def _validate_poset(p: Poset, out: list[Violation]):
    vs = p.vertex_set
    lt = p.lt
    for a, b in sorted(x for x in lt if x[0] not in vs or x[1] not in vs or x[0] == x[1]):
        if a not in vs or b not in vs:
            out.append(Violation("domain", (a, b)))
        if a == b:
            out.append(Violation("irreflexivity", (a,)))
    for a, b in sorted(x for x in lt if x[0] < x[1] and (x[1], x[0]) in lt):
        out.append(Violation("antisymmetry", (a, b)))
    # up-sets as bitmasks make the subset test cheap on large levels
    up = p.up
    bit = {v: 1 << i for i, v in enumerate(sorted(up))}
    mask = {a: sum(bit[b] for b in ups if b in bit) for a, ups in up.items()}
    empty = frozenset()
    for a in sorted(up):
        ma = mask[a] | bit[a]
        bad = [b for b in up[a] if b != a and mask.get(b, 0) & ~ma]
        for b in sorted(bad):
            for c in sorted(up.get(b, empty) - up[a] - {a}):
                out.append(Violation("transitivity", (a, b, c)))


def validate(s) -> ValidationReport:
    """Check the axioms of ``s``; violations come back as data, never raised."""
    out: list[Violation] = []
    if isinstance(s, ColoredPoset):
        _validate_poset(s.poset, out)
        for v in s.poset.vertices:
            if v not in s.color:
                out.append(Violation("color-total", (v,)))
            elif s.color[v] not in (0, 1, 2):
                out.append(Violation("color-range", (v, s.color[v])))
    elif isinstance(s, Poset):
        _validate_poset(s, out)
        if isinstance(s, LinearOrder):
            for u, v in s.incomparable_pairs():
                out.append(Violation("totality", (u, v)))
    elif isinstance(s, Digraph):
        vs = s.vertex_set
        for u, out_set in sorted(s.succ.items()):
            if u not in vs:
                out.append(Violation("domain", (u,)))
            for v in sorted(out_set):
                if v not in vs:
                    out.append(Violation("domain", (u, v)))
                elif u == v:
                    out.append(Violation("no-self-edges", (u,)))
                elif u < v and u in s.succ.get(v, ()):
                    out.append(Violation("trichotomy", (u, v)))
    else:
        raise TypeError(f"cannot validate {type(s).__name__}")
    return ValidationReport(tuple(out))


def is_linear(p: Poset) -> bool:
    return next(iter(p.incomparable_pairs()), None) is None


# ------------------------------------------------------------- automorphisms

def _check_perm(s, p: Mapping[int, int]):
    if set(p) != set(s.vertices):
        raise ValueError("permutation domain does not match the structure's vertices")
    if set(p.values()) != set(s.vertices):
        raise ValueError("map is not a bijection on the structure's vertices")


def relation_set(s) -> set[tuple]:
    """All stored relation tuples of ``s`` (arcs or strict order pairs)."""
    if isinstance(s, ColoredPoset):
        return set(s.poset.lt)
    if isinstance(s, Poset):
        return set(s.lt)
    return set(s.arcs())


def _preserves(s, p: Mapping[int, int]) -> bool:
    dom = set(p)
    img = {p[v] for v in dom}
    rels = relation_set(s)
    forward = {(p[a], p[b]) for a, b in rels if a in dom and b in dom}
    target = {(a, b) for a, b in rels if a in img and b in img}
    if forward != target:
        return False
    lab = labels(s)
    if lab is not None and any(lab[v] != lab[p[v]] for v in dom):
        return False
    return True


def is_automorphism(s, p: Mapping[int, int]) -> bool:
    _check_perm(s, p)
    return _preserves(s, p)


def is_partial_automorphism(s, p: Mapping[int, int]) -> bool:
    """True iff ``p`` is an injective map between vertex subsets preserving all relations."""
    if not set(p) <= set(s.vertices) or not set(p.values()) <= set(s.vertices):
        raise ValueError("partial map leaves the structure")
    if len(set(p.values())) != len(p):
        return False
    return _preserves(s, p)


def is_isomorphism(s, t, p: Mapping[int, int]) -> bool:
    if set(p) != set(s.vertices) or sorted(p.values()) != sorted(t.vertices):
        return False
    if len(set(p.values())) != len(p):
        return False
    if {(p[a], p[b]) for a, b in relation_set(s)} != relation_set(t):
        return False
    ls, lt = labels(s), labels(t)
    if (ls is None) != (lt is None):
        return False
    return ls is None or all(ls[v] == lt[p[v]] for v in p)


def inverse(p: Mapping[int, int]) -> dict[int, int]:
    return {v: k for k, v in p.items()}


def compose(f: Mapping[int, int], g: Mapping[int, int]) -> dict[int, int]:
    """``f ∘ g`` (apply ``g`` first) on the points where both are defined."""
    return {x: f[g[x]] for x in g if g[x] in f}


# ------------------------------------------------------------- substructures

def induced_substructure(s, subset: Iterable[int]):
    sub = set(subset)
    unknown = sub - set(s.vertices)
    if unknown:
        raise KeyError(f"unknown vertex ids: {sorted(unknown)}")
    prov = {v: s.provenance[v] for v in sub if v in s.provenance}
    if isinstance(s, ColoredPoset):
        return ColoredPoset(induced_substructure(s.poset, sub), {v: s.color[v] for v in sub})
    if isinstance(s, Poset):
        return type(s).from_pairs(sub, [(a, b) for a, b in s.lt if a in sub and b in sub], prov)
    if isinstance(s, Digraph):
        return Digraph(tuple(sorted(sub)), {u: s.succ.get(u, frozenset()) & sub for u in sub}, prov)
    raise TypeError(f"unsupported structure {type(s).__name__}")


def relabel(s, mapping: Mapping[int, int]):
    """Transport ``s`` along a bijection of vertex ids."""
    prov = {mapping[v]: x for v, x in s.provenance.items() if v in mapping}
    if isinstance(s, ColoredPoset):
        return ColoredPoset(relabel(s.poset, mapping), {mapping[v]: c for v, c in s.color.items()})
    if isinstance(s, Poset):
        return type(s).from_pairs((mapping[v] for v in s.vertices),
                                  ((mapping[a], mapping[b]) for a, b in s.lt), prov)
    return Digraph.from_arcs((mapping[v] for v in s.vertices),
                             ((mapping[a], mapping[b]) for a, b in s.arcs()), prov)


def poset_as_digraph(p: Poset) -> Digraph:
    """The digraph with ``u -> v`` iff ``u < v``; a tournament exactly when ``p`` is linear."""
    return Digraph.from_arcs(p.vertices, p.lt, p.provenance)


def disjoint_union(p: Poset, q: Poset) -> Poset:
    if p.vertex_set & q.vertex_set:
        raise ValueError("vertex sets overlap")
    return Poset.from_pairs(p.vertices + q.vertices, p.lt | q.lt, {**p.provenance, **q.provenance})

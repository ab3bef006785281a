"""Complete multipartite digraphs with the parity property.

A one-point type over a parameter set is a mapping ``param -> rel`` where rel
is the relation of the fresh point ``x`` to the parameter: ``"out"`` for
``x -> s``, ``"in"`` for ``s -> x``, ``"inc"`` for ``x ⊥ s``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

from .core import IN, INC, OUT, Digraph


class NotMultipartiteError(ValueError):
    def __init__(self, msg, witness=()):
        super().__init__(msg)
        self.witness = tuple(witness)


class ParityError(ValueError):
    pass


class InadmissibleTypeError(ValueError):
    pass


@dataclass(frozen=True)
class Antichain:
    members: tuple[int, ...]

    @property
    def earliest(self) -> int:
        return self.members[0]

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, v):
        return v in self.members


def _incomparable_sets(g: Digraph) -> dict[int, frozenset[int]]:
    vs = g.vertex_set
    pred = g.pred
    return {v: vs - g.succ.get(v, frozenset()) - pred.get(v, frozenset()) - {v} for v in g.vertices}


def antichain_partition(g: Digraph) -> list[Antichain]:
    """The ⊥-classes ordered by earliest member; raises if ⊥ is not an equivalence."""
    inc = _incomparable_sets(g)
    seen: set[int] = set()
    parts = []
    for v in g.vertices:
        if v in seen:
            continue
        cls = inc[v] | {v}
        for u in inc[v]:
            if inc[u] | {u} != cls:
                other = next(iter((inc[u] | {u}) ^ cls))
                if other in inc[u]:
                    raise NotMultipartiteError("⊥ is not transitive", (v, u, other))
                raise NotMultipartiteError("⊥ is not transitive", (u, v, other))
        seen |= cls
        parts.append(Antichain(tuple(sorted(cls))))
    return parts


@dataclass(frozen=True, eq=False)
class MultipartiteDigraph:
    digraph: Digraph
    antichains: tuple[Antichain, ...] = field(default=())

    @classmethod
    def from_digraph(cls, g: Digraph) -> MultipartiteDigraph:
        return cls(g, tuple(antichain_partition(g)))

    @cached_property
    def antichain_of(self) -> dict[int, Antichain]:
        return {v: a for a in self.antichains for v in a.members}

    @property
    def vertices(self):
        return self.digraph.vertices

    @property
    def provenance(self):
        return self.digraph.provenance

    def edge(self, u, v):
        return self.digraph.edge(u, v)

    relation = edge

    def __len__(self):
        return len(self.digraph)

    def __eq__(self, other):
        if not isinstance(other, MultipartiteDigraph):
            return NotImplemented
        return self.digraph == other.digraph

    def __repr__(self):
        return f"MultipartiteDigraph(|V|={len(self)}, antichains={len(self.antichains)})"


def as_multipartite(g) -> MultipartiteDigraph:
    return g if isinstance(g, MultipartiteDigraph) else MultipartiteDigraph.from_digraph(g)


def maximal_antichains(g) -> tuple[Antichain, ...]:
    return as_multipartite(g).antichains


@dataclass(frozen=True)
class RSDecomposition:
    A: int
    B: int
    R: frozenset[int]
    S: frozenset[int]

    def predicts_out(self, x: int, y: int) -> bool:
        """Whether ``x -> y`` for ``x`` in A and ``y`` in B."""
        return (x in self.R) == (y in self.S)

    def complemented(self, A: Iterable[int], B: Iterable[int]) -> RSDecomposition:
        return RSDecomposition(self.A, self.B, frozenset(A) - self.R, frozenset(B) - self.S)

    def to_dict(self):
        return {"A": self.A, "B": self.B, "R": sorted(self.R), "S": sorted(self.S)}


def _rows_against(g: Digraph, A: Antichain, B: Antichain):
    bset = frozenset(B.members)
    return {x: g.succ.get(x, frozenset()) & bset for x in A.members}, bset


def parity_violations(g, limit: int | None = None) -> list[tuple[int, int, int, int]]:
    """Quadruples ``(a, a', b, b')`` spanning an odd number of A-to-B edges."""
    mg = as_multipartite(g)
    out = []
    big = [a for a in mg.antichains if len(a) >= 2]
    for A in big:
        for B in big:
            if A is B:
                continue
            rows, bset = _rows_against(mg.digraph, A, B)
            r0 = rows[A.earliest]
            for x in A.members[1:]:
                diff = rows[x] ^ r0
                if diff and diff != bset:
                    # an odd quadruple: one column inside diff, one outside it
                    b1 = min(diff)
                    b2 = min(bset - diff)
                    out.append((A.earliest, x, b1, b2))
                    if limit is not None and len(out) >= limit:
                        return out
    return out


def has_parity_property(g) -> bool:
    return not parity_violations(g, limit=1)


def rs_decomposition(g, A, B) -> RSDecomposition:
    mg = as_multipartite(g)
    A = _as_antichain(mg, A)
    B = _as_antichain(mg, B)
    if A == B:
        raise ValueError("rs_decomposition needs two distinct antichains")
    rows, bset = _rows_against(mg.digraph, A, B)
    if not any(rows.values()) and not any(mg.digraph.succ.get(y, frozenset()) & set(A) for y in B):
        raise ValueError("antichains are not joined by edges; input is not multipartite")
    S = rows[A.earliest]
    comp = bset - S
    R = set()
    for x in A.members:
        if rows[x] == S:
            R.add(x)
        elif rows[x] != comp:
            raise ParityError(f"vertex {x} has no consistent side against antichain {B.earliest}")
    return RSDecomposition(A.earliest, B.earliest, frozenset(R), S)


def _as_antichain(mg: MultipartiteDigraph, A) -> Antichain:
    if isinstance(A, Antichain):
        return A
    if isinstance(A, int):
        return mg.antichain_of[A]
    members = set(A)
    found = mg.antichain_of[min(members)]
    if set(found.members) != members:
        raise ValueError(f"{sorted(members)} is not a maximal antichain")
    return found


# ------------------------------------------------------------ one-point types

@dataclass(frozen=True)
class TypeVerdict:
    admissible: bool
    klass: int | None = None
    antichain: int | None = None
    flips: Mapping[int, bool] = field(default_factory=dict)
    reason: str = ""

    def __bool__(self):
        return self.admissible


def classify_mp_type(g, t: Mapping[int, str]) -> TypeVerdict:
    """Decide whether a fresh point of type ``t`` keeps the graph in the class.

    For Class 1 types, ``antichain`` is the earliest member of the antichain
    the point joins and ``flips[B]`` records whether it must sit on the side
    opposite to that earliest member against antichain ``B``.
    """
    mg = as_multipartite(g)
    unknown = set(t) - mg.digraph.vertex_set
    if unknown:
        raise KeyError(f"parameters outside the graph: {sorted(unknown)}")
    for s, r in t.items():
        if r not in (OUT, IN, INC):
            raise ValueError(f"unknown relation {r!r}")
    inc = [s for s, r in t.items() if r == INC]
    if not inc:
        return TypeVerdict(True, 2)
    homes = {mg.antichain_of[s].earliest for s in inc}
    if len(homes) > 1:
        return TypeVerdict(False, reason="⊥-parameters in different antichains")
    A = mg.antichain_of[inc[0]]
    e = A.earliest
    e_out = mg.digraph.succ.get(e, frozenset())
    flips: dict[int, bool] = {}
    for s in sorted(t):
        r = t[s]
        home = mg.antichain_of[s]
        if home is A:
            if r != INC:
                return TypeVerdict(False, reason=f"x must be ⊥ to {s} in its own antichain")
            continue
        if r == INC:
            return TypeVerdict(False, reason="⊥-parameters in different antichains")
        flip = (r == OUT) != (s in e_out)
        prev = flips.setdefault(home.earliest, flip)
        if prev != flip:
            return TypeVerdict(False, reason=f"type contradicts the parity property against antichain {home.earliest}")
    return TypeVerdict(True, 1, e, flips)


def is_admissible_mp_type(g, t: Mapping[int, str]) -> bool:
    return classify_mp_type(g, t).admissible


class MultipartiteBuilder:
    """Mutable accumulator used while growing a graph point by point."""

    def __init__(self, g: MultipartiteDigraph):
        self.succ: dict[int, set[int]] = {v: set(s) for v, s in g.digraph.succ.items()}
        for v in g.vertices:
            self.succ.setdefault(v, set())
        self.home: dict[int, int] = {v: a.earliest for a in g.antichains for v in a.members}
        self.members: dict[int, list[int]] = {a.earliest: list(a.members) for a in g.antichains}
        self.provenance = dict(g.provenance)

    def add_arc(self, u: int, v: int):
        self.succ[u].add(v)

    def out(self, u: int, v: int) -> bool:
        return v in self.succ[u]

    def add_class1(self, x: int, antichain: int, flips: Mapping[int, bool]):
        """Put ``x`` into ``antichain``, copying the earliest member's edges up to per-antichain flips."""
        e = antichain
        self.succ[x] = set()
        e_out = self.succ[e]
        for b_home, members in self.members.items():
            if b_home == e:
                continue
            flip = flips.get(b_home, False)
            for y in members:
                if (y in e_out) != flip:
                    self.succ[x].add(y)
                else:
                    self.succ[y].add(x)
        self.home[x] = e
        self.members[e].append(x)

    def add_class2(self, x: int, t: Mapping[int, str], among: Iterable[int]):
        """New singleton antichain; ``x -> b`` for ``b`` in ``among`` unless ``t`` forces ``b -> x``."""
        self.succ[x] = set()
        for b in among:
            if t.get(b) == IN:
                self.succ[b].add(x)
            else:
                self.succ[x].add(b)
        self.home[x] = x
        self.members[x] = [x]

    def freeze(self) -> MultipartiteDigraph:
        vs = tuple(sorted(self.succ))
        g = Digraph(vs, {v: frozenset(s) for v, s in self.succ.items()}, dict(self.provenance))
        parts = tuple(Antichain(tuple(sorted(m))) for _, m in sorted(self.members.items()))
        return MultipartiteDigraph(g, parts)


def realize_mp_type(g, t: Mapping[int, str], vertex: int | None = None, provenance=None) -> MultipartiteDigraph:
    mg = as_multipartite(g)
    verdict = classify_mp_type(mg, t)
    if not verdict:
        raise InadmissibleTypeError(verdict.reason)
    x = max(mg.vertices, default=-1) + 1 if vertex is None else vertex
    if x in mg.digraph.vertex_set:
        raise ValueError(f"vertex id {x} already in use")
    b = MultipartiteBuilder(mg)
    if verdict.klass == 1:
        b.add_class1(x, verdict.antichain, verdict.flips)
    else:
        b.add_class2(x, t, mg.vertices)
    if provenance is not None:
        b.provenance[x] = provenance
    return b.freeze()


def parity_graph_from_rs(parts: list[list[int]], sides: Mapping[tuple[int, int], tuple[set, set]]) -> Digraph:
    """Build a parity graph from antichains and, per ordered pair (i, j) with i < j, data (R, S)."""
    arcs = []
    for i, A in enumerate(parts):
        for j, B in enumerate(parts):
            if i >= j:
                continue
            R, S = sides[(i, j)]
            for x in A:
                for y in B:
                    if (x in R) == (y in S):
                        arcs.append((x, y))
                    else:
                        arcs.append((y, x))
    return Digraph.from_arcs([v for p in parts for v in p], arcs)

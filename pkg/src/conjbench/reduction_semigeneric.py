"""Staged parity-multipartite truncations whose automorphism fixes exactly a linear order.

Witnesses come in triples ``a, b, c`` per admissible one-point type
``(S, tau)``; the automorphism sends ``a(S, tau)`` to ``b`` of the pushed type
``(phi S, tau ∘ phi^-1)``, then ``b`` to ``c`` and ``c`` to ``a``. Base points
are the only fixed points.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from math import factorial, prod
from typing import Mapping

from .core import IN, INC, OUT, Digraph, LinearOrder, induced_substructure, is_automorphism, validate
from .multipartite import (MultipartiteBuilder, MultipartiteDigraph, antichain_partition,
                           as_multipartite, classify_mp_type, has_parity_property)

log = logging.getLogger(__name__)

_CODE = {OUT: 0, IN: 1, INC: 2}
RELS = (OUT, IN, INC)
LITERAL, EQUIVARIANT, AUTO = "literal", "equivariant", "auto"


class ConstructionError(AssertionError):
    pass


def type_index(tau: tuple[str, ...]) -> int:
    """Canonical enumeration index: all arity-n types precede arity n+1, base-3 within."""
    n = len(tau)
    return (3 ** n - 1) // 2 + sum(_CODE[r] * 3 ** j for j, r in enumerate(tau))


@dataclass(frozen=True)
class WitnessType:
    params: tuple[int, ...]
    tau: tuple[str, ...]
    klass: int
    antichain: int | None = None
    flips: tuple[tuple[int, bool], ...] = ()

    @property
    def k(self) -> int:
        return type_index(self.tau)

    @property
    def key(self) -> tuple:
        return (self.k, self.params)

    @property
    def sigma(self) -> tuple:
        return (self.params, self.tau)

    def as_map(self) -> dict[int, str]:
        return dict(zip(self.params, self.tau))


def push_type(sigma: tuple, phi: Mapping[int, int]) -> tuple:
    params, tau = sigma
    pairs = sorted((phi[s], r) for s, r in zip(params, tau))
    return (tuple(p for p, _ in pairs), tuple(r for _, r in pairs))


@dataclass(frozen=True, eq=False)
class SemigenericStage:
    base: LinearOrder
    levels: tuple[MultipartiteDigraph, ...]
    phi: Mapping[int, int]
    # vertex -> ("base", l) | ("witness", stage, params, tau, position, klass)
    provenance: Mapping[int, tuple]
    witnesses: Mapping[tuple, tuple[int, int, int]] = field(default_factory=dict)
    events: tuple[dict, ...] = ()

    @property
    def graph(self) -> MultipartiteDigraph:
        return self.levels[-1]

    @property
    def stage(self) -> int:
        return len(self.levels) - 1

    @property
    def order(self) -> tuple[int, ...]:
        """The running linear order; vertex ids are issued in this order."""
        return self.graph.vertices

    def klass(self, v: int) -> int | None:
        p = self.provenance[v]
        return p[5] if p[0] == "witness" else None


def phi_orbits(phi: Mapping[int, int], vertices) -> list[list[int]]:
    seen, out = set(), []
    for v in sorted(vertices):
        if v in seen:
            continue
        orbit = [v]
        seen.add(v)
        w = phi[v]
        while w != v:
            orbit.append(w)
            seen.add(w)
            w = phi[w]
        out.append(orbit)
    return out


def parameter_pool(stage: SemigenericStage, pool_limit: int | None) -> list[int]:
    """Union of whole φ-orbits taken in order of earliest member, up to ``pool_limit`` points."""
    vs = stage.graph.vertices
    if pool_limit is None or stage.stage == 0:
        return list(vs)
    pool: list[int] = []
    for orbit in phi_orbits(stage.phi, vs):
        if len(pool) + len(orbit) > pool_limit:
            break
        pool.extend(orbit)
    return sorted(pool)


def enumerate_types(stage: SemigenericStage, max_params: int, pool_limit: int | None = None,
                    pool=None) -> list[WitnessType]:
    g = stage.graph
    pool = sorted(pool) if pool is not None else parameter_pool(stage, pool_limit)
    out = []
    for n in range(max_params + 1):
        for S in itertools.combinations(pool, n):
            for tau in itertools.product(RELS, repeat=n):
                verdict = classify_mp_type(g, dict(zip(S, tau)))
                if verdict:
                    out.append(WitnessType(S, tau, verdict.klass, verdict.antichain,
                                           tuple(sorted(verdict.flips.items()))))
    out.sort(key=lambda w: w.key)
    return out


def _cross_orientation(class2: list[WitnessType], phi: Mapping[int, int], rule: str):
    """Yield (earlier, later) witness-type pairs; every vertex of ``earlier`` points to ``later``."""
    if rule == LITERAL:
        ordered = sorted(class2, key=lambda w: w.key)
        for i, w1 in enumerate(ordered):
            for w2 in ordered[i + 1:]:
                yield w1, w2
        return
    by_sigma = {w.sigma: w for w in class2}
    orbit_of: dict[tuple, tuple[int, int, int]] = {}
    orbits = []
    for w in sorted(class2, key=lambda w: w.key):
        if w.sigma in orbit_of:
            continue
        cyc = [w.sigma]
        nxt = push_type(w.sigma, phi)
        while nxt != w.sigma:
            cyc.append(nxt)
            nxt = push_type(nxt, phi)
        if len(cyc) % 2 == 0:
            raise ConstructionError(f"witness orbit of even length {len(cyc)}: no invariant tournament")
        for pos, sg in enumerate(cyc):
            orbit_of[sg] = (len(orbits), pos, len(cyc))
        orbits.append(cyc)
    for w1, w2 in itertools.combinations(class2, 2):
        o1, p1, m = orbit_of[w1.sigma]
        o2, p2, _ = orbit_of[w2.sigma]
        if o1 != o2:
            yield (w1, w2) if o1 < o2 else (w2, w1)
        elif 1 <= (p2 - p1) % m <= (m - 1) // 2:
            yield w1, w2
        else:
            yield w2, w1


def _assemble(stage: SemigenericStage, types: list[WitnessType], rule: str):
    g = stage.graph
    n = stage.stage + 1
    nxt = max(g.vertices, default=-1) + 1
    triples: dict[tuple, tuple[int, int, int]] = {}
    for w in types:
        triples[w.sigma] = (nxt, nxt + 1, nxt + 2)
        nxt += 3
    b = MultipartiteBuilder(g)
    class1 = [w for w in types if w.klass == 1]
    class2 = [w for w in types if w.klass == 2]
    for w in class1:
        for pos, x in zip("abc", triples[w.sigma]):
            b.add_class1(x, w.antichain, dict(w.flips))
            b.provenance[x] = ("witness", n, w.params, w.tau, pos, 1)
    targets = list(g.vertices) + [x for w in class1 for x in triples[w.sigma]]
    for w in class2:
        t = w.as_map()
        xa, xb, xc = triples[w.sigma]
        for pos, x in zip("abc", (xa, xb, xc)):
            b.add_class2(x, t, targets)
            b.provenance[x] = ("witness", n, w.params, w.tau, pos, 2)
        b.add_arc(xa, xb)
        b.add_arc(xb, xc)
        b.add_arc(xc, xa)
    for w1, w2 in _cross_orientation(class2, stage.phi, rule):
        for x in triples[w1.sigma]:
            for y in triples[w2.sigma]:
                b.add_arc(x, y)
    phi = dict(stage.phi)
    for w in types:
        xa, xb, xc = triples[w.sigma]
        ya, yb, yc = triples[push_type(w.sigma, stage.phi)]
        phi[xa], phi[xb], phi[xc] = yb, yc, ya
    return b.freeze(), phi, triples


def _first_broken_arc(g: Digraph, phi: Mapping[int, int]):
    for u, v in g.arcs():
        if phi[v] not in g.succ[phi[u]]:
            return (u, v)
    return None


def extend_stage_sg(stage: SemigenericStage, max_params: int, pool_limit: int | None = 8,
                    cross_rule: str = AUTO) -> SemigenericStage:
    if cross_rule not in (LITERAL, EQUIVARIANT, AUTO):
        raise ValueError(f"unknown cross-triple rule {cross_rule!r}")
    types = enumerate_types(stage, max_params, pool_limit)
    sigmas = {w.sigma for w in types}
    for w in types:
        if push_type(w.sigma, stage.phi) not in sigmas:
            raise ConstructionError(f"type pool is not φ-invariant at {w.sigma}")
    events = list(stage.events)
    rule = LITERAL if cross_rule == AUTO else cross_rule
    graph, phi, triples = _assemble(stage, types, rule)
    broken = _first_broken_arc(graph.digraph, phi)
    if broken is not None and cross_rule == AUTO:
        u, v = broken
        event = {"stage": stage.stage + 1, "rule": LITERAL, "automorphism": False,
                 "counterexample": {"arc": [u, v], "image": [phi[u], phi[v]]},
                 "fallback": EQUIVARIANT}
        log.info("literal cross-triple rule breaks φ at stage %d on arc %s; using the equivariant rule",
                 stage.stage + 1, broken)
        graph, phi, triples = _assemble(stage, types, EQUIVARIANT)
        rule = EQUIVARIANT
        broken = _first_broken_arc(graph.digraph, phi)
        event["fallback_automorphism"] = broken is None
        events.append(event)
    else:
        events.append({"stage": stage.stage + 1, "rule": rule, "automorphism": broken is None})
    if broken is not None:
        raise ConstructionError(f"φ is not an automorphism at stage {stage.stage + 1}: arc {broken}")
    prov = dict(graph.provenance)
    witnesses = dict(stage.witnesses)
    for sg, tr in triples.items():
        witnesses[(stage.stage + 1,) + sg] = tr
    return SemigenericStage(stage.base, stage.levels + (graph,), phi, prov, witnesses, tuple(events))


def stage_zero(L: LinearOrder) -> SemigenericStage:
    report = validate(LinearOrder(L.vertices, L.lt))
    if not report.ok:
        raise ConstructionError(f"input is not a linear order: {report.violations[0]}")
    seq = LinearOrder(L.vertices, L.lt).sequence()
    ids = {l: i for i, l in enumerate(seq)}
    arcs = [(ids[a], ids[b]) for a, b in L.lt]
    prov = {ids[l]: ("base", l) for l in seq}
    g = Digraph.from_arcs(range(len(seq)), arcs, prov)
    mg = MultipartiteDigraph.from_digraph(g)
    return SemigenericStage(L, (mg,), {v: v for v in g.vertices}, prov)


def build_reduction_sg(L: LinearOrder, n_stages: int, max_params: int, pool_limit: int | None = 8,
                       cross_rule: str = AUTO) -> SemigenericStage:
    s = stage_zero(L)
    for _ in range(n_stages):
        s = extend_stage_sg(s, max_params, pool_limit, cross_rule)
    return s


def fixed_points_recover(s: SemigenericStage) -> LinearOrder:
    fixed = [v for v in s.graph.vertices if s.phi[v] == v]
    sub = induced_substructure(s.graph.digraph, fixed)
    lo = LinearOrder.from_pairs(fixed, sub.arcs(), sub.provenance)
    report = validate(lo)
    if not report.ok:
        raise ConstructionError(f"fixed points are not a linear order: {report.violations[0]}")
    return lo


def check_stage(s: SemigenericStage) -> dict:
    """Every structural invariant of the build, per level."""
    levels = []
    for n, g in enumerate(s.levels):
        vs = set(g.vertices)
        phi_n = {v: s.phi[v] for v in vs}
        parts = antichain_partition(g.digraph)
        row = {
            "stage": n,
            "vertices": len(vs),
            "valid": validate(g.digraph).ok,
            "antichains_match": [a.members for a in parts] == [a.members for a in g.antichains],
            "parity": has_parity_property(g),
            "phi_automorphism": set(phi_n.values()) == vs and is_automorphism(g.digraph, phi_n),
            "restricts": n == 0 or induced_substructure(g.digraph, s.levels[n - 1].vertices)
            == s.levels[n - 1].digraph,
        }
        levels.append(row)
    home = {v: a.earliest for a in s.graph.antichains for v in a.members}
    class_ok = True
    for v, p in s.provenance.items():
        if p[0] != "witness":
            continue
        if p[5] == 2 and home[v] != v:
            class_ok = False
        if p[5] == 1 and not any(home[q] == home[v] for q in p[2]):
            class_ok = False
    base_fixed = all(s.phi[v] == v for v, p in s.provenance.items() if p[0] == "base")
    return {"levels": levels, "class_discipline": class_ok, "base_fixed": base_fixed,
            "ok": class_ok and base_fixed and all(all(r[k] for k in r if k not in ("stage", "vertices"))
                                                  for r in levels)}


# ------------------------------------------------------------ rigidity search

def antichain_fixing_search(g, limit: int = 200_000) -> list[dict[int, int]]:
    """All automorphisms fixing every maximal antichain setwise."""
    mg = as_multipartite(g)
    size = prod(factorial(len(a)) for a in mg.antichains)
    if size > limit:
        raise ValueError(f"{size} candidate maps exceed the search limit {limit}")
    found = []
    for perms in itertools.product(*(itertools.permutations(a.members) for a in mg.antichains)):
        p = {v: w for a, perm in zip(mg.antichains, perms) for v, w in zip(a.members, perm)}
        if is_automorphism(mg.digraph, p):
            found.append(p)
    return found


def add_separating_witness(g, inside, outside, vertex: int | None = None) -> MultipartiteDigraph:
    """New singleton antichain ``w`` with ``inside -> w -> outside`` and ``w ->`` everything else."""
    mg = as_multipartite(g)
    inside, outside = set(inside), set(outside)
    if inside & outside:
        raise ValueError("inside and outside overlap")
    w = max(mg.vertices, default=-1) + 1 if vertex is None else vertex
    b = MultipartiteBuilder(mg)
    b.add_class2(w, {v: IN for v in inside}, mg.vertices)
    b.provenance[w] = ("separator", tuple(sorted(inside)), tuple(sorted(outside)))
    return b.freeze()


def separation_for(g, phi: Mapping[int, int]) -> tuple[int, set[int], set[int]]:
    """Pick the proof case that kills ``phi``; returns (case, inside, outside) within one antichain."""
    mg = as_multipartite(g)
    a = min(v for v in mg.vertices if phi[v] != v)
    A = set(mg.antichain_of[a].members)
    pa, ppa = phi[a], phi[phi[a]]
    if ppa != a:
        inside, outside, case = {a, pa}, {ppa}, 1
    else:
        movers = [x for x in sorted(A - {a, pa}) if phi[x] != x]
        fixed = [x for x in sorted(A - {a, pa}) if phi[x] == x]
        if movers:
            a2 = movers[0]
            inside, outside, case = {a, pa, a2}, {phi[a2]}, 2
        elif fixed:
            inside, outside, case = {a}, {pa, fixed[0]}, 3
        else:
            inside, outside, case = {a}, {pa}, 3
    rest = A - inside - outside
    return case, inside | rest, outside


def saturate_separations(g, max_rounds: int = 20) -> tuple[MultipartiteDigraph, list[int], list[int]]:
    """Add separating witnesses until only the identity fixes every antichain.

    Returns the final graph, the search counts after each round (starting with
    the input), and the case used in each round.
    """
    mg = as_multipartite(g)
    counts, cases = [], []
    for _ in range(max_rounds):
        autos = antichain_fixing_search(mg)
        counts.append(len(autos))
        nontrivial = [p for p in autos if any(k != v for k, v in p.items())]
        if not nontrivial:
            return mg, counts, cases
        case, inside, outside = separation_for(mg, nontrivial[0])
        cases.append(case)
        mg = add_separating_witness(mg, inside, outside)
    raise ConstructionError("separation did not converge")


def bowtie() -> MultipartiteDigraph:
    """The four-vertex graph R -> S -> R^c -> S^c -> R with ``R={0}, R^c={1}, S={2}, S^c={3}``."""
    g = Digraph.from_arcs(range(4), [(0, 2), (2, 1), (1, 3), (3, 0)],
                          {0: "r", 1: "r'", 2: "s", 3: "s'"})
    return MultipartiteDigraph.from_digraph(g)

"""Staged construction of a generic-poset truncation with a shift automorphism.

Stage 0 is ``p_copies`` mutually incomparable copies of the input poset next to
``z_chains`` chains indexed by ``[-z_window, z_window]``; the automorphism
shifts copies and chain points by one. Every later point realizes a constraint
that sits strictly between two consecutive points of some chain, which is what
makes its orbit a chain rather than an antichain.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

from .core import (ColoredPoset, Digraph, Poset, induced_substructure, inverse, is_isomorphism,
                   validate)
from .poset_amalgamation import (AmalgamationError, PosetConstraint, is_admissible_constraint,
                                 realize_constraints)
from .shuffle import shuffle3

ANTICHAIN, CHAIN = "antichain", "chain"
_REL_CODE = {"lt": 0, "gt": 1, "inc": 2}


class TruncationError(ValueError):
    pass


class OrbitError(AssertionError):
    pass


@dataclass(frozen=True)
class TruncationParams:
    n_stages: int = 2
    p_copies: int = 3
    z_chains: int = 3
    z_window: int = 3
    max_params: int = 3
    # extra (non-chain) parameters at stage >= 2 come from the previous stage's
    # realizations attached to the first `pool_pairs` consecutive chain pairs
    pool_pairs: int = 2

    def check(self):
        for name in ("n_stages", "p_copies", "z_chains", "z_window", "max_params", "pool_pairs"):
            if getattr(self, name) < 1:
                raise TruncationError(f"{name} must be positive")
        if self.z_window < 2:
            raise TruncationError("z_window must be at least 2")
        if self.max_params < 2:
            raise TruncationError("max_params must be at least 2 to hold a consecutive chain pair")
        return self

    def to_dict(self):
        return dict(self.__dict__)


@dataclass(frozen=True, eq=False)
class StagedPoset:
    base: Poset
    params: TruncationParams
    levels: tuple[Poset, ...]
    phi: Mapping[int, int]
    # vertex -> ("p_copy", i, p) | ("z_point", i, m) | ("realization", stage, key, color)
    provenance: Mapping[int, tuple]
    # (stage, constraint key, color) -> vertex
    realizations: Mapping[tuple, int] = field(default_factory=dict)
    constraints: Mapping[int, PosetConstraint] = field(default_factory=dict)
    star: Mapping[int, tuple[int, int]] = field(default_factory=dict)
    colors: Mapping[int, int] | None = None

    @property
    def poset(self) -> Poset:
        return self.levels[-1]

    @property
    def stage(self) -> int:
        return len(self.levels) - 1

    def structure(self):
        if self.colors is None:
            return self.poset
        return ColoredPoset(self.poset, self.colors)

    def stage_of(self, v: int) -> int:
        prov = self.provenance[v]
        return prov[1] if prov[0] == "realization" else 0

    def kind(self, v: int) -> str:
        return self.provenance[v][0]

    def z_point(self, i: int, m: int) -> int:
        return self._z_index[(i, m)]

    @cached_property
    def _z_index(self) -> dict[tuple[int, int], int]:
        return {(p[1], p[2]): v for v, p in self.provenance.items() if p[0] == "z_point"}


def build_stage0(P: Poset, params: TruncationParams, colored: bool = False) -> StagedPoset:
    params.check()
    report = validate(P)
    if not report.ok:
        raise TruncationError(f"input is not a poset: {report.violations[0]}")
    base = sorted(P.vertices)
    idx = {p: j for j, p in enumerate(base)}
    n = len(base)
    prov: dict[int, tuple] = {}
    lt = set()
    copy_id = {}
    for i in range(params.p_copies):
        for p in base:
            v = i * n + idx[p]
            copy_id[(i, p)] = v
            prov[v] = ("p_copy", i, p)
        lt.update((copy_id[(i, a)], copy_id[(i, b)]) for a, b in P.lt)
    nxt = params.p_copies * n
    w = params.z_window
    z = {}
    for i in range(params.z_chains):
        for m in range(-w, w + 1):
            z[(i, m)] = nxt
            prov[nxt] = ("z_point", i, m)
            nxt += 1
        pts = [z[(i, m)] for m in range(-w, w + 1)]
        lt.update((a, b) for j, a in enumerate(pts) for b in pts[j + 1:])
    phi = {}
    for i in range(params.p_copies - 1):
        for p in base:
            phi[copy_id[(i, p)]] = copy_id[(i + 1, p)]
    for i in range(params.z_chains):
        for m in range(-w, w):
            phi[z[(i, m)]] = z[(i, m + 1)]
    level = Poset(tuple(range(nxt)), frozenset(lt), dict(prov))
    colors = {v: 0 for v in level.vertices} if colored else None
    return StagedPoset(P, params, (level,), phi, prov, colors=colors)


def star_parameter_pool(s: StagedPoset) -> list[int]:
    """Vertices allowed as non-chain parameters when building the next stage."""
    if s.stage == 0:
        return list(s.poset.vertices)
    w = s.params.z_window
    pairs = [(i, m) for i in range(s.params.z_chains) for m in range(-w, w)][: s.params.pool_pairs]
    wanted = set(pairs)
    return sorted(v for v, p in s.provenance.items()
                  if p[0] == "realization" and p[1] == s.stage and s.star[v] in wanted)


def _pattern_code(c: PosetConstraint) -> int:
    code = 0
    for j, v in enumerate(sorted(c.params)):
        code += _REL_CODE[c.relation_to(v)] * 3 ** j
    return code


def constraint_order_key(c: PosetConstraint) -> tuple:
    return (tuple(sorted(c.params)), _pattern_code(c))


def enumerate_star_constraints(s: StagedPoset, stage: int | None = None,
                               params: TruncationParams | None = None) -> list[PosetConstraint]:
    """Admissible constraints over the current level that put ``x`` between consecutive chain points."""
    if stage is not None and stage != s.stage:
        raise TruncationError(f"constraints are enumerated over the current level {s.stage}, not {stage}")
    params = params or s.params
    P = s.poset
    pool = star_parameter_pool(s)
    w = params.z_window
    found = {}
    for i in range(params.z_chains):
        for m in range(-w, w):
            lo, hi = s.z_point(i, m), s.z_point(i, m + 1)
            extras = [v for v in pool if v != lo and v != hi]
            for k in range(0, params.max_params - 1):
                for E in itertools.combinations(extras, k):
                    for rels in itertools.product(("lt", "gt", "inc"), repeat=k):
                        below = {lo} | {e for e, r in zip(E, rels) if r == "lt"}
                        above = {hi} | {e for e, r in zip(E, rels) if r == "gt"}
                        inc = {e for e, r in zip(E, rels) if r == "inc"}
                        c = PosetConstraint(frozenset(below), frozenset(above), frozenset(inc))
                        if is_admissible_constraint(P, c):
                            found[c.key()] = (c, (i, m))
    ordered = sorted(found.values(), key=lambda cs: constraint_order_key(cs[0]))
    return [c for c, _ in ordered]


def _star_pair(s: StagedPoset, c: PosetConstraint) -> tuple[int, int]:
    z = s._z_index
    for (i, m), v in z.items():
        if v in c.below and z.get((i, m + 1)) in c.above:
            return (i, m)
    raise TruncationError(f"constraint {c.to_dict()} has no consecutive chain pair")


def extend_stage(s: StagedPoset, params: TruncationParams | None = None) -> StagedPoset:
    params = params or s.params
    if s.stage >= params.n_stages:
        raise TruncationError("all stages already built")
    old = s.poset
    stage = s.stage + 1
    cons = enumerate_star_constraints(s, params=params)
    palette = (0, 1, 2) if s.colors is not None else (None,)
    jobs = [(c, col) for c in cons for col in palette]
    try:
        new, ids = realize_constraints(
            old, [c for c, _ in jobs],
            provenance=lambda j, c: ("realization", stage, c.key(), jobs[j][1]))
    except AmalgamationError as exc:
        raise TruncationError(str(exc)) from exc
    report = validate(new)
    if not report.ok:
        raise TruncationError(f"closure produced an invalid poset: {report.violations[0]}")
    if induced_substructure(new, old.vertices).lt != old.lt:
        raise TruncationError("new level adds relations among old vertices")
    prov = dict(s.provenance)
    realizations = dict(s.realizations)
    constraints = dict(s.constraints)
    star = dict(s.star)
    colors = dict(s.colors) if s.colors is not None else None
    for v, (c, col) in zip(ids, jobs):
        prov[v] = ("realization", stage, c.key(), col)
        realizations[(stage, c.key(), col)] = v
        constraints[v] = c
        star[v] = _star_pair(s, c)
        if colors is not None:
            colors[v] = col
    phi = dict(s.phi)
    for v, (c, col) in zip(ids, jobs):
        if c.params <= phi.keys():
            target = realizations.get((stage, c.mapped(phi).key(), col))
            if target is not None:
                phi[v] = target
    new = Poset(new.vertices, new.lt, prov)
    return StagedPoset(s.base, params, s.levels + (new,), phi, prov, realizations, constraints, star,
                       colors)


def build_reduction_po(P: Poset, params: TruncationParams, colored: bool = False) -> StagedPoset:
    s = build_stage0(P, params, colored)
    while s.stage < params.n_stages:
        s = extend_stage(s, params)
    return s


def classify_orbit(s: StagedPoset, v: int) -> str:
    if v not in s.phi:
        raise OrbitError(f"φ is undefined at {v} (truncation boundary)")
    w = s.phi[v]
    P = s.poset
    if P.incomparable(v, w):
        return ANTICHAIN
    if P.less(v, w):
        return CHAIN
    raise OrbitError(f"φ({v}) = {w} lies below {v}")


def antichain_orbit_vertices(s: StagedPoset) -> set[int]:
    pre = inverse(s.phi)
    out = set()
    for v in s.poset.vertices:
        if v in s.phi:
            if classify_orbit(s, v) == ANTICHAIN:
                out.add(v)
        elif v in pre and classify_orbit(s, pre[v]) == ANTICHAIN:
            out.add(v)
    return out


def orbit_classes(s: StagedPoset, subset) -> list[list[int]]:
    """Connected pieces of the partial φ on ``subset`` (truncated orbits)."""
    subset = set(subset)
    parent = {v: v for v in subset}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for v in subset:
        w = s.phi.get(v)
        if w in subset:
            parent[find(v)] = find(w)
    groups: dict[int, list[int]] = {}
    for v in sorted(subset):
        groups.setdefault(find(v), []).append(v)
    return sorted(groups.values())


def recover_poset(s: StagedPoset) -> Poset:
    """Quotient of the antichain-orbit points by the orbit relation."""
    if s.params.p_copies < 2:
        raise TruncationError("recovery needs at least two copies to see antichain orbits")
    classes = orbit_classes(s, antichain_orbit_vertices(s))
    for cls in classes:
        originals = {s.provenance[v][2] for v in cls if s.provenance[v][0] == "p_copy"}
        if len(originals) != 1 or any(s.provenance[v][0] != "p_copy" for v in cls):
            raise OrbitError(f"orbit class {cls} does not match a single original vertex")
    rep = {v: cls[0] for cls in classes for v in cls}
    P = s.poset
    lt = {(rep[a], rep[b]) for a, b in P.lt if a in rep and b in rep}
    prov = {cls[0]: s.provenance[cls[0]][2] for cls in classes}
    return Poset.from_pairs((c[0] for c in classes), lt, prov)


def z_support(s: StagedPoset) -> dict[int, frozenset[int]]:
    P = s.poset
    chain_of = {v: p[1] for v, p in s.provenance.items() if p[0] == "z_point"}
    out = {}
    for v in P.vertices:
        sup = {chain_of[u] for u in (P.up[v] | P.down[v]) if u in chain_of}
        if v in chain_of:
            sup.add(chain_of[v])
        out[v] = frozenset(sup)
    return out


def verify_z_support(s: StagedPoset) -> dict:
    sup = z_support(s)
    violations = []
    for v, c in s.constraints.items():
        allowed = set().union(*(sup[p] for p in c.params)) | {s.star[v][0]}
        if not sup[v] <= allowed:
            violations.append({"vertex": v, "support": sorted(sup[v]), "allowed": sorted(allowed)})
    return {"ok": not violations, "support": {v: sorted(x) for v, x in sup.items()},
            "violations": violations}


class NotIsomorphicError(ValueError):
    pass


def induced_conjugacy(P: Poset, P2: Poset, iso: Mapping[int, int], params: TruncationParams,
                      colored: bool = False, built=None) -> dict[int, int]:
    """Extend an isomorphism of inputs level by level to a conjugator of the shifts."""
    if not is_isomorphism(P, P2, iso):
        raise NotIsomorphicError("map is not an isomorphism of the input posets")
    s, s2 = built if built is not None else (build_reduction_po(P, params, colored),
                                             build_reduction_po(P2, params, colored))
    alpha: dict[int, int] = {}
    inv2 = {}
    for v, p in s2.provenance.items():
        if p[0] != "realization":
            inv2[p] = v
    for v, p in s.provenance.items():
        if p[0] == "p_copy":
            alpha[v] = inv2[("p_copy", p[1], iso[p[2]])]
        elif p[0] == "z_point":
            alpha[v] = inv2[p]
    for stage in range(1, s.stage + 1):
        for v, p in sorted(s.provenance.items()):
            if p[0] != "realization" or p[1] != stage:
                continue
            image = s.constraints[v].mapped(alpha)
            target = s2.realizations.get((stage, image.key(), p[3]))
            if target is None:
                raise OrbitError(f"no realization of the image constraint of {v}")
            alpha[v] = target
    if not is_isomorphism(s.structure(), s2.structure(), alpha):
        raise OrbitError("extended map is not an isomorphism")
    check_conjugation(s.phi, s2.phi, alpha)
    return alpha


def check_conjugation(phi: Mapping[int, int], phi2: Mapping[int, int], alpha: Mapping[int, int]):
    """Assert ``alpha ∘ phi = phi2 ∘ alpha`` wherever either side is defined."""
    for v, w in phi.items():
        if phi2.get(alpha[v]) != alpha[w]:
            raise OrbitError(f"conjugation fails at {v}")
    inv = inverse(alpha)
    for v, w in phi2.items():
        if phi.get(inv[v]) != inv[w]:
            raise OrbitError(f"conjugation fails at image point {v}")


def build_reduction_p3(P: Poset, params: TruncationParams) -> tuple[StagedPoset, Digraph]:
    s = build_reduction_po(P, params, colored=True)
    return s, shuffle3(ColoredPoset(s.poset, s.colors))


def classify_orbit_shuffled(g: Digraph, phi: Mapping[int, int], colors: Mapping[int, int], v: int) -> str:
    """Orbit type read off the shuffled digraph; valid because orbits are monochromatic."""
    w = phi[v]
    if colors[v] != colors[w]:
        raise OrbitError(f"orbit of {v} is not monochromatic")
    e = g.edge(v, w)
    if e == "inc":
        return ANTICHAIN
    if e == "out":
        return CHAIN
    raise OrbitError(f"φ({v}) = {w} lies below {v}")

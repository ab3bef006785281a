"""Explicit extension operators that add ``n`` cycled witnesses per admissible type.

For posets the witnesses are amalgamated by transitive closure, so twin
witnesses of one type come out incomparable. The free variant for oriented
graphs adds no relations beyond the type itself.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping

from .core import (INC, Digraph, Poset, compose, induced_substructure, is_automorphism, is_isomorphism,
                   validate)
from .poset_amalgamation import (PosetConstraint, constraint_closure, is_admissible_constraint,
                                 realize_constraints)

POSET_RELS = ("lt", "gt", "inc")
DIGRAPH_RELS = ("out", "in", "inc")


class ExtensionError(ValueError):
    pass


@dataclass(frozen=True)
class FinitaryType:
    """``relations[j]`` is the relation of ``params[j]`` to the witness (poset: 'lt' means p < x)."""

    params: tuple[int, ...]
    relations: tuple[str, ...]

    def mapped(self, alpha: Mapping[int, int]) -> FinitaryType:
        pairs = sorted((alpha[p], r) for p, r in zip(self.params, self.relations))
        return FinitaryType(tuple(p for p, _ in pairs), tuple(r for _, r in pairs))

    def constraint(self) -> PosetConstraint:
        d = {"lt": set(), "gt": set(), "inc": set()}
        for p, r in zip(self.params, self.relations):
            d[r].add(p)
        return PosetConstraint.of(d["lt"], d["gt"], d["inc"])

    def as_map(self) -> dict[int, str]:
        return dict(zip(self.params, self.relations))


@dataclass(frozen=True, eq=False)
class ExtensionResult:
    base: object
    extended: object
    witnesses: Mapping[FinitaryType, tuple[int, ...]]
    cycle: Mapping[int, int]
    max_params: int
    arity: int = 2
    kind: str = "poset"

    def witness_set(self) -> set[int]:
        return {x for xs in self.witnesses.values() for x in xs}


def admissible_types_poset(A: Poset, max_params: int) -> list[FinitaryType]:
    out = []
    for n in range(max_params + 1):
        for S in itertools.combinations(A.vertices, n):
            for rels in itertools.product(POSET_RELS, repeat=n):
                t = FinitaryType(S, rels)
                if is_admissible_constraint(A, t.constraint()):
                    out.append(t)
    return out


def _cycle_map(base_vertices, witnesses: Mapping[FinitaryType, tuple[int, ...]]) -> dict[int, int]:
    cyc = {v: v for v in base_vertices}
    for xs in witnesses.values():
        for i, x in enumerate(xs):
            cyc[x] = xs[(i + 1) % len(xs)]
    return cyc


def extension_operator_poset(A: Poset, max_params: int, arity: int = 2, stage: int = 1) -> ExtensionResult:
    if arity < 1:
        raise ExtensionError("arity must be positive")
    types = admissible_types_poset(A, max_params)
    jobs = [(t, i) for t in types for i in range(arity)]
    E, ids = realize_constraints(
        A, [t.constraint() for t, _ in jobs],
        provenance=lambda j, c: ("witness", stage, jobs[j][0].params, jobs[j][0].relations, jobs[j][1]))
    report = validate(E)
    if not report.ok:
        raise ExtensionError(f"closure failed: {report.violations[0]}")
    witnesses: dict[FinitaryType, tuple[int, ...]] = {}
    for (t, _), x in zip(jobs, ids):
        witnesses[t] = witnesses.get(t, ()) + (x,)
    return ExtensionResult(A, E, witnesses, _cycle_map(A.vertices, witnesses), max_params, arity)


def admissible_types_free(A: Digraph, max_params: int) -> list[FinitaryType]:
    """Every one-point type is admissible in the class of all oriented graphs."""
    return [FinitaryType(S, rels) for n in range(max_params + 1)
            for S in itertools.combinations(A.vertices, n)
            for rels in itertools.product(DIGRAPH_RELS, repeat=n)]


def extension_operator_free(A: Digraph, max_params: int, arity: int = 2) -> ExtensionResult:
    nxt = max(A.vertices, default=-1) + 1
    arcs = list(A.arcs())
    witnesses: dict[FinitaryType, tuple[int, ...]] = {}
    prov = dict(A.provenance)
    for t in admissible_types_free(A, max_params):
        xs = tuple(range(nxt, nxt + arity))
        nxt += arity
        witnesses[t] = xs
        for x in xs:
            prov[x] = ("witness", 1, t.params, t.relations, x - xs[0])
            for p, r in zip(t.params, t.relations):
                # r is the relation of p to x
                if r == "out":
                    arcs.append((p, x))
                elif r == "in":
                    arcs.append((x, p))
    E = Digraph.from_arcs(list(A.vertices) + [x for xs in witnesses.values() for x in xs], arcs, prov)
    return ExtensionResult(A, E, witnesses, _cycle_map(A.vertices, witnesses), max_params, arity, "free")


def _realizes(ext: ExtensionResult, t: FinitaryType, x: int) -> bool:
    """Whether ``x`` relates to the base exactly as ``t`` plus its forced consequences."""
    E = ext.extended
    if ext.kind == "poset":
        down, up = constraint_closure(ext.base, t.constraint())
        return (E.down[x] & ext.base.vertex_set) == down and (E.up[x] & ext.base.vertex_set) == up
    want = t.as_map()
    for p in ext.base.vertices:
        e = E.edge(p, x)
        if e != want.get(p, INC):
            return False
    return True


def check_bap_bullets(ext: ExtensionResult) -> dict[str, bool]:
    """Shape, cycling automorphism, and witness-tuple isomorphism for one extension."""
    E, A = ext.extended, ext.base
    restricted = induced_substructure(E, A.vertices) == A
    counts = all(len(xs) == ext.arity for xs in ext.witnesses.values())
    covered = set(E.vertices) == set(A.vertices) | ext.witness_set()
    realized = all(_realizes(ext, t, x) for t, xs in ext.witnesses.items() for x in xs)
    cyc = ext.cycle
    cycle_ok = is_automorphism(E, cyc) and all(cyc[a] == a for a in A.vertices)
    power = dict(cyc)
    for _ in range(ext.arity - 1):
        power = compose(cyc, power)
    cycle_order = all(power[v] == v for v in E.vertices)
    first = None
    tuples_ok = True
    for t, xs in ext.witnesses.items():
        sub = induced_substructure(E, xs)
        if first is None:
            first = (xs, sub)
            continue
        f = {x: y for x, y in zip(xs, first[0])}
        if not is_isomorphism(sub, first[1], f):
            tuples_ok = False
            break
    twins_incomparable = all(E.relation(x, y) == "inc" for xs in ext.witnesses.values()
                             for x, y in itertools.combinations(xs, 2))
    return {
        "restricts_to_base": restricted,
        "shape": counts and covered and realized,
        "cycle_automorphism": cycle_ok and cycle_order,
        "witness_tuples_isomorphic": tuples_ok,
        "twins_incomparable": twins_incomparable,
    }


def natural_extension(alpha: Mapping[int, int], EA: ExtensionResult, EA2: ExtensionResult) -> dict[int, int]:
    if (EA.max_params, EA.arity, EA.kind) != (EA2.max_params, EA2.arity, EA2.kind):
        raise ExtensionError("extensions were built with different parameters")
    if not is_isomorphism(EA.base, EA2.base, alpha):
        raise ExtensionError("alpha is not an isomorphism of the bases")
    ext = dict(alpha)
    for t, xs in EA.witnesses.items():
        image = EA2.witnesses.get(t.mapped(alpha))
        if image is None:
            raise ExtensionError(f"image type of {t} has no witnesses")
        ext.update(zip(xs, image))
    if not is_isomorphism(EA.extended, EA2.extended, ext):
        raise ExtensionError("natural extension is not an isomorphism")
    return ext


@dataclass(frozen=True, eq=False)
class BapStaged:
    base: Poset
    levels: tuple[Poset, ...]
    phi: Mapping[int, int]
    extensions: tuple[ExtensionResult, ...] = field(default=())

    @property
    def poset(self) -> Poset:
        return self.levels[-1]

    @property
    def stage(self) -> int:
        return len(self.levels) - 1

    def fixed_points(self) -> list[int]:
        return sorted(v for v, w in self.phi.items() if v == w)


def bap_reduction(P: Poset, n_stages: int, max_params: int) -> BapStaged:
    report = validate(P)
    if not report.ok:
        raise ExtensionError(f"input is not a poset: {report.violations[0]}")
    seq = sorted(P.vertices)
    ids = {p: i for i, p in enumerate(seq)}
    Q = Poset.from_pairs(range(len(seq)), [(ids[a], ids[b]) for a, b in P.lt],
                         {ids[p]: ("base", p) for p in seq})
    phi = {v: v for v in Q.vertices}
    levels, exts = [Q], []
    for n in range(1, n_stages + 1):
        ext = extension_operator_poset(levels[-1], max_params, 2, stage=n)
        bar = natural_extension(phi, ext, ext)
        phi = compose(ext.cycle, bar)
        levels.append(ext.extended)
        exts.append(ext)
    return BapStaged(P, tuple(levels), phi, tuple(exts))


def bap_fixed_recover(s: BapStaged) -> Poset:
    return induced_substructure(s.poset, s.fixed_points())


def induced_bap_conjugacy(s: BapStaged, s2: BapStaged, iso: Mapping[int, int]) -> dict[int, int]:
    """Chain natural extensions of an input isomorphism through every stage."""
    if not is_isomorphism(s.base, s2.base, iso):
        raise ExtensionError("map is not an isomorphism of the inputs")
    to0 = {p[1]: v for v, p in s.levels[0].provenance.items()}
    to0b = {p[1]: v for v, p in s2.levels[0].provenance.items()}
    alpha = {to0[p]: to0b[iso[p]] for p in s.base.vertices}
    for e1, e2 in zip(s.extensions, s2.extensions):
        alpha = natural_extension(alpha, e1, e2)
    for v, w in s.phi.items():
        if s2.phi[alpha[v]] != alpha[w]:
            raise ExtensionError(f"conjugation fails at {v}")
    return alpha


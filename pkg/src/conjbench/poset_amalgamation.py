"""Strong amalgamation of one-point poset extensions by transitive closure."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import Poset, induced_substructure, validate


class AmalgamationError(ValueError):
    pass


@dataclass(frozen=True)
class PosetConstraint:
    """Demands ``below < x < above`` and ``x ⊥ incomp`` for a fresh point ``x``."""

    below: frozenset[int] = frozenset()
    above: frozenset[int] = frozenset()
    incomp: frozenset[int] = frozenset()

    @classmethod
    def of(cls, below=(), above=(), incomp=()):
        return cls(frozenset(below), frozenset(above), frozenset(incomp))

    @property
    def params(self) -> frozenset[int]:
        return self.below | self.above | self.incomp

    def is_disjoint(self) -> bool:
        return not (self.below & self.above or self.below & self.incomp or self.above & self.incomp)

    def relation_to(self, v: int) -> str:
        """Relation of a parameter to ``x``: 'lt' means ``v < x``."""
        if v in self.below:
            return "lt"
        if v in self.above:
            return "gt"
        if v in self.incomp:
            return "inc"
        raise KeyError(v)

    def key(self) -> tuple:
        return (tuple(sorted(self.below)), tuple(sorted(self.above)), tuple(sorted(self.incomp)))

    def mapped(self, f) -> PosetConstraint:
        return PosetConstraint(frozenset(f[v] for v in self.below),
                               frozenset(f[v] for v in self.above),
                               frozenset(f[v] for v in self.incomp))

    def to_dict(self):
        return {"below": sorted(self.below), "above": sorted(self.above), "incomp": sorted(self.incomp)}

    @classmethod
    def from_dict(cls, d):
        return cls.of(d.get("below", ()), d.get("above", ()), d.get("incomp", ()))


def _fresh_point(P: Poset, ext: Poset) -> int:
    if not P.vertex_set <= ext.vertex_set:
        raise AmalgamationError("extension does not contain the base poset")
    new = ext.vertex_set - P.vertex_set
    if len(new) != 1:
        raise AmalgamationError(f"expected one fresh vertex, found {len(new)}")
    report = validate(ext)
    if not report.ok:
        raise AmalgamationError(f"extension is not a poset: {report.violations[0]}")
    if induced_substructure(ext, P.vertices).lt != P.lt:
        raise AmalgamationError("extension changes the order on the base poset")
    return next(iter(new))


def transitive_closure_amalgam(P: Poset, extensions: Sequence[Poset]) -> Poset:
    """Amalgamate one-point extensions of ``P`` over ``P``.

    The closure needs a single step: ``a_i < a_j`` is added exactly when some
    ``p`` in ``P`` has ``a_i < p < a_j``.
    """
    fresh = [_fresh_point(P, e) for e in extensions]
    if len(set(fresh)) != len(fresh):
        raise AmalgamationError("extensions reuse a fresh vertex id")
    return _amalgam_unchecked(P, [(a, e.down[a], e.up[a]) for a, e in zip(fresh, extensions)])


def _amalgam_unchecked(P: Poset, points, provenance=None) -> Poset:
    """``points`` are (id, down-set in P, up-set in P); the down/up sets must already be closed."""
    lt = set(P.lt)
    for a, down, up in points:
        lt.update((d, a) for d in down)
        lt.update((a, u) for u in up)
    new_above: dict[int, list[int]] = {}
    for b, down_b, _ in points:
        for p in down_b:
            new_above.setdefault(p, []).append(b)
    for a, _, up_a in points:
        targets: set[int] = set()
        for p in up_a:
            targets.update(new_above.get(p, ()))
        targets.discard(a)
        lt.update((a, b) for b in targets)
    prov = dict(P.provenance)
    prov.update(provenance or {})
    return Poset(tuple(sorted(P.vertex_set | {a for a, _, _ in points})), frozenset(lt), prov)


def constraint_closure(P: Poset, c: PosetConstraint) -> tuple[frozenset[int], frozenset[int]]:
    """Down-set and up-set a realization of ``c`` is forced to have in ``P``."""
    down = set(c.below)
    for a in c.below:
        down |= P.down[a]
    up = set(c.above)
    for b in c.above:
        up |= P.up[b]
    return frozenset(down), frozenset(up)


def is_admissible_constraint(P: Poset, c: PosetConstraint) -> bool:
    if not c.params <= P.vertex_set or not c.is_disjoint():
        return False
    down, up = constraint_closure(P, c)
    if down & up:
        return False
    # the fresh point may not force relations among old points
    if any((a, b) not in P.lt for a in c.below for b in c.above):
        return False
    return not (c.incomp & (down | up))


def new_vertex_id(P: Poset) -> int:
    return max(P.vertices, default=-1) + 1


def realize_constraint(P: Poset, c: PosetConstraint, vertex: int | None = None, provenance=None) -> Poset:
    if not is_admissible_constraint(P, c):
        raise AmalgamationError(f"inadmissible constraint {c.to_dict()}")
    x = new_vertex_id(P) if vertex is None else vertex
    if x in P.vertex_set:
        raise AmalgamationError(f"vertex id {x} already in use")
    down, up = constraint_closure(P, c)
    prov = {x: provenance} if provenance is not None else {}
    return _amalgam_unchecked(P, [(x, down, up)], prov)


def realize_constraints(P: Poset, constraints: Iterable[PosetConstraint], start: int | None = None,
                        provenance=None) -> tuple[Poset, list[int]]:
    """Realize many constraints at once, one fresh point each, amalgamated over ``P``.

    ``provenance`` is an optional callable giving the provenance entry for the
    i-th constraint.
    """
    nxt = new_vertex_id(P) if start is None else start
    points, ids, prov = [], [], {}
    for i, c in enumerate(constraints):
        if not is_admissible_constraint(P, c):
            raise AmalgamationError(f"inadmissible constraint {c.to_dict()}")
        down, up = constraint_closure(P, c)
        points.append((nxt, down, up))
        ids.append(nxt)
        if provenance is not None:
            prov[nxt] = provenance(i, c)
        nxt += 1
    return _amalgam_unchecked(P, points, prov), ids


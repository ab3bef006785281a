"""Recoding a three-colored partial order as a shuffled digraph, and back."""
from __future__ import annotations

from typing import Mapping

from .core import IN, INC, OUT, ColoredPoset, Digraph, Poset, validate


class NotShuffledError(ValueError):
    pass


def shuffled_edge(rel: str, cx: int, cy: int) -> str:
    """Digraph edge state between x and y given the poset relation of x to y and their colors."""
    if cx == cy:
        return {"lt": OUT, "gt": IN, "inc": INC}[rel]
    if (cx + 1) % 3 == cy:
        return {"gt": OUT, "inc": IN, "lt": INC}[rel]
    # y's color precedes x's: read the table from y's side
    back = shuffled_edge({"lt": "gt", "gt": "lt", "inc": "inc"}[rel], cy, cx)
    return {OUT: IN, IN: OUT, INC: INC}[back]


def unshuffled_relation(edge: str, cx: int, cy: int) -> str:
    if cx == cy:
        return {OUT: "lt", IN: "gt", INC: "inc"}[edge]
    if (cx + 1) % 3 == cy:
        return {OUT: "gt", IN: "inc", INC: "lt"}[edge]
    back = unshuffled_relation({OUT: IN, IN: OUT, INC: INC}[edge], cy, cx)
    return {"lt": "gt", "gt": "lt", "inc": "inc"}[back]


def shuffle3(cp: ColoredPoset) -> Digraph:
    p, col = cp.poset, cp.color
    vs = p.vertices
    arcs = []
    for i, x in enumerate(vs):
        for y in vs[i + 1:]:
            e = shuffled_edge(p.relation(x, y), col[x], col[y])
            if e == OUT:
                arcs.append((x, y))
            elif e == IN:
                arcs.append((y, x))
    return Digraph.from_arcs(vs, arcs, p.provenance)


def unshuffle3(g: Digraph, color: Mapping[int, int]) -> ColoredPoset:
    missing = set(g.vertices) - set(color)
    if missing:
        raise NotShuffledError(f"coloring misses vertices {sorted(missing)}")
    vs = g.vertices
    lt = []
    for i, x in enumerate(vs):
        for y in vs[i + 1:]:
            r = unshuffled_relation(g.edge(x, y), color[x], color[y])
            if r == "lt":
                lt.append((x, y))
            elif r == "gt":
                lt.append((y, x))
    p = Poset.from_pairs(vs, lt, g.provenance)
    report = validate(p)
    if not report.ok:
        raise NotShuffledError(f"preimage is not a partial order: {report.violations[0]}")
    return ColoredPoset(p, {v: color[v] for v in vs})

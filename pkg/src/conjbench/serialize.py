"""Canonical JSON encoding and DOT export for the core structures."""
from __future__ import annotations

import json
from typing import Any

from .core import ColoredPoset, Digraph, LinearOrder, Poset


def _jsonable(x: Any):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, frozenset, set)):
        items = sorted(x, key=repr) if isinstance(x, (set, frozenset)) else x
        return [_jsonable(v) for v in items]
    return x


def to_json(s) -> dict:
    if isinstance(s, ColoredPoset):
        d = to_json(s.poset)
        d["kind"] = "colored_poset"
        d["colors"] = {str(v): s.color[v] for v in s.vertices}
        return d
    if isinstance(s, Poset):
        kind = "linear_order" if isinstance(s, LinearOrder) else "poset"
        rels = [[a, b, "lt"] for a, b in sorted(s.lt)]
    elif isinstance(s, Digraph):
        kind = "digraph"
        rels = [[a, b, "out"] for a, b in s.arcs()]
    else:
        raise TypeError(f"cannot encode {type(s).__name__}")
    return {
        "kind": kind,
        "vertices": list(s.vertices),
        "relations": rels,
        "colors": {},
        "provenance": {str(v): _jsonable(p) for v, p in sorted(s.provenance.items())},
    }


def tuplify(x):
    if isinstance(x, list):
        return tuple(tuplify(v) for v in x)
    return x


def _prov(d: dict) -> dict:
    return {int(k): tuplify(v) for k, v in d.get("provenance", {}).items()}


def from_json(d: dict):
    kind = d["kind"]
    vs = [int(v) for v in d["vertices"]]
    rels = d.get("relations", [])
    prov = _prov(d)
    if kind in ("poset", "linear_order", "colored_poset"):
        bad = [r for r in rels if r[2] != "lt"]
        if bad:
            raise ValueError(f"non-order relation in {kind}: {bad[0]}")
        cls = LinearOrder if kind == "linear_order" else Poset
        p = cls.from_pairs(vs, [(int(a), int(b)) for a, b, _ in rels], prov)
        if kind == "colored_poset":
            return ColoredPoset(p, {int(k): int(c) for k, c in d["colors"].items()})
        return p
    if kind == "digraph":
        arcs = []
        for a, b, r in rels:
            if r == "out":
                arcs.append((int(a), int(b)))
            elif r == "in":
                arcs.append((int(b), int(a)))
            else:
                raise ValueError(f"unknown digraph relation {r!r}")
        return Digraph.from_arcs(vs, arcs, prov)
    raise ValueError(f"unknown structure kind {kind!r}")


def dumps(s) -> str:
    return json.dumps(to_json(s), sort_keys=True)


def loads(text: str):
    return from_json(json.loads(text))


def to_dot(s, name: str = "G", vertex_style=None) -> str:
    """DOT text; posets are drawn as Hasse diagrams, digraphs with all arcs.

    ``vertex_style`` maps a vertex id to a DOT attribute string.
    """
    lines = [f"digraph {name} {{"]
    if isinstance(s, ColoredPoset):
        palette = ("white", "lightblue", "lightpink")
        vertex_style = vertex_style or (
            lambda v: f'style=filled fillcolor="{palette[s.color[v]]}"')
        s_edges = list(s.poset.covers())
        lines.append("  rankdir=BT;")
    elif isinstance(s, Poset):
        s_edges = list(s.covers())
        lines.append("  rankdir=BT;")
    else:
        s_edges = list(s.arcs())
    for v in s.vertices:
        style = vertex_style(v) if vertex_style else ""
        lines.append(f"  {v} [{style}];" if style else f"  {v};")
    lines.extend(f"  {a} -> {b};" for a, b in s_edges)
    lines.append("}")
    return "\n".join(lines) + "\n"

"""On-disk build artifacts and the invariant suites that re-check them."""
from __future__ import annotations

import json
import random
from pathlib import Path

from .analysis import brute_force_isomorphism
from .bap import ExtensionResult, FinitaryType, bap_reduction, check_bap_bullets
from .core import (ColoredPoset, LinearOrder, Poset, induced_substructure, is_automorphism,
                   is_partial_automorphism, validate)
from .multipartite import MultipartiteDigraph, antichain_partition, parity_violations
from .poset_amalgamation import (PosetConstraint, is_admissible_constraint, realize_constraint,
                                 transitive_closure_amalgam)
from .reduction_po import (OrbitError, StagedPoset, TruncationParams, build_reduction_po,
                           recover_poset, verify_z_support)
from .reduction_semigeneric import build_reduction_sg
from .serialize import from_json, to_dot, to_json, tuplify
from .shuffle import NotShuffledError, shuffle3, unshuffle3

CONSTRUCTIONS = ("po", "p3", "semigeneric", "bap")


class ArtifactError(RuntimeError):
    pass


def _write(path: Path, payload):
    path.write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n", encoding="utf-8")


def _phi_list(phi, vertices):
    vs = set(vertices)
    return [[v, w] for v, w in sorted(phi.items()) if v in vs and w in vs]


def build(construction: str, structure, params: dict, seed: int = 0):
    if construction in ("po", "p3"):
        tp = TruncationParams(**params).check()
        return build_reduction_po(structure, tp, colored=construction == "p3")
    if construction == "semigeneric":
        if not isinstance(structure, LinearOrder):
            structure = LinearOrder.from_pairs(structure.vertices, structure.lt, structure.provenance)
        return build_reduction_sg(structure, params.get("n_stages", 2), params.get("max_params", 2),
                                  params.get("pool_limit", 8))
    if construction == "bap":
        return bap_reduction(structure, params.get("n_stages", 1), params.get("max_params", 2))
    raise ArtifactError(f"unknown construction {construction!r}")


def write_build(out: Path, construction: str, structure, params: dict, seed: int = 0,
                shuffled: bool = False):
    out.mkdir(parents=True, exist_ok=True)
    built = build(construction, structure, params, seed)
    stages = []
    for n, level in enumerate(built.levels):
        g = level.digraph if isinstance(level, MultipartiteDigraph) else level
        payload = {"stage": n, "structure": to_json(g), "phi": _phi_list(built.phi, g.vertices)}
        style = None
        if construction == "p3":
            colors = {v: built.colors[v] for v in g.vertices}
            payload["structure"] = to_json(ColoredPoset(g, colors))
            if shuffled:
                payload["shuffled"] = to_json(shuffle3(ColoredPoset(g, colors)))
        if construction == "semigeneric":
            payload["order"] = list(g.vertices)
            palette = {None: "white", 1: "lightblue", 2: "lightpink"}
            style = lambda v: f'style=filled fillcolor="{palette[built.klass(v)]}"'
        if construction == "bap" and n >= 1:
            ext = built.extensions[n - 1]
            payload["witnesses"] = [[list(t.params), list(t.relations), list(xs)]
                                    for t, xs in ext.witnesses.items()]
        name = f"stage_{n}"
        _write(out / f"{name}.json", payload)
        dot_src = ColoredPoset(g, {v: built.colors[v] for v in g.vertices}) if construction == "p3" else g
        (out / f"{name}.dot").write_text(to_dot(dot_src, name=name, vertex_style=style), encoding="utf-8")
        stages.append(name)
    manifest = {"construction": construction, "params": params, "seed": seed,
                "input": to_json(structure), "stages": stages}
    if construction == "semigeneric":
        manifest["events"] = list(built.events)
    _write(out / "manifest.json", manifest)
    return built, manifest


def load_build(path: Path) -> dict:
    mf = path / "manifest.json"
    if not mf.exists():
        raise ArtifactError(f"missing manifest in {path}")
    manifest = json.loads(mf.read_text(encoding="utf-8"))
    stages = []
    for name in manifest["stages"]:
        f = path / f"{name}.json"
        if not f.exists():
            raise ArtifactError(f"missing stage file {f}")
        stages.append(json.loads(f.read_text(encoding="utf-8")))
    return {"manifest": manifest, "stages": stages}


# -------------------------------------------------------------------- suites

def _check(name, ok, detail=None):
    row = {"check": name, "ok": bool(ok)}
    if detail is not None:
        row["detail"] = detail
    return row


def _suite_po(manifest, stages, rng):
    rows = []
    levels = [from_json(s["structure"]) for s in stages]
    colored = isinstance(levels[0], ColoredPoset)
    posets = [lv.poset if colored else lv for lv in levels]
    phi = {int(v): int(w) for v, w in stages[-1]["phi"]}
    for n, P in enumerate(posets):
        rep = validate(levels[n])
        rows.append(_check(f"stage{n}:valid", rep.ok, [v.to_dict() for v in rep.violations[:5]]))
        if n:
            same = induced_substructure(P, posets[n - 1].vertices).lt == posets[n - 1].lt
            rows.append(_check(f"stage{n}:restricts_to_previous", same))
        phi_n = {int(v): int(w) for v, w in stages[n]["phi"]}
        try:
            ok = is_partial_automorphism(levels[n], phi_n)
        except ValueError as exc:
            ok = False
            rows.append(_check(f"stage{n}:phi_domain", False, str(exc)))
        rows.append(_check(f"stage{n}:phi_partial_automorphism", ok))
    final = posets[-1]
    prov = {v: tuplify(p) for v, p in final.provenance.items()}
    bad = []
    for v, w in phi.items():
        if final.less(w, v):
            bad.append([v, w, "below"])
        elif final.incomparable(v, w) != (prov[v][0] == "p_copy"):
            bad.append([v, w, prov[v][0]])
    rows.append(_check("orbit_dichotomy", not bad, bad[:5]))
    s = _restage(manifest, posets, phi, prov, levels)
    rows.append(_check("z_support", verify_z_support(s)["ok"]))
    try:
        rec = recover_poset(s)
        target = from_json(manifest["input"])
        rows.append(_check("recovery", brute_force_isomorphism(rec, target) is not None))
    except (OrbitError, ValueError) as exc:
        rows.append(_check("recovery", False, str(exc)))
    if colored:
        mono = all(levels[-1].color[v] == levels[-1].color[w] for v, w in phi.items())
        rows.append(_check("monochromatic_orbits", mono))
        g = shuffle3(levels[-1])
        try:
            back = unshuffle3(g, levels[-1].color) == levels[-1]
        except NotShuffledError:
            back = False
        rows.append(_check("shuffle_round_trip", back))
        rows.append(_check("phi_shuffled_partial_automorphism", is_partial_automorphism(g, phi)))
    rows.extend(_suite_amalgam(posets[0], rng))
    return rows


def _restage(manifest, posets, phi, prov, levels):
    params = TruncationParams(**manifest["params"])
    constraints, star, real = {}, {}, {}
    z = {(p[1], p[2]): v for v, p in prov.items() if p[0] == "z_point"}
    for v, p in prov.items():
        if p[0] != "realization":
            continue
        below, above, inc = p[2]
        c = PosetConstraint.of(below, above, inc)
        constraints[v] = c
        real[(p[1], c.key(), p[3])] = v
        star[v] = next((i, m) for (i, m), zv in z.items() if zv in c.below and z.get((i, m + 1)) in c.above)
    colors = dict(levels[-1].color) if isinstance(levels[-1], ColoredPoset) else None
    base = from_json(manifest["input"])
    return StagedPoset(base, params, tuple(posets), phi, prov, real, constraints, star, colors)


def _suite_amalgam(P: Poset, rng: random.Random, trials: int = 20):
    """Seeded one-point amalgam round trips over small induced pieces of ``P``."""
    rows_ok = True
    for _ in range(trials):
        sub = induced_substructure(P, rng.sample(list(P.vertices), min(5, len(P))))
        exts = []
        nxt = max(sub.vertices, default=-1) + 1
        for _ in range(rng.randint(0, 3)):
            vs = list(sub.vertices)
            rel = {v: rng.choice(("lt", "gt", "inc")) for v in vs}
            c = PosetConstraint.of([v for v in vs if rel[v] == "lt"], [v for v in vs if rel[v] == "gt"],
                                   [v for v in vs if rel[v] == "inc"])
            if is_admissible_constraint(sub, c):
                exts.append(realize_constraint(sub, c, nxt))
                nxt += 1
        am = transitive_closure_amalgam(sub, exts)
        if not validate(am).ok or induced_substructure(am, sub.vertices).lt != sub.lt:
            rows_ok = False
    return [_check("amalgam_round_trips", rows_ok)]


def _suite_sg(manifest, stages):
    rows = []
    phi = {int(v): int(w) for v, w in stages[-1]["phi"]}
    prev = None
    for n, st in enumerate(stages):
        g = from_json(st["structure"])
        try:
            parts = antichain_partition(g)
            rows.append(_check(f"stage{n}:multipartite", True))
            bad = parity_violations(g, limit=5)
            rows.append(_check(f"stage{n}:parity", not bad, bad))
        except ValueError as exc:
            rows.append(_check(f"stage{n}:multipartite", False, str(exc)))
            parts = None
        phi_n = {v: phi[v] for v in g.vertices if v in phi}
        ok = set(phi_n) == set(g.vertices) and set(phi_n.values()) == set(g.vertices) and \
            is_automorphism(g, phi_n)
        rows.append(_check(f"stage{n}:phi_automorphism", ok))
        if prev is not None:
            rows.append(_check(f"stage{n}:restricts_to_previous",
                               induced_substructure(g, prev.vertices) == prev))
            order_ok = st["order"][:len(prev.vertices)] == list(prev.vertices)
            rows.append(_check(f"stage{n}:order_extends", order_ok))
        if parts is not None:
            prov = {v: tuplify(p) for v, p in g.provenance.items()}
            home = {v: a.earliest for a in parts for v in a.members}
            disc = all((p[5] != 2 or home[v] == v) and (p[5] != 1 or any(home[q] == home[v] for q in p[2]))
                       for v, p in prov.items() if p[0] == "witness")
            rows.append(_check(f"stage{n}:class_discipline", disc))
        prev = g
    g = from_json(stages[-1]["structure"])
    fixed = [v for v in g.vertices if phi.get(v) == v]
    sub = induced_substructure(g, fixed)
    lo = LinearOrder.from_pairs(fixed, sub.arcs())
    target = from_json(manifest["input"])
    rows.append(_check("fixed_point_recovery",
                       validate(lo).ok and brute_force_isomorphism(lo, Poset(target.vertices, target.lt))
                       is not None))
    return rows


def _suite_bap(manifest, stages):
    rows = []
    levels = [from_json(s["structure"]) for s in stages]
    phi = {int(v): int(w) for v, w in stages[-1]["phi"]}
    for n in range(1, len(levels)):
        wit = {FinitaryType(tuple(p), tuple(r)): tuple(xs) for p, r, xs in stages[n]["witnesses"]}
        cyc = {v: v for v in levels[n - 1].vertices}
        for xs in wit.values():
            for i, x in enumerate(xs):
                cyc[x] = xs[(i + 1) % len(xs)]
        ext = ExtensionResult(levels[n - 1], levels[n], wit, cyc, manifest["params"].get("max_params", 2))
        for k, ok in check_bap_bullets(ext).items():
            rows.append(_check(f"stage{n}:{k}", ok))
    for n, P in enumerate(levels):
        phi_n = {v: phi[v] for v in P.vertices}
        rows.append(_check(f"stage{n}:phi_automorphism", is_automorphism(P, phi_n)))
    fixed = [v for v, w in phi.items() if v == w]
    rec = induced_substructure(levels[-1], fixed)
    rows.append(_check("fixed_point_recovery",
                       brute_force_isomorphism(rec, from_json(manifest["input"])) is not None))
    return rows


def verify_build(path: Path, suite: str = "all") -> dict:
    loaded = load_build(path)
    manifest, stages = loaded["manifest"], loaded["stages"]
    construction = manifest["construction"]
    rng = random.Random(manifest.get("seed", 0))
    try:
        if construction in ("po", "p3"):
            rows = _suite_po(manifest, stages, rng)
        elif construction == "semigeneric":
            rows = _suite_sg(manifest, stages)
        elif construction == "bap":
            rows = _suite_bap(manifest, stages)
        else:
            raise ArtifactError(f"unknown construction {construction!r}")
    except (KeyError, ValueError, TypeError, StopIteration) as exc:
        rows = [_check("artifact_readable", False, f"{type(exc).__name__}: {exc}")]
    if suite != "all":
        rows = [r for r in rows if suite in r["check"]]
    return {"path": str(path), "construction": construction, "seed": manifest.get("seed", 0),
            "suite": suite, "checks": rows, "ok": all(r["ok"] for r in rows)}

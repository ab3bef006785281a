"""Brute-force oracles and experiment matrices."""
from __future__ import annotations

import itertools
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping

from .core import LinearOrder, Poset, is_automorphism, labels
from .multipartite import MultipartiteDigraph, classify_mp_type
from .poset_amalgamation import PosetConstraint, is_admissible_constraint

DEFAULT_BOUND = 10


class SizeBoundError(ValueError):
    pass


def _profile(s, v, vs):
    lab = labels(s)
    counts = Counter(s.relation(v, u) for u in vs if u != v)
    return (lab[v] if lab else None, tuple(sorted(counts.items())))


def _extend_ok(s, t, assign: dict, v, w) -> bool:
    for a, b in assign.items():
        if s.relation(v, a) != t.relation(w, b):
            return False
    return True


def brute_force_isomorphism(s, t, bound: int = DEFAULT_BOUND) -> dict[int, int] | None:
    if len(s.vertices) != len(t.vertices):
        return None
    if len(s.vertices) > bound:
        raise SizeBoundError(f"structure size {len(s.vertices)} exceeds bound {bound}")
    if (labels(s) is None) != (labels(t) is None):
        return None
    vs, ws = list(s.vertices), list(t.vertices)
    ps = {v: _profile(s, v, vs) for v in vs}
    pt = {w: _profile(t, w, ws) for w in ws}
    if Counter(ps.values()) != Counter(pt.values()):
        return None
    freq = Counter(ps.values())
    order = sorted(vs, key=lambda v: (freq[ps[v]], v))
    assign: dict[int, int] = {}
    used: set[int] = set()

    def go(i):
        if i == len(order):
            return True
        v = order[i]
        for w in ws:
            if w in used or pt[w] != ps[v] or not _extend_ok(s, t, assign, v, w):
                continue
            assign[v] = w
            used.add(w)
            if go(i + 1):
                return True
            del assign[v]
            used.discard(w)
        return False

    return dict(assign) if go(0) else None


def _orbits(phi: Mapping[int, int]) -> list[list[int]]:
    seen, out = set(), []
    for v in sorted(phi):
        if v in seen:
            continue
        cyc = [v]
        seen.add(v)
        w = phi[v]
        while w != v:
            cyc.append(w)
            seen.add(w)
            w = phi[w]
        out.append(cyc)
    return out


def brute_force_conjugacy(s, phi: Mapping[int, int], t, psi: Mapping[int, int],
                          bound: int = DEFAULT_BOUND) -> dict[int, int] | None:
    """An isomorphism ``alpha: s -> t`` with ``alpha ∘ phi = psi ∘ alpha``, if any."""
    if max(len(s.vertices), len(t.vertices)) > bound:
        raise SizeBoundError(f"structure size exceeds bound {bound}")
    if not is_automorphism(s, phi) or not is_automorphism(t, psi):
        raise ValueError("φ must be an automorphism")
    if len(s.vertices) != len(t.vertices):
        return None
    orb_s, orb_t = _orbits(phi), _orbits(psi)
    if sorted(map(len, orb_s)) != sorted(map(len, orb_t)):
        return None
    ps = {v: _profile(s, v, s.vertices) for v in s.vertices}
    pt = {w: _profile(t, w, t.vertices) for w in t.vertices}
    orb_s.sort(key=len, reverse=True)
    assign: dict[int, int] = {}
    used: set[int] = set()

    def go(i):
        if i == len(orb_s):
            return True
        cyc = orb_s[i]
        for w0 in t.vertices:
            if w0 in used:
                continue
            images, w = [], w0
            for _ in cyc:
                images.append(w)
                w = psi[w]
            if w != w0 or len(set(images)) != len(cyc):
                continue
            added = []
            ok = True
            for v, w in zip(cyc, images):
                if w in used or ps[v] != pt[w] or not _extend_ok(s, t, assign, v, w):
                    ok = False
                    break
                assign[v] = w
                used.add(w)
                added.append(v)
            if ok and go(i + 1):
                return True
            for v in added:
                used.discard(assign.pop(v))
        return False

    return dict(assign) if go(0) else None


def is_conjugate(s, phi, t, psi, bound: int = DEFAULT_BOUND) -> bool:
    return brute_force_conjugacy(s, phi, t, psi, bound) is not None


# ---------------------------------------------------------------- enumeration

def _down_sets(P: Poset):
    vs = P.vertices
    for r in range(len(vs) + 1):
        for D in itertools.combinations(vs, r):
            Ds = set(D)
            if all(P.down[d] <= Ds for d in Ds):
                yield Ds


def _invariant(P: Poset):
    return tuple(sorted((len(P.down[v]), len(P.up[v])) for v in P.vertices))


def enumerate_posets(n: int) -> list[Poset]:
    """All posets on ``{0..n-1}`` up to isomorphism (each has a maximal element to peel off)."""
    if n > 6:
        raise SizeBoundError("enumeration is limited to n <= 6")
    if n < 0:
        raise ValueError("n must be non-negative")
    level = [Poset.from_pairs([], [])]
    for k in range(n):
        buckets: dict[tuple, list[Poset]] = {}
        for P in level:
            for D in _down_sets(P):
                Q = Poset.from_pairs(list(P.vertices) + [k], set(P.lt) | {(d, k) for d in D})
                bucket = buckets.setdefault(_invariant(Q), [])
                if not any(brute_force_isomorphism(Q, R, bound=6) is not None for R in bucket):
                    bucket.append(Q)
        level = [Q for key in sorted(buckets) for Q in buckets[key]]
    return level


def enumerate_linear_orders(n: int) -> list[LinearOrder]:
    return [LinearOrder.chain(k) for k in range(n + 1)]


# ------------------------------------------------------------------ coverage

@dataclass
class CoverageReport:
    kind: str
    k: int
    total: int
    realized: int
    missing: list = field(default_factory=list)

    @property
    def fraction(self) -> float:
        return self.realized / self.total if self.total else 1.0

    def to_dict(self):
        return {"kind": self.kind, "k": self.k, "total": self.total, "realized": self.realized,
                "fraction": self.fraction, "missing_sample": self.missing[:10]}


def one_point_extension_coverage(s, kind: str, k: int, base=None) -> CoverageReport:
    """Share of admissible one-point types over parameter sets from ``base`` realized in ``s``."""
    if kind == "poset":
        rels = ("lt", "gt", "inc")
        admissible = lambda S, tau: is_admissible_constraint(
            s, PosetConstraint.of([p for p, r in zip(S, tau) if r == "lt"],
                                  [p for p, r in zip(S, tau) if r == "gt"],
                                  [p for p, r in zip(S, tau) if r == "inc"]))
        sig = lambda v, S: tuple(s.relation(p, v) for p in S)
    elif kind == "parity-mp":
        if not isinstance(s, MultipartiteDigraph):
            s = MultipartiteDigraph.from_digraph(s)
        rels = ("out", "in", "inc")
        admissible = lambda S, tau: classify_mp_type(s, dict(zip(S, tau))).admissible
        sig = lambda v, S: tuple(s.edge(v, p) for p in S)
    else:
        raise ValueError(f"unknown class {kind!r}")
    base = sorted(s.vertices if base is None else base)
    total = realized = 0
    missing = []
    for n in range(k + 1):
        for S in itertools.combinations(base, n):
            Sset = set(S)
            seen = {sig(v, S) for v in s.vertices if v not in Sset}
            for tau in itertools.product(rels, repeat=n):
                if not admissible(S, tau):
                    continue
                total += 1
                if tau in seen:
                    realized += 1
                else:
                    missing.append({"params": list(S), "type": list(tau)})
    return CoverageReport(kind, k, total, realized, missing)


# -------------------------------------------------------------------- matrix

def _po_cell(args):
    from .reduction_po import build_reduction_po, recover_poset

    P, params = args
    s = build_reduction_po(P, params)
    return s, recover_poset(s)


def po_matrix(n_max: int, params, workers: int = 0) -> dict:
    """Pairwise agreement of input isomorphism and recovery-based equivalence for posets."""
    corpus = [P for n in range(n_max + 1) for P in enumerate_posets(n)]
    jobs = [(P, params) for P in corpus]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_po_cell, jobs))
    else:
        results = [_po_cell(j) for j in jobs]
    recovered = [r for _, r in results]
    from .reduction_po import OrbitError, induced_conjugacy

    cells = []
    for i, j in itertools.combinations_with_replacement(range(len(corpus)), 2):
        iso_map = brute_force_isomorphism(corpus[i], corpus[j])
        iso = iso_map is not None
        rec = brute_force_isomorphism(recovered[i], recovered[j]) is not None
        sizes = (len(results[i][0].poset), len(results[j][0].poset))
        cell = {"pair": [i, j], "isomorphic": iso, "recovered_isomorphic": rec,
                "direct_conjugacy": None, "stage_sizes": sizes, "agree": iso == rec}
        if iso:
            try:
                alpha = induced_conjugacy(corpus[i], corpus[j], iso_map, params,
                                          built=(results[i][0], results[j][0]))
                cell["conjugator"] = {"verified": True, "size": len(alpha),
                                      "input_map": sorted(iso_map.items())}
            except OrbitError as exc:
                cell["conjugator"] = {"verified": False, "error": str(exc)}
                cell["agree"] = False
        cells.append(cell)
    return {
        "construction": "po",
        "params": params.to_dict(),
        "corpus": [{"index": i, "n": len(P), "lt": sorted(P.lt)} for i, P in enumerate(corpus)],
        "recovered_ok": [brute_force_isomorphism(P, R) is not None for P, R in zip(corpus, recovered)],
        "cells": cells,
        "agreement": all(c["agree"] for c in cells),
    }


def sg_matrix(n_max: int, n_stages: int, max_params: int, pool_limit: int | None = 8,
              bound: int = DEFAULT_BOUND) -> dict:
    from .reduction_semigeneric import build_reduction_sg, fixed_points_recover

    corpus = enumerate_linear_orders(n_max)
    builds = [build_reduction_sg(L, n_stages, max_params, pool_limit) for L in corpus]
    recovered = [fixed_points_recover(s) for s in builds]
    cells = []
    for i, j in itertools.combinations_with_replacement(range(len(corpus)), 2):
        iso = brute_force_isomorphism(corpus[i], corpus[j]) is not None
        rec = brute_force_isomorphism(recovered[i], recovered[j]) is not None
        direct = []
        for st in range(n_stages + 1):
            gi, gj = builds[i].levels[st], builds[j].levels[st]
            if max(len(gi), len(gj)) > bound:
                continue
            phi_i = {v: builds[i].phi[v] for v in gi.vertices}
            phi_j = {v: builds[j].phi[v] for v in gj.vertices}
            alpha = brute_force_conjugacy(gi.digraph, phi_i, gj.digraph, phi_j, bound)
            direct.append({"stage": st, "conjugate": alpha is not None,
                           "certificate": sorted(alpha.items()) if alpha is not None else None})
        agree = iso == rec and all(d["conjugate"] == rec for d in direct)
        cells.append({"pair": [i, j], "isomorphic": iso, "recovered_isomorphic": rec,
                      "direct_conjugacy": direct, "agree": agree})
    return {
        "construction": "semigeneric",
        "params": {"n_stages": n_stages, "max_params": max_params, "pool_limit": pool_limit},
        "corpus": [{"index": i, "n": len(L)} for i, L in enumerate(corpus)],
        "recovered_ok": [brute_force_isomorphism(L, R) is not None for L, R in zip(corpus, recovered)],
        "cells": cells,
        "agreement": all(c["agree"] for c in cells),
    }


def matrix_table(report: dict) -> str:
    lines = [f"{report['construction']} matrix  agreement={report['agreement']}",
             f"{'pair':>8} {'iso':>5} {'recovered':>10} {'direct':>8} {'agree':>6}"]
    for c in report["cells"]:
        d = c["direct_conjugacy"]
        dtxt = "-" if not d else ",".join("y" if x["conjugate"] else "n" for x in d)
        lines.append(f"{str(tuple(c['pair'])):>8} {str(c['isomorphic'])[0]:>5} "
                     f"{str(c['recovered_isomorphic'])[0]:>10} {dtxt:>8} {str(c['agree'])[0]:>6}")
    return "\n".join(lines) + "\n"


import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from conjbench.core import Digraph, validate
from conjbench.multipartite import (InadmissibleTypeError, MultipartiteDigraph, NotMultipartiteError,
                                    ParityError, antichain_partition, classify_mp_type,
                                    has_parity_property, parity_graph_from_rs, parity_violations,
                                    realize_mp_type, rs_decomposition)

from conftest import parity_oracle


@st.composite
def rs_data(draw, max_parts=4, max_size=4):
    sizes = draw(st.lists(st.integers(1, max_size), min_size=1, max_size=max_parts))
    parts, nxt = [], 0
    for k in sizes:
        parts.append(list(range(nxt, nxt + k)))
        nxt += k
    sides = {}
    for i, j in itertools.combinations(range(len(parts)), 2):
        R = {x for x in parts[i] if draw(st.booleans())}
        S = {y for y in parts[j] if draw(st.booleans())}
        sides[(i, j)] = (R, S)
    return parts, sides


def bowtie():
    return Digraph.from_arcs(range(4), [(0, 2), (2, 1), (1, 3), (3, 0)])


def test_bowtie_partition_and_parity():
    g = bowtie()
    parts = antichain_partition(g)
    assert [a.members for a in parts] == [(0, 1), (2, 3)]
    assert has_parity_property(g)
    rs = rs_decomposition(g, 0, 2)
    assert rs.R == {0} and rs.S == {2}
    for x in (0, 1):
        for y in (2, 3):
            assert rs.predicts_out(x, y) == (g.edge(x, y) == "out")


def test_non_transitive_incomparability_has_witness():
    g = Digraph.from_arcs(range(3), [(0, 2)])
    with pytest.raises(NotMultipartiteError) as info:
        antichain_partition(g)
    a, b, c = info.value.witness
    assert g.edge(a, b) == "inc" and g.edge(b, c) == "inc" and g.edge(a, c) != "inc"


def test_odd_square_rejected():
    g = Digraph.from_arcs(range(4), [(0, 2), (0, 3), (1, 2), (3, 1)])
    assert not has_parity_property(g)
    a, a2, b, b2 = parity_violations(g)[0]
    assert sum(g.edge(x, y) == "out" for x in (a, a2) for y in (b, b2)) % 2 == 1
    with pytest.raises(ParityError):
        rs_decomposition(g, 0, 2)


def test_rs_rejects_same_antichain():
    with pytest.raises(ValueError):
        rs_decomposition(bowtie(), 0, 1)


@settings(max_examples=200, deadline=None)
@given(rs_data())
def test_generated_graphs_have_parity(data):
    parts, sides = data
    g = parity_graph_from_rs(parts, sides)
    assert validate(g).ok
    assert [set(a.members) for a in antichain_partition(g)] == [set(p) for p in parts]
    assert has_parity_property(g) and parity_oracle(g)
    for (i, j) in sides:
        rs = rs_decomposition(g, parts[i][0], parts[j][0])
        for x in parts[i]:
            for y in parts[j]:
                assert rs.predicts_out(x, y) == (g.edge(x, y) == "out")


@settings(max_examples=200, deadline=None)
@given(rs_data(), st.randoms(use_true_random=False))
def test_single_flip_detected_exactly(data, rng):
    parts, sides = data
    g = parity_graph_from_rs(parts, sides)
    arcs = list(g.arcs())
    if not arcs:
        return
    u, v = rng.choice(arcs)
    flipped = Digraph.from_arcs(g.vertices, [a for a in arcs if a != (u, v)] + [(v, u)])
    assert has_parity_property(flipped) == parity_oracle(flipped)


def tiny_multipartite(max_parts=3, max_size=2):
    return rs_data(max_parts, max_size).map(lambda d: parity_graph_from_rs(*d))


def admissible_oracle(g, t):
    """Some extension by a fresh point realizing ``t`` stays a parity graph."""
    x = max(g.vertices) + 1
    others = [v for v in g.vertices if v not in t]
    for rest in itertools.product(("out", "in", "inc"), repeat=len(others)):
        rel = {**t, **dict(zip(others, rest))}
        arcs = list(g.arcs())
        for p, r in rel.items():
            # r is the relation of x to p
            if r == "out":
                arcs.append((x, p))
            elif r == "in":
                arcs.append((p, x))
        h = Digraph.from_arcs(list(g.vertices) + [x], arcs)
        if parity_oracle(h):
            return True
    return False


@settings(max_examples=120, deadline=None)
@given(tiny_multipartite(), st.data())
def test_type_classification_matches_search(g, data):
    params = data.draw(st.lists(st.sampled_from(g.vertices), unique=True, max_size=3))
    t = {p: data.draw(st.sampled_from(("out", "in", "inc"))) for p in params}
    verdict = classify_mp_type(g, t)
    assert verdict.admissible == admissible_oracle(g, t)
    if verdict.admissible:
        h = realize_mp_type(g, t)
        x = max(h.vertices)
        assert parity_oracle(h.digraph)
        for p, r in t.items():
            assert h.edge(x, p) == r
        if verdict.klass == 2:
            assert h.antichain_of[x].members == (x,)
        else:
            assert verdict.antichain in h.antichain_of[x]
    else:
        with pytest.raises(InadmissibleTypeError):
            realize_mp_type(g, t)


def test_class2_default_points_forward():
    g = bowtie()
    h = realize_mp_type(g, {0: "in"})
    assert h.edge(4, 0) == "in" and h.edge(4, 1) == "out" and h.edge(4, 2) == "out"


def test_class1_copies_earliest_member():
    g = bowtie()
    v = classify_mp_type(g, {1: "inc"})
    assert v.klass == 1 and v.antichain == 0
    h = realize_mp_type(g, {1: "inc"})
    assert all(h.edge(4, y) == g.edge(0, y) for y in (2, 3))
    h2 = realize_mp_type(g, {1: "inc", 2: "in"})
    assert all(h2.edge(4, y) == g.edge(1, y) for y in (2, 3))


def test_inc_in_two_antichains_inadmissible():
    assert not classify_mp_type(bowtie(), {0: "inc", 2: "inc"}).admissible


def test_seeded_flip_sweep():
    rng = random.Random(11)
    checked = 0
    for _ in range(300):
        parts, nxt = [], 0
        for _ in range(rng.randint(2, 4)):
            k = rng.randint(1, 4)
            parts.append(list(range(nxt, nxt + k)))
            nxt += k
        sides = {(i, j): ({x for x in parts[i] if rng.random() < 0.5}, {y for y in parts[j] if rng.random() < 0.5})
                 for i, j in itertools.combinations(range(len(parts)), 2)}
        g = parity_graph_from_rs(parts, sides)
        arcs = list(g.arcs())
        u, v = rng.choice(arcs)
        h = Digraph.from_arcs(g.vertices, [a for a in arcs if a != (u, v)] + [(v, u)])
        assert has_parity_property(h) == parity_oracle(h)
        checked += 1
    assert checked == 300


def test_multipartite_equality_ignores_partition_object():
    g = bowtie()
    assert MultipartiteDigraph.from_digraph(g) == MultipartiteDigraph.from_digraph(bowtie())

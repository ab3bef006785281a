import itertools

import pytest
from conjbench.analysis import brute_force_isomorphism, one_point_extension_coverage
from conjbench.core import Digraph, LinearOrder, is_automorphism
from conjbench.multipartite import MultipartiteDigraph
from conjbench.reduction_semigeneric import (EQUIVARIANT, LITERAL, ConstructionError,
                                             add_separating_witness, antichain_fixing_search, bowtie,
                                             build_reduction_sg, check_stage, enumerate_types,
                                             extend_stage_sg, fixed_points_recover, phi_orbits,
                                             push_type, saturate_separations, separation_for,
                                             stage_zero, type_index)

from conftest import parity_oracle


def test_type_index_layout():
    assert type_index(()) == 0
    assert [type_index((r,)) for r in ("out", "in", "inc")] == [1, 2, 3]
    assert type_index(("out", "out")) == 4
    assert type_index(("inc", "inc")) == 12
    assert type_index(("out",) * 3) == 13


def test_type_index_is_a_bijection_up_to_arity_three():
    taus = [t for n in range(4) for t in itertools.product(("out", "in", "inc"), repeat=n)]
    assert sorted(type_index(t) for t in taus) == list(range(len(taus)))


def test_push_type_reorders_parameters():
    assert push_type(((0, 1), ("out", "inc")), {0: 5, 1: 2}) == ((2, 5), ("inc", "out"))


def test_stage_zero_is_the_chain():
    s = stage_zero(LinearOrder.chain(3))
    g = s.graph
    assert set(g.digraph.arcs()) == {(0, 1), (0, 2), (1, 2)}
    assert all(len(a) == 1 for a in g.antichains)
    assert all(s.phi[v] == v for v in g.vertices)


def test_stage_zero_rejects_non_linear_input():
    with pytest.raises(ConstructionError):
        stage_zero(LinearOrder.from_pairs([0, 1, 2], [(0, 1), (1, 2)]))


@pytest.fixture(scope="module")
def builds():
    return {n: build_reduction_sg(LinearOrder.chain(n), 2, 2) for n in range(4)}


@pytest.mark.parametrize("n", range(4))
def test_build_passes_every_check(builds, n):
    s = builds[n]
    report = check_stage(s)
    assert report["ok"], report
    assert brute_force_isomorphism(fixed_points_recover(s), LinearOrder.chain(n)) is not None


@pytest.mark.parametrize("n", range(4))
def test_stage_one_parity_matches_square_oracle(builds, n):
    assert parity_oracle(builds[n].levels[1].digraph)


@pytest.mark.parametrize("n", range(4))
def test_orbits_have_power_of_three_length(builds, n):
    s = builds[n]
    for orbit in phi_orbits(s.phi, s.graph.vertices):
        k = len(orbit)
        while k % 3 == 0:
            k //= 3
        assert k == 1


def test_only_base_points_are_fixed(builds):
    s = builds[2]
    fixed = {v for v in s.graph.vertices if s.phi[v] == v}
    assert fixed == {v for v, p in s.provenance.items() if p[0] == "base"}


def test_witness_triples_cycle(builds):
    s = builds[1]
    g = s.graph.digraph
    for key, (a, b, c) in s.witnesses.items():
        if s.klass(a) == 2:
            assert g.edge(a, b) == g.edge(b, c) == g.edge(c, a) == "out"
        else:
            assert g.edge(a, b) == "inc" and g.edge(b, c) == "inc"


def test_witness_realizes_its_type(builds):
    s = builds[2]
    g = s.graph
    for (stage, S, tau), xs in s.witnesses.items():
        for x in xs:
            assert tuple(g.edge(x, p) for p in S) == tau


def test_stage_one_realizes_all_types_over_base(builds):
    s = builds[2]
    rep = one_point_extension_coverage(s.levels[1], "parity-mp", 2, base=s.levels[0].vertices)
    assert rep.total > 0 and rep.fraction == 1.0


def test_literal_rule_fallback_is_logged(builds):
    events = builds[2].events
    assert events[0]["rule"] == LITERAL and events[0]["automorphism"]
    fallbacks = [e for e in events if e.get("fallback") == EQUIVARIANT]
    for e in fallbacks:
        assert e["fallback_automorphism"]
        assert len(e["counterexample"]["arc"]) == 2


def test_literal_rule_alone_raises_when_it_breaks(builds):
    s = builds[2]
    if not any(e.get("fallback") for e in s.events):
        pytest.skip("literal rule held for this input")
    stage1 = type(s)(s.base, s.levels[:2], {v: s.phi[v] for v in s.levels[1].vertices}, s.provenance)
    with pytest.raises(ConstructionError):
        extend_stage_sg(stage1, 2, cross_rule=LITERAL)
    assert check_stage(extend_stage_sg(stage1, 2, cross_rule=EQUIVARIANT))["ok"]


def test_unknown_rule_rejected():
    with pytest.raises(ValueError):
        extend_stage_sg(stage_zero(LinearOrder.chain(1)), 1, cross_rule="sideways")


def test_types_sorted_by_index_then_params():
    types = enumerate_types(stage_zero(LinearOrder.chain(2)), 2)
    keys = [w.key for w in types]
    assert keys == sorted(keys)
    assert len(keys) == len(set(keys))


def test_distinct_lengths_distinguished(builds):
    rec = {n: fixed_points_recover(s) for n, s in builds.items()}
    for a, b in itertools.combinations(rec, 2):
        assert brute_force_isomorphism(rec[a], rec[b]) is None


def test_bowtie_search_then_separation():
    g = bowtie()
    autos = antichain_fixing_search(g)
    assert len(autos) == 2
    swap = next(p for p in autos if p[0] != 0)
    case, inside, outside = separation_for(g, swap)
    h = add_separating_witness(g, inside, outside)
    assert len(antichain_fixing_search(h)) == 1
    final, counts, cases = saturate_separations(g)
    assert counts == [2, 1]
    assert cases == [case]


def test_rotation_uses_first_case():
    # one 3-antichain pointing at a single vertex; the rotation moves a with φ²(a) ≠ a
    g = MultipartiteDigraph.from_digraph(Digraph.from_arcs(range(4), [(0, 3), (1, 3), (2, 3)]))
    rot = {0: 1, 1: 2, 2: 0, 3: 3}
    assert is_automorphism(g.digraph, rot)
    case, inside, outside = separation_for(g, rot)
    assert case == 1
    h = add_separating_witness(g, inside, outside)
    assert not is_automorphism(h.digraph, {**rot, 4: 4})
    assert saturate_separations(g)[1][-1] == 1


def test_separating_witness_rejects_overlap():
    with pytest.raises(ValueError):
        add_separating_witness(bowtie(), {0}, {0})


def test_search_limit():
    big = MultipartiteDigraph.from_digraph(Digraph.from_arcs(range(9), []))
    with pytest.raises(ValueError):
        antichain_fixing_search(big, limit=1000)


def test_double_transposition_uses_second_case():
    g = MultipartiteDigraph.from_digraph(Digraph.from_arcs(range(5), [(v, 4) for v in range(4)]))
    phi = {0: 1, 1: 0, 2: 3, 3: 2, 4: 4}
    case, inside, outside = separation_for(g, phi)
    assert case == 2
    h = add_separating_witness(g, inside, outside)
    assert not is_automorphism(h.digraph, {**phi, 5: 5})


@pytest.mark.parametrize("sizes", [(2, 2), (3, 1), (2, 3), (4,)])
def test_separation_counts_never_increase(sizes):
    parts, nxt = [], 0
    for k in sizes:
        parts.append(list(range(nxt, nxt + k)))
        nxt += k
    arcs = [(x, y) for A, B in itertools.combinations(parts, 2) for x in A for y in B]
    final, counts, cases = saturate_separations(Digraph.from_arcs(range(nxt), arcs))
    assert counts[-1] == 1
    assert all(a >= b for a, b in zip(counts, counts[1:]))
    assert set(cases) <= {1, 2, 3}

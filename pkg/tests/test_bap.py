import itertools

import pytest
from hypothesis import given, settings, strategies as st

from conjbench.analysis import brute_force_isomorphism, enumerate_posets
from conjbench.bap import (ExtensionError, FinitaryType, admissible_types_free, admissible_types_poset,
                           bap_fixed_recover, bap_reduction, check_bap_bullets, extension_operator_free,
                           extension_operator_poset, induced_bap_conjugacy, natural_extension)
from conjbench.core import Digraph, Poset, compose, is_automorphism, relabel, validate

from conftest import one_point_placements, posets


def test_types_over_one_point():
    types = admissible_types_poset(Poset.from_pairs([0], []), 1)
    assert {t.relations for t in types} == {(), ("lt",), ("gt",), ("inc",)}


@pytest.mark.parametrize("P", enumerate_posets(3))
def test_admissible_types_match_placements(P):
    want = set()
    for pl in one_point_placements(P):
        for n in range(3):
            for S in itertools.combinations(P.vertices, n):
                want.add((S, tuple(pl[s] for s in S)))
    got = {(t.params, t.relations) for t in admissible_types_poset(P, 2)}
    assert got == want


@settings(max_examples=25, deadline=None)
@given(posets(max_size=4))
def test_extension_bullets(P):
    ext = extension_operator_poset(P, 2)
    assert all(check_bap_bullets(ext).values())
    assert validate(ext.extended).ok
    psi = ext.cycle
    assert compose(psi, psi) == {v: v for v in ext.extended.vertices}


def test_free_extension_bullets():
    A = Digraph.from_arcs(range(3), [(0, 1), (1, 2)])
    ext = extension_operator_free(A, 2)
    assert all(check_bap_bullets(ext).values())
    assert len(ext.witnesses) == len(admissible_types_free(A, 2)) == 1 + 3 * 3 + 3 * 9
    # the free operator never relates twins
    for xs in ext.witnesses.values():
        assert ext.extended.edge(*xs) == "inc"


def test_arity_three_cycles():
    ext = extension_operator_poset(Poset.from_pairs([0, 1], [(0, 1)]), 1, arity=3)
    bullets = check_bap_bullets(ext)
    assert all(bullets.values())


def test_bad_arity():
    with pytest.raises(ExtensionError):
        extension_operator_poset(Poset.from_pairs([0], []), 1, arity=0)


@settings(max_examples=20, deadline=None)
@given(posets(max_size=3), st.data())
def test_naturality(P, data):
    perm = dict(zip(P.vertices, data.draw(st.permutations([v + 7 for v in P.vertices]))))
    P2 = relabel(P, perm)
    e1, e2 = extension_operator_poset(P, 2), extension_operator_poset(P2, 2)
    bar = natural_extension(perm, e1, e2)
    for v in e1.extended.vertices:
        assert bar[e1.cycle[v]] == e2.cycle[bar[v]]


def test_naturality_rejects_non_isomorphism():
    P = Poset.from_pairs([0, 1], [(0, 1)])
    Q = Poset.from_pairs([0, 1], [])
    with pytest.raises(ExtensionError):
        natural_extension({0: 0, 1: 1}, extension_operator_poset(P, 1), extension_operator_poset(Q, 1))


def test_mapped_type_sorts_params():
    t = FinitaryType((0, 1), ("lt", "inc"))
    assert t.mapped({0: 9, 1: 3}) == FinitaryType((3, 9), ("inc", "lt"))


@pytest.mark.parametrize("P", enumerate_posets(3))
def test_reduction_recovers_input(P):
    s = bap_reduction(P, 2, 1)
    for Q in s.levels:
        assert is_automorphism(Q, {v: s.phi[v] for v in Q.vertices})
    assert brute_force_isomorphism(bap_fixed_recover(s), P) is not None


def test_reduction_conjugacy_for_relabeled_input():
    P = Poset.from_pairs([0, 1, 2], [(0, 1)])
    perm = {0: 2, 1: 0, 2: 1}
    P2 = relabel(P, perm)
    alpha = induced_bap_conjugacy(bap_reduction(P, 1, 2), bap_reduction(P2, 1, 2), perm)
    assert len(alpha) == len(bap_reduction(P, 1, 2).poset)


def test_reduction_rejects_bad_input():
    with pytest.raises(ExtensionError):
        bap_reduction(Poset.from_pairs([0, 1], [(0, 1), (1, 0)]), 1, 1)

import itertools
import random

import pytest

from divfield.congruence import (
    RELATORS,
    CosetEnumerationError,
    FiniteGroup,
    Mat2,
    check_presentation,
    commutator_word,
    congruence_image,
    coset_enumerate,
    direct_product_check,
    eval_word,
    gamma2_prime,
    invert_word,
    layer_check,
    match_isomorphism,
    order_profile,
    presented_group,
    sigma_tilde,
    tau_tilde,
    unique_quotient_check,
)


def sl2_order(m: int) -> int:
    # |SL2(Z/2^n)| = m^3 (1 - 1/4)
    return m ** 3 * 3 // 4


def test_mat2_invariants():
    with pytest.raises(ValueError):
        Mat2(1, 1, 1, 1, 8)
    with pytest.raises(ValueError):
        Mat2(1, 0, 0, 1, 6)
    M = Mat2(3, 2, 4, 3, 8)
    assert M.a == 3 and (M * M.inverse()).is_identity()
    rng = random.Random(2)
    G = congruence_image(4, 0)
    for _ in range(50):
        X, Y = rng.choice(G.elements), rng.choice(G.elements)
        Z = X * Y
        assert (Z.a * Z.d - Z.b * Z.c) % 16 == 1


def test_sl2_orders_by_exhaustion():
    assert congruence_image(1, 0).order == 6
    for n in (2, 3):
        assert congruence_image(n, 0).order == sl2_order(2 ** n)
    # index of Gamma(2) is |SL2(Z/2)| = 6
    assert congruence_image(3, 1).order == sl2_order(8) // 6 == 64
    assert congruence_image(3, 2).order == 8


def test_congruence_image_range_checks():
    with pytest.raises(ValueError):
        congruence_image(5, 1)
    with pytest.raises(ValueError):
        congruence_image(3, 4)


def test_gamma2_prime():
    G = gamma2_prime(8)
    assert G.order == 32
    assert Mat2.scalar(-1, 8) not in G
    both = {Mat2.identity(8), Mat2.scalar(-1, 8)} & set(G.elements)
    assert both == {Mat2.identity(8)}
    assert direct_product_check(8)["passed"]
    assert direct_product_check(16)["passed"]


def test_layers_are_elementary_abelian_of_order_8():
    for n in (1, 2):
        rep = layer_check(n)
        assert rep["order"] == 8 and rep["exponent_2"] and rep["passed"]
    assert order_profile(congruence_image(3, 2)) == {1: 1, 2: 7}


def test_presentation_report():
    G = gamma2_prime(8)
    rep = check_presentation(G, sigma_tilde(8), tau_tilde(8))
    assert rep.passed
    assert list(rep.relations) == list(RELATORS)
    assert all(rep.relations.values())
    assert rep.abstract_order == 32
    assert rep.commutator_order == 2 and rep.commutator_element_orders == [2]
    assert rep.abelianization_is_z4xz4


def test_relators_fail_for_a_wrong_pair():
    # s, t -> s~^2, t~ still satisfy the relations but no longer generate
    G = gamma2_prime(8)
    s2 = sigma_tilde(8) * sigma_tilde(8)
    rep = check_presentation(G, s2, tau_tilde(8))
    assert not rep.generates and not rep.passed


def test_word_helpers():
    assert invert_word("sTt") == "TtS"
    assert commutator_word("s", "t") == "STst"
    G = gamma2_prime(8)
    s, t = sigma_tilde(8), tau_tilde(8)
    c = eval_word("STst", {"s": s, "t": t}, Mat2.__mul__, Mat2.identity(8), Mat2.inverse)
    assert c == s.inverse() * t.inverse() * s * t
    assert G.commutator(s, t) == c


@pytest.mark.parametrize(
    "gens, rels, order",
    [
        ("s", ["sssss"], 5),
        ("st", ["ssss", "tt", "stst"], 8),  # dihedral of order 8
        ("st", ["sss", "tt", "stst"], 6),  # S3
        ("st", ["ss", "tt", "stST"], 4),  # Klein four
        ("st", ["ssss", "ssTT", "tsTs"], 8),  # quaternion
    ],
)
def test_coset_enumeration_known_groups(gens, rels, order):
    table = coset_enumerate(gens, rels)
    assert len(table) == order
    # every column is a permutation and inverse columns undo each other
    for k in range(len(gens)):
        fwd = [row[2 * k] for row in table]
        back = [row[2 * k + 1] for row in table]
        assert sorted(fwd) == list(range(order))
        assert all(back[fwd[c]] == c for c in range(order))


def test_coset_enumeration_cap():
    with pytest.raises(CosetEnumerationError):
        coset_enumerate("st", ["ssss"], max_cosets=200)


def test_presented_group_matches_gamma2_prime():
    P, im = presented_group()
    assert P.order == 32
    G = gamma2_prime(8)
    assert match_isomorphism(P, G, [(im["s"], sigma_tilde(8)), (im["t"], tau_tilde(8))])


def test_match_isomorphism_examples():
    H = congruence_image(3, 1)
    assert match_isomorphism(H, H, [(x, x) for x in H])
    res = match_isomorphism(H, gamma2_prime(8), [(x, x) for x in H])
    assert not res and "orders" in res.reason


def test_unique_quotient():
    rep = unique_quotient_check()
    assert rep["H_order"] == 256
    assert rep["normal_closure_order"] == rep["kernel_order"] == 8
    assert rep["normal_closure_equals_kernel"]
    assert rep["centre_gamma2prime_elementary_abelian"] and rep["centre_gamma2_elementary_abelian"]
    assert rep["gamma2_not_2_generated"]
    assert rep["passed"]


def test_gamma2_needs_three_generators_by_brute_force():
    # independent of the helper: no pair generates, some triple does
    G = congruence_image(3, 1)
    els = G.elements
    idx = G.index
    t = G.table

    def span(gs):
        seen = {idx[G.identity]}
        frontier = list(seen)
        while frontier:
            new = []
            for x in frontier:
                for g in gs:
                    y = t[g][x]
                    if y not in seen:
                        seen.add(y)
                        new.append(y)
            frontier = new
        return len(seen)

    ids = [idx[x] for x in els]
    assert all(span((a, b)) < 64 for a, b in itertools.combinations(ids, 2))
    s, tt, m = idx[sigma_tilde(8)], idx[tau_tilde(8)], idx[Mat2.scalar(-1, 8)]
    assert span((s, tt, m)) == 64


def test_finite_group_helpers():
    G = gamma2_prime(8)
    assert not G.is_abelian()
    assert len(G.center()) == 8
    assert G.commutator_subgroup().order == 2
    assert len(G.table_hash()) == 16
    with pytest.raises(ValueError):
        FiniteGroup([Mat2(1, 2, 0, 1, 8)], Mat2.__mul__)

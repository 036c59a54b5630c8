import pytest

from modlie.divpow import DPDescriptor, vect_algebra
from modlie.errors import EvenElement, NoSolution, NotWeightBasis, OddParity
from modlie.families import build_L
from modlie.matrices import mat_compose, mat_equal, mat_power
from modlie.pstruct import (
    ad_power,
    check_pmap,
    pmap_specializes,
    same_coset,
    semilinearity_check,
    solve_p_power,
    torus_indices,
    torus_pmap_ansatz,
    two_p_power,
    verify_restricted,
)
from modlie.superalg import center


@pytest.fixture(scope="module")
def witt_2():
    """W(1;2): 9-dimensional, not restricted"""
    return vect_algebra(DPDescriptor(m=1, N=(2,), p=3))


# ==================== p-TH POWERS ====================

def test_sl2_p_map(sl2):
    """✅ h^[3] = h and e^[3] = f^[3] = 0"""
    report = verify_restricted(sl2)
    assert report.restricted
    assert report.torus_stable
    pmap = report.pmap
    assert pmap.value(sl2.index("h")) == sl2.element("h")
    assert pmap.value(sl2.index("e")) == sl2.zero()
    assert pmap.value(sl2.index("f")) == sl2.zero()
    assert not pmap.ambiguous


def test_abelian_p_power_is_ambiguous(abelian3):
    """✅ In an abelian algebra x^[p] is only defined modulo the center"""
    result = solve_p_power(abelian3, abelian3.element("a"))
    assert result.value == abelian3.zero()
    assert result.ambiguous
    assert result.center.dim == 3


def test_p_power_of_odd_element(odd_pair):
    """✅ solve_p_power refuses odd elements"""
    with pytest.raises(OddParity):
        solve_p_power(odd_pair, odd_pair.element("x"))
    with pytest.raises(OddParity):
        ad_power(odd_pair, odd_pair.element("x"), 3)


def _naive_power(M, n, parity):
    result = M
    for _ in range(n - 1):
        result = mat_compose(M, result, parity)
    return result


@pytest.mark.parametrize("n", [1, 2, 3, 5, 6, 9])
def test_ad_power_matches_repeated_composition(n):
    """✅ Squaring gives the same ad(x)^n as n - 1 compositions on L(1, 1, 1)"""
    g = build_L(1, 1, 1)
    x = tuple(a + b for a, b in zip(g.element("h2"), g.element("y1")))
    assert mat_equal(ad_power(g, x, n), _naive_power(g.ad_matrix(x), n, 0))


def test_odd_ad_power_matches_repeated_composition(odd_pair):
    """✅ Even powers of ad(x) for odd x agree with direct composition"""
    x = odd_pair.element("x")
    M = odd_pair.ad_matrix(x)
    for n in (2, 4, 6):
        assert mat_equal(mat_power(M, n, 1), _naive_power(M, n, 1))


def test_two_p_power(odd_pair):
    """✅ x^[6] = (x^2)^[3] = 0 modulo the center"""
    result = two_p_power(odd_pair, odd_pair.element("x"))
    assert result.value == odd_pair.zero()
    with pytest.raises(EvenElement):
        two_p_power(odd_pair, odd_pair.element("h"))


def test_restricted_superalgebra(odd_pair):
    """✅ Every basis element of q(1|1) has a p|2p-power"""
    report = verify_restricted(odd_pair)
    assert report.restricted
    assert set(report.pmap.odd) == {odd_pair.index("x")}


def test_witt_algebra_not_restricted(witt_2):
    """✅ ad(d)^3 is an outer derivation of W(1;2)"""
    assert witt_2.dim == 9
    report = verify_restricted(witt_2)
    assert not report.restricted
    assert report.pmap is None
    assert "d_u1" in [f.name for f in report.failures]
    with pytest.raises(NoSolution):
        solve_p_power(witt_2, witt_2.element("d_u1"))


def test_witt_algebra_height_one_restricted():
    """✅ W(1;1) is restricted"""
    assert verify_restricted(vect_algebra(DPDescriptor(m=1, N=(1,), p=3))).restricted


# ==================== TORUS ANSATZ ====================

def test_torus_ansatz_sl2(sl2):
    """✅ h -> h, e, f -> 0 passes check_pmap"""
    ansatz = torus_pmap_ansatz(sl2, torus_indices(sl2))
    assert check_pmap(sl2, ansatz) == []


def test_torus_ansatz_not_weight_basis(sl2):
    """✅ e does not act diagonally"""
    with pytest.raises(NotWeightBasis):
        torus_pmap_ansatz(sl2, [sl2.index("e")])


def test_check_pmap_finds_wrong_value(sl2):
    """✅ Claiming h^[3] = 0 should be caught"""
    ansatz = torus_pmap_ansatz(sl2, torus_indices(sl2))
    ansatz.even[sl2.index("h")] = sl2.zero()
    assert [f.name for f in check_pmap(sl2, ansatz)] == ["h"]


def test_same_coset_modulo_center(abelian3):
    """✅ Anything equals 0 modulo the whole center of an abelian algebra"""
    assert same_coset(abelian3, abelian3.element("a"), abelian3.zero(), center(abelian3))
    assert not same_coset(abelian3, abelian3.element("a"), abelian3.zero(), None)


# ==================== SYMBOLIC ====================

def test_symbolic_p_map_specialises(sl2_symbolic):
    """✅ The symbolic map for [e, f] = eps*h agrees with the numeric one at eps = 2"""
    report = verify_restricted(sl2_symbolic)
    assert report.restricted
    assert report.pmap.value(sl2_symbolic.index("h")) == sl2_symbolic.element("h")
    assert pmap_specializes(sl2_symbolic, report.pmap, {"eps": 2}) == []


def test_semilinearity_sl2(sl2):
    """✅ (c x)^[p] = c^p x^[p] on random elements of sl(2)"""
    pmap = verify_restricted(sl2).pmap
    assert semilinearity_check(sl2, pmap, trials=20, seed=1).ok


def test_semilinearity_L111():
    """✅ Semilinearity holds on L(1, 1, 1)"""
    g = build_L(1, 1, 1)
    report = verify_restricted(g)
    assert report.restricted
    assert semilinearity_check(g, report.pmap, trials=100, seed=20240601).ok

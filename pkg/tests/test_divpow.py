import pytest

from modlie.divpow import (
    DPDescriptor,
    DPElement,
    VectorField,
    bar_u,
    certify_bar_u_square,
    contact_bracket,
    contact_jacobi_failures,
    deformed_divergence,
    divergence,
    dp_derivative,
    dp_inverse,
    dp_multiply,
    k31_descriptor,
    mono_parity,
    one_minus_bar_u,
    parse_dp,
    parse_header,
    svect_deformed,
    verify_eq_new,
    vect_algebra,
    vf_bracket,
)
from modlie.errors import NotAUnit, OddIndex, ParseError, WrongDescriptor
from modlie.superalg import check_super_identities

O11 = DPDescriptor(m=1, N=(1,), p=3)
O_SUPER = DPDescriptor(m=1, N=(1,), n=2, p=3)


# ==================== DIVIDED POWERS ====================

def test_divided_power_product():
    """✅ u^(1) u^(1) = 2 u^(2) and u^(1) u^(2) = 3 u^(3) = 0"""
    u = DPElement.variable(O11, "u1")
    u2 = DPElement.variable(O11, "u1", 2)
    assert dp_multiply(O11, u, u) == 2 * u2
    assert dp_multiply(O11, u, u2).is_zero()


def test_parse_divided_vs_ordinary_power():
    """✅ u1^(2) is a divided power, u1^2 = 2 u1^(2)"""
    assert parse_dp(O11, "u1^(2)") == DPElement.variable(O11, "u1", 2)
    assert parse_dp(O11, "u1^2") == 2 * DPElement.variable(O11, "u1", 2)


def test_odd_indeterminates_anticommute():
    """✅ th1 th2 = -th2 th1 and th1^2 = 0"""
    t1 = DPElement.variable(O_SUPER, "th1")
    t2 = DPElement.variable(O_SUPER, "th2")
    assert dp_multiply(O_SUPER, t1, t2) == -dp_multiply(O_SUPER, t2, t1)
    assert dp_multiply(O_SUPER, t1, t1).is_zero()


def test_derivative_lowers_divided_power():
    """✅ d_u u^(2) = u"""
    assert dp_derivative(O11, 0, DPElement.variable(O11, "u1", 2)) == DPElement.variable(O11, "u1")


def test_odd_derivative_sign():
    """✅ d_th2 (th1 th2) = -th1"""
    t1 = DPElement.variable(O_SUPER, "th1")
    t2 = DPElement.variable(O_SUPER, "th2")
    assert dp_derivative(O_SUPER, 2, dp_multiply(O_SUPER, t1, t2)) == -t1


def test_inverse_of_unit():
    """✅ (1 + u)^-1 (1 + u) = 1"""
    f = DPElement.one(O11) + DPElement.variable(O11, "u1")
    assert dp_multiply(O11, dp_inverse(O11, f), f) == DPElement.one(O11)
    with pytest.raises(NotAUnit):
        dp_inverse(O11, DPElement.variable(O11, "u1"))


def test_header_parsing():
    """✅ O(m=1;N=[1]|n=2;p=3) reads back into the descriptor"""
    assert parse_header(O_SUPER.header) == O_SUPER
    assert O_SUPER.dim == 12
    with pytest.raises(ParseError):
        parse_header("O(1;1)")


def test_bar_u_squares_to_zero():
    """✅ The top monomial squares to 0"""
    assert certify_bar_u_square(O_SUPER)
    assert bar_u(O11) == DPElement.variable(O11, "u1", 2)


# ==================== VECTOR FIELDS ====================

def test_vector_field_bracket():
    """✅ [d, u^(2) d] = u d"""
    d = VectorField.partial(O11, 0)
    D = VectorField.partial(O11, 0, DPElement.variable(O11, "u1", 2))
    assert vf_bracket(d, D) == VectorField.partial(O11, 0, DPElement.variable(O11, "u1"))


def test_divergence():
    """✅ div(u^(2) d) = u, and the deformed divergence with f = 1 is the plain one"""
    D = VectorField.partial(O11, 0, DPElement.variable(O11, "u1", 2))
    assert divergence(D) == DPElement.variable(O11, "u1")
    assert deformed_divergence(D, DPElement.one(O11)) == divergence(D)


def test_eq_new_formula():
    """✅ ((1 - u_bar) d_u)^[3] = -(d_u^2 u_bar) d_u in svect_(1+u_bar) for m = 1, n = 2"""
    report = verify_eq_new(O_SUPER, 0)
    assert report.x_in_algebra
    assert report.y_in_algebra
    assert report.ok


def test_eq_new_odd_index():
    """✅ The formula is for even indeterminates only"""
    with pytest.raises(OddIndex):
        verify_eq_new(O_SUPER, 1)


def test_svect_wrong_descriptor():
    """✅ svect_(1+u) needs N = 1 and paired odd indeterminates"""
    with pytest.raises(WrongDescriptor):
        svect_deformed(DPDescriptor(m=1, N=(1,), n=1, p=3))
    with pytest.raises(WrongDescriptor):
        svect_deformed(DPDescriptor(m=1, N=(2,), n=2, p=3))


def test_witt_algebra_identities():
    """✅ W(1;1|1) satisfies the super identities"""
    g = vect_algebra(DPDescriptor(m=1, N=(1,), n=1, p=3))
    assert g.sdim == (6, 6)
    assert check_super_identities(g).ok


# ==================== CONTACT BRACKET ====================

def test_contact_bracket_values():
    """✅ {1, t} = 2 and {ph, qh} = -{qh, ph} = 1"""
    d = k31_descriptor()
    one = DPElement.one(d)
    ph, qh, t = (DPElement.variable(d, n) for n in ("ph", "qh", "t"))
    assert contact_bracket(one, t) == 2 * one
    assert contact_bracket(ph, qh) == one
    assert contact_bracket(qh, ph) == -one


def test_contact_bracket_wrong_descriptor():
    """✅ The contact bracket lives on O(3;(1,1,1)) only"""
    f = DPElement.one(O11)
    with pytest.raises(WrongDescriptor):
        contact_bracket(f, f)


def test_contact_jacobi():
    """✅ Jacobi holds on all triples of the 27 monomials"""
    assert contact_jacobi_failures(k31_descriptor()) == []


# ==================== ALGEBRAIC LAWS ====================

def _monomials(d):
    return [DPElement(d, {mono: d.ring.one}) for mono in d.monomials()]


def test_product_associative_and_supercommutative():
    """✅ Exhaustive on the 12 monomials of O(1;1|2)"""
    d = O_SUPER
    monos = d.monomials()
    elems = _monomials(d)
    for a, f in zip(monos, elems):
        for b, g in zip(monos, elems):
            fg = dp_multiply(d, f, g)
            gf = dp_multiply(d, g, f)
            assert fg == (-gf if mono_parity(a) and mono_parity(b) else gf)
            for h in elems:
                assert dp_multiply(d, fg, h) == dp_multiply(d, f, dp_multiply(d, g, h))


def test_derivative_super_leibniz():
    """✅ d_i(fg) = d_i(f) g + (-1)^{|d_i||f|} f d_i(g) on all monomial pairs of O(1;1|2)"""
    d = O_SUPER
    monos = d.monomials()
    elems = _monomials(d)
    for i in range(d.nvars):
        for a, f in zip(monos, elems):
            for g in elems:
                left = dp_derivative(d, i, dp_multiply(d, f, g))
                first = dp_multiply(d, dp_derivative(d, i, f), g)
                second = dp_multiply(d, f, dp_derivative(d, i, g))
                sign_odd = d.is_odd(i) and mono_parity(a)
                assert left == (first - second if sign_odd else first + second)


@pytest.mark.parametrize(
    "d",
    [O11, O_SUPER, DPDescriptor(m=2, N=(1, 1), n=2, p=3), DPDescriptor(m=1, N=(1,), n=2, p=5)],
    ids=["O(1;1)", "O(1;1|2)", "O(2;1|2)", "O(1;1|2) p=5"],
)
def test_one_plus_bar_u_inverse(d):
    """✅ (1 + u_bar)(1 - u_bar) = 1"""
    one = DPElement.one(d)
    assert dp_multiply(d, one + bar_u(d), one_minus_bar_u(d)) == one
    assert dp_inverse(d, one + bar_u(d)) == one_minus_bar_u(d)


def test_vector_field_jacobi_super():
    """✅ W(1;1|2) satisfies the super Jacobi identity"""
    g = vect_algebra(O_SUPER)
    assert g.sdim == (18, 18)
    assert check_super_identities(g).ok


# ==================== svect_(1+u) ====================

@pytest.fixture(scope="module")
def svect_112():
    return svect_deformed(O_SUPER)


def test_svect_in_divergence_kernel(svect_112):
    """✅ Every basis field preserves (1 + u_bar) vol"""
    f = DPElement.one(O_SUPER) + bar_u(O_SUPER)
    assert svect_112.dim > 0
    for D in svect_112.fields:
        assert deformed_divergence(D, f).is_zero()


def test_svect_closed_under_bracket(svect_112):
    """✅ Brackets of basis fields stay inside svect_(1+u)"""
    fields = svect_112.fields
    for a in range(len(fields)):
        for b in range(a, len(fields)):
            assert svect_112.contains(vf_bracket(fields[a], fields[b]))


@pytest.mark.parametrize(
    "d",
    [DPDescriptor(m=2, N=(1, 1), n=2, p=3), DPDescriptor(m=1, N=(1,), n=2, p=5)],
    ids=["p=3 m=2 s=1", "p=5 m=1 s=1"],
)
def test_eq_new_other_descriptors(d):
    """✅ The formula holds for every even index at (3,2,1) and (5,1,1)"""
    realization = svect_deformed(d)
    for i in range(d.m):
        assert verify_eq_new(d, i, realization).ok

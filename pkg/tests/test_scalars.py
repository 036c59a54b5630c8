import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modlie.errors import MissingAssignment, MixedParity, NotAUnit, OddParity, ParseError, ZeroForInvertible
from modlie.scalars import ParameterRing, constant_ring, default_ring, get_field, parse_scalar

RING = default_ring(3)
EPS = RING.gen("eps")
DELTA = RING.gen("delta")


def build(terms):
    total = RING.zero
    for c, e, d in terms:
        total = total + RING.const(c) * EPS ** e * DELTA ** d
    return total


scalars = st.lists(
    st.tuples(st.integers(0, 2), st.integers(-2, 2), st.integers(0, 2)), max_size=4
).map(build)
points = st.tuples(st.sampled_from([1, 2]), st.integers(0, 2))


# ==================== RING AXIOMS ====================

@settings(max_examples=60, deadline=None)
@given(scalars, scalars, scalars)
def test_ring_axioms(x, y, z):
    """✅ Should be a commutative ring on even scalars"""
    assert x + y == y + x
    assert x * y == y * x
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x - x == RING.zero


@settings(max_examples=60, deadline=None)
@given(scalars, scalars, points)
def test_evaluate_is_a_homomorphism(x, y, point):
    """✅ Evaluating at a point should respect + and *"""
    at = {"eps": point[0], "delta": point[1]}
    assert (x + y).evaluate(at) == x.evaluate(at) + y.evaluate(at)
    assert (x * y).evaluate(at) == x.evaluate(at) * y.evaluate(at)


@settings(max_examples=60, deadline=None)
@given(scalars, scalars, points)
def test_frobenius_is_additive(x, y, point):
    """✅ a -> a^3 should be additive and agree with evaluation"""
    at = {"eps": point[0], "delta": point[1]}
    assert (x + y).frobenius() == x.frobenius() + y.frobenius()
    assert x.frobenius().evaluate(at) == x.evaluate(at) ** 3


@settings(max_examples=60, deadline=None)
@given(scalars)
def test_str_parses_back(x):
    """✅ Printed scalars should parse to the same scalar"""
    assert parse_scalar(RING, str(x)) == x


# ==================== UNITS ====================

def test_eps_is_invertible():
    """✅ eps * eps^-1 should be 1"""
    assert EPS * EPS.inverse() == RING.one
    assert parse_scalar(RING, "eps^-2") * EPS ** 2 == RING.one


def test_delta_is_not_a_unit():
    """✅ Even non-invertible generators and sums are not units"""
    assert not DELTA.is_unit()
    assert not (RING.one + EPS).is_unit()
    with pytest.raises(NotAUnit):
        (RING.one + DELTA).inverse()


def test_inverse_with_nilpotent_part():
    """✅ (1 + ab)^-1 should be 1 - ab for odd a, b"""
    ring = ParameterRing(field=get_field(3), odd=("a", "b"))
    ab = ring.gen("a") * ring.gen("b")
    assert (ring.one + ab).inverse() == ring.one - ab


def test_odd_generators_anticommute():
    """✅ tau^2 = 0 and ab = -ba"""
    ring = ParameterRing(field=get_field(3), odd=("a", "b"))
    a, b = ring.gen("a"), ring.gen("b")
    assert (a * a).is_zero()
    assert a * b == -(b * a)
    tau = RING.gen("tau")
    assert (tau * tau).is_zero()


# ==================== SPECIALISATION ====================

def test_substitute_partial():
    """✅ Substituting delta keeps eps symbolic"""
    x = parse_scalar(RING, "eps*delta + eps^-1")
    assert x.substitute({"delta": 2}) == parse_scalar(RING, "2*eps + eps^-1")


def test_substitute_greek_alias():
    """✅ δ should be accepted for delta"""
    assert DELTA.substitute({"δ": 1}) == RING.one


def test_evaluate_values():
    """✅ eps^2 + delta at (2, 1) is 5 = 2"""
    x = parse_scalar(RING, "eps^2 + delta")
    assert x.evaluate({"eps": 2, "delta": 1}) == 2


def test_evaluate_missing_assignment():
    """✅ Should refuse to evaluate with a generator unassigned"""
    with pytest.raises(MissingAssignment):
        parse_scalar(RING, "eps*rho").evaluate({"eps": 1})


def test_zero_for_invertible():
    """✅ eps = 0 should be rejected"""
    with pytest.raises(ZeroForInvertible):
        EPS.evaluate({"eps": 0})
    with pytest.raises(ZeroForInvertible):
        EPS.substitute({"eps": 0})


def test_mixed_parity():
    """✅ 1 + tau is not homogeneous"""
    with pytest.raises(MixedParity):
        RING.one + RING.gen("tau")


def test_frobenius_of_odd_scalar():
    """✅ Frobenius needs an even scalar"""
    with pytest.raises(OddParity):
        RING.gen("tau").frobenius()


# ==================== PARSING ====================

def test_parse_unknown_generator():
    """✅ Unknown names are a ParseError"""
    with pytest.raises(ParseError):
        parse_scalar(RING, "2*mu")


def test_parse_extension_field_literal():
    """✅ (x+1) should be a unit of GF(9) and print back"""
    ring = constant_ring(3, 2)
    a = parse_scalar(ring, "(x+1)")
    assert a.is_constant()
    assert a * a.inverse() == ring.one
    assert parse_scalar(ring, str(a)) == a


def test_literal_outside_prime_field():
    """✅ (x+1) is not an element of GF(3)"""
    with pytest.raises(ParseError):
        parse_scalar(constant_ring(3), "(x+1)")

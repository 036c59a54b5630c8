import pytest
from conftest import FIXTURES
from hypothesis import given, settings
from hypothesis import strategies as st

from modlie.divpow import DPDescriptor, vect_algebra
from modlie.errors import (
    EvenElement,
    NonCommutingTorus,
    NotDiagonal,
    ParseError,
    SymbolicNotSupported,
    ZeroForInvertible,
)
from modlie.families import build_L
from modlie.matrices import gf_rank, mat_compose, mat_equal
from modlie.pstruct import torus_indices
from modlie.scalars import constant_ring
from modlie.superalg import (
    BasisElement,
    SuperAlgebra,
    center,
    check_grading,
    check_super_identities,
    derived_subalgebra,
    read_algebra_json,
    squaring,
    supertrace_form,
    torus_weights,
    weight_decomposition,
    write_algebra_json,
)


@pytest.fixture(scope="module")
def fixture_algebra():
    return read_algebra_json(FIXTURES / "br2-eps1" / "algebra.json")


# ==================== BRACKET ====================

def test_sl2_brackets(sl2):
    """✅ [e, f] = h and [f, e] = -h"""
    e, h, f = sl2.element("e"), sl2.element("h"), sl2.element("f")
    assert sl2.bracket(e, f) == h
    assert sl2.bracket(f, e) == tuple(-a for a in h)
    assert sl2.bracket(h, e) == sl2.vector([(2, "e")])


def test_sl2_identities(sl2):
    """✅ sl(2) satisfies skew-symmetry and Jacobi"""
    assert check_super_identities(sl2).ok


def test_odd_bracket_is_symmetric(odd_pair):
    """✅ [x, x] may be nonzero for odd x and the identities still hold"""
    x = odd_pair.element("x")
    assert odd_pair.bracket(x, x) == odd_pair.element("h")
    assert check_super_identities(odd_pair).ok


def test_jacobi_violation_reported():
    """✅ Should report the failing triple for a non-Lie table"""
    ring = constant_ring(3)
    basis = [BasisElement("a"), BasisElement("b"), BasisElement("c")]
    g = SuperAlgebra(ring, basis, {(0, 1): {0: ring.one}, (0, 2): {1: ring.one}})
    report = check_super_identities(g)
    assert not report.ok
    assert [t for t, _ in report.jacobi] == [(0, 1, 2)]


def test_even_square_reported():
    """✅ [a, a] != 0 for even a breaks skew-symmetry"""
    ring = constant_ring(3)
    g = SuperAlgebra(ring, [BasisElement("a"), BasisElement("b")], {(0, 0): {1: ring.one}})
    assert check_super_identities(g).skew == [(0, 0)]


def test_parity_violation_reported():
    """✅ An even bracket with odd value breaks parity"""
    ring = constant_ring(3)
    basis = [BasisElement("a"), BasisElement("b"), BasisElement("x", parity=1)]
    g = SuperAlgebra(ring, basis, {(0, 1): {2: ring.one}})
    assert check_super_identities(g).parity == [(0, 1)]


def test_duplicate_names_rejected():
    """✅ Basis names must be unique"""
    ring = constant_ring(3)
    with pytest.raises(ParseError):
        SuperAlgebra(ring, [BasisElement("a"), BasisElement("a")], {})


# ==================== STRUCTURE ====================

def test_sl2_structure(sl2):
    """✅ sl(2) over GF(3): trivial center, perfect, nondegenerate Killing form"""
    assert center(sl2).dim == 0
    assert derived_subalgebra(sl2, 1).dim == 3
    assert gf_rank(supertrace_form(sl2)) == 3


def test_abelian_structure(abelian3):
    """✅ Abelian algebra is its own center with trivial derived algebra"""
    assert center(abelian3).dim == 3
    assert derived_subalgebra(abelian3, 1).dim == 0
    assert gf_rank(supertrace_form(abelian3)) == 0


def test_center_needs_specialisation(sl2_symbolic):
    """✅ center() refuses symbolic constants"""
    with pytest.raises(SymbolicNotSupported):
        center(sl2_symbolic)


def test_weight_decomposition(sl2):
    """✅ ad h splits sl(2) into weights 2, 0, 1 keyed by integers mod 3"""
    spaces = weight_decomposition(sl2, [sl2.element("h")])
    assert set(spaces) == {(0,), (1,), (2,)}
    assert spaces[(2,)].rows == (sl2.element("e"),)
    assert spaces[(1,)].rows == (sl2.element("f"),)
    assert spaces[(0,)].rows == (sl2.element("h"),)


def test_weight_decomposition_not_diagonal(sl2):
    """✅ ad e is not diagonal on the basis"""
    with pytest.raises(NotDiagonal):
        weight_decomposition(sl2, [sl2.element("e")])


def test_weight_decomposition_non_commuting_torus(sl2):
    """✅ h and e do not commute, so they do not form a torus"""
    with pytest.raises(NonCommutingTorus):
        weight_decomposition(sl2, [sl2.element("h"), sl2.element("e")])


def test_weight_decomposition_L111():
    """✅ L(1, 1, 1) has 9 weight spaces for (h2, h1), the zero space being the torus"""
    g = build_L(1, 1, 1)
    spaces = weight_decomposition(g, [g.element(i) for i in torus_indices(g)])
    assert len(spaces) == 9
    assert spaces[(0, 0)].dim == 2
    assert sum(s.dim for s in spaces.values()) == g.dim
    assert all(0 <= w < 3 for key in spaces for w in key)


def test_weight_decomposition_symbolic_weights():
    """✅ Weights that depend on eps need a specialised algebra"""
    g = build_L()
    with pytest.raises(SymbolicNotSupported):
        weight_decomposition(g, [g.element(i) for i in torus_indices(g)])


@pytest.mark.parametrize("reading", ["replace", "add"])
def test_weights_add_under_bracket(reading):
    """✅ [g_a, g_b] lies in g_{a+b} for the symbolic L(eps, delta, rho)"""
    g = build_L(reading=reading, check=False)
    diagonals = torus_weights(g, [g.element(i) for i in torus_indices(g)])
    for i in range(g.dim):
        for j in range(g.dim):
            for k in g.basis_bracket(i, j):
                for diag in diagonals:
                    assert diag[k] == diag[i] + diag[j], (g.names[i], g.names[j], g.names[k])


def test_squaring(odd_pair):
    """✅ x^2 = [x, x]/2 = 2h in characteristic 3"""
    x = odd_pair.element("x")
    assert squaring(odd_pair, x) == odd_pair.vector([(2, "h")])
    with pytest.raises(EvenElement):
        squaring(odd_pair, odd_pair.element("h"))


# ==================== SPECIALISATION ====================

def test_specialize(sl2_symbolic):
    """✅ eps -> 2 gives [e, f] = 2h"""
    g = sl2_symbolic.specialize({"eps": 2})
    assert g.is_specialized()
    assert g.bracket(g.element("e"), g.element("f")) == g.vector([(2, "h")])
    with pytest.raises(ZeroForInvertible):
        sl2_symbolic.specialize({"eps": 0})


# ==================== JSON ====================

def test_fixture_algebra_loads(fixture_algebra):
    """✅ The shipped L(1,0,0) fixture is a graded Lie algebra"""
    assert fixture_algebra.dim == 10
    assert check_super_identities(fixture_algebra).ok
    assert check_grading(fixture_algebra) == []


def test_json_round_trip(fixture_algebra, tmp_path):
    """✅ Writing and reading back should keep the structure constants"""
    path = tmp_path / "algebra.json"
    write_algebra_json(fixture_algebra, path)
    assert read_algebra_json(path).same_constants(fixture_algebra)


def test_json_string_source(sl2):
    """✅ read_algebra_json also accepts the JSON text"""
    assert read_algebra_json(write_algebra_json(sl2)).same_constants(sl2)


def test_json_unknown_element():
    """✅ Brackets mentioning unknown names are a ParseError"""
    text = (
        '{"p": 3, "basis": [{"name": "a", "parity": "even"}], '
        '"brackets": [{"i": "a", "j": "b", "value": []}]}'
    )
    with pytest.raises(ParseError):
        read_algebra_json(text)


def test_json_malformed(tmp_path):
    """✅ Broken JSON is a ParseError"""
    path = tmp_path / "broken.json"
    path.write_text("{ not json", encoding="utf-8")
    with pytest.raises(ParseError):
        read_algebra_json(path)


# ==================== ALGEBRAIC LAWS ====================

W_111 = vect_algebra(DPDescriptor(m=1, N=(1,), n=1, p=3))


def _homogeneous(g):
    """Random homogeneous element: a parity and a coefficient per basis vector"""
    coefficients = st.lists(st.integers(0, 2), min_size=g.dim, max_size=g.dim)

    def build(args):
        parity, coeffs = args
        return parity, tuple(
            g.ring.const(c if par == parity else 0) for c, par in zip(coeffs, g.parities)
        )

    return st.tuples(st.integers(0, 1), coefficients).map(build)


@settings(max_examples=40, deadline=None)
@given(_homogeneous(W_111), _homogeneous(W_111))
def test_ad_is_homomorphism(x, y):
    """✅ ad[x, y] = ad x ad y - (-1)^{|x||y|} ad y ad x on W(1;1|1)"""
    (px, x), (py, y) = x, y
    g = W_111
    left = g.ad_matrix(g.bracket(x, y))
    xy = mat_compose(g.ad_matrix(x), g.ad_matrix(y), px)
    yx = mat_compose(g.ad_matrix(y), g.ad_matrix(x), py)
    both_odd = px and py
    right = [[a + b if both_odd else a - b for a, b in zip(ra, rb)] for ra, rb in zip(xy, yx)]
    assert mat_equal(left, right)


@pytest.mark.parametrize("name", ["odd_pair", "abelian3", "sl2"])
def test_center_is_ideal(name, request):
    """✅ [g, z(g)] stays inside z(g)"""
    g = request.getfixturevalue(name)
    z = center(g)
    mixed = tuple(g.ring.const(k + 1) for k in range(g.dim))
    for u in list(z.rows):
        for v in [g.element(i) for i in range(g.dim)] + [mixed]:
            assert z.contains(g.bracket(v, u))
            assert z.contains(g.bracket(u, v))

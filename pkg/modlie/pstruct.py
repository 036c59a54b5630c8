# modlie/pstruct.py
"""
p|2p-structures

Solves ad(y) = ad(x)^p for y, assembles p-maps on a basis, builds the
torus candidate (h -> h, weight vectors -> 0) and checks restrictedness.
All comparisons of p-th powers are made modulo the center.
"""
import logging
import random
import re
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Set, Union

from modlie.errors import (
    CharacteristicTwo,
    EvenElement,
    NoSolution,
    NotDiagonal,
    NotWeightBasis,
    OddParity,
    SymbolicNotSupported,
    SymbolicUnderdetermined,
)
from modlie.matrices import (
    Matrix,
    Vector,
    first_difference,
    gf_array,
    gf_solve,
    is_constant_matrix,
    mat_power,
    solve_unit_pivot,
    to_codes,
    vec_is_zero,
    vec_scale,
    vec_sub,
)
from modlie.scalars import Scalar
from modlie.schemas import PMapModel
from modlie.superalg import (
    Subspace,
    SuperAlgebra,
    center,
    squaring,
    torus_weights,
    vector_from_terms,
    vector_terms,
)

logger = logging.getLogger(__name__)

TORUS_NAME = re.compile(r"^h\d*$")


@dataclass
class PPower:
    """One solved p-th power: a representative plus its coset data"""

    value: Vector
    center: Optional[Subspace] = None
    free: List[int] = field(default_factory=list)

    @property
    def ambiguous(self) -> bool:
        return bool(self.free) or (self.center is not None and self.center.dim > 0)


@dataclass
class PMap:
    """x -> x^[p] on even basis elements, x -> x^[2p] on odd ones"""

    algebra: str
    even: Dict[int, Vector] = field(default_factory=dict)
    odd: Dict[int, Vector] = field(default_factory=dict)
    center: Optional[Subspace] = None
    ambiguous: Set[int] = field(default_factory=set)

    def value(self, index: int) -> Vector:
        return self.even[index] if index in self.even else self.odd[index]

    def items(self):
        merged = {**self.even, **self.odd}
        return sorted(merged.items())

    def to_model(self, g: SuperAlgebra) -> PMapModel:
        return PMapModel(
            algebra=g.name or None,
            even={g.names[i]: vector_terms(g, v) for i, v in sorted(self.even.items())},
            odd={g.names[i]: vector_terms(g, v) for i, v in sorted(self.odd.items())},
            center=[vector_terms(g, r) for r in self.center.rows] if self.center else [],
            ambiguous=[g.names[i] for i in sorted(self.ambiguous)],
        )

    @classmethod
    def from_model(cls, g: SuperAlgebra, model: PMapModel) -> "PMap":
        rows = tuple(vector_from_terms(g, r) for r in model.center)
        return cls(
            algebra=model.algebra or g.name,
            even={g.index(k): vector_from_terms(g, v) for k, v in model.even.items()},
            odd={g.index(k): vector_from_terms(g, v) for k, v in model.odd.items()},
            center=Subspace(rows, g.dim) if rows else None,
            ambiguous={g.index(k) for k in model.ambiguous},
        )


@dataclass
class Failure:
    index: int
    name: str
    kind: str
    detail: str


@dataclass
class RestrictednessReport:
    algebra: str
    pmap: Optional[PMap]
    failures: List[Failure] = field(default_factory=list)
    torus_stable: Optional[bool] = None

    @property
    def restricted(self) -> bool:
        return not self.failures


# ======================
# Matrix side
# ======================

def ad_power(g: SuperAlgebra, x: Sequence[Scalar], n: int) -> Matrix:
    """ad(x)^n as an exact matrix"""
    parity = g.parity_of(x)
    if parity and n % 2:
        raise OddParity(f"odd element {g.format(x)} needs an even power, got {n}")
    return mat_power(g.ad_matrix(x), n, parity)


def _symbolic_rows(g: SuperAlgebra, target: Matrix):
    n = g.dim
    rows = {}
    for k in range(n):
        for j in range(n):
            for a, s in g.basis_bracket(k, j).items():
                rows.setdefault((a, j), {})[k] = s
    out = []
    for a in range(n):
        for j in range(n):
            coeffs = rows.get((a, j), {})
            rhs = target[a][j]
            if coeffs or not rhs.is_zero():
                out.append((coeffs, rhs))
    return out


def solve_ad_equation(g: SuperAlgebra, target: Matrix) -> PPower:
    """
    Find y with ad(y) = target

    Args:
        g: Algebra
        target: Matrix that should be an inner derivation

    Returns:
        PPower with the canonical representative (free coordinates set to 0)
    """
    n = g.dim
    if n == 0:
        return PPower(value=())

    if g.is_specialized() and is_constant_matrix(target):
        F = g.ring.field
        b = gf_array(F, to_codes(target).reshape(n * n))
        y = gf_solve(g.structure_system(), b)
        if y is None:
            raise NoSolution("ad(x)^p is not an inner derivation")
        return PPower(value=g.codes_to_vector(y), center=center(g))

    solution = solve_unit_pivot(_symbolic_rows(g, target), n, g.ring)
    value = tuple(solution.values)
    witness = first_difference(g.ad_matrix(value), target)
    if witness is not None:
        a, j = witness
        if solution.stuck:
            raise SymbolicUnderdetermined(
                f"elimination stalled on non-unit coefficients for {[g.names[k] for k in solution.stuck]}"
            )
        raise NoSolution(
            f"ad(x)^p is not an inner derivation (component {g.names[a]} of the image of {g.names[j]})"
        )
    return PPower(value=value, free=[k for k in solution.free if k not in solution.stuck])


def solve_p_power(g: SuperAlgebra, x: Sequence[Scalar]) -> PPower:
    """Solve ad(y) = ad(x)^p for even x"""
    if g.parity_of(x):
        raise OddParity(f"{g.format(x)} is odd; use two_p_power")
    if vec_is_zero(x):
        return PPower(value=g.zero(), center=center(g) if g.is_specialized() else None)
    return solve_ad_equation(g, ad_power(g, x, g.ring.p))


def two_p_power(g: SuperAlgebra, x: Sequence[Scalar]) -> PPower:
    """x^[2p] = (x^2)^[p] for odd x, checked against ad(x)^{2p}"""
    if g.ring.p == 2:
        raise CharacteristicTwo("2p-structures need p != 2")
    if g.parity_of(x) != 1:
        raise EvenElement(f"{g.format(x)} is not odd")
    result = solve_p_power(g, squaring(g, x))
    witness = first_difference(g.ad_matrix(result.value), ad_power(g, x, 2 * g.ring.p))
    if witness is not None:
        raise NoSolution(f"ad(x^[2p]) differs from ad(x)^2p at entry {witness}")
    return result


# ======================
# Whole-basis checks
# ======================

def torus_indices(g: SuperAlgebra) -> List[int]:
    """Basis elements named h, h1, h2, ..."""
    return [i for i, name in enumerate(g.names) if TORUS_NAME.match(name) and not g.parities[i]]


def verify_restricted(g: SuperAlgebra, torus: Optional[Sequence[int]] = None) -> RestrictednessReport:
    """
    Try to build a p|2p-map on every basis element

    Args:
        g: Algebra
        torus: Basis indices spanning a torus; pmap(h) must stay inside it

    Returns:
        RestrictednessReport with the PMap when every element succeeded
    """
    pmap = PMap(algebra=g.name)
    failures: List[Failure] = []
    for i in range(g.dim):
        x = g.element(i)
        kind = "2p" if g.parities[i] else "p"
        try:
            result = two_p_power(g, x) if g.parities[i] else solve_p_power(g, x)
        except (NoSolution, SymbolicUnderdetermined) as e:
            logger.info(f"{g.name}: {g.names[i]}^[{kind}] failed: {e.detail}")
            failures.append(Failure(index=i, name=g.names[i], kind=kind, detail=e.detail))
            continue
        (pmap.odd if g.parities[i] else pmap.even)[i] = result.value
        if result.ambiguous:
            pmap.ambiguous.add(i)
        if result.center is not None:
            pmap.center = result.center

    torus = torus_indices(g) if torus is None else list(torus)
    stable = None
    if torus and not failures:
        stable = all(
            all(a.is_zero() or k in torus for k, a in enumerate(pmap.even[h])) for h in torus if h in pmap.even
        )
    logger.info(f"{g.name}: {g.dim - len(failures)}/{g.dim} basis elements have a p|2p-power")
    return RestrictednessReport(
        algebra=g.name, pmap=None if failures else pmap, failures=failures, torus_stable=stable
    )


def torus_pmap_ansatz(g: SuperAlgebra, torus: Union[Subspace, Sequence[int]]) -> PMap:
    """
    Candidate map h -> h on the torus basis and 0 on every other basis vector

    Args:
        g: Algebra whose basis consists of weight vectors
        torus: Subspace (or basis indices) spanned by torus basis elements

    Returns:
        Candidate PMap; confirm it with check_pmap
    """
    if isinstance(torus, Subspace):
        rows = list(torus.rows)
    else:
        rows = [g.element(i) for i in torus]
    try:
        torus_weights(g, rows)
    except NotDiagonal as e:
        raise NotWeightBasis(e.detail)

    foreign = [
        s for value in g._table.values() for s in value.values() if not s.is_constant() or s.constant_code() >= g.ring.p
    ]
    if foreign:
        logger.warning(f"{g.name}: structure constants outside the prime field, e.g. {foreign[0]}")

    pmap = PMap(algebra=g.name)
    for i in range(g.dim):
        e = g.element(i)
        value = e if any(r == e for r in rows) else g.zero()
        (pmap.odd if g.parities[i] else pmap.even)[i] = value
    return pmap


def check_pmap(g: SuperAlgebra, pmap: PMap) -> List[Failure]:
    """Basis elements where ad(pmap(x)) differs from ad(x)^p (or ^2p)"""
    failures = []
    for i, value in pmap.items():
        x = g.element(i)
        n = 2 * g.ring.p if g.parities[i] else g.ring.p
        witness = first_difference(g.ad_matrix(value), ad_power(g, x, n))
        if witness is not None:
            a, j = witness
            failures.append(
                Failure(
                    index=i,
                    name=g.names[i],
                    kind="2p" if g.parities[i] else "p",
                    detail=f"ad mismatch at component {g.names[a]} of the image of {g.names[j]}",
                )
            )
    return failures


def same_coset(g: SuperAlgebra, u: Sequence[Scalar], v: Sequence[Scalar], sub: Optional[Subspace]) -> bool:
    """u = v modulo the given (central) subspace"""
    diff = vec_sub(u, v)
    if vec_is_zero(diff):
        return True
    if sub is None or sub.dim == 0:
        return False
    if all(a.is_constant() for a in diff) and all(a.is_constant() for r in sub.rows for a in r):
        return sub.contains(diff)
    # symbolic: diff = sum s_r * row_r
    rows = []
    for a in range(g.dim):
        coeffs = {r: row[a] for r, row in enumerate(sub.rows) if not row[a].is_zero()}
        rows.append((coeffs, diff[a]))
    sol = solve_unit_pivot(rows, sub.dim, g.ring)
    rebuilt = g.zero()
    for s, row in zip(sol.values, sub.rows):
        rebuilt = tuple(x + y for x, y in zip(rebuilt, vec_scale(s, row)))
    return rebuilt == tuple(diff)


def pmap_specializes(g: SuperAlgebra, pmap: PMap, assignment: Mapping[str, object]) -> List[str]:
    """
    Compare the substituted symbolic PMap with the PMap of the substituted algebra

    Returns:
        Names of basis elements where the two differ modulo the center
    """
    h = g.specialize(assignment)
    report = verify_restricted(h)
    if not report.restricted:
        return [f.name for f in report.failures]
    mismatches = []
    for i, value in pmap.items():
        specialised = tuple(a.substitute(assignment) for a in value)
        if not same_coset(h, specialised, report.pmap.value(i), report.pmap.center):
            mismatches.append(g.names[i])
    return mismatches


@dataclass
class SemilinearityReport:
    trials: int
    discrepancies: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.discrepancies


def semilinearity_check(
    g: SuperAlgebra, pmap: PMap, trials: int = 100, seed: Optional[int] = None
) -> SemilinearityReport:
    """
    Random consistency checks of a verified PMap on a specialised algebra

    For random even x, y and scalar c: (cx)^[p] = c^p x^[p] modulo the
    center, (c e)^[p] = c^p pmap(e) on basis elements, and x + y has a
    p-th power.
    """
    if not g.is_specialized():
        raise SymbolicNotSupported("semilinearity_check needs a specialised algebra")
    rng = random.Random(seed)
    F = g.ring.field
    even = [i for i in range(g.dim) if not g.parities[i]]
    report = SemilinearityReport(trials=trials)
    if not even:
        return report
    cen = center(g)

    def random_even() -> Vector:
        out = list(g.zero())
        for i in even:
            out[i] = g.ring.const_code(rng.randrange(F.order))
        return tuple(out)

    for t in range(trials):
        c = g.ring.const_code(rng.randrange(F.order))
        cp = c.frobenius()
        x, y = random_even(), random_even()
        try:
            px = solve_p_power(g, x).value
            pcx = solve_p_power(g, vec_scale(c, x)).value
            if not same_coset(g, pcx, vec_scale(cp, px), cen):
                report.discrepancies.append(f"trial {t}: (c x)^[p] != c^p x^[p] for c={c}")
            solve_p_power(g, tuple(a + b for a, b in zip(x, y)))
        except NoSolution as e:
            report.discrepancies.append(f"trial {t}: {e.detail}")
            continue
        i = rng.choice(even)
        if i in pmap.even:
            pce = solve_p_power(g, vec_scale(c, g.element(i))).value
            if not same_coset(g, pce, vec_scale(cp, pmap.even[i]), cen):
                report.discrepancies.append(f"trial {t}: (c {g.names[i]})^[p] != c^p pmap({g.names[i]})")
    if report.discrepancies:
        logger.warning(f"{g.name}: {len(report.discrepancies)} semilinearity discrepancies")
    return report

# modlie/families.py
"""
Concrete algebras and the verification drivers built on them

- the 10-dimensional family L(eps, delta, rho), realised through
  generating functions in O(3;(1,1,1)) with the contact bracket
- cocycle deformations, coboundaries and transport by id + param*phi
- the x <-> y relabelling of Chevalley-named bases
- fixture bundles (algebra + cocycles + expected p-maps) and their driver
- invariant fingerprints and the sp(4) reference algebra
"""
import hashlib
import json
import logging
import re
import time
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from modlie.divpow import DPDescriptor, DPElement, contact_bracket, k31_descriptor
from modlie.errors import (
    ExpansionFailure,
    EpsilonZero,
    FixtureInvalid,
    JacobiFailure,
    ModLieError,
    NamingConvention,
    NonCommutingTorus,
    NotACocycle,
    NotAUnit,
    NotDiagonal,
    ParseError,
)
from modlie.matrices import gf_rank, solve_unit_pivot
from modlie.pstruct import (
    check_pmap,
    pmap_specializes,
    same_coset,
    torus_indices,
    torus_pmap_ansatz,
    verify_restricted,
)
from modlie.reports import CheckRecord, Report, build_report
from modlie.scalars import ParameterRing, Scalar, default_ring, parse_scalar
from modlie.schemas import BracketModel, CocycleModel, ExpectModel, TermModel
from modlie.superalg import (
    BasisElement,
    Sparse,
    Subspace,
    SuperAlgebra,
    center,
    check_grading,
    check_super_identities,
    derived_subalgebra,
    read_algebra_json,
    supertrace_form,
    vector_from_terms,
    vector_terms,
    weight_decomposition,
    write_algebra_json,
)

logger = logging.getLogger(__name__)


# ======================
# L(eps, delta, rho)
# ======================

@dataclass(frozen=True)
class TableEntry:
    root: str
    alias: str
    degree: int
    function: DPElement


def generating_table(eps: Scalar, d: Optional[DPDescriptor] = None) -> List[TableEntry]:
    """
    Generating functions of the basis of L(eps, 0, 0) in O(3;(1,1,1))

    Monomials are divided powers ph^(a) qh^(b) t^(c).

    Args:
        eps: Unit scalar
        d: k(3;1) descriptor over eps's ring

    Returns:
        Ten entries in order of increasing degree
    """
    d = d or k31_descriptor(eps.ring)
    one = d.ring.one

    def mono(a: int, b: int, c: int, coef: Scalar = one) -> DPElement:
        return DPElement.monomial(d, (a, b, c), coef=coef)

    return [
        TableEntry("E_{-2a-b}", "y4", -2, mono(0, 0, 0)),
        TableEntry("E_{-a}", "y2", -1, mono(1, 0, 0)),
        TableEntry("E_{-a-b}", "y3", -1, mono(0, 1, 0)),
        TableEntry("H_a", "h2", 0, mono(0, 0, 1, -eps) + mono(1, 1, 0)),
        TableEntry("H_b", "h1", 0, mono(1, 1, 0, -one)),
        TableEntry("E_b", "y1", 0, mono(2, 0, 0)),
        TableEntry("E_{-b}", "x1", 0, mono(0, 2, 0, -one)),
        TableEntry("E_a", "x2", 1, mono(1, 2, 0, -(one + eps)) + mono(0, 1, 1, eps)),
        TableEntry("E_{a+b}", "x3", 1, mono(2, 1, 0, one + eps) + mono(1, 0, 1, eps)),
        TableEntry("E_{2a+b}", "x4", 2, mono(2, 2, 0, eps * (one + eps)) + mono(0, 0, 2, eps * eps)),
    ]


def expand_in(functions: Sequence[DPElement], value: DPElement) -> List[Scalar]:
    """Coefficients c_k with sum c_k f_k = value, or ExpansionFailure"""
    ring = value.d.ring
    monos = set(value.terms)
    for f in functions:
        monos.update(f.terms)
    rows = []
    for mono in sorted(monos):
        coeffs = {k: f.terms[mono] for k, f in enumerate(functions) if mono in f.terms}
        rows.append((coeffs, value.terms.get(mono, ring.zero)))
    solution = solve_unit_pivot(rows, len(functions), ring)
    rebuilt = DPElement(value.d)
    for c, f in zip(solution.values, functions):
        rebuilt = rebuilt + c * f
    if rebuilt != value:
        raise ExpansionFailure(f"{value} is not in the span of the generating functions")
    return solution.values


# (first, second, coefficient, target) as stated for the deformed bracket
def _deformation_terms(eps: Scalar, delta: Scalar, rho: Scalar):
    eps_inv = eps.inverse()
    return [
        ("y4", "y1", delta, "x2"),
        ("y4", "y2", delta, "x1"),
        ("y2", "y1", -(delta * eps_inv), "x4"),
        ("y4", "y3", rho, "y1"),
        ("y3", "x1", -(rho * eps_inv), "x4"),
        ("y4", "x1", -rho, "x3"),
    ]


def _as_scalar(ring: ParameterRing, value, name: str) -> Scalar:
    if value is None:
        return ring.gen(name)
    if isinstance(value, Scalar):
        return value
    if isinstance(value, str):
        return parse_scalar(ring, value)
    return ring.const(value)


def build_L(
    eps=None,
    delta=None,
    rho=None,
    ring: Optional[ParameterRing] = None,
    reading: str = "replace",
    check: bool = True,
) -> SuperAlgebra:
    """
    The 10-dimensional algebra L(eps, delta, rho) over GF(3)

    Args:
        eps, delta, rho: Scalars, field values or None for the symbolic generator
        ring: Parameter ring (default: eps invertible, delta/rho/lambda even, tau odd)
        reading: "replace" installs the deformation values as the whole bracket of
            the named pairs, "add" adds them to the contact value
        check: Run check_super_identities and fall back to the additive reading

    Returns:
        SuperAlgebra with basis y4, y2, y3, h2, h1, y1, x1, x2, x3, x4
    """
    ring = ring or default_ring(3)
    eps = _as_scalar(ring, eps, "eps")
    delta = _as_scalar(ring, delta, "delta")
    rho = _as_scalar(ring, rho, "rho")
    if not eps.is_unit():
        raise EpsilonZero(f"eps must be a unit, got '{eps}'")

    d = k31_descriptor(ring)
    table = generating_table(eps, d)
    functions = [e.function for e in table]
    aliases = [e.alias for e in table]
    index = {a: k for k, a in enumerate(aliases)}

    brackets: Dict[Tuple[int, int], Sparse] = {}
    for i in range(len(table)):
        for j in range(i + 1, len(table)):
            value = contact_bracket(functions[i], functions[j])
            if value.is_zero():
                continue
            coeffs = expand_in(functions, value)
            brackets[(i, j)] = {k: c for k, c in enumerate(coeffs) if not c.is_zero()}

    for first, second, coef, target in _deformation_terms(eps, delta, rho):
        i, j, k = index[first], index[second], index[target]
        # stored with i < j
        if i > j:
            i, j, coef = j, i, -coef
        current = brackets.get((i, j), {})
        if reading == "replace" and current:
            raise ExpansionFailure(
                f"contact bracket [{aliases[i]}, {aliases[j]}] is already nonzero; cannot install the deformation"
            )
        value = dict(current) if reading == "add" else {}
        value[k] = value[k] + coef if k in value else coef
        brackets[(i, j)] = {a: s for a, s in value.items() if not s.is_zero()}

    # the deformation terms break the Z-grading
    graded = delta.is_zero() and rho.is_zero()
    basis = [BasisElement(name=e.alias, parity=0, degree=e.degree if graded else None) for e in table]
    g = SuperAlgebra(ring, basis, brackets, name=f"L({eps}, {delta}, {rho})")
    if check:
        report = check_super_identities(g)
        if not report.ok:
            if reading == "replace":
                logger.warning(f"{g.name}: Jacobi fails with the replacing reading, trying the additive one")
                return build_L(eps, delta, rho, ring, reading="add", check=True)
            (i, j, k), _ = report.jacobi[0]
            raise JacobiFailure(f"{g.name}: Jacobi fails at ({aliases[i]}, {aliases[j]}, {aliases[k]})")
    return g


# values as stated for the 3-structure of L(eps, delta, rho)
L3_EXPECTATION = ExpectModel(
    algebra="L(eps, delta, rho)",
    values={
        "h1": [TermModel(coef="1", k="h1")],
        "h2": [TermModel(coef="eps^2", k="h2")],
        "y1": [],
        "x1": [],
        "x2": [],
        "x3": [],
        "x4": [],
        "y2": [
            TermModel(coef="delta + 2*eps^2*delta", k="h1"),
            TermModel(coef="eps^-1*delta + 2*eps*delta", k="h2"),
        ],
        "y3": [TermModel(coef="eps^-1*rho", k="h2")],
        "y4": [TermModel(coef="2*eps*delta*rho + eps^3*delta*rho", k="y1")],
    },
    source="3-structure of L(eps, delta, rho) as stated",
)

L3_SWEEP = [
    {"eps": e, "delta": dl, "rho": r} for e, dl, r in product((1, 2), (0, 1, 2), (0, 1, 2))
]


def _expected_vector(g: SuperAlgebra, expect: ExpectModel, name: str, assignment: Optional[Mapping] = None):
    v = vector_from_terms(g, expect.values.get(name, []))
    if assignment:
        v = tuple(a.substitute(assignment) for a in v)
    return v


def verify_lemma_L3(
    assignment: Optional[Mapping[str, object]] = None,
    sweep: bool = True,
    expect: ExpectModel = L3_EXPECTATION,
    points: Optional[Sequence[Mapping[str, int]]] = None,
    ring: Optional[ParameterRing] = None,
) -> Report:
    """
    Compute the 3-structure of L(eps, delta, rho) and compare it with the stated one

    Args:
        assignment: Optional (partial) specialisation of eps, delta, rho
        sweep: Also re-check at the sweep points
        expect: Expected values
        points: Sweep points (default: the 18 points eps in {1,2}, delta, rho in {0,1,2})
        ring: Parameter ring over GF(3^k) (default: GF(3))

    Returns:
        Report with one record per basis element plus the sweep records
    """
    started = time.perf_counter()
    base = build_L(ring=ring)
    g = base.specialize(assignment) if assignment else base
    checks: List[CheckRecord] = []
    identities = check_super_identities(g)
    checks.append(CheckRecord(check="super identities", matched=identities.ok))

    restricted = verify_restricted(g)
    checks.append(
        CheckRecord(
            check="restricted",
            matched=restricted.restricted,
            computed=", ".join(f.name for f in restricted.failures) or None,
        )
    )
    if restricted.torus_stable is not None:
        checks.append(CheckRecord(check="torus stable", matched=restricted.torus_stable))
    pmap = restricted.pmap
    cen = center(g) if g.is_specialized() else None

    if pmap is not None:
        for i, value in pmap.items():
            name = g.names[i]
            expected = _expected_vector(g, expect, name, assignment)
            checks.append(
                CheckRecord(
                    check=f"{name}^[3]",
                    element=name,
                    index=i,
                    expected=g.format(expected),
                    computed=g.format(value),
                    matched=same_coset(g, value, expected, cen),
                    coset=cen is not None and cen.dim > 0,
                )
            )

    if sweep and not assignment and pmap is not None:
        for point in points or L3_SWEEP:
            label = ", ".join(f"{k}={v}" for k, v in point.items())
            stale = pmap_specializes(g, pmap, point)
            checks.append(
                CheckRecord(
                    check=f"specialises at {label}",
                    matched=not stale,
                    computed=", ".join(stale) or None,
                )
            )
            h = g.specialize(point)
            numeric = verify_restricted(h)
            wrong = []
            if numeric.pmap is not None:
                for i, value in numeric.pmap.items():
                    if not same_coset(h, value, _expected_vector(g, expect, g.names[i], point), numeric.pmap.center):
                        wrong.append(g.names[i])
            checks.append(
                CheckRecord(
                    check=f"stated values at {label}",
                    matched=numeric.restricted and not wrong,
                    computed=", ".join(wrong) or None,
                )
            )
        # eps = 2 = -1 is o(5)
        for e in (1, 2):
            trivial = g.specialize({"eps": e, "delta": 0, "rho": 0})
            ansatz = torus_pmap_ansatz(trivial, torus_indices(trivial))
            failed = check_pmap(trivial, ansatz)
            checks.append(
                CheckRecord(
                    check=f"torus ansatz at eps={e}, delta=rho=0",
                    matched=not failed,
                    computed=", ".join(f.name for f in failed) or None,
                )
            )

    target = "L3" if not assignment else "L3(" + ", ".join(f"{k}={v}" for k, v in assignment.items()) + ")"
    return build_report(target, checks, started)


# ======================
# Cocycles
# ======================

@dataclass
class Cocycle:
    """Super-antisymmetric bilinear map on basis pairs i <= j; deforms by param * value"""

    parameter: str
    parity: int = 0
    values: Dict[Tuple[int, int], Sparse] = field(default_factory=dict)
    degree: Optional[int] = None
    name: str = ""

    def value(self, g: SuperAlgebra, i: int, j: int) -> Sparse:
        if i <= j:
            return self.values.get((i, j), {})
        stored = self.values.get((j, i))
        if not stored:
            return {}
        return dict(stored) if g.parities[i] and g.parities[j] else {k: -s for k, s in stored.items()}

    def to_model(self, g: SuperAlgebra) -> CocycleModel:
        return CocycleModel(
            parameter=self.parameter,
            parity="odd" if self.parity else "even",
            degree=self.degree,
            values=[
                BracketModel(i=g.names[i], j=g.names[j], value=vector_terms(g, g.from_sparse(v)))
                for (i, j), v in sorted(self.values.items())
            ],
        )


def zero_cocycle(parameter: str = "lambda") -> Cocycle:
    return Cocycle(parameter=parameter, name="0")


def cocycle_from_model(g: SuperAlgebra, model: CocycleModel, name: str = "") -> Cocycle:
    values: Dict[Tuple[int, int], Sparse] = {}
    for br in model.values:
        i, j = g.index(br.i), g.index(br.j)
        sparse = g.to_sparse(vector_from_terms(g, br.value))
        if i > j:
            i, j = j, i
            if not (g.parities[i] and g.parities[j]):
                sparse = {k: -s for k, s in sparse.items()}
        if (i, j) in values:
            raise ParseError(f"cocycle value on ({br.i}, {br.j}) given twice")
        if sparse:
            values[(i, j)] = sparse
    return Cocycle(
        parameter=model.parameter,
        parity=1 if model.parity == "odd" else 0,
        values=values,
        degree=model.degree,
        name=name,
    )


def _parameter_ring(g: SuperAlgebra, parameter: str, parity: int) -> ParameterRing:
    ring = g.ring
    if ring.has(parameter):
        if (parameter in ring.odd) != bool(parity):
            raise NotACocycle(f"parameter '{parameter}' already exists with the other parity")
        return ring
    return ring.extend(odd=[parameter]) if parity else ring.extend(even=[parameter])


def apply_cocycle_deform(g: SuperAlgebra, c: Cocycle) -> SuperAlgebra:
    """
    Algebra with bracket [x, y] + param * c(x, y)

    Args:
        g: Undeformed algebra
        c: Cocycle

    Returns:
        Deformed algebra over the ring extended by the parameter
    """
    ring = _parameter_ring(g, c.parameter, c.parity)
    base = g.lift(ring)
    param = ring.gen(c.parameter)
    table: Dict[Tuple[int, int], Sparse] = {key: dict(v) for key, v in base._table.items()}
    for key, value in c.values.items():
        merged = dict(table.get(key, {}))
        for k, s in value.items():
            term = param * s.lift(ring)
            merged[k] = merged[k] + term if k in merged else term
        table[key] = {k: s for k, s in merged.items() if not s.is_zero()}
    label = f"{g.name}_{c.name}" if c.name else f"{g.name}_c"
    deformed = SuperAlgebra(ring, base.basis, table, name=label)

    report = check_super_identities(deformed)
    if report.parity or report.skew:
        bad = (report.parity or report.skew)[0]
        raise NotACocycle(f"cocycle has the wrong parity or symmetry on ({g.names[bad[0]]}, {g.names[bad[1]]})")
    for (i, j, k), value in report.jacobi:
        linear = any(not s.degree_split(c.parameter).get(1, ring.zero).is_zero() for s in value)
        witness = f"({g.names[i]}, {g.names[j]}, {g.names[k]})"
        if linear:
            raise NotACocycle(f"cocycle identity fails at {witness}")
        raise JacobiFailure(f"deform is not a Lie superalgebra: Jacobi fails at {witness}")
    return deformed


def _apply_phi(g: SuperAlgebra, phi: Mapping[int, Sequence[Scalar]], parity: int, v: Sparse) -> Sparse:
    out: Sparse = {}
    for k, vk in v.items():
        if k not in phi:
            continue
        coef = -vk if (parity and vk.parity) else vk
        for a, s in g.to_sparse(phi[k]).items():
            out[a] = out[a] + coef * s if a in out else coef * s
    return {a: s for a, s in out.items() if not s.is_zero()}


def coboundary(
    g: SuperAlgebra, phi: Mapping[int, Sequence[Scalar]], parameter: str = "tau", parity: int = 1
) -> Cocycle:
    """dphi(a, b) = [phi a, b] + (-1)^{|phi||a|} [a, phi b] - phi [a, b]"""
    values: Dict[Tuple[int, int], Sparse] = {}
    one = g.ring.one
    for i in range(g.dim):
        for j in range(i, g.dim):
            a, b = {i: one}, {j: one}
            first = g._bracket_sparse(_apply_phi(g, phi, parity, a), b)
            second = g._bracket_sparse(a, _apply_phi(g, phi, parity, b))
            third = _apply_phi(g, phi, parity, g._bracket_sparse(a, b))
            out = dict(first)
            sign_odd = parity and g.parities[i]
            for k, s in second.items():
                s = -s if sign_odd else s
                out[k] = out[k] + s if k in out else s
            for k, s in third.items():
                out[k] = out[k] - s if k in out else -s
            out = {k: s for k, s in out.items() if not s.is_zero()}
            if out:
                values[(i, j)] = out
    return Cocycle(parameter=parameter, parity=parity, values=values, name="dphi")


def transport(
    g: SuperAlgebra, phi: Mapping[int, Sequence[Scalar]], parameter: str = "tau", parity: int = 1
) -> SuperAlgebra:
    """
    Structure constants of g conjugated by T = id + param * phi

    [a, b]_T = T^{-1} [T a, T b], with T^{-1} = sum_k (-param phi)^k.
    """
    ring = _parameter_ring(g, parameter, parity)
    base = g.lift(ring)
    param = ring.gen(parameter)
    lifted = {k: tuple(s.lift(ring) for s in v) for k, v in phi.items()}
    def t_phi(v: Sparse) -> Sparse:
        out = {a: param * s for a, s in _apply_phi(base, lifted, parity, v).items()}
        return {a: s for a, s in out.items() if not s.is_zero()}

    def t_map(v: Sparse) -> Sparse:
        out = dict(v)
        for a, s in t_phi(v).items():
            out[a] = out[a] + s if a in out else s
        return {a: s for a, s in out.items() if not s.is_zero()}

    def t_inverse(v: Sparse) -> Sparse:
        out = dict(v)
        term = dict(v)
        for _ in range(g.dim + 2):
            term = {a: -s for a, s in t_phi(term).items()}
            if not term:
                break
            for a, s in term.items():
                out[a] = out[a] + s if a in out else s
        else:
            raise NotAUnit("id + param*phi is not invertible over the parameter ring")
        return {a: s for a, s in out.items() if not s.is_zero()}

    one = ring.one
    table = {}
    for i in range(g.dim):
        for j in range(i, g.dim):
            value = t_inverse(base._bracket_sparse(t_map({i: one}), t_map({j: one})))
            if value:
                table[(i, j)] = value
    return SuperAlgebra(ring, base.basis, table, name=f"{g.name}^T")


_CHEVALLEY = re.compile(r"^([xy])(\d+)$")


def chevalley_flip(g: SuperAlgebra, c: Optional[Cocycle] = None) -> Tuple[SuperAlgebra, Optional[Cocycle]]:
    """
    Swap the names x_i <-> y_i (h_i fixed); constants and cocycle follow the basis vectors

    Args:
        g: Algebra with x/y/h names
        c: Cocycle on g (indices are unchanged by the relabelling)

    Returns:
        (relabelled algebra, cocycle)
    """
    mapping = {}
    for name in g.names:
        match = _CHEVALLEY.match(name)
        if not match:
            continue
        side, k = match.groups()
        partner = ("y" if side == "x" else "x") + k
        if partner not in g.names:
            raise NamingConvention(f"'{name}' has no partner '{partner}'")
        mapping[name] = partner
    if not mapping:
        raise NamingConvention(f"{g.name} has no x_i / y_i basis elements")
    flipped = g.relabel(mapping, name=f"{g.name}^flip")
    if c is None:
        return flipped, None
    return flipped, Cocycle(c.parameter, c.parity, dict(c.values), c.degree, c.name)


def flip_expectation(expect: ExpectModel) -> ExpectModel:
    def swap(name: str) -> str:
        match = _CHEVALLEY.match(name)
        if not match:
            return name
        side, k = match.groups()
        return ("y" if side == "x" else "x") + k

    return ExpectModel(
        algebra=expect.algebra,
        cocycle=expect.cocycle,
        modulo_center=expect.modulo_center,
        center=[[TermModel(coef=t.coef, k=swap(t.k)) for t in row] for row in expect.center],
        torus=expect.torus,
        values={swap(k): [TermModel(coef=t.coef, k=swap(t.k)) for t in v] for k, v in expect.values.items()},
        source=expect.source,
    )


# ======================
# Fixtures
# ======================

@dataclass
class FixtureBundle:
    """
    One fixture directory

    ``expects`` maps a cocycle key to its expectation; the key "" holds
    expect.json, the fallback for cocycles without an expect_<k>.json.
    """

    name: str
    algebra: SuperAlgebra
    cocycles: Dict[str, Cocycle]
    expects: Dict[str, ExpectModel] = field(default_factory=dict)
    digests: Dict[str, str] = field(default_factory=dict)

    def expectation(self, key: str) -> Optional[ExpectModel]:
        return self.expects.get(key) or self.expects.get("")


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def load_fixture(directory: Union[str, Path]) -> FixtureBundle:
    """
    Read fixtures/<name>/{algebra.json, cocycle_<k>.json, expect.json, expect_<k>.json}

    Args:
        directory: Bundle directory

    Returns:
        FixtureBundle with sha256 digests of every file read
    """
    directory = Path(directory)
    algebra_path = directory / "algebra.json"
    if not algebra_path.exists():
        raise FixtureInvalid(f"no algebra.json in {directory}")
    digests = {"algebra.json": _digest(algebra_path)}
    try:
        g = read_algebra_json(algebra_path)
    except ParseError as e:
        raise FixtureInvalid(f"{algebra_path}: {e.detail}")

    cocycles = {}
    for path in sorted(directory.glob("cocycle_*.json")):
        key = path.stem[len("cocycle_"):]
        try:
            model = CocycleModel.model_validate_json(path.read_text(encoding="utf-8"))
            cocycles[key] = cocycle_from_model(g, model, name=f"c{key}")
        except (ValueError, ModLieError) as e:
            raise FixtureInvalid(f"{path}: {e}")
        digests[path.name] = _digest(path)

    expects = {}
    for path in sorted(directory.glob("expect*.json")):
        key = path.stem[len("expect_"):] if path.stem.startswith("expect_") else ""
        try:
            expects[key] = ExpectModel.model_validate_json(path.read_text(encoding="utf-8"))
        except ValueError as e:
            raise FixtureInvalid(f"{path}: {e}")
        digests[path.name] = _digest(path)
    logger.info(f"Loaded fixture '{directory.name}' ({g.dim} basis elements, {len(cocycles)} cocycles)")
    return FixtureBundle(name=directory.name, algebra=g, cocycles=cocycles, expects=expects, digests=digests)


def export_fixture(
    directory: Union[str, Path],
    g: SuperAlgebra,
    cocycles: Mapping[str, Cocycle],
    expects: Optional[Mapping[str, ExpectModel]] = None,
) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_algebra_json(g, directory / "algebra.json")
    for key, c in cocycles.items():
        text = json.dumps(c.to_model(g).model_dump(exclude_none=True), indent=2, ensure_ascii=False)
        (directory / f"cocycle_{key}.json").write_text(text + "\n", encoding="utf-8")
    for key, expect in (expects or {}).items():
        text = json.dumps(expect.model_dump(exclude_none=True), indent=2, ensure_ascii=False)
        filename = f"expect_{key}.json" if key else "expect.json"
        (directory / filename).write_text(text + "\n", encoding="utf-8")
    return directory


def flip_bundle(bundle: FixtureBundle) -> FixtureBundle:
    """The same bundle with x_i <-> y_i swapped in the algebra and the expectations"""
    flipped, _ = chevalley_flip(bundle.algebra)
    cocycles = {key: chevalley_flip(bundle.algebra, c)[1] for key, c in bundle.cocycles.items()}
    return FixtureBundle(
        name=f"{bundle.name}^flip",
        algebra=flipped,
        cocycles=cocycles,
        expects={key: flip_expectation(e) for key, e in bundle.expects.items()},
        digests=dict(bundle.digests),
    )


def verify_lemma_fixture(bundle: FixtureBundle, cocycle_key: str, expect: Optional[ExpectModel] = None) -> Report:
    """
    Verify the stated p|2p-map of a fixture deform

    Every basis element not listed in the expectation must map to itself
    (torus elements) or to 0 (weight vectors); listed ones must match as
    center cosets.

    Args:
        bundle: Loaded fixture
        cocycle_key: Which cocycle_<k>.json to deform with
        expect: Override of the bundle's expectation

    Returns:
        Report marked conditional
    """
    started = time.perf_counter()
    expect = expect or bundle.expectation(cocycle_key)
    if expect is None:
        raise FixtureInvalid(f"fixture '{bundle.name}' has no expectation for cocycle '{cocycle_key}'")
    if cocycle_key not in bundle.cocycles:
        raise FixtureInvalid(f"fixture '{bundle.name}' has no cocycle_{cocycle_key}.json")
    g = bundle.algebra

    identities = check_super_identities(g)
    if not identities.ok:
        raise FixtureInvalid(f"fixture '{bundle.name}' fails the super identities")
    if check_grading(g):
        i, j = check_grading(g)[0]
        raise FixtureInvalid(f"fixture '{bundle.name}' breaks its grading at ({g.names[i]}, {g.names[j]})")
    try:
        deformed = apply_cocycle_deform(g, bundle.cocycles[cocycle_key])
    except (NotACocycle, JacobiFailure) as e:
        raise FixtureInvalid(f"cocycle_{cocycle_key}: {e.detail}")

    torus = [deformed.index(n) for n in expect.torus] if expect.torus else torus_indices(deformed)
    restricted = verify_restricted(deformed, torus)
    checks = [
        CheckRecord(
            check="restricted",
            matched=restricted.restricted,
            computed=", ".join(f.name for f in restricted.failures) or None,
        )
    ]
    if restricted.pmap is not None:
        cen: Optional[Subspace] = None
        if expect.center:
            cen = Subspace(tuple(vector_from_terms(deformed, r) for r in expect.center), deformed.dim)
        elif expect.modulo_center and deformed.is_specialized():
            cen = center(deformed)
        for i, value in restricted.pmap.items():
            name = deformed.names[i]
            if name in expect.values:
                expected = vector_from_terms(deformed, expect.values[name])
                label = "stated value"
            elif i in torus:
                expected = deformed.element(i)
                label = "torus element"
            else:
                expected = deformed.zero()
                label = "weight vector"
            power = "2p" if deformed.parities[i] else "p"
            checks.append(
                CheckRecord(
                    check=f"{name}^[{power}] ({label})",
                    element=name,
                    index=i,
                    expected=deformed.format(expected),
                    computed=deformed.format(value),
                    matched=same_coset(deformed, value, expected, cen if expect.modulo_center else None),
                    coset=expect.modulo_center,
                )
            )
    return build_report(
        f"fixture:{bundle.name}:{cocycle_key}",
        checks,
        started,
        conditional=True,
        digests=bundle.digests,
        notes=[expect.source] if expect.source else None,
    )


# ======================
# Fingerprints
# ======================

@dataclass(frozen=True)
class Fingerprint:
    dim: int
    sdim: Tuple[int, int]
    center_dim: int
    derived_dims: Tuple[int, ...]
    trace_form_rank: int
    weight_dims: Tuple[int, ...]

    def __str__(self) -> str:
        weights = ", ".join(str(w) for w in self.weight_dims)
        return (
            f"dim {self.dim} ({self.sdim[0]}|{self.sdim[1]}), center {self.center_dim}, "
            f"derived {list(self.derived_dims)}, trace-form rank {self.trace_form_rank}, weights {{{weights}}}"
        )


def invariant_fingerprint(g: SuperAlgebra, torus: Optional[Sequence[int]] = None) -> Fingerprint:
    """
    Cheap isomorphism invariants of a specialised algebra

    Args:
        g: Specialised algebra
        torus: Basis indices of a torus (default: elements named h, h1, ...)

    Returns:
        Fingerprint
    """
    torus = torus_indices(g) if torus is None else list(torus)
    weight_dims: Tuple[int, ...] = (g.dim,)
    if torus:
        try:
            spaces = weight_decomposition(g, [g.element(i) for i in torus])
            weight_dims = tuple(sorted((s.dim for s in spaces.values()), reverse=True))
        except (NotDiagonal, NonCommutingTorus):
            logger.info(f"{g.name}: basis is not a weight basis for the torus; weights skipped")
    return Fingerprint(
        dim=g.dim,
        sdim=g.sdim,
        center_dim=center(g).dim,
        derived_dims=(g.dim, derived_subalgebra(g, 1).dim),
        trace_form_rank=gf_rank(supertrace_form(g)) if g.dim else 0,
        weight_dims=weight_dims,
    )


SP4_BASIS = ["h1", "h2", "a12", "a21", "b11", "b22", "b12", "c11", "c22", "c12"]

# matrix entry that reads off each coordinate of [[A, B], [C, -A^T]]
_SP4_READOUT = {
    "h1": (0, 0), "h2": (1, 1), "a12": (0, 1), "a21": (1, 0),
    "b11": (0, 2), "b22": (1, 3), "b12": (0, 3),
    "c11": (2, 0), "c22": (3, 1), "c12": (2, 1),
}


def _sp4_matrix(name: str) -> np.ndarray:
    A = np.zeros((2, 2), dtype=np.int64)
    B = np.zeros((2, 2), dtype=np.int64)
    C = np.zeros((2, 2), dtype=np.int64)
    kind, idx = name[0], name[1:]
    if kind == "h":
        A[int(idx) - 1, int(idx) - 1] = 1
    elif kind == "a":
        A[int(idx[0]) - 1, int(idx[1]) - 1] = 1
    else:
        target = B if kind == "b" else C
        i, j = int(idx[0]) - 1, int(idx[1]) - 1
        target[i, j] = 1
        target[j, i] = 1
    return np.block([[A, B], [C, -A.T]])


def build_sp4(p: int = 3, ring: Optional[ParameterRing] = None) -> SuperAlgebra:
    """sp(4) over GF(p) in the block basis h1, h2, a_ij, b_ij, c_ij"""
    ring = ring or default_ring(p)
    p = ring.p
    mats = [_sp4_matrix(n) for n in SP4_BASIS]
    table = {}
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            comm = (mats[i] @ mats[j] - mats[j] @ mats[i]) % p
            value = {k: ring.const(int(comm[_SP4_READOUT[n]])) for k, n in enumerate(SP4_BASIS)}
            value = {k: s for k, s in value.items() if not s.is_zero()}
            if value:
                table[(i, j)] = value
    return SuperAlgebra(ring, [BasisElement(n) for n in SP4_BASIS], table, name="sp(4)")

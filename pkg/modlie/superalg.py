# modlie/superalg.py
"""
Finite-dimensional Lie superalgebras given by structure constants

Brackets are stored for basis pairs i <= j; the other order follows
from super skew-symmetry [e_j, e_i] = -(-1)^{|i||j|} [e_i, e_j].
Symbolic algebras work with Scalars throughout; once every structure
constant is a field constant the galois arrays take over for ranks,
kernels and the center.
"""
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from modlie.errors import (
    CharacteristicTwo,
    DimensionMismatch,
    EvenElement,
    NonCommutingTorus,
    NotDiagonal,
    ParseError,
    SymbolicNotSupported,
)
from modlie.matrices import (
    Matrix,
    Vector,
    format_vector,
    from_columns,
    gf_array,
    gf_null_space,
    gf_rank,
    gf_row_space,
    unit_vector,
    vec_sub,
    vector_parity,
    zero_vector,
)
from modlie.scalars import ParameterRing, Scalar, get_field, parse_scalar
from modlie.schemas import AlgebraModel, BasisModel, BracketModel, ParametersModel, TermModel

logger = logging.getLogger(__name__)

Sparse = Dict[int, Scalar]


@dataclass(frozen=True)
class BasisElement:
    name: str
    parity: int = 0
    weight: Optional[Tuple[int, ...]] = None
    degree: Optional[int] = None


@dataclass(frozen=True)
class Subspace:
    """Subspace spanned by the given rows (echelon form when numeric)"""

    rows: Tuple[Vector, ...]
    ambient: int

    @property
    def dim(self) -> int:
        return len(self.rows)

    def codes(self) -> np.ndarray:
        return np.array([[a.constant_code() for a in r] for r in self.rows], dtype=np.int64).reshape(
            len(self.rows), self.ambient
        )

    def contains(self, v: Sequence[Scalar]) -> bool:
        if all(a.is_zero() for a in v):
            return True
        if not self.rows:
            return False
        F = v[0].ring.field
        base = gf_array(F, self.codes())
        stacked = gf_array(F, np.vstack([self.codes(), [[a.constant_code() for a in v]]]))
        return gf_rank(stacked) == gf_rank(base)


@dataclass
class IdentityReport:
    """Violations found by check_super_identities"""

    parity: List[Tuple[int, int]] = field(default_factory=list)
    skew: List[Tuple[int, int]] = field(default_factory=list)
    jacobi: List[Tuple[Tuple[int, int, int], Vector]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.parity or self.skew or self.jacobi)


class SuperAlgebra:
    """Lie superalgebra over a ParameterRing"""

    def __init__(
        self,
        ring: ParameterRing,
        basis: Sequence[BasisElement],
        table: Mapping[Tuple[int, int], Union[Sparse, Sequence[Scalar]]],
        name: str = "",
    ):
        self.ring = ring
        self.basis: Tuple[BasisElement, ...] = tuple(basis)
        self.name = name
        self.names: Tuple[str, ...] = tuple(b.name for b in self.basis)
        self.parities: Tuple[int, ...] = tuple(b.parity for b in self.basis)
        if len(set(self.names)) != len(self.names):
            raise ParseError(f"duplicate basis names in {self.name or 'algebra'}")
        self._index = {n: i for i, n in enumerate(self.names)}

        n = len(self.basis)
        self._table: Dict[Tuple[int, int], Sparse] = {}
        for (i, j), value in table.items():
            if not (0 <= i < n and 0 <= j < n):
                raise DimensionMismatch(f"bracket index ({i}, {j}) outside basis of size {n}")
            sparse = self._as_sparse(value)
            if i > j:
                i, j = j, i
                sparse = self._swap_sign(i, j, sparse)
            if (i, j) in self._table and self._table[(i, j)] != sparse:
                raise ParseError(f"inconsistent values given for [{self.names[i]}, {self.names[j]}]")
            if sparse:
                self._table[(i, j)] = sparse
        self._ad_cache: Optional[List] = None
        self._system_cache = None
        self._center_cache: Optional["Subspace"] = None

    # ---------- basis access ----------

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def sdim(self) -> Tuple[int, int]:
        odd = sum(self.parities)
        return self.dim - odd, odd

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ParseError(f"'{name}' is not a basis element of {self.name or 'the algebra'}")

    def element(self, name_or_index: Union[str, int]) -> Vector:
        i = self.index(name_or_index) if isinstance(name_or_index, str) else name_or_index
        return unit_vector(self.ring, self.dim, i)

    def zero(self) -> Vector:
        return zero_vector(self.ring, self.dim)

    def vector(self, terms: Iterable[Tuple[Union[Scalar, int, str], str]]) -> Vector:
        """Vector from (coefficient, basis name) pairs"""
        out = list(self.zero())
        for coef, name in terms:
            if isinstance(coef, str):
                coef = parse_scalar(self.ring, coef)
            elif not isinstance(coef, Scalar):
                coef = self.ring.const(coef)
            i = self.index(name)
            out[i] = out[i] + coef
        return tuple(out)

    def format(self, v: Sequence[Scalar]) -> str:
        return format_vector(v, self.names)

    def parity_of(self, v: Sequence[Scalar]) -> int:
        return vector_parity(v, self.parities)

    # ---------- structure constants ----------

    def _as_sparse(self, value) -> Sparse:
        if isinstance(value, Mapping):
            return {k: s for k, s in value.items() if not s.is_zero()}
        if len(value) != self.dim:
            raise DimensionMismatch(f"bracket value of length {len(value)} in algebra of dim {self.dim}")
        return {k: s for k, s in enumerate(value) if not s.is_zero()}

    def _swap_sign(self, i: int, j: int, sparse: Sparse) -> Sparse:
        # [e_j, e_i] = -(-1)^{|i||j|} [e_i, e_j]
        if self.parities[i] and self.parities[j]:
            return dict(sparse)
        return {k: -s for k, s in sparse.items()}

    def basis_bracket(self, i: int, j: int) -> Sparse:
        if i <= j:
            return self._table.get((i, j), {})
        stored = self._table.get((j, i))
        return self._swap_sign(j, i, stored) if stored else {}

    def stored_pairs(self) -> List[Tuple[int, int]]:
        return sorted(self._table)

    def _bracket_sparse(self, v: Sparse, w: Sparse) -> Sparse:
        out: Sparse = {}
        for i, vi in v.items():
            for j, wj in w.items():
                c = self.basis_bracket(i, j)
                if not c:
                    continue
                coef = vi * (-wj if (self.parities[i] and wj.parity) else wj)
                for a, s in c.items():
                    out[a] = out[a] + coef * s if a in out else coef * s
        return {a: s for a, s in out.items() if not s.is_zero()}

    def to_sparse(self, v: Sequence[Scalar]) -> Sparse:
        if len(v) != self.dim:
            raise DimensionMismatch(f"vector of length {len(v)} in algebra of dim {self.dim}")
        return {i: a for i, a in enumerate(v) if not a.is_zero()}

    def from_sparse(self, s: Sparse) -> Vector:
        out = list(self.zero())
        for i, a in s.items():
            out[i] = a
        return tuple(out)

    def bracket(self, v: Sequence[Scalar], w: Sequence[Scalar]) -> Vector:
        return self.from_sparse(self._bracket_sparse(self.to_sparse(v), self.to_sparse(w)))

    def ad_matrix(self, x: Sequence[Scalar]) -> Matrix:
        self.parity_of(x)
        xs = self.to_sparse(x)
        cols = [self.from_sparse(self._bracket_sparse(xs, {j: self.ring.one})) for j in range(self.dim)]
        return from_columns(cols) if cols else []

    # ---------- specialisation ----------

    def is_specialized(self) -> bool:
        return all(s.is_constant() for value in self._table.values() for s in value.values())

    def specialize(self, assignment: Mapping[str, object], name: Optional[str] = None) -> "SuperAlgebra":
        """Substitute parameter values (partial assignments keep the rest symbolic)"""
        table = {
            key: {k: s.substitute(assignment) for k, s in value.items()} for key, value in self._table.items()
        }
        label = ", ".join(f"{k}={v}" for k, v in assignment.items())
        return SuperAlgebra(self.ring, self.basis, table, name=name or f"{self.name}({label})")

    def lift(self, ring: ParameterRing) -> "SuperAlgebra":
        table = {key: {k: s.lift(ring) for k, s in value.items()} for key, value in self._table.items()}
        return SuperAlgebra(ring, self.basis, table, name=self.name)

    def relabel(self, mapping: Mapping[str, str], name: Optional[str] = None) -> "SuperAlgebra":
        basis = [replace(b, name=mapping.get(b.name, b.name)) for b in self.basis]
        return SuperAlgebra(self.ring, basis, self._table, name=name or self.name)

    def same_constants(self, other: "SuperAlgebra") -> bool:
        return self.names == other.names and self.parities == other.parities and self._table == other._table

    # ---------- numeric views ----------

    def _require_numeric(self, what: str):
        if not self.is_specialized():
            raise SymbolicNotSupported(f"{what} needs a specialised algebra; '{self.name}' still has parameters")

    def ad_basis_gf(self) -> List:
        """ad(e_k) as galois matrices"""
        if self._ad_cache is None:
            self._require_numeric("numeric ad")
            F = self.ring.field
            n = self.dim
            mats = []
            for k in range(n):
                codes = np.zeros((n, n), dtype=np.int64)
                for j in range(n):
                    for a, s in self.basis_bracket(k, j).items():
                        codes[a, j] = s.constant_code()
                mats.append(gf_array(F, codes))
            self._ad_cache = mats
        return self._ad_cache

    def ad_gf(self, x_codes: Sequence[int]):
        F = self.ring.field
        n = self.dim
        total = gf_array(F, np.zeros((n, n), dtype=np.int64))
        for k, c in enumerate(x_codes):
            if c:
                total = total + F.gf(int(c)) * self.ad_basis_gf()[k]
        return total

    def structure_system(self):
        """T with T[a*n + j, k] = coefficient of e_a in [e_k, e_j]"""
        if self._system_cache is None:
            n = self.dim
            cols = [m.view(np.ndarray).reshape(n * n) for m in self.ad_basis_gf()]
            codes = np.stack(cols, axis=1) if cols else np.zeros((0, 0), dtype=np.int64)
            self._system_cache = gf_array(self.ring.field, codes)
        return self._system_cache

    def codes_to_vector(self, codes: Sequence[int]) -> Vector:
        return tuple(self.ring.const_code(int(c)) for c in codes)

    def vector_codes(self, v: Sequence[Scalar]) -> List[int]:
        return [a.constant_code() for a in v]

    # ---------- JSON ----------

    def to_model(self) -> AlgebraModel:
        ring = self.ring
        brackets = []
        for (i, j) in self.stored_pairs():
            brackets.append(
                BracketModel(
                    i=self.names[i],
                    j=self.names[j],
                    value=vector_terms(self, self.from_sparse(self._table[(i, j)])),
                )
            )
        params = None
        if ring.invertible or ring.even or ring.odd:
            params = ParametersModel(invertible=list(ring.invertible), even=list(ring.even), odd=list(ring.odd))
        return AlgebraModel(
            name=self.name or None,
            p=ring.field.p,
            k=ring.field.k,
            parameters=params,
            basis=[
                BasisModel(
                    name=b.name,
                    parity="odd" if b.parity else "even",
                    weight=list(b.weight) if b.weight is not None else None,
                    degree=b.degree,
                )
                for b in self.basis
            ],
            brackets=brackets,
        )

    def __repr__(self) -> str:
        even, odd = self.sdim
        return f"SuperAlgebra({self.name or '?'}, sdim={even}|{odd}, ring={self.ring})"


# ======================
# JSON helpers
# ======================

def vector_terms(g: SuperAlgebra, v: Sequence[Scalar]) -> List[TermModel]:
    return [TermModel(coef=str(a), k=g.names[i]) for i, a in enumerate(v) if not a.is_zero()]


def vector_from_terms(g: SuperAlgebra, terms: Sequence[TermModel]) -> Vector:
    return g.vector((parse_scalar(g.ring, t.coef), t.k) for t in terms)


def algebra_from_model(model: AlgebraModel, ring: Optional[ParameterRing] = None) -> SuperAlgebra:
    if ring is None:
        params = model.parameters or ParametersModel()
        ring = ParameterRing(
            field=get_field(model.p, model.k),
            invertible=tuple(params.invertible),
            even=tuple(params.even),
            odd=tuple(params.odd),
        )
    basis = [
        BasisElement(
            name=b.name,
            parity=1 if b.parity == "odd" else 0,
            weight=tuple(b.weight) if b.weight is not None else None,
            degree=b.degree,
        )
        for b in model.basis
    ]
    index = {b.name: i for i, b in enumerate(basis)}
    table: Dict[Tuple[int, int], Sparse] = {}
    for br in model.brackets:
        for name in (br.i, br.j):
            if name not in index:
                raise ParseError(f"bracket mentions unknown basis element '{name}'")
        value: Sparse = {}
        for t in br.value:
            if t.k not in index:
                raise ParseError(f"bracket value mentions unknown basis element '{t.k}'")
            s = parse_scalar(ring, t.coef)
            value[index[t.k]] = value[index[t.k]] + s if index[t.k] in value else s
        key = (index[br.i], index[br.j])
        if key in table:
            raise ParseError(f"bracket [{br.i}, {br.j}] given twice")
        table[key] = value
    return SuperAlgebra(ring, basis, table, name=model.name or "")


def read_algebra_json(source: Union[str, Path], ring: Optional[ParameterRing] = None) -> SuperAlgebra:
    """
    Load an algebra from a JSON file path or a JSON string

    Args:
        source: Path to the file, or the JSON text itself
        ring: Optional ring to read the coefficients into

    Returns:
        SuperAlgebra
    """
    text = str(source)
    path = Path(text) if not text.lstrip().startswith("{") else None
    if path is not None:
        if not path.exists():
            raise ParseError(f"algebra file not found: {path}")
        text = path.read_text(encoding="utf-8")
    try:
        model = AlgebraModel.model_validate_json(text)
    except ValueError as e:
        raise ParseError(f"invalid algebra JSON: {e}")
    return algebra_from_model(model, ring)


def write_algebra_json(g: SuperAlgebra, path: Optional[Union[str, Path]] = None) -> str:
    text = json.dumps(g.to_model().model_dump(exclude_none=True), indent=2, ensure_ascii=False)
    if path is not None:
        Path(path).write_text(text + "\n", encoding="utf-8")
    return text


# ======================
# Operations
# ======================

def bracket(g: SuperAlgebra, v: Sequence[Scalar], w: Sequence[Scalar]) -> Vector:
    return g.bracket(v, w)


def ad_matrix(g: SuperAlgebra, x: Sequence[Scalar]) -> Matrix:
    return g.ad_matrix(x)


def specialize(g: SuperAlgebra, assignment: Mapping[str, object]) -> SuperAlgebra:
    return g.specialize(assignment)


def jacobiator(g: SuperAlgebra, i: int, j: int, k: int) -> Sparse:
    """[a,[b,c]] - [[a,b],c] - (-1)^{|a||b|} [b,[a,c]] on basis elements"""
    one = g.ring.one
    a, b, c = {i: one}, {j: one}, {k: one}
    first = g._bracket_sparse(a, g._bracket_sparse(b, c))
    second = g._bracket_sparse(g._bracket_sparse(a, b), c)
    third = g._bracket_sparse(b, g._bracket_sparse(a, c))
    sign_odd = g.parities[i] and g.parities[j]
    out = dict(first)
    for idx, s in second.items():
        out[idx] = out[idx] - s if idx in out else -s
    for idx, s in third.items():
        s = s if sign_odd else -s
        out[idx] = out[idx] + s if idx in out else s
    return {idx: s for idx, s in out.items() if not s.is_zero()}


def check_super_identities(g: SuperAlgebra) -> IdentityReport:
    """
    Check parity, super skew-symmetry and super Jacobi on basis elements

    Jacobi is checked on sorted triples i <= j <= k (the jacobiator is
    super-antisymmetric); repeated even elements are skipped and for an
    odd element x the condition [x, [x, x]] = 0 is checked directly.
    """
    report = IdentityReport()
    n = g.dim
    for (i, j), value in g._table.items():
        want = (g.parities[i] + g.parities[j]) % 2
        for a, s in value.items():
            if (s.parity + g.parities[a]) % 2 != want:
                report.parity.append((i, j))
                break
        if i == j and not g.parities[i] and value:
            report.skew.append((i, j))

    for i in range(n):
        for j in range(i, n):
            if i == j and not g.parities[i]:
                continue
            for k in range(j, n):
                if k == j and not g.parities[k]:
                    continue
                if i == j == k:
                    one = {i: g.ring.one}
                    value = g._bracket_sparse(one, g._bracket_sparse(one, one))
                else:
                    value = jacobiator(g, i, j, k)
                if value:
                    report.jacobi.append(((i, j, k), g.from_sparse(value)))

    if report.ok:
        logger.debug(f"{g.name}: super identities hold on all {n} basis elements")
    else:
        logger.info(
            f"{g.name}: {len(report.parity)} parity, {len(report.skew)} skew, "
            f"{len(report.jacobi)} Jacobi violations"
        )
    return report


def center(g: SuperAlgebra) -> Subspace:
    """Center of a specialised algebra"""
    g._require_numeric("center")
    if g._center_cache is None:
        if g.dim == 0:
            g._center_cache = Subspace((), 0)
        else:
            null = gf_null_space(g.structure_system(), g.dim, g.ring.field)
            rows = gf_row_space(null) if null.shape[0] else null
            g._center_cache = Subspace(tuple(g.codes_to_vector(r) for r in rows.view(np.ndarray)), g.dim)
    return g._center_cache


def span(g: SuperAlgebra, vectors: Sequence[Sequence[Scalar]]) -> Subspace:
    if not vectors:
        return Subspace((), g.dim)
    rows = gf_row_space(gf_array(g.ring.field, [g.vector_codes(v) for v in vectors]))
    return Subspace(tuple(g.codes_to_vector(r) for r in rows.view(np.ndarray)), g.dim)


def derived_subalgebra(g: SuperAlgebra, i: int = 1) -> Subspace:
    """
    i-th derived algebra g^(i) (g^(0) = g) of a specialised algebra

    Args:
        g: Specialised algebra
        i: Derived index

    Returns:
        Subspace in echelon form
    """
    g._require_numeric("derived algebra")
    F = g.ring.field
    current = gf_array(F, np.eye(g.dim, dtype=np.int64))
    for _ in range(i):
        if current.shape[0] == 0:
            break
        blocks = []
        for u in current.view(np.ndarray):
            ad_u = g.ad_gf(u)
            blocks.append((ad_u @ current.T).T)
        current = gf_row_space(np.vstack(blocks))
    return Subspace(tuple(g.codes_to_vector(r) for r in current.view(np.ndarray)), g.dim)


def derived_series(g: SuperAlgebra, length: int = 2) -> List[int]:
    return [derived_subalgebra(g, i).dim for i in range(1, length + 1)]


Weight = Tuple[int, ...]


def torus_weights(g: SuperAlgebra, torus: Sequence[Sequence[Scalar]]) -> List[List[Scalar]]:
    """
    Diagonal of ad(t) on the basis for every t in the torus

    Raises NonCommutingTorus if two torus elements do not commute and
    NotDiagonal if some ad(t) has an off-diagonal entry.
    """
    for a in range(len(torus)):
        for b in range(a + 1, len(torus)):
            if not all(s.is_zero() for s in g.bracket(torus[a], torus[b])):
                raise NonCommutingTorus(f"[{g.format(torus[a])}, {g.format(torus[b])}] != 0")
    diagonals = []
    for t in torus:
        M = g.ad_matrix(t)
        for a in range(g.dim):
            for j in range(g.dim):
                if a != j and not M[a][j].is_zero():
                    raise NotDiagonal(
                        f"ad({g.format(t)}) is not diagonal: {g.names[j]} -> component on {g.names[a]}"
                    )
        diagonals.append([M[j][j] for j in range(g.dim)])
    return diagonals


def weight_decomposition(g: SuperAlgebra, torus: Sequence[Sequence[Scalar]]) -> Dict[Weight, Subspace]:
    """
    Split the basis into common eigenspaces of ad(t), t in the torus

    Args:
        g: Algebra whose basis is a weight basis for the torus
        torus: Pairwise commuting even elements

    Returns:
        Mapping weight -> Subspace spanned by the basis vectors of that weight;
        a weight is the tuple of field codes of the eigenvalues (integers mod p over GF(p))
    """
    diagonals = torus_weights(g, torus)
    spaces: Dict[Weight, List[int]] = {}
    for j in range(g.dim):
        entries = [d[j] for d in diagonals]
        if not all(s.is_constant() for s in entries):
            raise SymbolicNotSupported(
                f"weight of {g.names[j]} depends on parameters; specialise {g.name or 'the algebra'} first"
            )
        spaces.setdefault(tuple(s.constant_code() for s in entries), []).append(j)
    return {
        key: Subspace(tuple(g.element(j) for j in idx), g.dim) for key, idx in spaces.items()
    }


def squaring(g: SuperAlgebra, x: Sequence[Scalar]) -> Vector:
    """x^2 = [x, x] / 2 for odd x"""
    if g.ring.p == 2:
        raise CharacteristicTwo("squaring of odd elements needs p != 2")
    if g.parity_of(x) != 1:
        raise EvenElement(f"{g.format(x)} is not odd")
    half = g.ring.const(2).inverse()
    return tuple(half * a for a in g.bracket(x, x))


def supertrace_form(g: SuperAlgebra):
    """Matrix of (x, y) -> str(ad x ad y) on the basis, as a galois array"""
    g._require_numeric("supertrace form")
    F = g.ring.field
    n = g.dim
    ads = g.ad_basis_gf()
    signs = gf_array(F, [(-1) % F.p if par else 1 for par in g.parities])
    form = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            form[i, j] = int(((ads[i] @ ads[j]).diagonal() * signs).sum())
    return gf_array(F, form)


def check_grading(g: SuperAlgebra) -> List[Tuple[int, int]]:
    """Basis pairs whose bracket breaks the declared weights (mod p) or degrees"""
    bad = []
    p = g.ring.p
    for (i, j), value in g._table.items():
        bi, bj = g.basis[i], g.basis[j]
        for a in value:
            ba = g.basis[a]
            if bi.weight is not None and bj.weight is not None and ba.weight is not None:
                want = tuple((x + y) % p for x, y in zip(bi.weight, bj.weight))
                if tuple(w % p for w in ba.weight) != want:
                    bad.append((i, j))
                    break
            if bi.degree is not None and bj.degree is not None and ba.degree is not None:
                if ba.degree != bi.degree + bj.degree:
                    bad.append((i, j))
                    break
    return bad


def difference_in(sub: Subspace, u: Sequence[Scalar], v: Sequence[Scalar]) -> bool:
    """u - v lies in the subspace"""
    return sub.contains(vec_sub(u, v))

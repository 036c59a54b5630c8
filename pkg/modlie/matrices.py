# modlie/matrices.py
"""
Vectors and matrices over parameter rings, plus the galois-backed
linear algebra used once everything is specialised to constants.

Vectors are tuples of Scalars; matrices are row-major lists of rows.
Scalars multiply from the left and operators act with the Koszul sign
``(-1)^{|op| |coefficient|}``.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from modlie.errors import DimensionMismatch, InhomogeneousElement, SymbolicNotSupported
from modlie.scalars import FiniteField, ParameterRing, Scalar

logger = logging.getLogger(__name__)

Vector = Tuple[Scalar, ...]
Matrix = List[List[Scalar]]


# ======================
# Vectors
# ======================

def zero_vector(ring: ParameterRing, n: int) -> Vector:
    return (ring.zero,) * n


def unit_vector(ring: ParameterRing, n: int, i: int) -> Vector:
    return tuple(ring.one if k == i else ring.zero for k in range(n))


def vec_add(u: Sequence[Scalar], v: Sequence[Scalar]) -> Vector:
    if len(u) != len(v):
        raise DimensionMismatch(f"vectors of length {len(u)} and {len(v)}")
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u: Sequence[Scalar], v: Sequence[Scalar]) -> Vector:
    if len(u) != len(v):
        raise DimensionMismatch(f"vectors of length {len(u)} and {len(v)}")
    return tuple(a - b for a, b in zip(u, v))


def vec_neg(v: Sequence[Scalar]) -> Vector:
    return tuple(-a for a in v)


def vec_scale(s: Scalar, v: Sequence[Scalar]) -> Vector:
    return tuple(s * a for a in v)


def vec_is_zero(v: Sequence[Scalar]) -> bool:
    return all(a.is_zero() for a in v)


def vector_parity(v: Sequence[Scalar], basis_parities: Sequence[int]) -> int:
    """Parity of a homogeneous vector (zero counts as even)"""
    found = set()
    for a, par in zip(v, basis_parities):
        if not a.is_zero():
            found.add((a.parity + par) % 2)
    if len(found) > 1:
        raise InhomogeneousElement("element mixes even and odd components")
    return found.pop() if found else 0


def format_vector(v: Sequence[Scalar], names: Sequence[str]) -> str:
    parts = []
    for a, name in zip(v, names):
        if a.is_zero():
            continue
        if a == 1:
            parts.append(name)
        elif len(a.terms) == 1:
            parts.append(f"{a}*{name}")
        else:
            parts.append(f"({a})*{name}")
    return " + ".join(parts) if parts else "0"


# ======================
# Matrices
# ======================

def zero_matrix(ring: ParameterRing, rows: int, cols: Optional[int] = None) -> Matrix:
    cols = rows if cols is None else cols
    return [[ring.zero] * cols for _ in range(rows)]


def identity_matrix(ring: ParameterRing, n: int) -> Matrix:
    return [[ring.one if i == j else ring.zero for j in range(n)] for i in range(n)]


def column(M: Matrix, j: int) -> Vector:
    return tuple(row[j] for row in M)


def from_columns(columns: Sequence[Sequence[Scalar]]) -> Matrix:
    if not columns:
        return []
    return [list(row) for row in zip(*columns)]


def mat_apply(M: Matrix, v: Sequence[Scalar], parity: int = 0) -> Vector:
    """Apply an operator of the given parity to a vector"""
    n = len(M)
    ring = v[0].ring if v else None
    out = [ring.zero] * n if ring else []
    for j, vj in enumerate(v):
        if vj.is_zero():
            continue
        coef = -vj if (parity and vj.parity) else vj
        for a in range(n):
            entry = M[a][j]
            if not entry.is_zero():
                out[a] = out[a] + coef * entry
    return tuple(out)


def mat_compose(A: Matrix, B: Matrix, parity_a: int = 0) -> Matrix:
    """A after B"""
    cols = len(B[0]) if B else 0
    return from_columns([mat_apply(A, column(B, j), parity_a) for j in range(cols)])


def mat_power(M: Matrix, e: int, parity: int = 0) -> Matrix:
    """M^e by repeated squaring; ``parity`` is the parity of M as an operator"""
    if e < 1:
        raise ValueError("only positive powers are supported")
    result: Optional[Matrix] = None
    base, base_parity = M, parity
    while e:
        if e & 1:
            result = base if result is None else mat_compose(base, result, base_parity)
        e >>= 1
        if e:
            base = mat_compose(base, base, base_parity)
            base_parity = 0
    return result


def mat_equal(A: Matrix, B: Matrix) -> bool:
    return all(a == b for ra, rb in zip(A, B) for a, b in zip(ra, rb))


def first_difference(A: Matrix, B: Matrix) -> Optional[Tuple[int, int]]:
    for i, (ra, rb) in enumerate(zip(A, B)):
        for j, (a, b) in enumerate(zip(ra, rb)):
            if a != b:
                return i, j
    return None


def is_constant_matrix(M: Matrix) -> bool:
    return all(a.is_constant() for row in M for a in row)


def to_codes(M: Sequence[Sequence[Scalar]]) -> np.ndarray:
    """Integer field codes of a constant matrix"""
    try:
        return np.array([[a.constant_code() for a in row] for row in M], dtype=np.int64)
    except SymbolicNotSupported:
        raise SymbolicNotSupported("matrix has non-constant entries; specialise the parameters first")


# ======================
# galois linear algebra
# ======================

def gf_array(F: FiniteField, codes) -> np.ndarray:
    return F.gf(np.asarray(codes, dtype=np.int64))


def gf_rank(A) -> int:
    if A.size == 0:
        return 0
    R = A.row_reduce()
    return int(np.count_nonzero(np.any(R.view(np.ndarray) != 0, axis=1)))


def gf_row_space(A) -> np.ndarray:
    """Nonzero rows of the reduced row echelon form"""
    if A.size == 0:
        return A
    R = A.row_reduce()
    keep = np.any(R.view(np.ndarray) != 0, axis=1)
    return R[keep]


def gf_null_space(A, ncols: int, F: FiniteField) -> np.ndarray:
    """Rows spanning {y : A y = 0}"""
    if A.shape[0] == 0:
        return gf_array(F, np.eye(ncols, dtype=np.int64))
    return A.null_space()


def gf_solve(T, b) -> Optional[np.ndarray]:
    """
    Particular solution of T y = b with free unknowns set to 0

    Args:
        T: galois matrix (rows x n)
        b: galois vector (rows)

    Returns:
        Integer code vector of length n, or None when inconsistent
    """
    n = T.shape[1]
    aug = np.hstack((T, b.reshape(-1, 1)))
    R = aug.row_reduce().view(np.ndarray)
    y = np.zeros(n, dtype=np.int64)
    for row in R:
        nz = np.nonzero(row[:n])[0]
        if nz.size == 0:
            if row[n] != 0:
                return None
            continue
        # reduced echelon form: pivot is 1
        y[nz[0]] = row[n]
    return y


# ======================
# Symbolic elimination
# ======================

@dataclass
class LinearSolution:
    """Result of unit-pivot elimination"""

    values: List[Scalar]
    free: List[int] = field(default_factory=list)
    stuck: List[int] = field(default_factory=list)
    inconsistent: bool = False


def solve_unit_pivot(
    rows: Sequence[Tuple[Dict[int, Scalar], Scalar]],
    nvars: int,
    ring: ParameterRing,
) -> LinearSolution:
    """
    Gauss-Jordan elimination over a parameter ring using unit pivots only

    Each row is ``({k: c_k}, rhs)`` meaning ``sum_k y_k * c_k = rhs``.
    Unknowns never pivoted are set to 0; ``stuck`` lists those that still
    carry non-unit coefficients. The caller verifies the result exactly.
    """
    work = [(dict(c), r) for c, r in rows if c or not r.is_zero()]
    pivot_row: Dict[int, int] = {}
    used = set()

    while True:
        best = None
        for ri, (coeffs, _) in enumerate(work):
            if ri in used:
                continue
            for k, c in coeffs.items():
                if c.is_unit():
                    key = (len(coeffs), len(c.terms), k, ri)
                    if best is None or key < best[0]:
                        best = (key, ri, k)
        if best is None:
            break

        _, ri, k = best
        coeffs_i, rhs_i = work[ri]
        u_inv = coeffs_i[k].inverse()
        for rj, (coeffs_j, rhs_j) in enumerate(work):
            if rj == ri or k not in coeffs_j:
                continue
            factor = u_inv * coeffs_j[k]
            new = dict(coeffs_j)
            for kk, c in coeffs_i.items():
                val = new.get(kk, ring.zero) - c * factor
                if val.is_zero():
                    new.pop(kk, None)
                else:
                    new[kk] = val
            work[rj] = (new, rhs_j - rhs_i * factor)
        pivot_row[k] = ri
        used.add(ri)

    values = [ring.zero] * nvars
    for k, ri in pivot_row.items():
        coeffs, rhs = work[ri]
        values[k] = rhs * coeffs[k].inverse()

    free = [k for k in range(nvars) if k not in pivot_row]
    stuck = sorted({k for ri, (coeffs, _) in enumerate(work) for k in coeffs if k not in pivot_row})
    inconsistent = any(
        not coeffs and not rhs.is_zero() for ri, (coeffs, rhs) in enumerate(work) if ri not in used
    )
    return LinearSolution(values=values, free=free, stuck=stuck, inconsistent=inconsistent)

# modlie/divpow.py
"""
Divided-power superalgebras O(m;N|n) and their vector fields

Monomials are ``(exponents, oddmask)`` with divided-power exponents
0 <= a_i < p^{N_i}; odd factors are kept in increasing order and the
reordering sign is tracked. Coefficients are Scalars of the descriptor's
ring, multiplied from the left.

Also here: the volume-preserving algebra svect deformed by (1 + u_bar),
the formula ((1 - u_bar) d_i)^[p] = -(d_i^{p-1} u_bar) d_i and the
contact bracket on O(3;(1,1,1)).
"""
import logging
import re
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from math import comb
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from modlie.errors import (
    DescriptorMismatch,
    ExpansionFailure,
    InhomogeneousElement,
    NotAUnit,
    OddIndex,
    ParseError,
    WrongDescriptor,
)
from modlie.matrices import gf_array, gf_null_space, gf_row_space
from modlie.scalars import ParameterRing, Scalar, _merge_sign, _popcount, constant_ring, parse_scalar, tokenize
from modlie.superalg import BasisElement, SuperAlgebra

logger = logging.getLogger(__name__)

Mono = Tuple[Tuple[int, ...], int]

HEADER = re.compile(r"^O\(m=(\d+);N=\[([\d,\s]*)\]\|n=(\d+);p=(\d+)\)$")


# ======================
# Descriptor
# ======================

@dataclass(frozen=True)
class DPDescriptor:
    """O(m;N|n) over GF(p)"""

    m: int
    N: Tuple[int, ...]
    n: int = 0
    p: int = 3
    names: Tuple[str, ...] = ()
    ring: Optional[ParameterRing] = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.N) != self.m or any(h < 1 for h in self.N):
            raise ParseError(f"shearing vector {self.N} does not fit m={self.m}")
        if not self.names:
            names = tuple(f"u{i + 1}" for i in range(self.m)) + tuple(f"th{j + 1}" for j in range(self.n))
            object.__setattr__(self, "names", names)
        if len(self.names) != self.m + self.n:
            raise ParseError(f"expected {self.m + self.n} indeterminate names, got {len(self.names)}")
        if self.ring is None:
            object.__setattr__(self, "ring", constant_ring(self.p))
        if self.ring.p != self.p:
            raise DescriptorMismatch(f"coefficient ring has characteristic {self.ring.p}, descriptor {self.p}")

    @property
    def bounds(self) -> Tuple[int, ...]:
        return tuple(self.p ** h for h in self.N)

    @property
    def dim(self) -> int:
        total = 2 ** self.n
        for b in self.bounds:
            total *= b
        return total

    @property
    def nvars(self) -> int:
        return self.m + self.n

    def is_odd(self, i: int) -> bool:
        return i >= self.m

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ParseError(f"'{name}' is not an indeterminate of {self.header}")

    @property
    def header(self) -> str:
        return f"O(m={self.m};N=[{','.join(str(h) for h in self.N)}]|n={self.n};p={self.p})"

    def monomials(self) -> List[Mono]:
        out = []
        for exps in product(*(range(b) for b in self.bounds)):
            for mask in range(2 ** self.n):
                out.append((tuple(exps), mask))
        return sorted(out, key=mono_key)

    def with_ring(self, ring: ParameterRing) -> "DPDescriptor":
        return DPDescriptor(m=self.m, N=self.N, n=self.n, p=self.p, names=self.names, ring=ring)

    def compatible(self, other: "DPDescriptor") -> bool:
        return self == other


def parse_header(text: str, ring: Optional[ParameterRing] = None) -> DPDescriptor:
    match = HEADER.match(text.replace(" ", ""))
    if not match:
        raise ParseError(f"bad descriptor header '{text}'")
    m, heights, n, p = match.groups()
    N = tuple(int(h) for h in heights.split(",") if h)
    return DPDescriptor(m=int(m), N=N, n=int(n), p=int(p), ring=ring)


def k31_descriptor(ring: Optional[ParameterRing] = None) -> DPDescriptor:
    """O(3;(1,1,1)) with indeterminates ph, qh, t"""
    return DPDescriptor(m=3, N=(1, 1, 1), n=0, p=3, names=("ph", "qh", "t"), ring=ring)


def mono_key(mono: Mono):
    exps, mask = mono
    return (sum(exps) + _popcount(mask), exps, mask)


def mono_parity(mono: Mono) -> int:
    return _popcount(mono[1]) & 1


@lru_cache(maxsize=4096)
def _binom_mod(a: int, b: int, p: int) -> int:
    return comb(a + b, a) % p


# ======================
# Elements
# ======================

class DPElement:
    """Element of O(m;N|n): sparse map monomial -> Scalar"""

    __slots__ = ("d", "terms")

    def __init__(self, d: DPDescriptor, terms: Optional[Dict[Mono, Scalar]] = None):
        self.d = d
        self.terms: Dict[Mono, Scalar] = {}
        for mono, c in (terms or {}).items():
            exps, mask = mono
            if any(a < 0 or a >= b for a, b in zip(exps, d.bounds)) or mask >= 2 ** d.n:
                raise ParseError(f"monomial {mono} outside {d.header}")
            if not c.is_zero():
                self.terms[mono] = c

    @classmethod
    def monomial(cls, d: DPDescriptor, exps: Sequence[int] = (), mask: int = 0, coef=None) -> "DPElement":
        exps = tuple(exps) if exps else (0,) * d.m
        c = d.ring.one if coef is None else (coef if isinstance(coef, Scalar) else d.ring.const(coef))
        return cls(d, {(exps, mask): c})

    @classmethod
    def one(cls, d: DPDescriptor) -> "DPElement":
        return cls.monomial(d)

    @classmethod
    def variable(cls, d: DPDescriptor, name: str, power: int = 1) -> "DPElement":
        """Divided power name^(power) (odd indeterminates only to power 1)"""
        i = d.index(name)
        if d.is_odd(i):
            if power != 1:
                raise ParseError(f"odd indeterminate '{name}' only has power 1")
            return cls.monomial(d, mask=1 << (i - d.m))
        exps = [0] * d.m
        exps[i] = power
        return cls.monomial(d, exps)

    def _check(self, other: "DPElement"):
        if not isinstance(other, DPElement):
            raise TypeError(f"expected DPElement, got {type(other).__name__}")
        if not self.d.compatible(other.d):
            raise DescriptorMismatch(f"{self.d.header} vs {other.d.header}")

    def __add__(self, other: "DPElement") -> "DPElement":
        self._check(other)
        terms = dict(self.terms)
        for mono, c in other.terms.items():
            terms[mono] = terms[mono] + c if mono in terms else c
        return DPElement(self.d, terms)

    def __neg__(self) -> "DPElement":
        return DPElement(self.d, {mono: -c for mono, c in self.terms.items()})

    def __sub__(self, other: "DPElement") -> "DPElement":
        return self + (-other)

    def __mul__(self, other: "DPElement") -> "DPElement":
        return dp_multiply(self.d, self, other)

    def __rmul__(self, scalar) -> "DPElement":
        if not isinstance(scalar, Scalar):
            scalar = self.d.ring.const(scalar)
        return DPElement(self.d, {mono: scalar * c for mono, c in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def parity(self) -> int:
        found = {(mono_parity(mono) + c.parity) % 2 for mono, c in self.terms.items()}
        if len(found) > 1:
            raise InhomogeneousElement(f"'{self}' mixes parities")
        return found.pop() if found else 0

    def constant_term(self) -> Scalar:
        return self.terms.get(((0,) * self.d.m, 0), self.d.ring.zero)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DPElement):
            return NotImplemented
        return self.d == other.d and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def format_monomial(self, mono: Mono) -> str:
        exps, mask = mono
        factors = []
        for name, a in zip(self.d.names, exps):
            if a == 1:
                factors.append(name)
            elif a:
                factors.append(f"{name}^({a})")
        factors.extend(self.d.names[self.d.m + j] for j in range(self.d.n) if mask >> j & 1)
        return "*".join(factors)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        F = self.d.ring.field
        parts = []
        for mono in sorted(self.terms, key=mono_key):
            mono_text = self.format_monomial(mono)
            # one printed term per scalar monomial so the text parses back
            scalar = self.terms[mono]
            for key in sorted(scalar.terms, key=lambda k: scalar._sort_key((k, 0))):
                coef = str(Scalar(scalar.ring, {key: scalar.terms[key]}))
                if not mono_text:
                    parts.append(coef)
                elif coef == "1":
                    parts.append(mono_text)
                else:
                    parts.append(f"{coef}*{mono_text}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"DPElement({self})"


def dp_multiply(d: DPDescriptor, f: DPElement, g: DPElement) -> DPElement:
    """
    Supercommutative product with the divided-power rule

    u^(a) u^(b) = binom(a+b, a) u^(a+b); exponents past the bound vanish.
    """
    f._check(g)
    p = d.p
    bounds = d.bounds
    ring = d.ring
    terms: Dict[Mono, Scalar] = {}
    for (e1, o1), a in f.terms.items():
        par1 = _popcount(o1) & 1
        for (e2, o2), b in g.terms.items():
            if o1 & o2:
                continue
            exps = tuple(x + y for x, y in zip(e1, e2))
            if any(x >= bd for x, bd in zip(exps, bounds)):
                continue
            coef = 1
            for x, y in zip(e1, e2):
                if x and y:
                    coef = coef * _binom_mod(x, y, p) % p
            if not coef:
                continue
            sign = _merge_sign(o1, o2)
            if par1 and b.parity:
                sign = -sign
            value = a * b * ring.const(coef * sign)
            key = (exps, o1 | o2)
            terms[key] = terms[key] + value if key in terms else value
    return DPElement(d, {k: v for k, v in terms.items() if not v.is_zero()})


def dp_derivative(d: DPDescriptor, i: int, f: DPElement) -> DPElement:
    """d_i f; odd d_i carries the Koszul sign of the factors and coefficient it passes"""
    terms: Dict[Mono, Scalar] = {}
    if not d.is_odd(i):
        for (exps, mask), c in f.terms.items():
            if exps[i]:
                new = list(exps)
                new[i] -= 1
                key = (tuple(new), mask)
                terms[key] = terms[key] + c if key in terms else c
    else:
        j = i - d.m
        bit = 1 << j
        for (exps, mask), c in f.terms.items():
            if not mask & bit:
                continue
            negative = (_popcount(mask & (bit - 1)) + c.parity) & 1
            key = (exps, mask ^ bit)
            value = -c if negative else c
            terms[key] = terms[key] + value if key in terms else value
    return DPElement(d, terms)


def dp_inverse(d: DPDescriptor, f: DPElement) -> DPElement:
    """Inverse of a unit constant term plus nilpotent part"""
    c0 = f.constant_term()
    if not c0.is_unit():
        raise NotAUnit(f"'{f}' is not a unit of {d.header}")
    c_inv = c0.inverse()
    unit = DPElement.monomial(d, coef=c0)
    step = -(c_inv * (f - unit))
    result = DPElement.one(d)
    power = DPElement.one(d)
    for _ in range(d.dim + 1):
        power = dp_multiply(d, power, step)
        if power.is_zero():
            break
        result = result + power
    return c_inv * result


def parse_dp(d: DPDescriptor, text: str) -> DPElement:
    """
    Parse ``2*u1^(2)*th1*th2 + t``

    ``name^(a)`` is a divided power, ``name^a`` an ordinary power; other
    names are generators of the coefficient ring.
    """
    tokens = tokenize(text)
    if not tokens:
        raise ParseError("empty element")
    ring = d.ring
    pos = 0
    total = DPElement(d)

    def peek():
        return tokens[pos] if pos < len(tokens) else (None, None)

    while pos < len(tokens):
        sign = 1
        while peek() in (("op", "+"), ("op", "-")):
            if peek()[1] == "-":
                sign = -sign
            pos += 1
        term = DPElement.one(d)
        while True:
            kind, value = peek()
            pos += 1
            if kind in ("int", "lit"):
                factor = DPElement.monomial(d, coef=parse_scalar(ring, value))
            elif kind == "name" and value in d.names:
                power, divided = 1, True
                if peek() == ("op", "^"):
                    pos += 1
                    kind2, exp = peek()
                    pos += 1
                    if kind2 == "lit":
                        power = int(exp[1:-1])
                    elif kind2 == "int":
                        power, divided = int(exp), False
                    else:
                        raise ParseError(f"bad exponent after '{value}' in '{text}'")
                if divided:
                    factor = DPElement.variable(d, value, power)
                else:
                    factor = DPElement.one(d)
                    for _ in range(power):
                        factor = dp_multiply(d, factor, DPElement.variable(d, value))
            elif kind == "name":
                scalar_text = value
                if peek() == ("op", "^"):
                    pos += 1
                    neg = ""
                    if peek() == ("op", "-"):
                        neg = "-"
                        pos += 1
                    kind2, exp = peek()
                    pos += 1
                    if kind2 != "int":
                        raise ParseError(f"bad exponent after '{value}' in '{text}'")
                    scalar_text = f"{value}^{neg}{exp}"
                factor = DPElement.monomial(d, coef=parse_scalar(ring, scalar_text))
            else:
                raise ParseError(f"expected a factor in '{text}'")
            term = dp_multiply(d, term, factor)
            if peek() == ("op", "*"):
                pos += 1
            else:
                break
        total = total + (term if sign > 0 else -term)
        if pos < len(tokens) and peek()[1] not in ("+", "-"):
            raise ParseError(f"unexpected '{peek()[1]}' in '{text}'")
    return total


# ======================
# Vector fields
# ======================

class VectorField:
    """sum_i f_i d_i"""

    __slots__ = ("d", "coeffs")

    def __init__(self, d: DPDescriptor, coeffs: Sequence[DPElement]):
        if len(coeffs) != d.nvars:
            raise DescriptorMismatch(f"{len(coeffs)} coefficients for {d.nvars} indeterminates")
        self.d = d
        self.coeffs: Tuple[DPElement, ...] = tuple(coeffs)

    @classmethod
    def partial(cls, d: DPDescriptor, i: int, coef: Optional[DPElement] = None) -> "VectorField":
        coef = DPElement.one(d) if coef is None else coef
        return cls(d, [coef if k == i else DPElement(d) for k in range(d.nvars)])

    @classmethod
    def zero(cls, d: DPDescriptor) -> "VectorField":
        return cls(d, [DPElement(d)] * d.nvars)

    def _check(self, other: "VectorField"):
        if not self.d.compatible(other.d):
            raise DescriptorMismatch(f"{self.d.header} vs {other.d.header}")

    def __add__(self, other: "VectorField") -> "VectorField":
        self._check(other)
        return VectorField(self.d, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self) -> "VectorField":
        return VectorField(self.d, [-a for a in self.coeffs])

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-other)

    def __rmul__(self, scalar) -> "VectorField":
        return VectorField(self.d, [scalar * a for a in self.coeffs])

    def __eq__(self, other) -> bool:
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.d == other.d and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def term_parity(self, i: int, mono: Mono, c: Scalar) -> int:
        return (mono_parity(mono) + c.parity + (1 if self.d.is_odd(i) else 0)) % 2

    @property
    def parity(self) -> int:
        found = {
            self.term_parity(i, mono, c) for i, f in enumerate(self.coeffs) for mono, c in f.terms.items()
        }
        if len(found) > 1:
            raise InhomogeneousElement(f"'{self}' mixes parities")
        return found.pop() if found else 0

    def components(self) -> Dict[int, "VectorField"]:
        """Homogeneous parts by parity"""
        parts: Dict[int, List[Dict[Mono, Scalar]]] = {}
        for i, f in enumerate(self.coeffs):
            for mono, c in f.terms.items():
                par = self.term_parity(i, mono, c)
                parts.setdefault(par, [dict() for _ in range(self.d.nvars)])[i][mono] = c
        return {par: VectorField(self.d, [DPElement(self.d, t) for t in coeffs]) for par, coeffs in parts.items()}

    def apply(self, f: DPElement) -> DPElement:
        total = DPElement(self.d)
        for i, coef in enumerate(self.coeffs):
            if coef.is_zero():
                continue
            deriv = dp_derivative(self.d, i, f)
            if not deriv.is_zero():
                total = total + dp_multiply(self.d, coef, deriv)
        return total

    def __str__(self) -> str:
        parts = []
        for i, f in enumerate(self.coeffs):
            if f.is_zero():
                continue
            text = str(f)
            if text == "1":
                parts.append(f"d_{self.d.names[i]}")
            elif len(f.terms) == 1 and len(next(iter(f.terms.values())).terms) == 1:
                parts.append(f"{text}*d_{self.d.names[i]}")
            else:
                parts.append(f"({text})*d_{self.d.names[i]}")
        return " + ".join(parts) if parts else "0"

    def __repr__(self) -> str:
        return f"VectorField({self})"


def vf_bracket(D1: VectorField, D2: VectorField) -> VectorField:
    """[D1, D2]_j = D1(g_j) - (-1)^{|D1||D2|} D2(f_j), extended bilinearly over parity parts"""
    if not D1.d.compatible(D2.d):
        raise DescriptorMismatch(f"{D1.d.header} vs {D2.d.header}")
    d = D1.d
    result = VectorField.zero(d)
    for a, A in D1.components().items():
        for b, B in D2.components().items():
            coeffs = []
            for j in range(d.nvars):
                left = A.apply(B.coeffs[j])
                right = B.apply(A.coeffs[j])
                coeffs.append(left + right if (a and b) else left - right)
            result = result + VectorField(d, coeffs)
    return result


def divergence(D: VectorField) -> DPElement:
    """sum_i (-1)^{|f_i||d_i|} d_i(f_i)"""
    d = D.d
    total = DPElement(d)
    for i, f in enumerate(D.coeffs):
        if f.is_zero():
            continue
        if not d.is_odd(i):
            total = total + dp_derivative(d, i, f)
            continue
        for mono, c in f.terms.items():
            term = dp_derivative(d, i, DPElement(d, {mono: c}))
            total = total + (-term if (mono_parity(mono) + c.parity) % 2 else term)
    return total


def deformed_divergence(D: VectorField, f: DPElement) -> DPElement:
    """div(D) + f^{-1} D(f); zero iff D preserves f * vol"""
    d = D.d
    return divergence(D) + dp_multiply(d, dp_inverse(d, f), D.apply(f))


def bar_u(d: DPDescriptor) -> DPElement:
    """Top monomial u_1^(p^N_1 - 1) ... u_m^(p^N_m - 1) th_1 ... th_n"""
    return DPElement.monomial(d, [b - 1 for b in d.bounds], (1 << d.n) - 1)


def certify_bar_u_square(d: DPDescriptor) -> bool:
    u = bar_u(d)
    return dp_multiply(d, u, u).is_zero()


def one_minus_bar_u(d: DPDescriptor) -> DPElement:
    """(1 + u_bar)^{-1}, valid once u_bar^2 = 0 is certified"""
    if not certify_bar_u_square(d):
        raise NotAUnit(f"u_bar^2 != 0 in {d.header}")
    return DPElement.one(d) - bar_u(d)


# ======================
# W(m;N|n)
# ======================

def field_basis(d: DPDescriptor) -> List[Tuple[int, Mono]]:
    """Monomial vector fields (i, mono) ordered by indeterminate then monomial"""
    monos = d.monomials()
    return [(i, mono) for i in range(d.nvars) for mono in monos]


def basis_field(d: DPDescriptor, i: int, mono: Mono) -> VectorField:
    return VectorField.partial(d, i, DPElement(d, {mono: d.ring.one}))


def field_name(d: DPDescriptor, i: int, mono: Mono) -> str:
    text = DPElement(d).format_monomial(mono)
    return f"{text}*d_{d.names[i]}" if text else f"d_{d.names[i]}"


def field_parity(d: DPDescriptor, i: int, mono: Mono) -> int:
    return (mono_parity(mono) + (1 if d.is_odd(i) else 0)) % 2


def vect_algebra(d: DPDescriptor) -> SuperAlgebra:
    """
    W(m;N|n) as a SuperAlgebra on the monomial vector fields

    Args:
        d: Descriptor

    Returns:
        SuperAlgebra of dimension (m+n) * dim O(m;N|n)
    """
    basis = field_basis(d)
    index = {key: k for k, key in enumerate(basis)}
    fields = [basis_field(d, i, mono) for i, mono in basis]
    table = {}
    for a in range(len(basis)):
        for b in range(a, len(basis)):
            value = vf_bracket(fields[a], fields[b])
            sparse = {}
            for j, f in enumerate(value.coeffs):
                for mono, c in f.terms.items():
                    sparse[index[(j, mono)]] = c
            if sparse:
                table[(a, b)] = sparse
    elements = [
        BasisElement(name=field_name(d, i, mono), parity=field_parity(d, i, mono), degree=sum(mono[0]) + _popcount(mono[1]) - 1)
        for i, mono in basis
    ]
    logger.debug(f"W{d.header[1:]}: dim {len(basis)}")
    return SuperAlgebra(d.ring, elements, table, name=f"W{d.header[1:]}")


# ======================
# svect deformed by (1 + u_bar)
# ======================

@dataclass
class SvectRealization:
    """
    Basis of svect_(1+u_bar) as rows over the monomial vector fields

    ``rows`` is in reduced echelon form; ``pivots[r]`` is the field index
    whose coordinate reads off the r-th basis coefficient.
    """

    d: DPDescriptor
    rows: np.ndarray
    pivots: List[int]
    fields: List[VectorField]
    names: List[str]
    parities: List[int]
    derived: bool = False

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def w_coordinates(self, D: VectorField) -> np.ndarray:
        index = _field_index(self.d)
        out = np.zeros(len(index), dtype=np.int64)
        for i, f in enumerate(D.coeffs):
            for mono, c in f.terms.items():
                out[index[(i, mono)]] = c.constant_code()
        return out

    def coordinates(self, D: VectorField) -> Optional[np.ndarray]:
        """Coordinates in this basis, or None when D is outside the algebra"""
        w = self.w_coordinates(D)
        coords = w[self.pivots] if self.pivots else np.zeros(0, dtype=np.int64)
        F = self.d.ring.field
        if self.dim:
            rebuilt = (gf_array(F, coords) @ gf_array(F, self.rows)).view(np.ndarray)
        else:
            rebuilt = np.zeros_like(w)
        return coords if np.array_equal(rebuilt, w) else None

    def contains(self, D: VectorField) -> bool:
        return self.coordinates(D) is not None

    def ad_matrix(self, D: VectorField):
        """ad(D) on this basis as a galois matrix"""
        F = self.d.ring.field
        cols = []
        for j, b in enumerate(self.fields):
            coords = self.coordinates(vf_bracket(D, b))
            if coords is None:
                raise ExpansionFailure(f"[{D}, {self.names[j]}] left the algebra")
            cols.append(coords)
        return gf_array(F, np.array(cols, dtype=np.int64).T.reshape(self.dim, self.dim))

    def algebra(self) -> SuperAlgebra:
        ring = self.d.ring
        table = {}
        for a in range(self.dim):
            for b in range(a, self.dim):
                coords = self.coordinates(vf_bracket(self.fields[a], self.fields[b]))
                if coords is None:
                    raise ExpansionFailure(f"[{self.names[a]}, {self.names[b]}] left the algebra")
                sparse = {k: ring.const_code(int(c)) for k, c in enumerate(coords) if c}
                if sparse:
                    table[(a, b)] = sparse
        basis = [BasisElement(name=n, parity=par) for n, par in zip(self.names, self.parities)]
        label = "svect1" if self.derived else "svect"
        return SuperAlgebra(ring, basis, table, name=f"{label}_(1+u)({self.d.header})")


@lru_cache(maxsize=16)
def _field_index(d: DPDescriptor) -> Dict[Tuple[int, Mono], int]:
    return {key: k for k, key in enumerate(field_basis(d))}


def _realization_from_rows(d: DPDescriptor, rows: np.ndarray, derived: bool = False) -> SvectRealization:
    basis = field_basis(d)
    pivots, fields, names, parities = [], [], [], []
    for row in rows:
        nz = np.nonzero(row)[0]
        k = int(nz[0])
        pivots.append(k)
        i, mono = basis[k]
        names.append(field_name(d, i, mono))
        parities.append(field_parity(d, i, mono))
        field_sum = VectorField.zero(d)
        for idx in nz:
            j, mono_j = basis[int(idx)]
            field_sum = field_sum + d.ring.const_code(int(row[idx])) * basis_field(d, j, mono_j)
        fields.append(field_sum)
    return SvectRealization(
        d=d, rows=rows, pivots=pivots, fields=fields, names=names, parities=parities, derived=derived
    )


def svect_deformed(d: DPDescriptor, derived: bool = False) -> SvectRealization:
    """
    Kernel of the (1 + u_bar)-deformed divergence inside W(m;1|n)

    Args:
        d: Descriptor with N = (1,...,1) and an even number of odd indeterminates
        derived: Pass to the first derived algebra

    Returns:
        SvectRealization
    """
    if any(h != 1 for h in d.N):
        raise WrongDescriptor(f"svect_(1+u) is built for N = (1,...,1), got {d.N}")
    if d.n % 2:
        raise WrongDescriptor(f"odd indeterminates must come in pairs, got n={d.n}")
    F = d.ring.field
    f = DPElement.one(d) + bar_u(d)
    monos = d.monomials()
    mono_index = {mono: k for k, mono in enumerate(monos)}
    basis = field_basis(d)

    div = np.zeros((len(monos), len(basis)), dtype=np.int64)
    for k, (i, mono) in enumerate(basis):
        value = deformed_divergence(basis_field(d, i, mono), f)
        for m_, c in value.terms.items():
            div[mono_index[m_], k] = c.constant_code()

    blocks = []
    for parity in (0, 1):
        cols = [k for k, (i, mono) in enumerate(basis) if field_parity(d, i, mono) == parity]
        if not cols:
            continue
        kernel = gf_null_space(gf_array(F, div[:, cols]), len(cols), F).view(np.ndarray)
        full = np.zeros((kernel.shape[0], len(basis)), dtype=np.int64)
        full[:, cols] = kernel
        blocks.append(full)
    stacked = np.vstack(blocks) if blocks else np.zeros((0, len(basis)), dtype=np.int64)
    rows = gf_row_space(gf_array(F, stacked)).view(np.ndarray)
    realization = _realization_from_rows(d, rows)
    logger.info(f"svect_(1+u) in W{d.header[1:]}: dim {realization.dim} of {len(basis)}")

    if derived:
        brackets = []
        for a in range(realization.dim):
            for b in range(a, realization.dim):
                brackets.append(realization.w_coordinates(vf_bracket(realization.fields[a], realization.fields[b])))
        arr = np.array(brackets, dtype=np.int64) if brackets else np.zeros((0, len(basis)), dtype=np.int64)
        rows = gf_row_space(gf_array(F, arr)).view(np.ndarray)
        realization = _realization_from_rows(d, rows, derived=True)
        logger.info(f"svect^(1)_(1+u): dim {realization.dim}")
    return realization


def svect_deformed_basis(d: DPDescriptor, derived: bool = False) -> SuperAlgebra:
    return svect_deformed(d, derived).algebra()


@dataclass
class EqNewReport:
    descriptor: str
    index: int
    dim: int
    x_in_algebra: bool
    y_in_algebra: bool
    equal: bool
    witness: Optional[Tuple[int, int]] = None
    x: str = ""
    y: str = ""

    @property
    def ok(self) -> bool:
        return self.x_in_algebra and self.y_in_algebra and self.equal


def eq_new_sides(d: DPDescriptor, i: int) -> Tuple[VectorField, VectorField]:
    """(1 - u_bar) d_i and -(d_i^{p-1} u_bar) d_i"""
    x = VectorField.partial(d, i, one_minus_bar_u(d))
    g = bar_u(d)
    for _ in range(d.p - 1):
        g = dp_derivative(d, i, g)
    y = VectorField.partial(d, i, -g)
    return x, y


def verify_eq_new(d: DPDescriptor, i: int, realization: Optional[SvectRealization] = None) -> EqNewReport:
    """
    Compare ad((1 - u_bar) d_i)^p with ad(-(d_i^{p-1} u_bar) d_i) inside svect_(1+u)

    Args:
        d: Descriptor with N = (1,...,1)
        i: Index of an even indeterminate (0-based)
        realization: Precomputed svect_deformed(d)

    Returns:
        EqNewReport
    """
    if not 0 <= i < d.nvars:
        raise OddIndex(f"index {i} outside 0..{d.nvars - 1}")
    if d.is_odd(i):
        raise OddIndex(f"d_{d.names[i]} is odd; the formula is for even indeterminates")
    realization = realization or svect_deformed(d)
    x, y = eq_new_sides(d, i)
    report = EqNewReport(
        descriptor=d.header,
        index=i,
        dim=realization.dim,
        x_in_algebra=realization.contains(x),
        y_in_algebra=realization.contains(y),
        equal=False,
        x=str(x),
        y=str(y),
    )
    if not (report.x_in_algebra and report.y_in_algebra):
        return report
    power = np.linalg.matrix_power(realization.ad_matrix(x), d.p)
    B = realization.ad_matrix(y)
    diff = np.argwhere(power.view(np.ndarray) != B.view(np.ndarray))
    report.equal = diff.size == 0
    if diff.size:
        report.witness = (int(diff[0][0]), int(diff[0][1]))
    logger.info(f"{d.header} i={i}: ((1-u)d_i)^[p] formula {'holds' if report.equal else 'fails'}")
    return report


# ======================
# Contact bracket on O(3;(1,1,1))
# ======================

def _require_k31(d: DPDescriptor):
    if d.m != 3 or d.n != 0 or d.N != (1, 1, 1) or d.p != 3:
        raise WrongDescriptor(f"the contact bracket is defined on O(m=3;N=[1,1,1]|n=0;p=3), got {d.header}")


def laplace(d: DPDescriptor, f: DPElement) -> DPElement:
    """2f - ph d_ph f - qh d_qh f"""
    ph = DPElement.variable(d, d.names[0])
    qh = DPElement.variable(d, d.names[1])
    return (
        2 * f
        - dp_multiply(d, ph, dp_derivative(d, 0, f))
        - dp_multiply(d, qh, dp_derivative(d, 1, f))
    )


def contact_bracket(f: DPElement, g: DPElement) -> DPElement:
    """{f, g} = Df d_t g - d_t f Dg + d_p f d_q g - d_q f d_p g"""
    f._check(g)
    d = f.d
    _require_k31(d)
    mul = lambda a, b: dp_multiply(d, a, b)
    return (
        mul(laplace(d, f), dp_derivative(d, 2, g))
        - mul(dp_derivative(d, 2, f), laplace(d, g))
        + mul(dp_derivative(d, 0, f), dp_derivative(d, 1, g))
        - mul(dp_derivative(d, 1, f), dp_derivative(d, 0, g))
    )


def contact_jacobi_failures(d: DPDescriptor, elements: Optional[Iterable[DPElement]] = None) -> List[Tuple[int, int, int]]:
    """
    Sorted distinct triples violating {a,{b,c}} + {b,{c,a}} + {c,{a,b}} = 0

    Args:
        d: The O(3;(1,1,1)) descriptor
        elements: Elements to test (default: the 27 monomials)

    Returns:
        List of failing index triples
    """
    _require_k31(d)
    if elements is None:
        elements = [DPElement(d, {mono: d.ring.one}) for mono in d.monomials()]
    elements = list(elements)
    n = len(elements)
    with_monomial: Dict[Tuple[int, Mono], DPElement] = {}

    def bracket_with(a: int, x: DPElement) -> DPElement:
        # bilinear expansion over the monomials of x
        total = DPElement(d)
        for mono, c in x.terms.items():
            key = (a, mono)
            if key not in with_monomial:
                with_monomial[key] = contact_bracket(elements[a], DPElement(d, {mono: d.ring.one}))
            total = total + c * with_monomial[key]
        return total

    pair = {}
    for a in range(n):
        for b in range(n):
            if a != b:
                pair[(a, b)] = bracket_with(a, elements[b])

    failures = []
    for a in range(n):
        for b in range(a + 1, n):
            for c in range(b + 1, n):
                total = bracket_with(a, pair[(b, c)]) + bracket_with(b, pair[(c, a)]) + bracket_with(c, pair[(a, b)])
                if not total.is_zero():
                    failures.append((a, b, c))
    logger.debug(f"contact Jacobi: {len(failures)} failing triples out of {n * (n - 1) * (n - 2) // 6}")
    return failures

# modlie/scalars.py
"""
Coefficient arithmetic

Finite fields GF(p^k) (tables built once from ``galois``) and the
supercommutative parameter rings the structure constants live in:
polynomials in even parameters, Laurent polynomials in invertible
parameters and an exterior algebra in odd parameters.

A scalar is a sparse map ``monomial -> field code`` where a monomial is
``(exponents, oddmask)``. Exponents follow ``ring.names`` (invertible
generators first, then even ones); bit ``i`` of ``oddmask`` is the odd
generator ``ring.odd[i]``.
"""
import logging
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, Iterable, List, Mapping, Tuple, Union

import galois
import numpy as np

from modlie.errors import (
    MissingAssignment,
    MixedParity,
    NotAUnit,
    OddParity,
    ParseError,
    RingMismatch,
    SymbolicNotSupported,
    ZeroForInvertible,
)

logger = logging.getLogger(__name__)

# Conway polynomials for the extension fields we ship
IRREDUCIBLE_POLYS: Dict[Tuple[int, int], str] = {
    (3, 2): "x^2 + 2x + 2",
    (3, 3): "x^3 + 2x + 1",
    (5, 2): "x^2 + 4x + 2",
}

DEFAULT_INVERTIBLE = ("eps",)
DEFAULT_EVEN = ("delta", "rho", "lambda")
DEFAULT_ODD = ("tau",)

NAME_ALIASES = {"ε": "eps", "δ": "delta", "ρ": "rho", "λ": "lambda", "τ": "tau"}

Monomial = Tuple[Tuple[int, ...], int]


# ======================
# Finite fields
# ======================

@dataclass(frozen=True)
class FiniteField:
    """GF(p^k) with integer-coded elements 0..q-1 (galois integer representation)"""

    p: int
    k: int = 1
    gf: Any = field(default=None, compare=False, repr=False)
    add_table: Tuple[Tuple[int, ...], ...] = field(default=(), compare=False, repr=False)
    mul_table: Tuple[Tuple[int, ...], ...] = field(default=(), compare=False, repr=False)
    neg_table: Tuple[int, ...] = field(default=(), compare=False, repr=False)
    inv_table: Tuple[int, ...] = field(default=(), compare=False, repr=False)

    @property
    def order(self) -> int:
        return self.p ** self.k

    def add(self, a: int, b: int) -> int:
        return self.add_table[a][b]

    def mul(self, a: int, b: int) -> int:
        return self.mul_table[a][b]

    def neg(self, a: int) -> int:
        return self.neg_table[a]

    def inv(self, a: int) -> int:
        if a == 0:
            raise NotAUnit("0 has no inverse")
        return self.inv_table[a]

    def power(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        result = 1
        while e:
            if e & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            e >>= 1
        return result

    def from_int(self, value: int) -> int:
        """Image of an integer in the prime subfield"""
        return value % self.p

    def element(self, value: Union[int, "FieldElement"]) -> "FieldElement":
        if isinstance(value, FieldElement):
            return value
        return FieldElement(self, self.from_int(int(value)))

    def elements(self) -> List["FieldElement"]:
        return [FieldElement(self, c) for c in range(self.order)]

    def format_code(self, code: int) -> str:
        if code < self.p:
            return str(code)
        poly = galois.Poly.Int(code, field=galois.GF(self.p))
        return f"({poly})"

    def parse_literal(self, text: str) -> int:
        """Parse ``x + 1`` style polynomial literals into a field code"""
        try:
            poly = galois.Poly.Str(text.strip().replace(" ", ""), field=galois.GF(self.p))
        except (ValueError, TypeError) as e:
            raise ParseError(f"bad field literal '({text})': {e}")
        if self.k > 1:
            poly = poly % self.gf.irreducible_poly
        elif poly.degree > 0:
            raise ParseError(f"field literal '({text})' is not in GF({self.p})")
        return int(poly)

    def __str__(self) -> str:
        return f"GF({self.p})" if self.k == 1 else f"GF({self.p}^{self.k})"


@lru_cache(maxsize=None)
def get_field(p: int, k: int = 1) -> FiniteField:
    """
    Build (once) the arithmetic tables of GF(p^k)

    Args:
        p: Characteristic, must be prime
        k: Extension degree

    Returns:
        Cached FiniteField
    """
    if p < 2 or not galois.is_prime(p):
        raise ParseError(f"characteristic {p} is not a prime")
    if k < 1:
        raise ParseError(f"extension degree {k} must be positive")

    q = p ** k
    if k == 1:
        gf = galois.GF(p)
    else:
        poly = IRREDUCIBLE_POLYS.get((p, k))
        gf = galois.GF(q, irreducible_poly=poly) if poly else galois.GF(q)

    x = gf(np.arange(q))
    add = (x[:, None] + x[None, :]).view(np.ndarray).tolist()
    mul = (x[:, None] * x[None, :]).view(np.ndarray).tolist()
    neg = (-x).view(np.ndarray).tolist()
    inv = [0] + np.reciprocal(x[1:]).view(np.ndarray).tolist()

    logger.debug(f"Built tables for GF({p}^{k})")
    return FiniteField(
        p=p,
        k=k,
        gf=gf,
        add_table=tuple(tuple(int(c) for c in row) for row in add),
        mul_table=tuple(tuple(int(c) for c in row) for row in mul),
        neg_table=tuple(int(c) for c in neg),
        inv_table=tuple(int(c) for c in inv),
    )


@dataclass(frozen=True)
class FieldElement:
    """Element of a FiniteField"""

    field: FiniteField
    value: int

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise RingMismatch(f"{self.field} vs {other.field}")
            return other.value
        if isinstance(other, int):
            return self.field.from_int(other)
        return NotImplemented

    def __add__(self, other):
        code = self._other(other)
        if code is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, self.field.add(self.value, code))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.value))

    def __sub__(self, other):
        code = self._other(other)
        if code is NotImplemented:
            return NotImplemented
        return self + (-FieldElement(self.field, code))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        code = self._other(other)
        if code is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, self.field.mul(self.value, code))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        return FieldElement(self.field, self.field.power(self.value, e))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field, self.field.inv(self.value))

    def frobenius(self) -> "FieldElement":
        return self ** self.field.p

    def __eq__(self, other):
        if isinstance(other, int):
            return self.value == self.field.from_int(other)
        if isinstance(other, FieldElement):
            return self.field == other.field and self.value == other.value
        return NotImplemented

    def __hash__(self):
        return hash((self.field.p, self.field.k, self.value))

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        return self.value

    def __str__(self):
        return self.field.format_code(self.value)

    __repr__ = __str__


# ======================
# Parameter rings
# ======================

def _popcount(mask: int) -> int:
    return bin(mask).count("1")


def _merge_sign(a: int, b: int) -> int:
    """Sign of reordering theta_a * theta_b into increasing order"""
    swaps = 0
    while b:
        low = b & -b
        swaps += _popcount(a & ~((low << 1) - 1))
        b ^= low
    return -1 if swaps & 1 else 1


@dataclass(frozen=True)
class ParameterRing:
    """Supercommutative coefficient ring over a finite field"""

    field: FiniteField
    invertible: Tuple[str, ...] = ()
    even: Tuple[str, ...] = ()
    odd: Tuple[str, ...] = ()

    def __post_init__(self):
        names = list(self.invertible) + list(self.even) + list(self.odd)
        if len(set(names)) != len(names):
            raise ParseError(f"duplicate generator names in {names}")

    @property
    def names(self) -> Tuple[str, ...]:
        """Exponent-vector order"""
        return self.invertible + self.even

    @property
    def nvars(self) -> int:
        return len(self.invertible) + len(self.even)

    @property
    def p(self) -> int:
        return self.field.p

    def _unit_exps(self) -> Tuple[int, ...]:
        return (0,) * self.nvars

    @property
    def zero(self) -> "Scalar":
        return Scalar(self, {})

    @property
    def one(self) -> "Scalar":
        return Scalar(self, {(self._unit_exps(), 0): 1})

    def const(self, value: Union[int, FieldElement]) -> "Scalar":
        code = value.value if isinstance(value, FieldElement) else self.field.from_int(int(value))
        return Scalar(self, {(self._unit_exps(), 0): code})

    def const_code(self, code: int) -> "Scalar":
        return Scalar(self, {(self._unit_exps(), 0): code})

    def gen(self, name: str) -> "Scalar":
        name = NAME_ALIASES.get(name, name)
        if name in self.odd:
            return Scalar(self, {(self._unit_exps(), 1 << self.odd.index(name)): 1})
        if name in self.names:
            exps = [0] * self.nvars
            exps[self.names.index(name)] = 1
            return Scalar(self, {(tuple(exps), 0): 1})
        raise ParseError(f"'{name}' is not a generator of {self}")

    def has(self, name: str) -> bool:
        name = NAME_ALIASES.get(name, name)
        return name in self.names or name in self.odd

    def is_invertible(self, name: str) -> bool:
        return NAME_ALIASES.get(name, name) in self.invertible

    def extend(
        self,
        invertible: Iterable[str] = (),
        even: Iterable[str] = (),
        odd: Iterable[str] = (),
    ) -> "ParameterRing":
        """Ring with extra generators appended (existing ones keep their role)"""
        def add(base, extra):
            return base + tuple(n for n in extra if not self.has(n) and n not in base)

        return ParameterRing(
            field=self.field,
            invertible=add(self.invertible, invertible),
            even=add(self.even, even),
            odd=add(self.odd, odd),
        )

    def __str__(self) -> str:
        gens = ", ".join(
            [f"{n}^±1" for n in self.invertible] + list(self.even) + [f"{n}(odd)" for n in self.odd]
        )
        return f"{self.field}[{gens}]"


def default_ring(p: int = 3, k: int = 1) -> ParameterRing:
    """Ring with the usual family parameters: eps invertible, delta/rho/lambda even, tau odd"""
    return ParameterRing(
        field=get_field(p, k),
        invertible=DEFAULT_INVERTIBLE,
        even=DEFAULT_EVEN,
        odd=DEFAULT_ODD,
    )


def constant_ring(p: int = 3, k: int = 1) -> ParameterRing:
    """Ring without parameters"""
    return ParameterRing(field=get_field(p, k))


# ======================
# Scalars
# ======================

class Scalar:
    """Element of a ParameterRing; homogeneous by construction"""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: ParameterRing, terms: Mapping[Monomial, int]):
        self.ring = ring
        self.terms: Dict[Monomial, int] = {m: c for m, c in terms.items() if c}
        parities = {_popcount(m[1]) & 1 for m in self.terms}
        if len(parities) > 1:
            raise MixedParity(f"scalar mixes even and odd terms: {self}")

    # ---------- structure ----------

    @property
    def parity(self) -> int:
        for (_, mask) in self.terms:
            return _popcount(mask) & 1
        return 0

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        unit = self.ring._unit_exps()
        return all(m == (unit, 0) for m in self.terms)

    def constant_code(self) -> int:
        """Field code of a constant scalar"""
        if not self.is_constant():
            raise SymbolicNotSupported(f"'{self}' is not a constant")
        return next(iter(self.terms.values()), 0)

    def generators(self) -> set:
        used = set()
        for exps, mask in self.terms:
            used.update(n for n, e in zip(self.ring.names, exps) if e)
            used.update(n for i, n in enumerate(self.ring.odd) if mask >> i & 1)
        return used

    # ---------- arithmetic ----------

    def _coerce(self, other) -> "Scalar":
        if isinstance(other, Scalar):
            if other.ring != self.ring:
                raise RingMismatch(f"{self.ring} vs {other.ring}")
            return other
        if isinstance(other, (int, FieldElement)):
            return self.ring.const(other)
        raise TypeError(f"cannot combine Scalar with {type(other).__name__}")

    def __add__(self, other) -> "Scalar":
        other = self._coerce(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        if self.parity != other.parity:
            raise MixedParity(f"adding '{self}' (parity {self.parity}) and '{other}' (parity {other.parity})")
        F = self.ring.field
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = F.add(terms.get(m, 0), c)
        return Scalar(self.ring, terms)

    __radd__ = __add__

    def __neg__(self) -> "Scalar":
        F = self.ring.field
        return Scalar(self.ring, {m: F.neg(c) for m, c in self.terms.items()})

    def __sub__(self, other) -> "Scalar":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Scalar":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Scalar":
        if not isinstance(other, Scalar) and not isinstance(other, (int, FieldElement)):
            return NotImplemented
        return scalar_mul(self, self._coerce(other))

    def __rmul__(self, other) -> "Scalar":
        return scalar_mul(self._coerce(other), self)

    def __pow__(self, e: int) -> "Scalar":
        if e < 0:
            return self.inverse() ** (-e)
        result = self.ring.one
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    # ---------- ring operations ----------

    def is_unit(self) -> bool:
        try:
            self._unit_split()
            return True
        except NotAUnit:
            return False

    def _unit_split(self) -> Tuple[Monomial, int]:
        """The invertible body term of a unit; raises NotAUnit otherwise"""
        body = [(m, c) for m, c in self.terms.items() if m[1] == 0]
        if len(body) != 1:
            raise NotAUnit(f"'{self}' is not a unit")
        (exps, _), c = body[0]
        n_inv = len(self.ring.invertible)
        if any(exps[n_inv:]):
            raise NotAUnit(f"'{self}' is not a unit")
        return body[0]

    def inverse(self) -> "Scalar":
        return invert(self)

    def frobenius(self) -> "Scalar":
        return frobenius(self)

    def evaluate(self, assignment: Mapping[str, Union[int, FieldElement]]) -> FieldElement:
        return evaluate(self, assignment)

    def substitute(self, assignment: Mapping[str, Union[int, FieldElement, "Scalar"]]) -> "Scalar":
        """Replace some generators by constants (or scalars of the same ring)"""
        ring = self.ring
        values: Dict[str, Scalar] = {}
        for name, value in assignment.items():
            name = NAME_ALIASES.get(name, name)
            if not ring.has(name):
                continue
            value = value if isinstance(value, Scalar) else ring.const(value)
            if name in ring.odd and not value.is_zero():
                if value.parity != 1:
                    raise OddParity(f"odd generator '{name}' cannot take the even value '{value}'")
            if ring.is_invertible(name) and value.is_zero():
                raise ZeroForInvertible(f"'{name}' is invertible and cannot be set to 0")
            values[name] = value

        result = ring.zero
        for (exps, mask), c in self.terms.items():
            term = ring.const_code(c)
            kept = [0] * ring.nvars
            for idx, (name, e) in enumerate(zip(ring.names, exps)):
                if name in values and e:
                    term = term * (values[name] ** e)
                else:
                    kept[idx] = e
            term = term * Scalar(ring, {(tuple(kept), 0): 1})
            for i, name in enumerate(ring.odd):
                if mask >> i & 1:
                    term = term * (values[name] if name in values else ring.gen(name))
            result = result + term
        return result

    def lift(self, ring: ParameterRing) -> "Scalar":
        """Re-express in a ring that extends this one"""
        if ring == self.ring:
            return self
        if ring.field != self.ring.field:
            raise RingMismatch(f"cannot lift {self.ring} into {ring}")
        idx = [ring.names.index(n) for n in self.ring.names]
        odd_idx = [ring.odd.index(n) for n in self.ring.odd]
        terms = {}
        for (exps, mask), c in self.terms.items():
            new_exps = [0] * ring.nvars
            for i, e in zip(idx, exps):
                new_exps[i] = e
            new_mask = 0
            for i, j in enumerate(odd_idx):
                if mask >> i & 1:
                    new_mask |= 1 << j
            terms[(tuple(new_exps), new_mask)] = c
        return Scalar(ring, terms)

    def degree_split(self, name: str) -> Dict[int, "Scalar"]:
        """Group terms by the power of one generator"""
        name = NAME_ALIASES.get(name, name)
        parts: Dict[int, Dict[Monomial, int]] = {}
        for (exps, mask), c in self.terms.items():
            if name in self.ring.odd:
                deg = mask >> self.ring.odd.index(name) & 1
            else:
                deg = exps[self.ring.names.index(name)]
            parts.setdefault(deg, {})[(exps, mask)] = c
        return {d: Scalar(self.ring, t) for d, t in parts.items()}

    # ---------- comparison / display ----------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, FieldElement)):
            other = self.ring.const(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def _sort_key(self, item):
        (exps, mask), _ = item
        return (sum(abs(e) for e in exps) + _popcount(mask), tuple(-e for e in exps), mask)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        F = self.ring.field
        parts = []
        for (exps, mask), c in sorted(self.terms.items(), key=self._sort_key):
            factors = []
            for name, e in zip(self.ring.names, exps):
                if e == 1:
                    factors.append(name)
                elif e:
                    factors.append(f"{name}^{e}")
            factors.extend(n for i, n in enumerate(self.ring.odd) if mask >> i & 1)
            coef = F.format_code(c)
            if not factors:
                parts.append(coef)
            elif c == 1:
                parts.append("*".join(factors))
            else:
                parts.append("*".join([coef] + factors))
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"Scalar({self})"


# ======================
# Operations
# ======================

def scalar_mul(a: Scalar, b: Scalar) -> Scalar:
    """Product in the supercommutative ring (odd generators anticommute)"""
    if a.ring != b.ring:
        raise RingMismatch(f"{a.ring} vs {b.ring}")
    F = a.ring.field
    terms: Dict[Monomial, int] = {}
    for (e1, o1), c1 in a.terms.items():
        for (e2, o2), c2 in b.terms.items():
            if o1 & o2:
                continue
            c = F.mul(c1, c2)
            if _merge_sign(o1, o2) < 0:
                c = F.neg(c)
            key = (tuple(x + y for x, y in zip(e1, e2)), o1 | o2)
            terms[key] = F.add(terms.get(key, 0), c)
    return Scalar(a.ring, terms)


def frobenius(a: Scalar) -> Scalar:
    """a -> a^p on an even scalar"""
    if a.parity:
        raise OddParity(f"frobenius needs an even scalar, got '{a}'")
    F = a.ring.field
    terms: Dict[Monomial, int] = {}
    for (exps, mask), c in a.terms.items():
        # monomials with odd generators are nilpotent of order 2
        if mask:
            continue
        key = (tuple(e * F.p for e in exps), 0)
        terms[key] = F.add(terms.get(key, 0), F.power(c, F.p))
    return Scalar(a.ring, terms)


def evaluate(a: Scalar, assignment: Mapping[str, Union[int, FieldElement]]) -> FieldElement:
    """
    Evaluate a scalar at a point of the parameter space

    Args:
        a: Scalar to evaluate
        assignment: Values for every generator occurring in ``a``; odd generators must be 0

    Returns:
        Field element
    """
    ring = a.ring
    F = ring.field
    values = {NAME_ALIASES.get(k, k): F.element(v) for k, v in assignment.items()}
    missing = sorted(a.generators() - set(values))
    if missing:
        raise MissingAssignment(f"no value for {', '.join(missing)}")
    for name in ring.invertible:
        if name in values and not values[name]:
            raise ZeroForInvertible(f"'{name}' is invertible and cannot be set to 0")
    for name in ring.odd:
        if name in values and values[name]:
            raise OddParity(f"odd generator '{name}' only specialises to 0")

    total = 0
    for (exps, mask), c in a.terms.items():
        if mask:
            continue
        term = c
        for name, e in zip(ring.names, exps):
            if e:
                term = F.mul(term, F.power(values[name].value, e))
        total = F.add(total, term)
    return FieldElement(F, total)


def invert(a: Scalar) -> Scalar:
    """Inverse of a unit (invertible monomial plus nilpotent odd part)"""
    ring = a.ring
    body, c = a._unit_split()
    (exps, _) = body
    F = ring.field
    u_inv = Scalar(ring, {(tuple(-e for e in exps), 0): F.inv(c)})
    nil = a - Scalar(ring, {body: c})
    # (u + n)^-1 = u^-1 * sum (-n u^-1)^j, n nilpotent and even
    step = -(nil * u_inv)
    result = ring.one
    power = ring.one
    while True:
        power = power * step
        if power.is_zero():
            break
        result = result + power
    return u_inv * result


# ======================
# Parsing
# ======================

_TOKEN = re.compile(r"\s*(?:(?P<lit>\([^()]*\))|(?P<int>\d+)|(?P<name>[^\W\d]\w*)|(?P<op>[-+*^]))")


def tokenize(text: str) -> List[Tuple[str, str]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if not match or match.end() == pos:
            raise ParseError(f"unexpected character at {pos} in '{text}'")
        kind = match.lastgroup
        tokens.append((kind, match.group(kind)))
        pos = match.end()
    return tokens


def parse_scalar(ring: ParameterRing, text: str) -> Scalar:
    """
    Parse text such as ``2*eps^-1*delta + rho*tau``

    Args:
        ring: Ring the generators belong to
        text: Sum of products of integers, ``(x+1)`` field literals and generators

    Returns:
        Parsed scalar
    """
    tokens = tokenize(str(text))
    if not tokens:
        raise ParseError("empty scalar")
    pos = 0
    total = ring.zero

    def peek():
        return tokens[pos] if pos < len(tokens) else (None, None)

    while pos < len(tokens):
        sign = 1
        while peek() in (("op", "+"), ("op", "-")):
            if peek()[1] == "-":
                sign = -sign
            pos += 1
        term = ring.one
        expect_factor = True
        while expect_factor:
            kind, value = peek()
            pos += 1
            if kind == "int":
                factor = ring.const(int(value))
            elif kind == "lit":
                factor = ring.const_code(ring.field.parse_literal(value[1:-1]))
            elif kind == "name":
                factor = ring.gen(value)
                if peek() == ("op", "^"):
                    pos += 1
                    neg = False
                    if peek() == ("op", "-"):
                        neg = True
                        pos += 1
                    kind, exp = peek()
                    if kind != "int":
                        raise ParseError(f"expected an exponent after '{value}^' in '{text}'")
                    pos += 1
                    e = -int(exp) if neg else int(exp)
                    if e < 0 and not ring.is_invertible(value):
                        raise ParseError(f"'{value}' is not invertible in '{text}'")
                    factor = factor ** e
            else:
                raise ParseError(f"expected a factor in '{text}'")
            term = term * factor
            if peek() == ("op", "*"):
                pos += 1
            else:
                expect_factor = False
        total = total + (term if sign > 0 else -term)
        if pos < len(tokens) and peek()[1] not in ("+", "-"):
            raise ParseError(f"unexpected '{peek()[1]}' in '{text}'")
    return total

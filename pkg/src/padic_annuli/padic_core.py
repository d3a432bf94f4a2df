"""Exact scalars in cyclotomic fields Q(zeta_{p^h}) with p-adic valuations.

Valuations are returned as ``Fraction`` values (``math.inf`` for zero); a
valuation ``v`` stands for the norm ``p**(-v)``.  The base field is the
absolutely unramified one with value group ``p**Z``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence, Union

import sympy

INF = math.inf

LogValue = Union[Fraction, float]
Rational = Union[int, Fraction]


class PrecisionError(ValueError):
    """Raised when a p-adic approximation does not carry enough digits."""


@dataclass(frozen=True)
class Prime:
    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or self.p < 2 or not sympy.isprime(self.p):
            raise ValueError(f"{self.p!r} is not a prime")

    def __int__(self):
        return self.p


def vp(x: Rational, p: int) -> LogValue:
    """p-adic valuation of a rational number."""
    x = Fraction(x)
    if x == 0:
        return INF
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return Fraction(v)


def vp_factorial(n: int, p: int) -> int:
    """Legendre's formula for v_p(n!)."""
    v, q = 0, p
    while q <= n:
        v += n // q
        q *= p
    return v


def digit_sum(n: int, p: int) -> int:
    s = 0
    while n:
        s += n % p
        n //= p
    return s


def parse_rational(s: Union[str, int, Fraction]) -> Fraction:
    if isinstance(s, Fraction):
        return s
    if isinstance(s, int):
        return Fraction(s)
    return Fraction(str(s).strip())


def format_rational(x: LogValue) -> str:
    if x == INF:
        return "inf"
    if x == -INF:
        return "-inf"
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# -- cyclotomic arithmetic --------------------------------------------------


def phi_degree(p: int, h: int) -> int:
    return 1 if h == 0 else (p - 1) * p ** (h - 1)


def _reduce(coeffs: list, p: int, h: int) -> tuple:
    """Reduce a coefficient list modulo the p^h-th cyclotomic polynomial."""
    d = phi_degree(p, h)
    if h == 0:
        return (sum(coeffs, Fraction(0)),)
    step = p ** (h - 1)
    c = list(coeffs) + [Fraction(0)] * max(0, d - len(coeffs))
    # x^{(p-1)step} = -(1 + x^step + ... + x^{(p-2)step})
    for k in range(len(c) - 1, d - 1, -1):
        a = c[k]
        if a == 0:
            continue
        c[k] = Fraction(0)
        base = k - d
        for i in range(p - 1):
            c[base + i * step] -= a
    return tuple(c[:d])


@lru_cache(maxsize=None)
def _pi_basis_matrix(p: int, h: int) -> tuple:
    d = phi_degree(p, h)
    return tuple(tuple(math.comb(k, j) for k in range(d)) for j in range(d))


class Scalar:
    """An element of Q(zeta_{p^h}) stored as coefficients in powers of zeta.

    Level 0 elements are rationals.  Arithmetic between different levels
    embeds into the larger level via zeta_{p^h} = zeta_{p^H}^(p^(H-h)).
    """

    __slots__ = ("p", "level", "coeffs", "_val")

    def __init__(self, p: int, coeffs: Iterable[Rational] = (0,), level: int = 0, *, _reduced=False):
        self.p = p
        self.level = level
        if _reduced:
            self.coeffs = tuple(coeffs)
        else:
            self.coeffs = _reduce([Fraction(c) for c in coeffs], p, level)
        self._val = None

    # construction helpers
    @classmethod
    def rational(cls, p: int, x: Rational) -> "Scalar":
        return cls(p, (Fraction(x),), 0, _reduced=True)

    @classmethod
    def zeta(cls, p: int, level: int, power: int = 1) -> "Scalar":
        """zeta_{p^level} ** power."""
        if level == 0:
            return cls.rational(p, 1)
        n = p**level
        k = power % n
        c = [Fraction(0)] * (k + 1)
        c[k] = Fraction(1)
        return cls(p, c, level)

    @classmethod
    def coerce(cls, p: int, x) -> "Scalar":
        if isinstance(x, Scalar):
            return x
        return cls.rational(p, x)

    # level handling
    def lift(self, level: int) -> "Scalar":
        if level == self.level:
            return self
        if level < self.level:
            raise ValueError("cannot lower the level of a scalar")
        if self.level == 0:
            c = [Fraction(0)] * phi_degree(self.p, level)
            c[0] = self.coeffs[0]
            return Scalar(self.p, c, level, _reduced=True)
        step = self.p ** (level - self.level)
        c = [Fraction(0)] * (step * (len(self.coeffs) - 1) + 1)
        for i, a in enumerate(self.coeffs):
            c[i * step] = a
        return Scalar(self.p, c, level)

    def simplify(self) -> "Scalar":
        """Drop to the smallest level at which the element is defined."""
        s = self
        while s.level > 0:
            step = s.p if s.level > 1 else None
            if s.level == 1:
                if all(c == 0 for c in s.coeffs[1:]):
                    return Scalar(s.p, (s.coeffs[0],), 0, _reduced=True)
                return s
            if any(c != 0 for i, c in enumerate(s.coeffs) if i % step):
                return s
            s = Scalar(s.p, s.coeffs[::step], s.level - 1)
        return s

    def _pair(self, other):
        other = Scalar.coerce(self.p, other)
        if other.p != self.p:
            raise ValueError("prime mismatch")
        if other.level == self.level:
            return self, other
        lvl = max(self.level, other.level)
        return self.lift(lvl), other.lift(lvl)

    # arithmetic
    def __add__(self, other):
        a, b = self._pair(other)
        return Scalar(a.p, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)), a.level, _reduced=True)

    __radd__ = __add__

    def __neg__(self):
        return Scalar(self.p, tuple(-x for x in self.coeffs), self.level, _reduced=True)

    def __sub__(self, other):
        return self + (-Scalar.coerce(self.p, other))

    def __rsub__(self, other):
        return Scalar.coerce(self.p, other) - self

    def __mul__(self, other):
        if not isinstance(other, Scalar):
            c = Fraction(other)
            return Scalar(self.p, tuple(x * c for x in self.coeffs), self.level, _reduced=True)
        a, b = self._pair(other)
        if a.level == 0:
            return Scalar(a.p, (a.coeffs[0] * b.coeffs[0],), 0, _reduced=True)
        out = [Fraction(0)] * (len(a.coeffs) + len(b.coeffs) - 1)
        for i, x in enumerate(a.coeffs):
            if x == 0:
                continue
            for j, y in enumerate(b.coeffs):
                if y:
                    out[i + j] += x * y
        return Scalar(a.p, out, a.level)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Scalar):
            return self * other.inverse()
        return self * (1 / Fraction(other))

    def __rtruediv__(self, other):
        return Scalar.coerce(self.p, other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = Scalar.rational(self.p, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def inverse(self) -> "Scalar":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero scalar")
        if self.level == 0:
            return Scalar.rational(self.p, 1 / self.coeffs[0])
        x = sympy.Symbol("x")
        f = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(self.coeffs)], x, domain="QQ")
        mod = sympy.Poly(sympy.cyclotomic_poly(self.p**self.level, x), x, domain="QQ")
        inv = sympy.invert(f, mod)
        cs = [Fraction(int(c.p), int(c.q)) for c in reversed(sympy.Poly(inv, x).all_coeffs())]
        return Scalar(self.p, cs, self.level)

    def __eq__(self, other):
        if not isinstance(other, (Scalar, int, Fraction)):
            return NotImplemented
        a, b = self._pair(other)
        return a.coeffs == b.coeffs

    def __hash__(self):
        s = self.simplify()
        return hash((s.p, s.level, s.coeffs))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __bool__(self):
        return not self.is_zero()

    def conjugate(self, a: int) -> "Scalar":
        """Galois conjugate zeta -> zeta^a (a prime to p)."""
        if self.level == 0:
            return self
        n = self.p**self.level
        c = [Fraction(0)] * n
        for i, x in enumerate(self.coeffs):
            c[(i * a) % n] += x
        return Scalar(self.p, c, self.level)

    def is_rational(self) -> bool:
        return self.simplify().level == 0

    def to_fraction(self) -> Fraction:
        s = self.simplify()
        if s.level:
            raise ValueError("scalar is not rational")
        return s.coeffs[0]

    def __repr__(self):
        if self.level == 0:
            return f"Scalar({format_rational(self.coeffs[0])})"
        return f"Scalar(level={self.level}, {[format_rational(c) for c in self.coeffs]})"

    def valuation(self) -> LogValue:
        if self._val is None:
            self._val = valuation(self)
        return self._val


def valuation(x: Scalar) -> LogValue:
    """p-adic valuation normalised by v(p) = 1.

    The element is rewritten in the basis 1, pi, ..., pi^(d-1) with
    pi = zeta - 1, a uniformiser of valuation 1/d; the terms then have
    pairwise distinct valuations modulo Z, so the minimum is exact.
    """
    p = x.p
    if x.level == 0:
        return vp(x.coeffs[0], p)
    d = len(x.coeffs)
    m = _pi_basis_matrix(p, x.level)
    best = INF
    for j in range(d):
        row = m[j]
        b = sum((row[k] * x.coeffs[k] for k in range(j, d) if x.coeffs[k]), Fraction(0))
        if b:
            v = vp(b, p) + Fraction(j, d)
            if v < best:
                best = v
    return best


def norm_valuation(x: Scalar) -> LogValue:
    """Valuation through the field norm: v_p(Res(Phi, x)) / [Q(zeta):Q].

    Independent of :func:`valuation`; used as a cross-check.
    """
    if x.is_zero():
        return INF
    if x.level == 0:
        return vp(x.coeffs[0], x.p)
    t = sympy.Symbol("t")
    f = sum(sympy.Rational(c.numerator, c.denominator) * t**i for i, c in enumerate(x.coeffs))
    res = sympy.resultant(sympy.cyclotomic_poly(x.p**x.level, t), f, t)
    res = Fraction(int(sympy.numer(res)), int(sympy.denom(res)))
    return vp(res, x.p) / phi_degree(x.p, x.level)


# -- Z_p elements with finite precision ---------------------------------------


@dataclass(frozen=True)
class PadicApprox:
    """A rational p-adic integer known to ``precision`` digits."""

    value: Fraction
    p: int
    precision: int

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))
        if self.value.denominator % self.p == 0:
            raise ValueError(f"{self.value} is not in Z_{self.p}")

    def residue(self, h: int) -> int:
        if h > self.precision:
            raise PrecisionError(f"need {h} digits, have {self.precision}")
        m = self.p**h
        return self.value.numerator * pow(self.value.denominator, -1, m) % m


def centered_rep(alpha: PadicApprox, h: int) -> int:
    """Representative of alpha mod p^h in [(1 - p^h)/2, (1 + p^h)/2)."""
    m = alpha.p**h
    r = alpha.residue(h)
    if 2 * r >= 1 + m:
        r -= m
    return r


def centered_mod(n: int, m: int) -> int:
    r = n % m
    if 2 * r >= 1 + m:
        r -= m
    return r


def eq_class_test(delta: Sequence[PadicApprox], delta2: Sequence[PadicApprox], H: int, bound: Rational = 1) -> bool:
    """Finite-precision surrogate of the relation ~e.

    For each level h <= H some permutation must keep
    |delta2^(h) - sigma(delta)^(h)|_inf / h within ``bound``; the permutation
    may depend on h.
    """
    if len(delta) != len(delta2):
        return False
    if any(a.precision < H for a in (*delta, *delta2)):
        raise PrecisionError("precision below H")
    mu = len(delta)
    bound = Fraction(bound)
    for h in range(1, H + 1):
        a = [centered_rep(x, h) for x in delta]
        b = [centered_rep(x, h) for x in delta2]
        if not any(
            max((abs(b[i] - a[s[i]]) for i in range(mu)), default=0) <= bound * h
            for s in itertools.permutations(range(mu))
        ):
            return False
    return True


def rational_reconstruction(x: Fraction, p: int, k: int) -> Fraction:
    """The rational of smallest height congruent to x modulo p^k (after scaling out v_p).

    Used to clean truncation noise off series sums whose true value is a
    small-height rational.  Returns x unchanged when no reconstruction
    exists within the Wang bound.
    """
    x = Fraction(x)
    if x == 0:
        return x
    v = int(vp(x, p))
    y = x / Fraction(p) ** v
    m = p**k
    a = y.numerator * pow(y.denominator, -1, m) % m
    r0, r1, s0, s1 = m, a, 0, 1
    bound = math.isqrt(m // 2)
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound or math.gcd(r1, abs(s1)) != 1:
        return x
    return Fraction(r1, s1) * Fraction(p) ** v

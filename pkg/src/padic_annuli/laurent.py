"""Laurent polynomials in t with polynomial dependence on a disk variable z.

Elements carry a truncation window [lo, hi] in t-degree inside which the
stored terms are exact.  ``None`` endpoints mean the element is exact in
that direction; ordinary Laurent polynomials have window (None, None).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, Mapping, Optional, Tuple

from .padic_core import INF, LogValue, Rational, Scalar, format_rational, parse_rational

Key = Tuple[int, int]


class WindowUnderflow(ValueError):
    """An operation would leave no degree range in which the result is exact."""


@dataclass(frozen=True)
class RInterval:
    """Closed interval in r = -log_p(rho); rho runs over [p^-r_hi, p^-r_lo]."""

    r_lo: Fraction
    r_hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "r_lo", Fraction(self.r_lo))
        object.__setattr__(self, "r_hi", Fraction(self.r_hi))
        if not 0 < self.r_lo <= self.r_hi:
            raise ValueError(f"bad interval [{self.r_lo}, {self.r_hi}]")

    def __contains__(self, r) -> bool:
        return self.r_lo <= Fraction(r) <= self.r_hi

    def scaled(self, k: Rational) -> "RInterval":
        return RInterval(self.r_lo * k, self.r_hi * k)

    @property
    def mid(self) -> Fraction:
        return (self.r_lo + self.r_hi) / 2

    @property
    def endpoints(self) -> Tuple[Fraction, Fraction]:
        return (self.r_lo, self.r_hi)

    def to_json(self):
        return [format_rational(self.r_lo), format_rational(self.r_hi)]


def _lo(x):
    return -math.inf if x is None else x


def _hi(x):
    return math.inf if x is None else x


def _back(x):
    return None if x in (math.inf, -math.inf) else int(x)


class LaurentElement:
    """Finite sum of c * t^nt * z^nz with c a :class:`Scalar`."""

    __slots__ = ("p", "terms", "lo", "hi")

    def __init__(self, p: int, terms: Optional[Mapping[Key, object]] = None,
                 lo: Optional[int] = None, hi: Optional[int] = None):
        self.p = p
        self.lo = lo
        self.hi = hi
        if lo is not None and hi is not None and lo > hi:
            raise WindowUnderflow(f"empty window [{lo}, {hi}]")
        clean: Dict[Key, Scalar] = {}
        for (nt, nz), c in (terms or {}).items():
            if nz < 0:
                raise ValueError("negative z-degree")
            c = Scalar.coerce(p, c)
            if c.is_zero():
                continue
            if _lo(lo) <= nt <= _hi(hi):
                clean[(int(nt), int(nz))] = c
        self.terms = clean

    # -- constructors --------------------------------------------------------
    @classmethod
    def zero(cls, p: int) -> "LaurentElement":
        return cls(p)

    @classmethod
    def const(cls, p: int, c) -> "LaurentElement":
        return cls(p, {(0, 0): c})

    @classmethod
    def monomial(cls, p: int, c, nt: int, nz: int = 0) -> "LaurentElement":
        return cls(p, {(nt, nz): c})

    @classmethod
    def t(cls, p: int, n: int = 1) -> "LaurentElement":
        return cls.monomial(p, 1, n)

    # -- basic queries --------------------------------------------------------
    @property
    def exact(self) -> bool:
        return self.lo is None and self.hi is None

    @property
    def window(self):
        return (self.lo, self.hi)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def t_support(self) -> Tuple[float, float]:
        if not self.terms:
            return (math.inf, -math.inf)
        ts = [k[0] for k in self.terms]
        return (min(ts), max(ts))

    def z_degree(self) -> int:
        return max((k[1] for k in self.terms), default=-1)

    def has_z(self) -> bool:
        return any(k[1] for k in self.terms)

    @property
    def level(self) -> int:
        return max((c.level for c in self.terms.values()), default=0)

    def coefficient(self, nt: int) -> Dict[int, Scalar]:
        """The z-polynomial multiplying t^nt, as {nz: coeff}."""
        return {nz: c for (n, nz), c in self.terms.items() if n == nt}

    def t_coefficients(self) -> Dict[int, "LaurentElement"]:
        out: Dict[int, Dict[Key, Scalar]] = {}
        for (nt, nz), c in self.terms.items():
            out.setdefault(nt, {})[(0, nz)] = c
        return {nt: LaurentElement(self.p, d) for nt, d in out.items()}

    def items(self) -> Iterator:
        return iter(sorted(self.terms.items()))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            other = LaurentElement.const(self.p, other)
        if not isinstance(other, LaurentElement):
            return NotImplemented
        return self.terms == other.terms and self.window == other.window

    def __hash__(self):
        return hash((frozenset(self.terms.items()), self.window))

    def __repr__(self):
        if not self.terms:
            body = "0"
        else:
            parts = []
            for (nt, nz), c in sorted(self.terms.items()):
                mono = "".join(s for s in (f"t^{nt}" if nt else "", f"z^{nz}" if nz else ""))
                parts.append(f"({c!r}){mono}")
            body = " + ".join(parts)
        if not self.exact:
            body += f" [window {self.lo}..{self.hi}]"
        return f"Laurent({body})"

    # -- ring operations ----------------------------------------------------
    def _coerce(self, other) -> "LaurentElement":
        if isinstance(other, LaurentElement):
            if other.p != self.p:
                raise ValueError("prime mismatch")
            return other
        return LaurentElement.const(self.p, other)

    def __add__(self, other):
        other = self._coerce(other)
        lo = _back(max(_lo(self.lo), _lo(other.lo)))
        hi = _back(min(_hi(self.hi), _hi(other.hi)))
        if lo is not None and hi is not None and lo > hi:
            raise WindowUnderflow("sum has empty window")
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms[k] + c if k in terms else c
        return LaurentElement(self.p, terms, lo, hi)

    __radd__ = __add__

    def __neg__(self):
        return LaurentElement(self.p, {k: -c for k, c in self.terms.items()}, self.lo, self.hi)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c) -> "LaurentElement":
        c = Scalar.coerce(self.p, c)
        if c.is_zero():
            return LaurentElement(self.p, {}, self.lo, self.hi)
        return LaurentElement(self.p, {k: v * c for k, v in self.terms.items()}, self.lo, self.hi)

    def _product_window(self, other):
        al, ah = _lo(self.lo), _hi(self.hi)
        bl, bh = _lo(other.lo), _hi(other.hi)
        a_slo, a_shi = self.t_support()
        b_slo, b_shi = other.t_support()
        lo, hi = -math.inf, math.inf
        # known part of one factor times unknown part of the other
        if self.terms:
            lo = max(lo, a_shi + bl) if bl > -math.inf else lo
            hi = min(hi, a_slo + bh) if bh < math.inf else hi
        if other.terms:
            lo = max(lo, b_shi + al) if al > -math.inf else lo
            hi = min(hi, b_slo + ah) if ah < math.inf else hi
        # unknown times unknown
        if (al > -math.inf and bh < math.inf) or (ah < math.inf and bl > -math.inf):
            raise WindowUnderflow("product of two-sided truncations is undetermined")
        if al > -math.inf and bl > -math.inf:
            lo = max(lo, al + bl)
        if ah < math.inf and bh < math.inf:
            hi = min(hi, ah + bh)
        if lo > hi:
            raise WindowUnderflow(f"product window [{lo}, {hi}] is empty")
        return _back(lo), _back(hi)

    def __mul__(self, other):
        if not isinstance(other, LaurentElement):
            return self.scale(other)
        if other.p != self.p:
            raise ValueError("prime mismatch")
        if self.exact and other.exact:
            lo = hi = None
        else:
            lo, hi = self._product_window(other)
        terms: Dict[Key, Scalar] = {}
        for (n1, z1), c1 in self.terms.items():
            for (n2, z2), c2 in other.terms.items():
                k = (n1 + n2, z1 + z2)
                v = c1 * c2
                terms[k] = terms[k] + v if k in terms else v
        return LaurentElement(self.p, terms, lo, hi)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, n: int):
        if n < 0:
            if len(self.terms) != 1:
                raise ValueError("only monomials can be inverted")
            (nt, nz), c = next(iter(self.terms.items()))
            if nz:
                raise ValueError("z-monomials are not units")
            return LaurentElement.monomial(self.p, c.inverse(), -nt) ** (-n)
        out = LaurentElement.const(self.p, 1)
        for _ in range(n):
            out = out * self
        return out

    def d_dt(self) -> "LaurentElement":
        terms = {(nt - 1, nz): c * nt for (nt, nz), c in self.terms.items() if nt}
        lo = None if self.lo is None else self.lo - 1
        hi = None if self.hi is None else self.hi - 1
        return LaurentElement(self.p, terms, lo, hi)

    def substitute_t_power(self, k: int) -> "LaurentElement":
        """t -> t^k."""
        if k < 1:
            raise ValueError("power must be positive")
        terms = {(nt * k, nz): c for (nt, nz), c in self.terms.items()}
        lo = None if self.lo is None else self.lo * k
        hi = None if self.hi is None else self.hi * k
        return LaurentElement(self.p, terms, lo, hi)

    def substitute_t_scale(self, c: Scalar) -> "LaurentElement":
        """t -> c*t."""
        terms = {}
        for (nt, nz), a in self.terms.items():
            terms[(nt, nz)] = a * (c**nt)
        return LaurentElement(self.p, terms, self.lo, self.hi)

    def specialize_z(self, a) -> "LaurentElement":
        """z -> a for a scalar a."""
        a = Scalar.coerce(self.p, a)
        terms: Dict[Key, Scalar] = {}
        for (nt, nz), c in self.terms.items():
            v = c * (a**nz) if nz else c
            k = (nt, 0)
            terms[k] = terms[k] + v if k in terms else v
        return LaurentElement(self.p, terms, self.lo, self.hi)

    def truncate(self, lo: Optional[int], hi: Optional[int]) -> "LaurentElement":
        lo = _back(max(_lo(self.lo), _lo(lo)))
        hi = _back(min(_hi(self.hi), _hi(hi)))
        return LaurentElement(self.p, self.terms, lo, hi)

    def drop_below(self, r: Fraction, budget: Fraction) -> "LaurentElement":
        """Discard terms whose Gauss valuation at r is at least ``budget``."""
        return LaurentElement(
            self.p, {k: c for k, c in self.terms.items() if c.valuation() + k[0] * r < budget}, self.lo, self.hi
        )

    def map_coeffs(self, fn) -> "LaurentElement":
        return LaurentElement(self.p, {k: fn(c) for k, c in self.terms.items()}, self.lo, self.hi)

    # -- serialization --------------------------------------------------------
    def to_json(self) -> dict:
        out = []
        for (nt, nz), c in sorted(self.terms.items()):
            s = c.simplify()
            rec = {"nt": nt, "nz": nz}
            if s.level == 0:
                rec["coeff"] = format_rational(s.coeffs[0])
            else:
                rec["coeff"] = {"level": s.level, "zeta": [format_rational(x) for x in s.coeffs]}
            out.append(rec)
        return {"terms": out, "window": [self.lo, self.hi]}

    @classmethod
    def from_json(cls, p: int, data) -> "LaurentElement":
        if isinstance(data, list):
            data = {"terms": data}
        terms: Dict[Key, Scalar] = {}
        for rec in data.get("terms", []):
            c = rec["coeff"]
            if isinstance(c, dict):
                sc = Scalar(p, [parse_rational(x) for x in c["zeta"]], int(c["level"]))
            else:
                sc = Scalar.rational(p, parse_rational(c))
            k = (int(rec["nt"]), int(rec.get("nz", 0)))
            terms[k] = terms[k] + sc if k in terms else sc
        lo, hi = data.get("window", [None, None])
        return cls(p, terms, lo, hi)


def gauss_valuation(f: LaurentElement, r) -> LogValue:
    """-log_p of the rho-Gauss norm (rho = p^-r); z-terms use the sup over the unit disk."""
    r = Fraction(r)
    best = INF
    for (nt, _), c in f.terms.items():
        v = c.valuation() + nt * r
        if v < best:
            best = v
    return best


def sup_valuation(coeffs: Mapping[int, Scalar]) -> LogValue:
    """Sup-norm valuation of a z-polynomial {nz: coeff} on the closed unit disk."""
    return min((c.valuation() for c in coeffs.values()), default=INF)


def matrix_gauss_valuation(m, r) -> LogValue:
    return min((gauss_valuation(e, r) for row in m for e in row), default=INF)


class LaurentFraction:
    """num/den in the fraction field; the valuation is v(num) - v(den)."""

    __slots__ = ("num", "den")

    def __init__(self, num: LaurentElement, den: Optional[LaurentElement] = None):
        if den is None:
            den = LaurentElement.const(num.p, 1)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        self.num = num
        self.den = den

    def valuation(self, r) -> LogValue:
        v = gauss_valuation(self.num, r)
        if v == INF:
            return INF
        return v - gauss_valuation(self.den, r)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __repr__(self):
        return f"({self.num!r}) / ({self.den!r})"

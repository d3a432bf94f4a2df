"""Exponents of Robba modules through the twisted averages S_{h, Delta}.

With Y(x, y) = sum_n G_n(y) (x - y)^n / n! the resolvent,
    S_{h,Delta}(x) = p^-h sum_{zeta^(p^h) = 1} zeta^(-Delta) Y(zeta x, x)
                   = sum_n G_n(x) diag(c_n(Delta_k)) x^n / n!,
where c_n(d) = sum_{j = d mod p^h} C(n, j) (-1)^(n-j) is an integer.  So no
cyclotomic arithmetic is needed, and the refinement identity
det S_{h,D} = sum_{D' = D mod p^h} det S_{h+1,D'} holds exactly for the
truncated sums (each column of S_h is the sum of the columns of its refinements).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Union

from .diff_module import DiffModule, Matrix, derive_powers, det
from .laurent import LaurentElement, gauss_valuation
from .padic_core import INF, LogValue, PadicApprox, Scalar, centered_mod, format_rational, phi_degree
from .radius_profile import Inconclusive, Solvable, classify, grid_for, sample_profile

DEFAULT_BUDGET = 12


class RobbaError(ValueError):
    """The module is not shown to satisfy the Robba condition."""


class DegenerateResolventError(RuntimeError):
    pass


@lru_cache(maxsize=None)
def c_coeff(n: int, d: int, m: int) -> int:
    """sum over j = d (mod m), 0 <= j <= n, of C(n, j) (-1)^(n - j)."""
    d %= m
    return sum(math.comb(n, j) * (-1 if (n - j) % 2 else 1) for j in range(d, n + 1, m))


def default_n_max(p: int, h: int, budget: int = DEFAULT_BUDGET) -> int:
    # c_n(d) has valuation >= n / phi(p^h) - h
    return phi_degree(p, h) * (budget + h)


# -- resolvent --------------------------------------------------------------------

@dataclass(frozen=True)
class Resolvent:
    """Y(x, y) = sum_n T_n(y) (x - y)^n with T_n = G_n / n!."""

    p: int
    T: Tuple[Matrix, ...]
    n_max: int

    def at_diagonal(self) -> Matrix:
        """Y(y, y): only the n = 0 term survives."""
        return self.T[0]


def robba_on_grid(M: DiffModule, grid: Optional[Sequence] = None, N: Optional[int] = None):
    """(ok, verdict): classify = Solvable{0} and f_hat = r at every grid point."""
    grid = grid_for(M, grid)
    prof = sample_profile(M, grid, N)
    verdict = classify(prof)
    ok = isinstance(verdict, Solvable) and verdict.b == 0 and all(
        s.stabilized and s.f_hat == s.r for s in prof.samples)
    return ok, verdict


def resolvent(M: DiffModule, n_max: int, check_robba: bool = True) -> Resolvent:
    if check_robba and not robba_on_grid(M)[0]:
        raise RobbaError("resolvent needs the Robba condition on the working interval")
    P = derive_powers(M, max(n_max, 1))
    T = []
    for n in range(n_max + 1):
        inv = Scalar.rational(M.p, Fraction(1, math.factorial(n)))
        T.append(tuple(tuple(x.scale(inv) for x in row) for row in P[n]))
    return Resolvent(M.p, tuple(T), n_max)


# -- S matrices ---------------------------------------------------------------------

class SEngine:
    """Column tables C[k][d] = sum_n c_n(d) (G_n t^n / n!)[:, k] for one height h.

    Column k of G_n holds the coordinates of d^n(e_k), so Delta_k twists the
    k-th basis vector.
    """

    def __init__(self, M: DiffModule, h: int, n_max: Optional[int] = None, budget: int = DEFAULT_BUDGET):
        self.M, self.h, self.p = M, h, M.p
        self.mod = M.p**h
        self.budget = budget
        self.n_max = default_n_max(M.p, h, budget) if n_max is None else n_max
        P = derive_powers(M, max(self.n_max, 1))
        p, mu = M.p, M.rank
        scaled = []
        for n in range(self.n_max + 1):
            tn = LaurentElement.monomial(p, Fraction(1, math.factorial(n)), n)
            scaled.append([[tn * x if x else x for x in row] for row in P[n]])
        self.cols: List[List[Tuple[LaurentElement, ...]]] = []
        for k in range(mu):
            per_digit = []
            for d in range(self.mod):
                acc = [LaurentElement.zero(p) for _ in range(mu)]
                for n in range(self.n_max + 1):
                    c = c_coeff(n, d, self.mod)
                    if c == 0:
                        continue
                    for i in range(mu):
                        x = scaled[n][i][k]
                        if x:
                            acc[i] = acc[i] + x.scale(c)
                per_digit.append(tuple(acc))
            self.cols.append(per_digit)

    def matrix(self, delta: Sequence[int]) -> Matrix:
        chosen = [self.cols[k][d % self.mod] for k, d in enumerate(delta)]
        return tuple(tuple(col[i] for col in chosen) for i in range(len(chosen)))

    def det_valuation(self, delta: Sequence[int], r0) -> LogValue:
        """Valuation of det S at r0; values at or beyond the truncation budget count as +inf."""
        v = gauss_valuation(det(self.matrix(delta)), Fraction(r0))
        return INF if v == INF or v >= self.budget - self.h else v


@dataclass(frozen=True)
class SMatrix:
    h: int
    delta: Tuple[int, ...]
    S: Matrix
    det_valuation: LogValue


def s_matrix(M: DiffModule, h: int, delta: Sequence[int], r0, n_max: Optional[int] = None,
             engine: Optional[SEngine] = None) -> SMatrix:
    eng = engine or SEngine(M, h, n_max)
    return SMatrix(h, tuple(d % eng.mod for d in delta), eng.matrix(delta), eng.det_valuation(delta, r0))


# -- greedy digits ----------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentCandidate:
    p: int
    delta: Tuple[int, ...]
    H: int
    det_valuations: Tuple[LogValue, ...]
    r0: Fraction
    robba: bool = True

    @property
    def mod(self) -> int:
        return self.p**self.H

    def to_json(self) -> dict:
        return {"delta": list(self.delta), "mod": self.mod,
                "det_valuations": [format_rational(v) for v in self.det_valuations],
                "r0": format_rational(self.r0), "robba": self.robba}


def _tie_key(delta: Sequence[int], m: int):
    return tuple(centered_mod(d, m) for d in delta)


def exponent_digits(M: DiffModule, r0=None, H: int = 2, check_robba: bool = True,
                    budget: int = DEFAULT_BUDGET) -> ExponentCandidate:
    """Delta mod p^H, refining one p-adic digit per step by maximal |det S|."""
    if check_robba:
        ok, verdict = robba_on_grid(M)
        if not ok:
            raise RobbaError(f"Robba condition not verified ({verdict})")
    r0 = M.interval.mid if r0 is None else Fraction(r0)
    p, mu = M.p, M.rank
    delta = (0,) * mu
    vals = []
    for h in range(1, H + 1):
        eng = SEngine(M, h, budget=budget)
        step = p ** (h - 1)
        best = None
        for digits in itertools.product(range(p), repeat=mu):
            cand = tuple(d + step * e for d, e in zip(delta, digits))
            v = eng.det_valuation(cand, r0)
            key = (v, _tie_key(cand, eng.mod))
            if best is None or key < best[0]:
                best = (key, cand)
        if best[0][0] == INF:
            raise DegenerateResolventError(f"every refinement at height {h} has vanishing det")
        delta = best[1]
        vals.append(best[0][0])
    return ExponentCandidate(p, delta, H, tuple(vals), r0)


# -- Sigma tests ---------------------------------------------------------------------

SigmaEntry = Union[Fraction, PadicApprox, int, str]


def _as_fraction(x: SigmaEntry) -> Fraction:
    if isinstance(x, PadicApprox):
        return x.value
    return Fraction(x)


def nid_nld_check(sigma: Sequence[SigmaEntry]) -> bool:
    """No two entries differ by a nonzero integer; rationals are never Liouville."""
    vals = [_as_fraction(x) for x in sigma]
    for a, b in itertools.combinations(vals, 2):
        d = a - b
        if d != 0 and d.denominator == 1:
            return False
    return True


def _residue(x: Fraction, m: int) -> int:
    return x.numerator * pow(x.denominator, -1, m) % m


def exponent_in_sigma(c: ExponentCandidate, sigma: Sequence[SigmaEntry], H: Optional[int] = None,
                      shift_bound: Optional[int] = None) -> bool:
    """Each Delta_i is some xi in Sigma plus a small integer shift, mod p^H."""
    H = c.H if H is None else H
    if H > c.H:
        raise ValueError("candidate known to fewer digits than requested")
    bound = H if shift_bound is None else shift_bound
    m = c.p**H
    res = [_residue(_as_fraction(x), m) for x in sigma]
    return all(any(abs(centered_mod(d - s, m)) <= bound for s in res) for d in c.delta)


@dataclass(frozen=True)
class SigmaVerdict:
    value: Optional[bool]
    reason: str
    candidate: Optional[ExponentCandidate] = None

    def to_json(self):
        return {"sigma_unipotent": self.value, "reason": self.reason,
                "exponent": None if self.candidate is None else self.candidate.to_json()}


def sigma_unipotent_check(M: DiffModule, sigma: Sequence[SigmaEntry], H: int = 2, r0=None,
                          shift_bound: Optional[int] = None, grid=None, N=None) -> SigmaVerdict:
    if not nid_nld_check(sigma):
        return SigmaVerdict(None, "Sigma violates NID")
    ok, verdict = robba_on_grid(M, grid, N)
    if not ok:
        if isinstance(verdict, Inconclusive):
            return SigmaVerdict(None, f"break undetermined: {verdict.reason}")
        return SigmaVerdict(False, f"Robba condition fails: {verdict}")
    try:
        cand = exponent_digits(M, r0, H, check_robba=False)
    except DegenerateResolventError as exc:
        return SigmaVerdict(None, str(exc))
    inside = exponent_in_sigma(cand, sigma, H, shift_bound)
    return SigmaVerdict(inside, "exponent in Sigma" if inside else "exponent outside Sigma", cand)

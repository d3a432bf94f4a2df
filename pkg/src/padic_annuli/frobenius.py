"""The mu_p-action on a differential module, its projectors and Frobenius antecedents.

A root of unity zeta^m acts semilinearly (f(t) -> f(zeta^m t)) by
    zeta^m(e) = e . A_m,   A_m = sum_i ((zeta^m - 1) t)^i / i! . G_i,
which converges when R(E, rho) > p^(-1/(p-1)) rho.  The antecedent is the
image of P_0 = p^-1 sum_m zeta^m(.), written over u = t^p.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .diff_module import (
    DiffModule,
    Matrix,
    derive_powers,
    det,
    frobenius_pullback,
    generic_radius_estimate,
    mat_add,
    mat_identity,
    mat_map,
    mat_mul,
    mat_sub,
    mat_valuation,
)
from .laurent import LaurentElement, RInterval
from .padic_core import INF, Scalar, rational_reconstruction


class PreconditionError(ValueError):
    """The radius is too small for the mu_p-action series to converge."""


class AntecedentError(RuntimeError):
    pass


DEFAULT_BUDGET_EXTRA = 10


def default_budget(p: int) -> int:
    return p * p + DEFAULT_BUDGET_EXTRA


def _probe_radii(interval: RInterval) -> List[Fraction]:
    # f - r is convex, so the convergence margin is smallest at an endpoint
    return [interval.r_lo, interval.mid, interval.r_hi]


def convergence_margin(M: DiffModule, N: Optional[int] = None) -> Fraction:
    """min over probe radii of 1/(p-1) + r - f_hat(r); must be positive."""
    p = M.p
    return min(Fraction(1, p - 1) + r - generic_radius_estimate(M, r, N).f_hat
               for r in _probe_radii(M.interval))


@dataclass(frozen=True)
class MuPAction:
    p: int
    level: int
    A: Tuple[Matrix, ...]
    n_max: int
    tail_bound: Fraction  # every dropped term has valuation >= this on the interval
    interval: RInterval

    def apply(self, m: int, X: Matrix) -> Matrix:
        """Coordinates of zeta^m(e . X)."""
        z = Scalar.zeta(self.p, self.level, m)
        Xs = mat_map(lambda x: x.substitute_t_scale(z), X)
        return mat_mul(self.A[m % self.p], Xs)


def mu_p_action(M: DiffModule, n_max: Optional[int] = None, budget: Optional[int] = None,
                check: bool = True) -> MuPAction:
    p = M.p
    budget = default_budget(p) if budget is None else budget
    margin = convergence_margin(M) if check or n_max is None else None
    if margin is not None and margin <= 0:
        raise PreconditionError(
            "antecedent precondition R > p^(-1/(p-1)) rho violated "
            f"(margin {margin} on [{M.interval.r_lo}, {M.interval.r_hi}])")
    if n_max is None:
        n_max = math.ceil(budget / margin)
    tail = (n_max + 1) * margin if margin is not None else Fraction(0)
    level = max(1, M.level)
    P = derive_powers(M, max(n_max, 1))
    t = LaurentElement.t(p)
    A = []
    for m in range(p):
        c = Scalar.zeta(p, level, m) - 1
        acc = mat_identity(p, M.rank)
        if m:
            term_scale = LaurentElement.const(p, 1)
            for i in range(1, n_max + 1):
                term_scale = term_scale * (t * c)
                fact = Scalar.rational(p, Fraction(1, math.factorial(i)))
                acc = mat_add(acc, mat_map(lambda x: (term_scale * x).scale(fact), P[i]))
        A.append(acc)
    return MuPAction(p, level, tuple(A), n_max, Fraction(tail), M.interval)


def projectors(action: MuPAction) -> Tuple[Matrix, ...]:
    """Matrices of P_j on the basis: P_j(e) = e . (p^-1 sum_m zeta^(-mj) A_m)."""
    p, lvl = action.p, action.level
    inv_p = Scalar.rational(p, Fraction(1, p))
    out = []
    for j in range(p):
        acc = None
        for m in range(p):
            w = Scalar.zeta(p, lvl, -m * j) * inv_p
            term = mat_map(lambda x: x.scale(w), action.A[m])
            acc = term if acc is None else mat_add(acc, term)
        out.append(acc)
    return tuple(out)


def apply_projector(action: MuPAction, j: int, X: Matrix) -> Matrix:
    """Coordinates of P_j(e . X), respecting semilinearity."""
    p = action.p
    inv_p = Scalar.rational(p, Fraction(1, p))
    acc = None
    for m in range(p):
        w = Scalar.zeta(p, action.level, -m * j) * inv_p
        term = mat_map(lambda x: x.scale(w), action.apply(m, X))
        acc = term if acc is None else mat_add(acc, term)
    return acc


# -- cleaning truncated series ---------------------------------------------------

def _clean(x: LaurentElement, interval: RInterval, threshold: Fraction, digits: int) -> LaurentElement:
    """Drop terms below the noise floor and round rational coefficients."""
    terms = {}
    for (nt, nz), c in x.terms.items():
        v = c.valuation()
        if min(v + nt * interval.r_lo, v + nt * interval.r_hi) >= threshold:
            continue
        s = c.simplify()
        if s.level == 0:
            s = Scalar.rational(x.p, rational_reconstruction(s.coeffs[0], x.p, digits))
        terms[(nt, nz)] = s
    return LaurentElement(x.p, terms, x.lo, x.hi)


# -- pushforward coordinates over u = t^p --------------------------------------------

def _split(x: LaurentElement, p: int) -> List[LaurentElement]:
    """x(t) = sum_j t^j x_j(t^p); returns [x_0, ..., x_{p-1}] as elements in u."""
    parts: List[Dict] = [dict() for _ in range(p)]
    for (nt, nz), c in x.terms.items():
        j = nt % p
        parts[j][((nt - j) // p, nz)] = c
    return [LaurentElement(p, d) for d in parts]


def _join(parts: Sequence[LaurentElement], p: int) -> LaurentElement:
    acc = LaurentElement.zero(p)
    for j, y in enumerate(parts):
        acc = acc + LaurentElement.monomial(p, 1, j) * y.substitute_t_power(p)
    return acc


def _pushforward_column(vec: Sequence[LaurentElement], p: int) -> List[LaurentElement]:
    """Column vector e . vec -> coordinates on the basis t^j e_k, ordered (k, j)."""
    out = []
    for y in vec:
        out.extend(_split(y, p))
    return out


def _is_unit(x: LaurentElement) -> bool:
    return len(x.terms) == 1 and not x.has_z()


def _adjugate(m: Sequence[Sequence[LaurentElement]]) -> Matrix:
    n = len(m)
    p = m[0][0].p
    if n == 1:
        return ((LaurentElement.const(p, 1),),)
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(m) if k != i]
            c = det(minor)
            out[j][i] = c if (i + j) % 2 == 0 else -c
    return tuple(tuple(r) for r in out)


def _unit_inverse(m: Sequence[Sequence[LaurentElement]]) -> Matrix:
    d = det(m)
    (nt, nz), c = next(iter(d.terms.items()))
    inv = LaurentElement.monomial(d.p, c.inverse(), -nt)
    return mat_map(lambda x: x * inv, _adjugate(m))


# -- the antecedent ----------------------------------------------------------------

@dataclass(frozen=True)
class Antecedent:
    F: DiffModule
    basis: Matrix           # columns: coordinates of the F-basis in e, over t
    pushforward: Matrix     # the same basis on t^j e_k, over u
    pivots: Tuple[Tuple[int, ...], Tuple[int, ...]]
    n_max: int

    def to_json(self) -> dict:
        return {"basis": [[x.to_json() for x in row] for row in self.basis],
                "n_max": self.n_max}


def antecedent(M: DiffModule, budget: Optional[int] = None, n_max: Optional[int] = None) -> Antecedent:
    """F with frobenius_pullback(F) isomorphic to M, realized as Im P_0."""
    p, mu = M.p, M.rank
    budget = default_budget(p) if budget is None else budget
    action = mu_p_action(M, n_max=n_max, budget=budget)
    digits = max(1, budget - 2)
    threshold = Fraction(budget - 2)

    # columns P_0(t^j e_k) in pushforward coordinates
    cols = []
    labels = []
    for k in range(mu):
        for j in range(p):
            X = tuple((LaurentElement.monomial(p, 1, j) if i == k else LaurentElement.zero(p),) for i in range(mu))
            Y = apply_projector(action, 0, X)
            vec = [_clean(Y[i][0], M.interval, threshold, digits) for i in range(mu)]
            cols.append(_pushforward_column(vec, p))
            labels.append((k, j))
    n = p * mu
    u_interval = M.interval.scaled(p)
    B_full = [[cols[c][r] for c in range(n)] for r in range(n)]

    choice = None
    for cs in itertools.combinations(range(n), mu):
        if any(all(B_full[r][c].is_zero() for r in range(n)) for c in cs):
            continue
        for rs in itertools.combinations(range(n), mu):
            sub = [[B_full[r][c] for c in cs] for r in rs]
            if _is_unit(det(sub)):
                choice = (cs, rs)
                break
        if choice:
            break
    if choice is None:
        raise AntecedentError("column reduction did not find a rank-mu unit minor in Im P_0")
    cs, rs = choice
    B = tuple(tuple(B_full[r][c] for c in cs) for r in range(n))

    # d/du of each basis vector, back in pushforward coordinates
    D_cols = []
    for c in cs:
        vec = [_join(cols[c][k * p:(k + 1) * p], p) for k in range(mu)]
        deriv = []
        for i in range(mu):
            acc = vec[i].d_dt()
            for l in range(mu):
                if M.G1[i][l] and vec[l]:
                    acc = acc + M.G1[i][l] * vec[l]
            deriv.append(acc * LaurentElement.monomial(p, Fraction(1, p), 1 - p))
        D_cols.append(_pushforward_column(deriv, p))
    D = tuple(tuple(D_cols[c][r] for c in range(mu)) for r in range(n))

    B_piv = [[B[r][c] for c in range(mu)] for r in rs]
    D_piv = [[D[r][c] for c in range(mu)] for r in rs]
    G_F = mat_map(lambda x: _clean(x, u_interval, threshold, digits), mat_mul(_unit_inverse(B_piv), D_piv))
    tol = Fraction(budget, 2)
    if _residual_valuation(mat_sub(mat_mul(B, G_F), D), u_interval) < tol:
        raise AntecedentError("Im P_0 is not stable under the new connection (truncation too coarse)")

    F = DiffModule(p, G_F, M.interval.scaled(p))
    basis = tuple(tuple(_join([B[k * p + j][c] for j in range(p)], p) for c in range(mu)) for k in range(mu))
    return Antecedent(F, basis, B, (tuple(cs), tuple(rs)), action.n_max)


def _residual_valuation(X, interval: RInterval) -> Fraction:
    """Smallest Gauss valuation of X over the interval (attained at an endpoint)."""
    return min(mat_valuation(X, interval.r_lo), mat_valuation(X, interval.r_hi))


def pullback_residual(M: DiffModule, ant: Antecedent):
    """Valuation of C' + G1 C - C G', G' the matrix of frobenius_pullback(F); inf when exact."""
    C = ant.basis
    Gp = frobenius_pullback(ant.F).G1
    lhs = mat_add(mat_map(lambda x: x.d_dt(), C), mat_mul(M.G1, C))
    return _residual_valuation(mat_sub(lhs, mat_mul(C, Gp)), M.interval)


def pullback_identity_holds(M: DiffModule, ant: Antecedent, tol=None) -> bool:
    """The gauge identity holds (exactly, or to valuation tol) and det C is a unit on the interval."""
    res = pullback_residual(M, ant)
    ok = res == INF if tol is None else res >= tol
    return ok and _dominant_unit(det(ant.basis), M.interval)


def _dominant_unit(x: LaurentElement, interval: RInterval) -> bool:
    """One term strictly dominates at both endpoints, so x is a unit on the annulus."""
    if x.is_zero() or x.has_z():
        return False
    for r in interval.endpoints:
        vals = sorted(c.valuation() + nt * r for (nt, _), c in x.terms.items())
        if len(vals) > 1 and vals[0] == vals[1]:
            return False
    best = {min(x.terms, key=lambda k: x.terms[k].valuation() + k[0] * r) for r in interval.endpoints}
    return len(best) == 1


def rank1_residue_equivalent(a: DiffModule, b: DiffModule) -> bool:
    """Rank one modules differ by a gauge c t^k iff G1 differ by k/t with k an integer."""
    if a.rank != 1 or b.rank != 1:
        raise ValueError("rank one only")
    d = a.G1[0][0] - b.G1[0][0]
    if d.is_zero():
        return True
    if set(d.terms) != {(-1, 0)}:
        return False
    c = d.terms[(-1, 0)].simplify()
    return c.level == 0 and c.coeffs[0].denominator == 1


@dataclass(frozen=True)
class RadiusLawReport:
    ok: bool
    rows: Tuple[Tuple[Fraction, Fraction, Fraction], ...]  # (r, f_M(r), f_F(p r))
    roundtrip: Optional[bool]
    mismatches: Tuple[str, ...]

    def to_json(self):
        from .padic_core import format_rational as fr
        return {"ok": self.ok, "roundtrip": self.roundtrip, "mismatches": list(self.mismatches),
                "rows": [{"r": fr(r), "f_M": fr(a), "f_F_at_pr": fr(b)} for r, a, b in self.rows]}


def verify_antecedent_radius(M: DiffModule, F: DiffModule, grid: Sequence, N: Optional[int] = None,
                             roundtrip: bool = True) -> RadiusLawReport:
    p = M.p
    rows, bad = [], []
    for r in grid:
        r = Fraction(r)
        fm = generic_radius_estimate(M, r, N).f_hat
        ff = generic_radius_estimate(F, p * r, N).f_hat
        rows.append((r, fm, ff))
        if ff != p * fm:
            bad.append(f"r={r}: f_F(pr)={ff} but p f_M(r)={p * fm}")
    rt = None
    if roundtrip:
        back = antecedent(frobenius_pullback(F)).F
        if F.rank == 1:
            rt = rank1_residue_equivalent(back, F)
        else:
            rt = all(generic_radius_estimate(back, p * r, N).f_hat == generic_radius_estimate(F, p * r, N).f_hat
                     for r in grid)
        if not rt:
            bad.append("antecedent of the pullback differs from F")
    return RadiusLawReport(not bad, tuple(rows), rt, tuple(bad))

"""Differential modules over the Laurent ring and their generic radius.

Convention: for a basis e (a row vector), d(e) = e . G1, so the matrix of the
n-th iterate, d^n(e) = e . G_n, obeys G_{n+1} = G_n' + G1 . G_n: each
column of G_n is a coordinate column, and a coordinate column x of
v = e . x transforms as x -> x' + G1 . x.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, NamedTuple, Optional, Sequence, Tuple

from .laurent import (
    LaurentElement,
    LaurentFraction,
    RInterval,
    WindowUnderflow,
    gauss_valuation,
)
from .padic_core import INF, LogValue, Scalar, digit_sum, vp_factorial

Matrix = Tuple[Tuple[LaurentElement, ...], ...]

DEFAULT_INTERVAL = (Fraction(1, 64), Fraction(1))


# -- matrix helpers ----------------------------------------------------------

def mat_zero(p: int, mu: int) -> Matrix:
    z = LaurentElement.zero(p)
    return tuple(tuple(z for _ in range(mu)) for _ in range(mu))


def mat_identity(p: int, mu: int) -> Matrix:
    z, o = LaurentElement.zero(p), LaurentElement.const(p, 1)
    return tuple(tuple(o if i == j else z for j in range(mu)) for i in range(mu))


def mat_mul(a: Sequence[Sequence[LaurentElement]], b: Sequence[Sequence[LaurentElement]]) -> Matrix:
    p = a[0][0].p
    rows, inner, cols = len(a), len(b), len(b[0])
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            acc = LaurentElement.zero(p)
            for k in range(inner):
                if a[i][k] and b[k][j]:
                    acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def mat_add(a, b) -> Matrix:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_sub(a, b) -> Matrix:
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_map(fn, a) -> Matrix:
    return tuple(tuple(fn(x) for x in row) for row in a)


def mat_valuation(a, r) -> LogValue:
    return min((gauss_valuation(x, r) for row in a for x in row), default=INF)


def mat_is_zero(a) -> bool:
    return all(x.is_zero() for row in a for x in row)


def det(m: Sequence[Sequence[LaurentElement]]) -> LaurentElement:
    """Laplace expansion; ranks here are tiny."""
    n = len(m)
    if n == 1:
        return m[0][0]
    p = m[0][0].p
    acc = LaurentElement.zero(p)
    for j in range(n):
        if m[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * det(minor)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


# -- the module ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DiffModule:
    """A free module with connection on an annulus, given by the matrix G1 of d/dt."""

    p: int
    G1: Matrix
    interval: RInterval = field(default_factory=lambda: RInterval(*DEFAULT_INTERVAL))

    def __post_init__(self):
        g = tuple(tuple(LaurentElement.const(self.p, x) if not isinstance(x, LaurentElement) else x
                        for x in row) for row in self.G1)
        if not g or any(len(row) != len(g) for row in g):
            raise ValueError("G1 must be a nonempty square matrix")
        for row in g:
            for x in row:
                if x.p != self.p:
                    raise ValueError("prime mismatch in G1")
        object.__setattr__(self, "G1", g)

    @property
    def rank(self) -> int:
        return len(self.G1)

    @property
    def level(self) -> int:
        return max(x.level for row in self.G1 for x in row)

    @property
    def relative(self) -> bool:
        return any(x.has_z() for row in self.G1 for x in row)

    def __eq__(self, other):
        return (isinstance(other, DiffModule) and self.p == other.p
                and self.G1 == other.G1 and self.interval == other.interval)

    def __hash__(self):
        return hash((self.p, self.G1, self.interval))

    def __repr__(self):
        return f"DiffModule(p={self.p}, rank={self.rank}, G1={self.G1!r}, I=[{self.interval.r_lo}, {self.interval.r_hi}])"

    def with_interval(self, interval: RInterval) -> "DiffModule":
        return DiffModule(self.p, self.G1, interval)

    def blocks(self) -> List[List[int]]:
        """Strongly connected components of the nonzero pattern of G1.

        Ordered topologically they put G1 in block-triangular form, so each
        block is a subquotient; the generic radius of an extension is the
        smaller of the radii of its sub and quotient.
        """
        mu = self.rank
        reach = [[i == j or not self.G1[i][j].is_zero() for j in range(mu)] for i in range(mu)]
        for k in range(mu):
            for i in range(mu):
                if reach[i][k]:
                    for j in range(mu):
                        reach[i][j] = reach[i][j] or reach[k][j]
        groups = {}
        for i in range(mu):
            key = min(j for j in range(mu) if reach[i][j] and reach[j][i])
            groups.setdefault(key, []).append(i)
        return sorted(groups.values())

    def restrict(self, idx: Sequence[int]) -> "DiffModule":
        return DiffModule(self.p, tuple(tuple(self.G1[i][j] for j in idx) for i in idx), self.interval)

    def gauge(self, C: Matrix, C_inv: Matrix) -> "DiffModule":
        """Module in the basis e . C; the new matrix is C^-1 (C' + G1 C)."""
        dC = mat_map(lambda x: x.d_dt(), C)
        return DiffModule(self.p, mat_mul(C_inv, mat_add(dC, mat_mul(self.G1, C))), self.interval)


# -- constructors ----------------------------------------------------------------

def _interval(interval):
    if interval is None:
        return RInterval(*DEFAULT_INTERVAL)
    if isinstance(interval, RInterval):
        return interval
    return RInterval(*interval)


def trivial(p: int, mu: int = 1, interval=None) -> DiffModule:
    return DiffModule(p, mat_zero(p, mu), _interval(interval))


def rank1_twist(g: LaurentElement, interval=None) -> DiffModule:
    return DiffModule(g.p, ((g,),), _interval(interval))


def m_xi(p: int, xi, interval=None) -> DiffModule:
    """The twist d + xi dlog t."""
    return rank1_twist(LaurentElement.monomial(p, xi, -1), interval)


def dwork(p: int, interval=None, scale=1) -> DiffModule:
    """Rank one with G1 = scale * (zeta_p - 1) / t^2."""
    c = (Scalar.zeta(p, 1) - 1) * Scalar.coerce(p, scale)
    return rank1_twist(LaurentElement.monomial(p, c, -2), interval)


def log_nilpotent(p: int, interval=None) -> DiffModule:
    z, n = LaurentElement.zero(p), LaurentElement.monomial(p, 1, -1)
    return DiffModule(p, ((z, n), (z, z)), _interval(interval))


def direct_sum(*mods: DiffModule) -> DiffModule:
    p = mods[0].p
    if any(m.p != p for m in mods):
        raise ValueError("prime mismatch")
    interval = mods[0].interval
    for m in mods[1:]:
        lo = max(interval.r_lo, m.interval.r_lo)
        hi = min(interval.r_hi, m.interval.r_hi)
        interval = RInterval(lo, hi)
    mu = sum(m.rank for m in mods)
    rows = [[LaurentElement.zero(p)] * mu for _ in range(mu)]
    off = 0
    for m in mods:
        for i in range(m.rank):
            for j in range(m.rank):
                rows[off + i][off + j] = m.G1[i][j]
        off += m.rank
    return DiffModule(p, tuple(tuple(r) for r in rows), interval)


def tensor(a: DiffModule, b: DiffModule) -> DiffModule:
    """G = G_a (x) 1 + 1 (x) G_b on the basis e_i (x) f_k, ordered (i, k)."""
    if a.p != b.p:
        raise ValueError("prime mismatch")
    p, ma, mb = a.p, a.rank, b.rank
    zero = LaurentElement.zero(p)
    rows = []
    for i in range(ma):
        for k in range(mb):
            row = []
            for j in range(ma):
                for l in range(mb):
                    x = zero
                    if k == l:
                        x = x + a.G1[i][j]
                    if i == j:
                        x = x + b.G1[k][l]
                    row.append(x)
            rows.append(tuple(row))
    interval = RInterval(max(a.interval.r_lo, b.interval.r_lo), min(a.interval.r_hi, b.interval.r_hi))
    return DiffModule(p, tuple(rows), interval)


def frobenius_pullback(M: DiffModule) -> DiffModule:
    """Pull back along t -> t^p; the new matrix is p t^(p-1) G1(t^p)."""
    p = M.p
    chain = LaurentElement.monomial(p, p, p - 1)
    g = mat_map(lambda x: chain * x.substitute_t_power(p), M.G1)
    return DiffModule(p, g, M.interval.scaled(Fraction(1, p)))


# -- derivative powers -----------------------------------------------------------

@dataclass(frozen=True)
class DerivativePowers:
    """G[n] is the matrix of the n-th iterate; G[0] is the identity."""

    p: int
    G: Tuple[Matrix, ...]

    @property
    def N(self) -> int:
        return len(self.G) - 1

    def __getitem__(self, n: int) -> Matrix:
        return self.G[n]

    def w(self, n: int, r) -> LogValue:
        """Valuation of G_n / n! at r."""
        v = mat_valuation(self.G[n], r)
        return v if v == INF else v - vp_factorial(n, self.p)


def derive_powers(M: DiffModule, N: int) -> DerivativePowers:
    if N < 1:
        raise ValueError("N must be at least 1")
    G = [mat_identity(M.p, M.rank), M.G1]
    for _ in range(1, N):
        prev = G[-1]
        try:
            nxt = mat_add(mat_map(lambda x: x.d_dt(), prev), mat_mul(M.G1, prev))
        except WindowUnderflow as exc:
            raise WindowUnderflow(f"derivative power {len(G)} leaves the window: {exc}") from exc
        G.append(nxt)
    return DerivativePowers(M.p, tuple(G))


def default_N(p: int, mu: int = 1) -> int:
    return max(p**3, 4 * mu * p)


# -- cyclic vectors and the spectral norm ---------------------------------------

class CyclicVector(NamedTuple):
    v: Tuple[LaurentElement, ...]
    a: Tuple[LaurentFraction, ...]


class CyclicVectorError(RuntimeError):
    pass


def _iterate_coords(M: DiffModule, x):
    """Coordinates of d(e . x)."""
    mu = M.rank
    out = []
    for i in range(mu):
        acc = x[i].d_dt()
        for j in range(mu):
            if M.G1[i][j] and x[j]:
                acc = acc + M.G1[i][j] * x[j]
        out.append(acc)
    return out


def _candidates(M: DiffModule, seed: int, budget: int):
    p, mu = M.p, M.rank
    one, zero = LaurentElement.const(p, 1), LaurentElement.zero(p)
    for i in range(mu):
        yield [one if j == i else zero for j in range(mu)]
    yield [one] * mu
    rng = random.Random(seed)
    for _ in range(budget):
        yield [LaurentElement.monomial(p, rng.choice([1, 2, 3, -1, -2]), rng.randint(-2, 2)) for _ in range(mu)]


def cyclic_vector(M: DiffModule, seed: int = 0, budget: int = 64) -> CyclicVector:
    """A vector v with v, dv, ..., d^(mu-1) v independent, and d^mu v = sum a_i d^i v."""
    mu = M.rank
    for x in _candidates(M, seed, budget):
        cols = [x]
        for _ in range(mu):
            cols.append(_iterate_coords(M, cols[-1]))
        W = [[cols[j][i] for j in range(mu)] for i in range(mu)]
        D = det(W)
        if D.is_zero():
            continue
        a = []
        for k in range(mu):
            Wk = [[cols[mu][i] if j == k else cols[j][i] for j in range(mu)] for i in range(mu)]
            a.append(LaurentFraction(det(Wk), D))
        return CyclicVector(tuple(x), tuple(a))
    raise CyclicVectorError(f"no cyclic vector found after {budget} random trials")


@dataclass(frozen=True)
class NewtonData:
    points: Tuple[Tuple[int, LogValue], ...]
    least_slope: LogValue


def newton_data(a: Sequence[LaurentFraction], r) -> NewtonData:
    """Points (-i, v(a_i)) plus (-mu, 0); the first hull edge from the left has slope min v_i/(mu-i)."""
    mu = len(a)
    pts = [(-mu, Fraction(0))]
    slope: LogValue = INF
    for i, ai in enumerate(a):
        v = ai.valuation(r)
        pts.append((-i, v))
        if v != INF:
            slope = min(slope, Fraction(v) / (mu - i))
    return NewtonData(tuple(sorted(pts)), slope)


def newton_least_slope(a: Sequence[LaurentFraction], r) -> LogValue:
    return newton_data(a, r).least_slope


def spectral_norm_newton(a: Sequence[LaurentFraction], r) -> LogValue:
    """-log_p of max(|d|_L, |d|_sp) read off the operator's Newton polygon."""
    return min(-Fraction(r), newton_least_slope(a, r))


# -- generic radius ----------------------------------------------------------------

class RadiusEstimate(NamedTuple):
    f_hat: Fraction
    stabilized: bool
    route: str


def _window_max(vals, lo, hi):
    """max of vals[n] for lo < n <= hi; -inf if empty."""
    return max((vals[n] for n in range(int(lo) + 1, int(hi) + 1) if 1 <= n < len(vals)), default=-math.inf)


def growth_terms(P: DerivativePowers, r) -> List[LogValue]:
    """-w_n/n for n = 0..N (index 0 unused)."""
    r = Fraction(r)
    out: List[LogValue] = [-math.inf]
    for n in range(1, P.N + 1):
        w = P.w(n, r)
        out.append(-math.inf if w == INF else -w / n)
    return out


def raw_radius_estimate(P: DerivativePowers, r) -> Tuple[Fraction, bool]:
    """max(r, max_n -w_n/n) together with the window-equality stabilization flag."""
    r = Fraction(r)
    g = growth_terms(P, r)
    N = P.N
    f = max([r] + [x for x in g[1:] if x != -math.inf])
    hi_win = max(r, _window_max(g, N // 2, N))
    lo_win = max(r, _window_max(g, N // 4, N // 2))
    return Fraction(f), hi_win == lo_win


def tail_radius_estimate(P: DerivativePowers, r) -> Tuple[Fraction, bool]:
    """Like :func:`raw_radius_estimate` but maximizing only over n in (N/4, N].

    Early iterates can overshoot the limit badly (a single large entry of G1
    dominates -w_1), so the tail is the better proxy for the liminf.
    """
    r = Fraction(r)
    g = growth_terms(P, r)
    N = P.N
    hi_win = max(r, _window_max(g, N // 2, N))
    lo_win = max(r, _window_max(g, N // 4, N // 2))
    return Fraction(max(hi_win, lo_win)), hi_win == lo_win


def fekete_bound(P: DerivativePowers, r) -> Fraction:
    """Certified upper bound for f(r) from submultiplicativity of the iterates of d."""
    r, p = Fraction(r), P.p
    best: Optional[Fraction] = None
    running = Fraction(0)  # max over k <= n of -k r - w_k, with w_0 = 0
    for n in range(1, P.N + 1):
        w = P.w(n, r)
        if w != INF:
            running = max(running, -n * r - w)
        U = Fraction(digit_sum(n, p), (p - 1) * n) + r + running / n
        best = U if best is None or U < best else best
    return best


def _visible_route(M: DiffModule, r: Fraction, seed: int) -> Optional[Fraction]:
    try:
        cv = cyclic_vector(M, seed=seed)
    except CyclicVectorError:
        return None
    s = newton_least_slope(cv.a, r)
    if s != INF and s < -r:
        return Fraction(1, M.p - 1) - s
    return None


def _p_power_route(P: DerivativePowers, r: Fraction) -> Optional[Fraction]:
    p = P.p
    pw = []
    q = 1
    while q <= P.N:
        pw.append(q)
        q *= p
    if len(pw) < 3:
        return None
    xs = []
    for n in pw[-2:]:
        v = mat_valuation(P[n], r)
        if v == INF:
            return None
        xs.append(Fraction(1, p - 1) - Fraction(v) / n)
    if xs[0] == xs[1] and xs[0] > r:
        return xs[0]
    return None


def _ilog(n: int, p: int) -> int:
    k = 0
    while n >= p:
        n //= p
        k += 1
    return k


def _log_growth_route(P: DerivativePowers, r: Fraction, mu: int) -> bool:
    """|G_n/n!| rho^n growing at most like log^(mu-1) n, with shrinking excess: f = r.

    Unipotent (logarithmic) solutions make -w_n/n exceed r by about
    (mu-1) log_p(n)/n, which never stabilizes but tends to r.
    """
    N = P.N
    g = growth_terms(P, r)
    excess = {n: g[n] - r for n in range(N // 4 + 1, N + 1) if g[n] != -math.inf}
    if not excess:
        return False
    if any(n * e > (mu - 1) * _ilog(n, P.p) for n, e in excess.items()):
        return False
    hi = max((e for n, e in excess.items() if n > N // 2), default=-math.inf)
    lo = max((e for n, e in excess.items() if n <= N // 2), default=-math.inf)
    return hi < lo


def log_resolution(N: int, p: int, mu: int) -> Fraction:
    """Largest excess over r that logarithmic growth of rank mu can produce by n = N."""
    return Fraction((mu - 1) * _ilog(N, p), N)


def _estimate_block(M: DiffModule, P: DerivativePowers, r: Fraction, seed: int) -> RadiusEstimate:
    U = fekete_bound(P, r)
    vis = _visible_route(M, r, seed)
    if vis is not None and vis <= U:
        return RadiusEstimate(vis, True, "newton")
    tail, stab = tail_radius_estimate(P, r)
    # below p^2 iterates the p-power spikes of |n!| are invisible
    stab = stab and P.N >= P.p**2
    # an excess this small is indistinguishable from unipotent growth at this N
    res = log_resolution(P.N, P.p, M.rank)
    stab = stab and (tail == r or tail - r > res)
    geo = _p_power_route(P, r)
    if geo is not None and P.N >= P.p**2 and tail <= geo <= U and geo - r > res:
        return RadiusEstimate(geo, True, "p-power")
    if tail == r and stab:
        return RadiusEstimate(r, True, "robba")
    if M.rank > 1 and stab is False and P.N >= P.p**2 and _log_growth_route(P, r, M.rank):
        return RadiusEstimate(r, True, "log-robba")
    return RadiusEstimate(min(tail, U), stab, "tail")


def block_powers(M: DiffModule, N: Optional[int] = None) -> List[Tuple[DiffModule, DerivativePowers]]:
    """Diagonal blocks of the triangular splitting with their derivative powers, reusable across radii."""
    if N is None:
        N = default_N(M.p, M.rank)
    out = []
    for b in M.blocks():
        B = M.restrict(b)
        out.append((B, derive_powers(B, N)))
    return out


def generic_radius_estimate(M: DiffModule, r, N: Optional[int] = None, seed: int = 0,
                            powers=None) -> RadiusEstimate:
    """Estimate f(r) = -log_p R(E, p^-r) as the max over the diagonal blocks of :meth:`DiffModule.blocks`."""
    r = Fraction(r)
    if r not in M.interval:
        raise ValueError(f"r = {r} outside the module's interval")
    if powers is None:
        powers = block_powers(M, N)
    ests = [_estimate_block(B, P, r, seed) for B, P in powers]
    best = max(ests, key=lambda e: e.f_hat)
    stab = all(e.stabilized for e in ests)
    return RadiusEstimate(best.f_hat, stab, "+".join(e.route for e in ests))

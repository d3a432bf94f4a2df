"""Relative modules over (disk in z) x (annulus in t): specialization, unit factors, cut experiments.

The generic fiber is handled by treating z-polynomials with their sup norm
on the unit disk, which is multiplicative, so every absolute routine runs
unchanged on a relative module.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .diff_module import DiffModule, derive_powers, mat_map, mat_valuation
from .exponent import (
    DegenerateResolventError,
    ExponentCandidate,
    RobbaError,
    exponent_digits,
    exponent_in_sigma,
    nid_nld_check,
)
from .laurent import LaurentElement, RInterval, gauss_valuation, sup_valuation
from .padic_core import INF, LogValue, format_rational
from .radius_profile import DEFAULT_GRID, BreakVerdict, classify, sample_profile

RelModule = DiffModule


class UnitFactorError(ValueError):
    """No term of the element dominates on any closed subinterval."""


def specialize(E: DiffModule, a) -> DiffModule:
    """Substitute z = a in every entry."""
    return DiffModule(E.p, mat_map(lambda x: x.specialize_z(a), E.G1), E.interval)


def generic_fiber_valuation(E: DiffModule, r) -> LogValue:
    return mat_valuation(E.G1, Fraction(r))


# -- unit factorization ------------------------------------------------------------

def _zpoly(coeffs: dict, p: int) -> LaurentElement:
    return LaurentElement(p, {(0, nz): c for nz, c in coeffs.items()})


@dataclass(frozen=True)
class UnitCertificate:
    """a = a_{n0} t^{n0} (1 + f) with |f| < 1 on I' away from the zeros of a_{n0} mod p."""

    n0: int
    locus: LaurentElement          # the z-polynomial a_{n0}
    interval: RInterval            # I'
    margin: Tuple[Fraction, Fraction]  # dominance gap at the two ends of I'

    @property
    def locus_empty(self) -> bool:
        return not self.locus.has_z()

    def excludes(self, a) -> bool:
        """True when specializing at z = a shrinks the leading coefficient's norm."""
        if self.locus_empty:
            return False
        v = gauss_valuation(self.locus.specialize_z(a), 0)
        return v > gauss_valuation(self.locus, 0)

    def to_json(self):
        return {"n0": self.n0, "locus": self.locus.to_json()["terms"],
                "interval": self.interval.to_json(),
                "margin": [format_rational(m) for m in self.margin]}


def unit_factor(a: LaurentElement, I: RInterval) -> UnitCertificate:
    """Dominant t-exponent of a on a closed subinterval of I, per the case split A / B.

    A collects the exponents n <= 0 whose term attains the Gauss norm at the
    outer end r_hi; if A is empty, B collects the exponents attaining it at
    r_lo.  n0 = max A (or min B), and I' is the largest closed piece of I on
    which the n0-term beats every other term strictly.
    """
    if a.is_zero():
        raise UnitFactorError("zero has no unit factor")
    if not a.exact:
        raise UnitFactorError("element must have an exact window")
    p = a.p
    cols = {}
    for (nt, nz), c in a.terms.items():
        cols.setdefault(nt, {})[nz] = c
    v = {n: sup_valuation(c) for n, c in cols.items()}

    def line(n, r):
        return v[n] + n * r

    at_hi = min(line(n, I.r_hi) for n in v)
    A = [n for n in v if n <= 0 and line(n, I.r_hi) == at_hi]
    if A:
        n0 = max(A)
    else:
        at_lo = min(line(n, I.r_lo) for n in v)
        n0 = min(n for n in v if line(n, I.r_lo) == at_lo)

    # feasible r: (v_n - v_n0) + (n - n0) r > 0 for all n != n0
    lo, hi = I.r_lo, I.r_hi
    lo_open = hi_open = False
    for n in v:
        if n == n0:
            continue
        dv, dn = v[n] - v[n0], n - n0
        if dn == 0:
            continue
        c = -dv / dn
        if dn > 0:   # need r > c
            if c >= lo:
                lo, lo_open = c, True
        else:        # need r < c
            if c <= hi:
                hi, hi_open = c, True
    if lo > hi or (lo == hi and (lo_open or hi_open)):
        raise UnitFactorError(f"t^{n0} dominates nowhere on [{I.r_lo}, {I.r_hi}]")
    # close open ends at the midpoint toward the other end
    new_lo = (lo + hi) / 2 if lo_open else lo
    new_hi = (new_lo + hi) / 2 if hi_open else hi
    if lo_open and hi_open:
        new_lo, new_hi = lo + (hi - lo) / 4, hi - (hi - lo) / 4
    Ip = RInterval(new_lo, new_hi)

    def gap(r):
        others = [line(n, r) for n in v if n != n0]
        return (min(others) - line(n0, r)) if others else INF

    margin = (gap(Ip.r_lo), gap(Ip.r_hi))
    if not all(m > 0 for m in margin):
        raise UnitFactorError("dominance certificate failed")
    return UnitCertificate(n0, _zpoly(cols[n0], p), Ip, margin)


def unit_preserved_at(a: LaurentElement, cert: UnitCertificate, point) -> bool:
    """|a(point)|_rho = |a|_rho at both ends of I' (expected off the locus)."""
    sp = a.specialize_z(point)
    return all(gauss_valuation(sp, r) == gauss_valuation(a, r) for r in cert.interval.endpoints)


# -- cut experiments ------------------------------------------------------------------

def _verdict_key(v: BreakVerdict):
    return (v.kind, getattr(v, "b", None), getattr(v, "q", None))


@dataclass(frozen=True)
class PointResult:
    a: int
    verdict: BreakVerdict
    exponent: Optional[ExponentCandidate] = None
    in_sigma: Optional[bool] = None

    def to_json(self):
        d = {"a": self.a, "verdict": self.verdict.to_json()}
        if self.exponent is not None:
            d["exponent"] = self.exponent.to_json()
            d["in_sigma"] = self.in_sigma
        return d


@dataclass(frozen=True)
class CutReport:
    generic: PointResult
    points: Tuple[PointResult, ...]
    agreement: Tuple[int, ...]
    exceptions: Tuple[int, ...]
    loci: Tuple[UnitCertificate, ...]
    contained: bool
    refusals: int = 0
    exponent_note: Optional[str] = None

    def to_json(self):
        g = self.generic.to_json()
        g.pop("a", None)
        seen, loci = set(), []
        for c in self.loci:
            key = tuple(sorted((k, repr(v)) for k, v in c.locus.terms.items()))
            if c.locus_empty or key in seen:
                continue
            seen.add(key)
            loci.append(c.locus.to_json()["terms"])
        out = {"generic": g, "points": [pt.to_json() for pt in self.points],
               "agreement": list(self.agreement), "exceptions": list(self.exceptions),
               "loci": loci, "contained": self.contained}
        if self.exponent_note is not None:
            out["exponent"] = f"Inconclusive ({self.exponent_note})"
        return out


def _analyze(M: DiffModule, sigma, H, grid, N, r0) -> Tuple[BreakVerdict, Optional[ExponentCandidate], Optional[bool]]:
    verdict = classify(sample_profile(M, grid, N))
    if sigma is None:
        return verdict, None, None
    if not (verdict.kind == "Solvable" and verdict.b == 0):
        return verdict, None, None
    try:
        cand = exponent_digits(M, r0, H, check_robba=False)
    except (DegenerateResolventError, RobbaError):
        return verdict, None, None
    return verdict, cand, exponent_in_sigma(cand, sigma, H)


def residue_depends_on_z(E: DiffModule) -> bool:
    """True when some t^-1 coefficient of G1 involves z, so the exponent may move with the point."""
    return any(nt == -1 and nz > 0 for row in E.G1 for x in row for (nt, nz) in x.terms)


def _same(g: PointResult, x: PointResult, compare_exponents: bool = True) -> bool:
    if _verdict_key(g.verdict) != _verdict_key(x.verdict):
        return False
    if not compare_exponents:
        return True
    if g.exponent is None or x.exponent is None:
        return g.exponent is None and x.exponent is None
    return sorted(g.exponent.delta) == sorted(x.exponent.delta)


def collect_loci(E: DiffModule, N: int) -> Tuple[List[UnitCertificate], int]:
    """Unit certificates for every nonzero entry of G_n / n!, n <= N."""
    P = derive_powers(E, N)
    certs, refusals = [], 0
    for n in range(1, N + 1):
        # dividing by n! rescales every coefficient alike, so loci and I' are unchanged
        for row in P[n]:
            for x in row:
                if x.is_zero():
                    continue
                try:
                    certs.append(unit_factor(x, E.interval))
                except UnitFactorError:
                    refusals += 1
    return certs, refusals


def cut_experiment(E: DiffModule, points: Sequence[int], sigma: Optional[Sequence] = None, H: int = 2,
                   grid: Optional[Sequence] = None, N: Optional[int] = None, loci_N: int = 6,
                   r0=None) -> CutReport:
    points = [int(a) for a in points]
    if len(set(points)) != len(points):
        raise ValueError("points must be pairwise distinct")
    if sigma is not None and not nid_nld_check(sigma):
        raise ValueError("Sigma violates NID")
    grid = [r for r in (grid or DEFAULT_GRID) if Fraction(r) in E.interval]
    note = None
    if sigma is not None and residue_depends_on_z(E):
        # no generic exponent is defined once the residue varies; compare breaks only
        note = "residue depends on z"
    gv, gc, gs = _analyze(E, None if note else sigma, H, grid, N, r0)
    generic = PointResult(-1, gv, gc, gs)
    results = []
    for a in points:
        v, c, s = _analyze(specialize(E, a), sigma, H, grid, N, r0)
        results.append(PointResult(a, v, c, s))
    certs, refusals = collect_loci(E, loci_N)
    agree = tuple(x.a for x in results if _same(generic, x, note is None))
    exc = tuple(x.a for x in results if not _same(generic, x, note is None))
    contained = all(any(c.excludes(a) for c in certs) for a in exc)
    return CutReport(generic, tuple(results), agree, exc, tuple(certs), contained, refusals, note)

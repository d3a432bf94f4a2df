"""Sampling of f(r) = -log_p R(E, p^-r), shape checks and break classification."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from .diff_module import DiffModule, block_powers, default_N, generic_radius_estimate
from .padic_core import format_rational

DEFAULT_GRID = tuple(Fraction(1, 2**k) for k in range(1, 7))


@dataclass(frozen=True)
class Sample:
    r: Fraction
    f_hat: Fraction
    stabilized: bool
    route: str = ""


@dataclass(frozen=True)
class RadiusProfile:
    """Samples sorted by decreasing r, plus the exact line through the final piece."""

    samples: Tuple[Sample, ...]
    rank: int
    slope: Optional[Fraction] = None
    intercept: Optional[Fraction] = None
    fit_consistent: bool = False

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "f_hat", "stabilized", "route"])
        for s in self.samples:
            w.writerow([format_rational(s.r), format_rational(s.f_hat), str(s.stabilized).lower(), s.route])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "samples": [{"r": format_rational(s.r), "f_hat": format_rational(s.f_hat),
                         "stabilized": s.stabilized, "route": s.route} for s in self.samples],
            "fit": None if self.slope is None else {
                "slope": format_rational(self.slope), "intercept": format_rational(self.intercept),
                "consistent": self.fit_consistent},
        }


def _fit(samples: Sequence[Sample]):
    good = sorted((s for s in samples if s.stabilized), key=lambda s: s.r)[:3]
    if len(good) < 2:
        return None, None, False
    a, b = good[0], good[1]
    slope = (b.f_hat - a.f_hat) / (b.r - a.r)
    intercept = a.f_hat - slope * a.r
    ok = len(good) == 3 and good[2].f_hat == slope * good[2].r + intercept
    return slope, intercept, ok


def make_profile(samples: Sequence[Sample], rank: int) -> RadiusProfile:
    samples = tuple(sorted(samples, key=lambda s: s.r, reverse=True))
    slope, intercept, ok = _fit(samples)
    return RadiusProfile(samples, rank, slope, intercept, ok)


def grid_for(M: DiffModule, grid: Optional[Sequence] = None) -> List[Fraction]:
    """The given grid, or the default radii inside the interval (endpoints and midpoint if too few)."""
    if grid is None:
        grid = [r for r in DEFAULT_GRID if r in M.interval]
        if len(grid) < 3:
            lo, hi = M.interval.r_lo, M.interval.r_hi
            grid = [lo, (lo + hi) / 2, hi]
    return [Fraction(r) for r in grid]


def sample_profile(M: DiffModule, grid: Sequence = DEFAULT_GRID, N: Optional[int] = None,
                   seed: int = 0) -> RadiusProfile:
    grid = [Fraction(r) for r in grid]
    if len(grid) < 3:
        raise ValueError("need at least 3 grid points")
    for r in grid:
        if r not in M.interval:
            raise ValueError(f"grid point {r} outside [{M.interval.r_lo}, {M.interval.r_hi}]")
    if N is None:
        N = default_N(M.p, M.rank)
    powers = block_powers(M, N)
    samples = []
    for r in grid:
        e = generic_radius_estimate(M, r, N, seed=seed, powers=powers)
        samples.append(Sample(r, e.f_hat, e.stabilized, e.route))
    return make_profile(samples, M.rank)


# -- verdicts ------------------------------------------------------------------

@dataclass(frozen=True)
class Solvable:
    b: Fraction
    kind = "Solvable"

    def to_json(self):
        return {"kind": "Solvable", "b": format_rational(self.b)}

    def __str__(self):
        return f"Solvable{{{format_rational(self.b)}}}"


@dataclass(frozen=True)
class NotSolvable:
    q: Fraction
    kind = "NotSolvable"

    def to_json(self):
        return {"kind": "NotSolvable", "q": format_rational(self.q)}

    def __str__(self):
        return f"NotSolvable{{{format_rational(self.q)}}}"


@dataclass(frozen=True)
class Inconclusive:
    reason: str
    kind = "Inconclusive"

    def to_json(self):
        return {"kind": "Inconclusive", "reason": self.reason}

    def __str__(self):
        return f"Inconclusive ({self.reason})"


BreakVerdict = Union[Solvable, NotSolvable, Inconclusive]


def classify(profile: RadiusProfile) -> BreakVerdict:
    stab = [s for s in profile.samples if s.stabilized]
    if len(stab) < 3:
        return Inconclusive(f"only {len(stab)} stabilized samples")
    if not profile.fit_consistent:
        return Inconclusive("smallest samples do not lie on one affine piece")
    s, q = profile.slope, profile.intercept
    if q > 0:
        return NotSolvable(q)
    if q == 0 and s >= 1:
        return Solvable(s - 1)
    return Inconclusive(f"final piece f = {s} r + {q} is not of a solvable or non-solvable shape")


# -- shape check ---------------------------------------------------------------

@dataclass(frozen=True)
class ShapeReport:
    ok: bool
    violations: Tuple[str, ...] = field(default_factory=tuple)
    slopes: Tuple[Fraction, ...] = field(default_factory=tuple)

    def to_json(self):
        return {"ok": self.ok, "violations": list(self.violations),
                "slopes": [format_rational(s) for s in self.slopes]}


def check_shape(profile: RadiusProfile) -> ShapeReport:
    """Convexity, f >= r and slope integrality (in Z/mu!) of the sampled profile.

    Slopes are only tested for integrality along runs of at least three
    collinear samples: a chord across a break point need not have an
    admissible slope.  Unstabilized samples are reported as violations and
    left out of the convexity and slope tests.
    """
    allpts = sorted(profile.samples, key=lambda s: s.r)
    if len(allpts) < 3:
        return ShapeReport(False, ("fewer than 3 samples",))
    bad: List[str] = []
    for s in allpts:
        if not s.stabilized:
            bad.append(f"unstabilized estimate at r={s.r}")
        if s.f_hat < s.r:
            bad.append(f"f_hat < r at r={s.r}")
    # geometry is judged on the trustworthy samples only
    pts = [s for s in allpts if s.stabilized]
    slopes = [(b.f_hat - a.f_hat) / (b.r - a.r) for a, b in zip(pts, pts[1:])]
    for i in range(len(slopes) - 1):
        if slopes[i + 1] < slopes[i]:
            bad.append(f"convexity fails at r={pts[i + 1].r}")
    denom = math.factorial(profile.rank)
    for i in range(len(slopes) - 1):
        if slopes[i] == slopes[i + 1] and (slopes[i] * denom).denominator != 1:
            bad.append(f"slope {slopes[i]} near r={pts[i + 1].r} not in Z/{denom}")
    return ShapeReport(not bad, tuple(dict.fromkeys(bad)), tuple(slopes))

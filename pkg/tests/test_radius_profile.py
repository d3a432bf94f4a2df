import csv
import io
from fractions import Fraction

import pytest

from padic_annuli.diff_module import direct_sum, dwork, m_xi, rank1_twist, trivial
from padic_annuli.laurent import LaurentElement
from padic_annuli.radius_profile import (
    DEFAULT_GRID,
    Inconclusive,
    NotSolvable,
    Sample,
    Solvable,
    check_shape,
    classify,
    grid_for,
    make_profile,
    sample_profile,
)


def profile_from(fn, grid=DEFAULT_GRID, rank=1, stab=True):
    return make_profile([Sample(r, fn(r), stab, "synthetic") for r in grid], rank)


def test_default_grid():
    assert DEFAULT_GRID == tuple(Fraction(1, 2**k) for k in range(1, 7))


@pytest.mark.parametrize("fn,expected", [
    (lambda r: r, Solvable(Fraction(0))),
    (lambda r: 2 * r, Solvable(Fraction(1))),
    (lambda r: Fraction(5, 2) * r, Solvable(Fraction(3, 2))),
    (lambda r: r + Fraction(3, 2), NotSolvable(Fraction(3, 2))),
    # the final piece near r = 0 decides, not the large-r behaviour
    (lambda r: max(r, 3 * r - Fraction(1, 2)), Solvable(Fraction(0))),
])
def test_classify_synthetic_profiles(fn, expected):
    assert classify(profile_from(fn)) == expected


def test_classify_refuses_thin_or_bent_evidence():
    assert isinstance(classify(profile_from(lambda r: r, stab=False)), Inconclusive)
    bent = make_profile([Sample(Fraction(1, 8), Fraction(1, 4), True, "x"),
                         Sample(Fraction(1, 4), Fraction(1, 2), True, "x"),
                         Sample(Fraction(1, 2), Fraction(3, 2), True, "x")], 1)
    assert isinstance(classify(bent), Inconclusive)
    # a line through the origin with slope below 1 is not a radius profile
    assert isinstance(classify(profile_from(lambda r: r / 2)), Inconclusive)


def test_check_shape_detects_each_defect():
    assert check_shape(profile_from(lambda r: 2 * r)).ok
    concave = check_shape(profile_from(lambda r: min(2 * r, r + Fraction(1, 8))))
    assert any("convexity" in v for v in concave.violations)
    below = check_shape(profile_from(lambda r: r / 2))
    assert any("f_hat < r" in v for v in below.violations)
    # slope 1/3 is not in Z / 2! for rank 2
    odd = check_shape(profile_from(lambda r: r + Fraction(1, 3) * r + 1, rank=2))
    assert any("not in Z/2" in v for v in odd.violations)
    assert check_shape(profile_from(lambda r: Fraction(3, 2) * r, rank=2)).ok


def test_check_shape_reports_unstabilized_samples_but_skips_their_geometry():
    samples = [Sample(r, r, True, "x") for r in DEFAULT_GRID]
    samples[2] = Sample(samples[2].r, Fraction(10), False, "tail")
    rep = check_shape(make_profile(samples, 1))
    assert not rep.ok
    assert rep.violations == (f"unstabilized estimate at r={samples[2].r}",)


def test_csv_and_json_shapes():
    prof = sample_profile(dwork(3), DEFAULT_GRID, 27)
    rows = list(csv.reader(io.StringIO(prof.to_csv())))
    assert rows[0] == ["r", "f_hat", "stabilized", "route"]
    assert [Fraction(x[0]) for x in rows[1:]] == sorted(DEFAULT_GRID, reverse=True)
    assert all(Fraction(x[1]) == 2 * Fraction(x[0]) for x in rows[1:])
    js = prof.to_json()
    assert js["fit"] == {"slope": "2", "intercept": "0", "consistent": True}


@pytest.mark.parametrize("p", [3, 5])
def test_corpus_verdicts(p):
    assert classify(sample_profile(m_xi(p, Fraction(1, 2)), N=p**3)) == Solvable(Fraction(0))
    assert classify(sample_profile(m_xi(p, Fraction(1, p)), N=p**3)) == NotSolvable(1 + Fraction(1, p - 1))


def test_mixed_breaks_give_convex_profile_with_two_slopes():
    # trivial line plus a twist by 3/t^2 (break 1 only for small r)
    M = direct_sum(trivial(3), rank1_twist(LaurentElement.monomial(3, 3, -2)))
    prof = sample_profile(M, [Fraction(1, 2**k) for k in range(0, 7)], 27)
    rep = check_shape(prof)
    assert rep.ok
    assert set(rep.slopes) == {Fraction(1), Fraction(2)}


def test_grid_validation():
    with pytest.raises(ValueError):
        sample_profile(dwork(3), [Fraction(1, 2), Fraction(1, 4)])
    with pytest.raises(ValueError):
        sample_profile(dwork(3), [Fraction(1, 2), Fraction(1, 4), Fraction(3)])
    narrow = dwork(3).with_interval(type(dwork(3).interval)(Fraction(1, 2), Fraction(1)))
    assert grid_for(narrow) == [Fraction(1, 2), Fraction(3, 4), Fraction(1)]

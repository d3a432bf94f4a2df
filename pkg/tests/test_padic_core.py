from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from padic_annuli.padic_core import (
    INF,
    PadicApprox,
    PrecisionError,
    Prime,
    Scalar,
    centered_mod,
    centered_rep,
    digit_sum,
    eq_class_test,
    format_rational,
    norm_valuation,
    parse_rational,
    phi_degree,
    rational_reconstruction,
    valuation,
    vp,
    vp_factorial,
)

small_fracs = st.fractions(min_value=-50, max_value=50, max_denominator=30)


def test_prime_rejects_composites():
    assert int(Prime(5)) == 5
    for bad in (1, 4, 9, -3):
        with pytest.raises(ValueError):
            Prime(bad)


@given(st.integers(1, 10**6), st.integers(1, 10**4), st.sampled_from([2, 3, 5, 7]))
def test_vp_matches_multiplicity(n, d, p):
    expected = sympy.multiplicity(p, n) - sympy.multiplicity(p, d)
    assert vp(Fraction(n, d), p) == expected
    assert vp(0, p) == INF


@given(st.integers(0, 2000), st.sampled_from([2, 3, 5]))
def test_legendre_two_ways(n, p):
    brute = sum(sympy.multiplicity(p, k) for k in range(1, n + 1))
    assert vp_factorial(n, p) == brute
    assert (n - digit_sum(n, p)) == (p - 1) * brute


def test_rational_text_roundtrip():
    for s in ("0", "7", "-3/4", "22/6"):
        x = parse_rational(s)
        assert parse_rational(format_rational(x)) == x
    assert format_rational(Fraction(22, 6)) == "11/3"
    assert format_rational(INF) == "inf"


def test_phi_degree():
    assert [phi_degree(3, h) for h in range(4)] == [1, 2, 6, 18]
    assert phi_degree(5, 2) == 20


@pytest.mark.parametrize("p,h", [(2, 2), (3, 1), (3, 2), (5, 1)])
def test_zeta_minus_one_is_a_uniformizer(p, h):
    z = Scalar.zeta(p, h)
    pi = z - 1
    assert valuation(pi) == Fraction(1, phi_degree(p, h))
    assert norm_valuation(pi) == Fraction(1, phi_degree(p, h))
    one = Scalar.rational(p, 1)
    assert z ** (p**h) == one
    assert z ** (p ** (h - 1)) != one


def _cyclo(p, h, coeffs):
    d = phi_degree(p, h)
    return Scalar(p, [Fraction(c) for c in (coeffs + [0] * d)[:d]], h)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([(3, 1), (3, 2), (5, 1), (2, 3)]), st.lists(small_fracs, min_size=1, max_size=6))
def test_valuation_agrees_with_norm_oracle(ph, coeffs):
    p, h = ph
    x = _cyclo(p, h, coeffs)
    assert valuation(x) == norm_valuation(x)


@settings(max_examples=40, deadline=None)
@given(st.lists(small_fracs, min_size=2, max_size=2), st.lists(small_fracs, min_size=2, max_size=2))
def test_valuation_is_multiplicative_and_ultrametric(a, b):
    x, y = _cyclo(3, 1, a), _cyclo(3, 1, b)
    assert valuation(x * y) == valuation(x) + valuation(y)
    assert valuation(x + y) >= min(valuation(x), valuation(y))
    if not x.is_zero():
        assert x * x.inverse() == Scalar.rational(3, 1)


def test_conjugation_preserves_valuation():
    x = Scalar.zeta(3, 2) * 3 + Scalar.zeta(3, 2, 4) - 1
    for a in (1, 2, 4, 5, 7, 8):
        assert valuation(x.conjugate(a)) == valuation(x)


def test_level_lift_and_simplify():
    q = Scalar.rational(3, Fraction(5, 9))
    lifted = q.lift(2)
    assert lifted.level == 2 and lifted.simplify().level == 0
    assert lifted.to_fraction() == Fraction(5, 9)
    # zeta_9^3 is a primitive cube root of unity
    assert (Scalar.zeta(3, 2) ** 3).simplify() == Scalar.zeta(3, 1)


def test_residues_and_centered_reps():
    a = PadicApprox(Fraction(1, 2), 3, 4)
    assert a.residue(1) == 2 and a.residue(2) == 5
    assert centered_rep(a, 2) == -4
    assert centered_mod(5, 9) == -4 and centered_mod(4, 9) == 4
    with pytest.raises(PrecisionError):
        a.residue(5)
    with pytest.raises(ValueError):
        PadicApprox(Fraction(1, 3), 3, 2)


def test_eq_class_test_cases():
    P = lambda x: PadicApprox(Fraction(x), 3, 3)  # noqa: E731
    assert eq_class_test([P(0), P("1/2")], [P("1/2"), P(0)], 3)
    assert eq_class_test([P(0)], [P(1)], 3)
    assert not eq_class_test([P(0)], [P("1/2")], 2)
    assert not eq_class_test([P(0)], [P(0), P(0)], 1)


@pytest.mark.parametrize("x,p,k", [(Fraction(1, 2), 3, 20), (Fraction(-7, 5), 3, 20),
                                   (Fraction(9, 4), 3, 16), (Fraction(2, 7), 5, 12)])
def test_rational_reconstruction_removes_high_order_noise(x, p, k):
    noisy = x + Fraction(p ** (k + 2), 11)
    assert rational_reconstruction(noisy, p, k) == x

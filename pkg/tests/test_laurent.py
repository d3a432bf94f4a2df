from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from padic_annuli.laurent import (
    LaurentElement,
    LaurentFraction,
    RInterval,
    WindowUnderflow,
    gauss_valuation,
    sup_valuation,
)
from padic_annuli.padic_core import INF, Scalar, vp

P = 3
coeff = st.fractions(min_value=-30, max_value=30, max_denominator=12)
poly = st.dictionaries(st.integers(-4, 4), coeff, max_size=5)
radius = st.fractions(min_value=Fraction(1, 64), max_value=2, max_denominator=64)


def L(d, p=P):
    return LaurentElement(p, {(n, 0): c for n, c in d.items()})


def sympy_product_coeffs(a, b):
    """Coefficients of a*b by expanding with sympy (shifted to polynomials)."""
    t = sympy.Symbol("t")
    fa = sum(sympy.Rational(c.numerator, c.denominator) * t ** (n + 10) for n, c in a.items())
    fb = sum(sympy.Rational(c.numerator, c.denominator) * t ** (n + 10) for n, c in b.items())
    prod = sympy.Poly(sympy.expand(fa * fb), t) if a and b else None
    if prod is None:
        return {}
    out = {}
    for (k,), c in prod.terms():
        if c != 0:
            out[k - 20] = Fraction(int(c.p), int(c.q))
    return out


def oracle_gauss(d, r, p=P):
    vals = [vp(c, p) + n * r for n, c in d.items() if c]
    return min(vals) if vals else INF


@settings(max_examples=80, deadline=None)
@given(poly, poly)
def test_product_matches_sympy_expansion(a, b):
    prod = L(a) * L(b)
    expected = sympy_product_coeffs(a, b)
    assert {n: c.to_fraction() for (n, _), c in prod.terms.items()} == expected


@settings(max_examples=80, deadline=None)
@given(poly, poly, radius)
def test_gauss_norm_is_multiplicative(a, b, r):
    # Gauss's lemma, checked against coefficient-wise valuations of the sympy product
    assert oracle_gauss(sympy_product_coeffs(a, b), r) == oracle_gauss(a, r) + oracle_gauss(b, r)
    assert gauss_valuation(L(a) * L(b), r) == gauss_valuation(L(a), r) + gauss_valuation(L(b), r)


@settings(max_examples=60, deadline=None)
@given(poly, poly, radius)
def test_ultrametric_sum(a, b, r):
    assert gauss_valuation(L(a) + L(b), r) >= min(gauss_valuation(L(a), r), gauss_valuation(L(b), r))


@settings(max_examples=60, deadline=None)
@given(poly, poly)
def test_leibniz_rule(a, b):
    f, g = L(a), L(b)
    assert (f * g).d_dt() == f.d_dt() * g + f * g.d_dt()


def test_derivative_known_values():
    f = L({-2: Fraction(1, 2), 3: Fraction(5)})
    assert f.d_dt() == L({-3: Fraction(-1), 2: Fraction(15)})
    assert L({0: Fraction(7)}).d_dt().is_zero()


@settings(max_examples=60, deadline=None)
@given(poly, poly, st.integers(-3, 3))
def test_window_product_is_correct_where_known(a, b, lo):
    f = L(a).truncate(lo, None)
    g = L(b)
    prod = f * g
    exact = L(a) * g
    if any(b.values()):
        assert prod.lo is not None
    for (n, _), c in exact.terms.items():
        if prod.lo is None or n >= prod.lo:
            assert prod.terms.get((n, 0)) == c


def test_two_sided_unknowns_underflow():
    f = L({0: Fraction(1)}).truncate(0, None)
    g = L({0: Fraction(1)}).truncate(None, 0)
    with pytest.raises(WindowUnderflow):
        f * g
    with pytest.raises(WindowUnderflow):
        L({0: Fraction(1)}).truncate(2, 1)


def test_d_dt_shifts_window():
    f = L({1: Fraction(1), 2: Fraction(1)}).truncate(0, 5)
    assert f.d_dt().window == (-1, 4)


def test_monomial_inverse_and_refusal():
    m = LaurentElement.monomial(P, Fraction(3, 2), -2)
    assert m * m ** -1 == 1
    with pytest.raises(ValueError):
        L({0: Fraction(1), 1: Fraction(1)}) ** -1


def test_substitutions():
    f = L({-1: Fraction(2), 2: Fraction(1)})
    assert f.substitute_t_power(3) == L({-3: Fraction(2), 6: Fraction(1)})
    z = Scalar.zeta(P, 1)
    g = f.substitute_t_scale(z)
    assert g.terms[(2, 0)] == z**2 and g.terms[(-1, 0)] == z.inverse() * 2


def test_specialize_z_collects_powers():
    e = LaurentElement(P, {(1, 0): 1, (1, 2): 3, (-1, 1): Fraction(1, 2)})
    assert e.specialize_z(2) == L({1: Fraction(13), -1: Fraction(1)})
    assert e.specialize_z(0) == L({1: Fraction(1)})
    # sup over the unit disk of 1 + 3 z^2 is 1
    assert sup_valuation({0: Scalar.rational(P, 1), 2: Scalar.rational(P, 3)}) == 0


def test_gauss_valuation_examples():
    f = L({-2: Fraction(1), 0: Fraction(1, 3)})
    # max(rho^-2, 3) at rho = 3^-r: the constant wins at r = 1/4, t^-2 at r = 1
    assert gauss_valuation(f, Fraction(1, 4)) == -1
    assert gauss_valuation(f, 1) == -2
    assert gauss_valuation(LaurentElement.zero(P), 1) == INF
    frac = LaurentFraction(L({-1: Fraction(1)}), L({1: Fraction(9)}))
    assert frac.valuation(Fraction(1, 2)) == Fraction(-1, 2) - Fraction(5, 2)


@settings(max_examples=40, deadline=None)
@given(st.dictionaries(st.tuples(st.integers(-4, 4), st.integers(0, 2)), coeff, max_size=5),
       st.one_of(st.none(), st.integers(-5, 0)))
def test_json_roundtrip(terms, lo):
    f = LaurentElement(P, terms, lo, None)
    assert LaurentElement.from_json(P, f.to_json()) == f


def test_interval_basics():
    I = RInterval(Fraction(1, 4), Fraction(1))
    assert Fraction(1, 2) in I and Fraction(2) not in I
    assert I.scaled(3) == RInterval(Fraction(3, 4), Fraction(3))
    assert I.mid == Fraction(5, 8)
    with pytest.raises(ValueError):
        RInterval(Fraction(1), Fraction(1, 2))

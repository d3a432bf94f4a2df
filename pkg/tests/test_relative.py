from fractions import Fraction

import pytest

from padic_annuli.corpus import rel_const_exponent, rel_dwork
from padic_annuli.diff_module import DiffModule, derive_powers, generic_radius_estimate, m_xi, mat_valuation
from padic_annuli.laurent import LaurentElement, RInterval, gauss_valuation
from padic_annuli.padic_core import Scalar, vp_factorial
from padic_annuli.radius_profile import NotSolvable, Solvable
from padic_annuli.relative import (
    UnitFactorError,
    collect_loci,
    cut_experiment,
    specialize,
    unit_factor,
    unit_preserved_at,
)

P = 3
I = RInterval(Fraction(1, 4), Fraction(1))


def Z(terms):
    return LaurentElement(P, terms)


def test_unit_factor_monomial():
    cert = unit_factor(Z({(-2, 0): 1}), I)
    assert cert.n0 == -2 and cert.locus_empty and cert.interval == I


def test_unit_factor_z_plus_3t():
    cert = unit_factor(Z({(0, 1): 1, (1, 0): 3}), I)
    assert cert.n0 == 0 and cert.interval == I
    assert cert.locus == Z({(0, 1): 1})
    # v(3 t) - v(z) = 1 + r > 0 at both ends
    assert cert.margin == (Fraction(5, 4), Fraction(2))
    assert cert.excludes(0) and cert.excludes(3) and not cert.excludes(1) and not cert.excludes(2)


def test_unit_factor_inverse_plus_t():
    cert = unit_factor(Z({(-1, 0): 1, (1, 0): 1}), I)
    # the lines -r and r separate strictly for every r > 0
    assert cert.n0 == -1 and cert.interval == I and cert.locus_empty
    assert cert.margin == (Fraction(1, 2), Fraction(2))


def test_unit_factor_shrinks_when_a_crossing_is_inside():
    # lines -2r and -1 cross at r = 1/2, inside I
    cert = unit_factor(Z({(-2, 0): 1, (0, 0): Fraction(1, 3)}), I)
    assert cert.n0 == -2
    assert Fraction(1, 2) < cert.interval.r_lo <= cert.interval.r_hi == 1
    assert all(m > 0 for m in cert.margin)


def test_unit_factor_certificate_by_direct_valuations():
    a = Z({(0, 1): 1, (0, 0): 1, (1, 0): 3, (2, 1): 9, (-1, 0): 27})
    cert = unit_factor(a, I)
    lead = Z({(cert.n0, nz): c for (nt, nz), c in a.terms.items() if nt == cert.n0})
    rest = a - lead
    for r in cert.interval.endpoints:
        # |f|_sup < 1 with a = lead (1 + f)
        assert gauss_valuation(rest, r) > gauss_valuation(lead, r)


def test_unit_factor_refusals():
    with pytest.raises(UnitFactorError):
        unit_factor(Z({}), I)
    with pytest.raises(UnitFactorError):
        unit_factor(Z({(0, 0): 1}).truncate(-3, None), I)
    # 1 and 3/t tie at r = 1, which is the whole interval
    with pytest.raises(UnitFactorError):
        unit_factor(Z({(0, 0): 1, (-1, 0): 3, (1, 0): 1}), RInterval(Fraction(1), Fraction(1)))


def test_specialize_rel_dwork():
    E = rel_dwork(P)
    assert specialize(E, 0).G1 == ((Z({}),),)
    assert specialize(E, 2).G1 == ((Z({(-2, 0): (Scalar.zeta(P, 1) - 1) * 2}),),)


@pytest.mark.parametrize("E", [rel_dwork(P), rel_const_exponent(P)])
def test_specialization_never_lowers_valuations(E):
    G = derive_powers(E, 12)
    for a in (0, 1, 2, 4, 7):
        Ga = derive_powers(specialize(E, a), 12)
        for n in range(1, 13):
            for r in (Fraction(1, 2), Fraction(1, 8)):
                v_gen = mat_valuation(G[n], r) - vp_factorial(n, P)
                v_pt = mat_valuation(Ga[n], r) - vp_factorial(n, P)
                assert v_pt >= v_gen


def test_off_locus_points_keep_the_generic_radius():
    E = rel_dwork(P)
    certs, _ = collect_loci(E, 6)
    for a in (1, 2, 4, 7):
        assert not any(c.excludes(a) for c in certs)
        for c in certs:
            for r in c.interval.endpoints:
                assert (generic_radius_estimate(specialize(E, a), r, 27).f_hat
                        == generic_radius_estimate(E, r, 27).f_hat)


def test_unit_preserved_off_locus():
    a = Z({(0, 1): 1, (1, 0): 3})
    cert = unit_factor(a, I)
    assert unit_preserved_at(a, cert, 1) and not unit_preserved_at(a, cert, 3)


def test_cut_experiment_break():
    rep = cut_experiment(rel_dwork(P), [0, 1, 2, 4, 7])
    assert rep.generic.verdict == Solvable(Fraction(1))
    assert {pt.a: pt.verdict for pt in rep.points} == {
        0: Solvable(Fraction(0)), 1: Solvable(Fraction(1)), 2: Solvable(Fraction(1)),
        4: Solvable(Fraction(1)), 7: Solvable(Fraction(1))}
    assert rep.exceptions == (0,) and rep.agreement == (1, 2, 4, 7)
    assert rep.contained
    js = rep.to_json()
    assert js["exceptions"] == [0] and js["contained"] is True
    assert js["generic"] == {"verdict": {"kind": "Solvable", "b": "1"}}


def test_cut_experiment_exponent():
    rep = cut_experiment(rel_const_exponent(P), [0, 1, 2], sigma=[Fraction(1, 2)], H=2)
    assert rep.generic.verdict == Solvable(Fraction(0))
    assert rep.generic.exponent.delta == (5,)
    for pt in rep.points:
        assert pt.verdict == Solvable(Fraction(0)) and pt.exponent.delta == (5,) and pt.in_sigma
    assert rep.exceptions == ()


def test_constant_family_has_no_exceptions():
    rep = cut_experiment(m_xi(P, Fraction(1, 2)), [0, 1, 5])
    assert rep.exceptions == () and rep.contained
    assert all(pt.verdict == rep.generic.verdict for pt in rep.points)


def test_cut_experiment_validates_points():
    with pytest.raises(ValueError):
        cut_experiment(rel_dwork(P), [1, 1])
    with pytest.raises(ValueError):
        cut_experiment(rel_dwork(P), [1], sigma=[0, 1])


def test_moving_residue_leaves_the_exponent_inconclusive():
    # d e = (z/t) e specializes to M_a, whose exponent is the point itself
    E = DiffModule(P, ((Z({(-1, 1): 1}),),))
    rep = cut_experiment(E, [0, 1, 2], sigma=[0], H=2)
    assert rep.exponent_note == "residue depends on z"
    assert rep.generic.exponent is None
    assert [pt.exponent.delta for pt in rep.points] == [(0,), (1,), (2,)]
    assert rep.to_json()["exponent"].startswith("Inconclusive")
    # z(z-1)...(z-n+1) has sup norm 1 on the disk, so the generic fiber is not
    # solvable although every integer point is
    assert rep.generic.verdict == NotSolvable(Fraction(1, 2))
    assert rep.exceptions == (0, 1, 2)
    # the locus z(z-1)(z-2) of G_3 / 3! vanishes at every residue, so this is still contained
    assert rep.contained

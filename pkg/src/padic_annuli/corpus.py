"""Named example modules."""
from __future__ import annotations

from fractions import Fraction
from typing import Callable, Dict

from .diff_module import DiffModule, dwork, log_nilpotent, m_xi, rank1_twist
from .laurent import LaurentElement
from .padic_core import Scalar


def rel_dwork(p: int = 3) -> DiffModule:
    """G1 = z (zeta_p - 1) / t^2; break 1 off z = 0."""
    return rank1_twist(LaurentElement(p, {(-2, 1): Scalar.zeta(p, 1) - 1}))


def rel_const_exponent(p: int = 3, xi=Fraction(1, 2)) -> DiffModule:
    """G1 = xi / t + p z t; Robba with exponent xi at every point."""
    return rank1_twist(LaurentElement(p, {(-1, 0): xi, (1, 1): p}))


CORPUS: Dict[str, Callable[..., DiffModule]] = {
    "m_xi": lambda p=3, xi=Fraction(1, 2): m_xi(p, xi),
    "dwork": lambda p=3, xi=None: dwork(p),
    "log_nilpotent": lambda p=3, xi=None: log_nilpotent(p),
    "rel_dwork": lambda p=3, xi=None: rel_dwork(p),
    "rel_const_exponent": lambda p=3, xi=Fraction(1, 2): rel_const_exponent(p, xi),
}

DESCRIPTIONS = {
    "m_xi": "d + xi dlog t (default xi = 1/2)",
    "dwork": "(zeta_p - 1) / t^2, break 1",
    "log_nilpotent": "[[0, 1/t], [0, 0]], unipotent",
    "rel_dwork": "z (zeta_p - 1) / t^2 over the z-disk",
    "rel_const_exponent": "xi / t + p z t over the z-disk",
}


def build(name: str, p: int = 3, xi=None) -> DiffModule:
    if name not in CORPUS:
        raise KeyError(f"unknown corpus entry {name!r}; known: {', '.join(sorted(CORPUS))}")
    if xi is None:
        return CORPUS[name](p=p)
    return CORPUS[name](p=p, xi=Fraction(xi))

"""
Exact polynomials over QQ, backed by sympy.

Polynomials are ``sympy.Poly`` objects in the symbol ``s`` with domain QQ.
Scalars handed back to callers are ``fractions.Fraction`` so reports and
comparisons never depend on sympy number types.
"""
from fractions import Fraction
from functools import reduce
from operator import mul
from typing import Iterable

import sympy as sp
from sympy import QQ, Poly, Rational

from src.exceptions import InvalidInputError

S = sp.Symbol("s")


def as_fraction(value) -> Fraction:
    """Coerce an int, Fraction, sympy Rational or "p/q" string to a Fraction (floats are refused)."""
    if isinstance(value, float):
        raise InvalidInputError(f"refusing float {value!r} in exact arithmetic")
    if isinstance(value, sp.Rational):
        return Fraction(int(value.p), int(value.q))
    try:
        return Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise InvalidInputError(f"not a rational number: {value!r}") from e


def to_rational(value) -> Rational:
    value = as_fraction(value)
    return Rational(value.numerator, value.denominator)


def fraction_to_str(value) -> str:
    """Serialize as "p/q" (the denominator is always written)."""
    value = as_fraction(value)
    return f"{value.numerator}/{value.denominator}"


def qq_poly(coefficients: Iterable = ()) -> Poly:
    """Build a polynomial in s from ascending coefficients."""
    descending = [to_rational(c) for c in reversed(list(coefficients))]
    return Poly.from_list(descending or [0], S, domain=QQ)


def linear(shift) -> Poly:
    """s + shift."""
    return qq_poly([shift, 1])


def monomial(degree: int, coefficient=1) -> Poly:
    return qq_poly([0] * degree + [coefficient])


def product(factors: Iterable[Poly]) -> Poly:
    return reduce(mul, factors, qq_poly([1]))


def scaled(p: Poly, factor) -> Poly:
    return p * qq_poly([factor])


def ascending(p: Poly) -> list[Fraction]:
    """Coefficients in ascending degree; empty for the zero polynomial."""
    if p.is_zero:
        return []
    return [as_fraction(c) for c in reversed(p.all_coeffs())]


def is_even(p: Poly) -> bool:
    """Only even powers of s appear."""
    return all(c == 0 for c in ascending(p)[1::2])


def evaluate(p: Poly, x) -> Fraction:
    return as_fraction(p.eval(to_rational(x)))


def integrate(p: Poly, a, b) -> Fraction:
    """Exact integral of p over [a, b]."""
    big = p.integrate()
    return evaluate(big, b) - evaluate(big, a)


def integer_form(p: Poly) -> Poly:
    """The primitive integer multiple of p with positive leading coefficient, kept over QQ."""
    if p.is_zero:
        return p
    _, cleared = p.clear_denoms(convert=True)
    _, primitive = cleared.primitive()
    if primitive.LC() < 0:
        primitive = -primitive
    return primitive.set_domain(QQ)


def coefficient_strings(p: Poly) -> list[str]:
    return [fraction_to_str(c) for c in ascending(p)]


def reduce_fraction(numerator: Poly, denominator: Poly) -> tuple[Poly, Poly]:
    """
    Cancel common factors of numerator/denominator.

    Args:
        numerator: Polynomial over QQ
        denominator: Nonzero polynomial over QQ

    Returns:
        (numerator, denominator) with the same ratio, the denominator
        primitive over the integers with positive leading coefficient
    """
    if denominator.is_zero:
        raise ZeroDivisionError("rational function with zero denominator")
    common = numerator.gcd(denominator)
    if common.degree() > 0:
        numerator = numerator.exquo(common)
        denominator = denominator.exquo(common)
    target = integer_form(denominator)
    factor = as_fraction(target.LC()) / as_fraction(denominator.LC())
    return scaled(numerator, factor), target

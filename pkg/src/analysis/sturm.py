"""
Exact real-root counting and isolation over QQ.

A thin layer over sympy's Sturm sequences and real-root isolation. Counting
runs on the squarefree part, so repeated roots are counted once; intervals
are closed and come back as Fraction pairs.
"""
import logging
from fractions import Fraction

from sympy import Poly, Rational
from sympy.polys.polyerrors import BasePolynomialError

from src.analysis.rational import as_fraction, to_rational
from src.exceptions import InvalidInputError

logger = logging.getLogger(__name__)

Interval = tuple[Fraction, Fraction]


def _bound(x):
    return None if x is None else to_rational(x)


def _interval(pair) -> Interval:
    a, b = pair
    return as_fraction(a), as_fraction(b)


class SturmChain:
    """The Sturm sequence of a nonzero polynomial, with root counting on [a, b]."""

    def __init__(self, p: Poly):
        if p.is_zero:
            raise InvalidInputError("Sturm sequence of the zero polynomial")
        self.polynomial = p
        self._reduced = p.sqf_part()
        self.chain = self._reduced.sturm()
        logger.debug(f"Sturm chain of degree {p.degree()}: {len(self.chain)} elements")

    @property
    def squarefree(self) -> bool:
        """True iff gcd(p, p') is constant."""
        return self._reduced.degree() == self.polynomial.degree()

    def count_roots(self, a=None, b=None) -> int:
        """Distinct real roots in [a, b]; None stands for -inf / +inf."""
        return int(self._reduced.count_roots(_bound(a), _bound(b)))

    def distinct_real_roots(self) -> int:
        return self.count_roots()

    def isolate(self) -> list[Interval]:
        """Disjoint closed intervals, one per distinct real root, in increasing order."""
        found = [_interval(pair) for pair, _ in self._reduced.intervals()]
        return sorted(found)

    def refine(self, a, b, bits: int) -> Interval:
        """Shrink [a, b], which must hold exactly one root, to width at most 2^-bits."""
        if self.count_roots(a, b) != 1:
            raise InvalidInputError(f"[{a}, {b}] does not isolate a single root")
        try:
            pair = self._reduced.refine_root(to_rational(a), to_rational(b), eps=Rational(1, 2**bits))
        except BasePolynomialError as e:
            raise InvalidInputError(f"cannot refine [{a}, {b}]: {e}") from e
        return _interval(pair)

    def largest_root_in(self, a, b, bits: int) -> Interval:
        """Bracket (of width at most 2^-bits) the largest root in [a, b]."""
        found = self._reduced.intervals(eps=Rational(1, 2**bits), inf=to_rational(a), sup=to_rational(b))
        if not found:
            raise InvalidInputError(f"no root in [{a}, {b}]")
        return max(_interval(pair) for pair, _ in found)


def is_squarefree(p: Poly) -> bool:
    return SturmChain(p).squarefree


def sturm_distinct_real_roots(p: Poly) -> tuple[int, list[Interval]]:
    """Number of distinct real roots of p and isolating intervals for them."""
    chain = SturmChain(p)
    intervals = chain.isolate()
    count = chain.distinct_real_roots()
    if count != len(intervals):
        raise InvalidInputError(f"isolation found {len(intervals)} roots, Sturm count is {count}")
    return count, intervals

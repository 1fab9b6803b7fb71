"""
Density descriptors g on [0, 1] for the Gerow-Robson model sampler.

Two families: the power family g(s) = c s^p, sampled by inverse CDF, and
arbitrary polynomial densities, sampled by rejection against their maximum.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial

from src.exceptions import InvalidDensityError
from src.services.rng import SeededGenerator

logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-9


class Density(ABC):
    """A probability density on [0, 1]."""

    @abstractmethod
    def pdf(self, s):
        """Evaluate g at s (scalar or array)."""

    @abstractmethod
    def sample(self, count: int, gen: SeededGenerator) -> np.ndarray:
        """Draw ``count`` values distributed with density g."""

    @abstractmethod
    def describe(self) -> str:
        """The flag form accepted by ``parse_density``."""


@dataclass(frozen=True)
class PowerDensity(Density):
    """g(s) = c s^p; a density exactly when c = p + 1."""

    exponent: float
    coefficient: float | None = None

    def __post_init__(self):
        if self.exponent <= -1:
            raise InvalidDensityError(f"s^{self.exponent} is not integrable on [0, 1]")
        c = self.exponent + 1 if self.coefficient is None else self.coefficient
        object.__setattr__(self, "coefficient", float(c))
        integral = c / (self.exponent + 1)
        if abs(integral - 1) > NORMALIZATION_TOL:
            raise InvalidDensityError(f"{c} s^{self.exponent} integrates to {integral}, not 1")

    def pdf(self, s):
        return self.coefficient * np.power(s, self.exponent)

    def sample(self, count: int, gen: SeededGenerator) -> np.ndarray:
        u = gen.unit_uniforms(count)
        return np.power(u, 1.0 / (self.exponent + 1))

    def describe(self) -> str:
        return f"power:{self.exponent:g}"


@dataclass(frozen=True)
class PolynomialDensity(Density):
    """g(s) = c0 + c1 s + c2 s^2 + ... on [0, 1]."""

    coefficients: tuple[float, ...]

    def __post_init__(self):
        coefficients = tuple(float(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coefficients)
        if not coefficients:
            raise InvalidDensityError("polynomial density needs at least one coefficient")
        poly = self.polynomial
        integral = poly.integ()(1.0) - poly.integ()(0.0)
        if abs(integral - 1) > NORMALIZATION_TOL:
            raise InvalidDensityError(f"polynomial integrates to {integral}, not 1")
        low, high = _extrema_on_unit_interval(poly)
        if low < -NORMALIZATION_TOL:
            raise InvalidDensityError(f"polynomial takes the negative value {low} on [0, 1]")
        object.__setattr__(self, "_sup", high)

    @property
    def polynomial(self) -> Polynomial:
        return Polynomial(self.coefficients)

    def pdf(self, s):
        return self.polynomial(s)

    def sample(self, count: int, gen: SeededGenerator) -> np.ndarray:
        poly = self.polynomial
        accepted = np.empty(0)
        attempts = 0
        while accepted.size < count:
            batch = max(2 * (count - accepted.size), 64)
            s = gen.unit_uniforms(batch)
            keep = gen.unit_uniforms(batch) * self._sup <= poly(s)
            accepted = np.concatenate([accepted, s[keep]])
            attempts += batch
        logger.debug(f"Polynomial density: accepted {count} of {attempts} proposals")
        return accepted[:count]

    def describe(self) -> str:
        return "poly:" + ",".join(f"{c:g}" for c in self.coefficients)


def _extrema_on_unit_interval(poly: Polynomial) -> tuple[float, float]:
    points = [0.0, 1.0]
    if poly.degree() >= 2:
        points += [r.real for r in poly.deriv().roots() if abs(r.imag) < 1e-12 and 0 <= r.real <= 1]
    values = poly(np.asarray(points))
    return float(values.min()), float(values.max())


def robson_gerow_density(n: int) -> PowerDensity:
    """g_n(s) = n s^(n-1), the density behind f_n(s) = C_n s."""
    return PowerDensity(exponent=n - 1)


def parse_density(text: str) -> Density:
    """
    Parse ``power:P`` (g(s) = (P+1) s^P) or ``poly:c0,c1,...``.
    """
    kind, _, body = text.partition(":")
    try:
        if kind == "power":
            return PowerDensity(exponent=float(body))
        if kind == "poly":
            return PolynomialDensity(tuple(float(c) for c in body.split(",")))
    except ValueError as e:
        if isinstance(e, InvalidDensityError):
            raise
        raise InvalidDensityError(f"cannot parse density {text!r}: {e}") from e
    raise InvalidDensityError(f"unknown density kind {kind!r}; use power:P or poly:c0,c1,...")


def polynomial_from_flag(text: str) -> Sequence[float]:
    """Coefficients of a ``poly:c0,c1,...`` flag (no density checks)."""
    kind, _, body = text.partition(":")
    if kind != "poly" or not body:
        raise ValueError(f"expected poly:c0,c1,..., got {text!r}")
    return tuple(float(c) for c in body.split(","))

"""
Sampler configuration, the sampler family and seeded sample batches.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from src.exceptions import ConfigurationError, InvalidDensityError, InvalidInputError
from src.geometry.polytope import BALANCE_TOL_PER_COORD, BOX_TOL, BalancedVector
from src.services.densities import Density, robson_gerow_density
from src.services.redistribution import (
    even_degenerate_rows,
    even_redistributed_rows,
    odd_degenerate_rows,
    odd_redistributed_rows,
)
from src.services.rng import SeededGenerator

logger = logging.getLogger(__name__)

METHODS = ("auto", "degenerate", "redistributed", "symmetrized", "gr_model")
METHOD_ALIASES = {"gr": "gr_model"}


@dataclass(frozen=True)
class SamplerConfig:
    """Which sampler to run, for which n, from which seed."""

    n: int
    method: str = "auto"
    seed: int = 0
    g_density: Density | None = None

    def __post_init__(self):
        method = METHOD_ALIASES.get(self.method, self.method)
        object.__setattr__(self, "method", method)
        if method not in METHODS:
            raise ConfigurationError(f"unknown method {self.method!r}; choose one of {', '.join(METHODS)}")
        if self.n < 2:
            raise ConfigurationError(f"n must be >= 2, got {self.n}")
        if method in ("redistributed", "symmetrized") and self.n < 4:
            raise ConfigurationError(f"{method} needs n >= 4 (pair redistribution needs m >= 2), got n={self.n}")
        if method == "gr_model" and self.n < 3:
            raise ConfigurationError(f"gr_model needs n >= 3, got n={self.n}")
        if self.g_density is not None and self.resolved_method != "gr_model":
            raise ConfigurationError("a density g is only used by the gr_model method")

    @property
    def resolved_method(self) -> str:
        if self.method != "auto":
            return self.method
        if self.n == 2:
            return "degenerate"
        if self.n == 3:
            return "gr_model"
        return "symmetrized"

    @property
    def density(self) -> Density:
        """The g used by gr_model; g_n(s) = n s^(n-1) when none was given."""
        return self.g_density if self.g_density is not None else robson_gerow_density(self.n)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "method": self.method,
            "resolved_method": self.resolved_method,
            "seed": self.seed,
            "g": self.g_density.describe() if self.g_density is not None else None,
        }


class BalancedSampler(ABC):
    """Draws random balanced samples of a fixed size n."""

    def __init__(self, n: int):
        self.n = n

    @abstractmethod
    def rows(self, count: int, gen: SeededGenerator) -> np.ndarray:
        """Draw ``count`` samples as a (count, n) array."""

    def sample(self, gen: SeededGenerator) -> BalancedVector:
        return BalancedVector(tuple(self.rows(1, gen)[0]))


class DegenerateSampler(BalancedSampler):
    """Antithetic mirror construction; supported on a lower-dimensional subset."""

    def rows(self, count: int, gen: SeededGenerator) -> np.ndarray:
        if self.n % 2 == 0:
            return even_degenerate_rows(self.n // 2, count, gen)
        return odd_degenerate_rows((self.n - 1) // 2, count, gen)


class RedistributedSampler(BalancedSampler):
    def rows(self, count: int, gen: SeededGenerator) -> np.ndarray:
        if self.n % 2 == 0:
            return even_redistributed_rows(self.n // 2, count, gen)
        return odd_redistributed_rows((self.n - 1) // 2, count, gen)


class SymmetrizedSampler(BalancedSampler):
    """Redistributed samples with an independent uniform permutation per row."""

    def __init__(self, n: int):
        super().__init__(n)
        self._inner = RedistributedSampler(n)

    def rows(self, count: int, gen: SeededGenerator) -> np.ndarray:
        return gen.permute_rows(self._inner.rows(count, gen))


class GrModelSampler(BalancedSampler):
    """
    Max-norm model: Y_1 ~ g, the rest of the vector uniform on the slice
    {1 + z_2 + ... + z_n = 0, z in [-1, 1]}, then a random sign and permutation.
    """

    def __init__(self, n: int, density: Density):
        super().__init__(n)
        self.density = density

    def slice_rows(self, count: int, gen: SeededGenerator) -> np.ndarray:
        """Uniform points (z_2, ..., z_n) of the slice, by rejection on z_2."""
        accepted = np.empty((0, self.n - 1))
        attempts = 0
        while accepted.shape[0] < count:
            batch = max(4 * (count - accepted.shape[0]), 64)
            z = gen.uniforms((batch, self.n - 2))
            total = z.sum(axis=1)
            keep = (total >= -2.0) & (total <= 0.0)
            z2 = -1.0 - total[keep]
            accepted = np.vstack([accepted, np.column_stack([z2, z[keep]])])
            attempts += batch
        logger.debug(f"GR slice n={self.n}: accepted {count} of {attempts} proposals")
        return accepted[:count]

    def rows(self, count: int, gen: SeededGenerator) -> np.ndarray:
        scale = self.density.sample(count, gen)
        z = self.slice_rows(count, gen)
        sign = gen.signs((count, 1))
        y = sign * scale[:, None] * np.hstack([np.ones((count, 1)), z])
        return gen.permute_rows(y)


def sample_gr_model(n: int, g: Density, gen: SeededGenerator) -> BalancedVector:
    if n < 3:
        raise InvalidInputError(f"gr model needs n >= 3, got {n}")
    if not isinstance(g, Density):
        raise InvalidDensityError(f"not a density descriptor: {g!r}")
    return GrModelSampler(n, g).sample(gen)


def create_sampler(config: SamplerConfig) -> BalancedSampler:
    method = config.resolved_method
    if method == "degenerate":
        return DegenerateSampler(config.n)
    if method == "redistributed":
        return RedistributedSampler(config.n)
    if method == "symmetrized":
        return SymmetrizedSampler(config.n)
    return GrModelSampler(config.n, config.density)


@dataclass
class SampleBatch:
    """
    A (count, n) array of balanced samples.

    Batches read back from files may skip validation so that unbalanced rows
    can be reported rather than rejected.
    """

    values: np.ndarray
    config: SamplerConfig | None = None
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        self.values = np.array(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[1] < 2:
            raise InvalidInputError(f"expected a (count, n >= 2) array, got shape {self.values.shape}")
        self.values.setflags(write=False)
        if self.validate and self.count:
            worst_sum = float(np.abs(self.values.sum(axis=1)).max())
            if worst_sum > BALANCE_TOL_PER_COORD * self.n:
                raise InvalidInputError(f"batch row sums reach {worst_sum:.3e}")
            if float(np.abs(self.values).max()) > 1 + BOX_TOL:
                raise InvalidInputError("batch coordinate outside [-1, 1]")

    @property
    def count(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def vectors(self) -> list[BalancedVector]:
        return [BalancedVector(tuple(row)) for row in self.values]

    def column(self, coordinate: int) -> np.ndarray:
        if not 0 <= coordinate < self.n:
            raise InvalidInputError(f"coordinate {coordinate} outside 0..{self.n - 1}")
        return self.values[:, coordinate]


def sample_rows(config: SamplerConfig, count: int, gen: SeededGenerator) -> np.ndarray:
    if count < 0:
        raise InvalidInputError(f"count must be >= 0, got {count}")
    if count == 0:
        return np.empty((0, config.n))
    return create_sampler(config).rows(count, gen)


def draw_batch(config: SamplerConfig, count: int) -> SampleBatch:
    """
    Draw ``count`` samples from a fresh generator seeded with ``config.seed``.

    Args:
        config: Validated sampler configuration
        count: Number of rows

    Returns:
        SampleBatch holding a (count, n) array and the config it came from
    """
    gen = SeededGenerator(config.seed)
    logger.info(f"Drawing {count} samples: n={config.n}, method={config.resolved_method}, seed={config.seed}")
    return SampleBatch(values=sample_rows(config, count, gen), config=config)

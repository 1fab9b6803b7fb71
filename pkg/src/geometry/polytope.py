"""
The polytope M(n) = {x in [-1, 1]^n : sum(x) = 0} and its (n-1)-dimensional model.
"""
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from src.exceptions import InvalidDimensionError, InvalidInputError

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12
BALANCE_TOL_PER_COORD = 1e-12
BOX_TOL = 1e-15


def _require_dimension(n: int, minimum: int = 2) -> None:
    if n < minimum:
        raise InvalidDimensionError(f"dimension must be >= {minimum}, got {n}")


@dataclass(frozen=True)
class BalancedVector:
    """A point of M(n): n coordinates in [-1, 1] summing to zero."""

    coords: tuple[float, ...]

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        object.__setattr__(self, "coords", coords)
        _require_dimension(len(coords))
        total = abs(sum(coords))
        if total > BALANCE_TOL_PER_COORD * len(coords):
            raise InvalidInputError(f"coordinates sum to {total:.3e}, not 0")
        if max(abs(c) for c in coords) > 1 + BOX_TOL:
            raise InvalidInputError("coordinate outside [-1, 1]")

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def sup_norm(self) -> float:
        return max(abs(c) for c in self.coords)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)

    def permuted(self, sigma: Sequence[int]) -> "BalancedVector":
        """Return (w[sigma[0]], ..., w[sigma[n-1]])."""
        if sorted(sigma) != list(range(self.n)):
            raise InvalidInputError(f"not a permutation of 0..{self.n - 1}: {list(sigma)}")
        return BalancedVector(tuple(self.coords[i] for i in sigma))

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, k: int) -> float:
        return self.coords[k]


@dataclass(frozen=True)
class PolytopeModel:
    """n unit vectors in R^(n-1) with pairwise inner product -1/(n-1)."""

    n: int
    simplex_vectors: np.ndarray

    def __post_init__(self):
        self.simplex_vectors.setflags(write=False)


def contains(n: int, x: Sequence[float], tol: float = DEFAULT_TOL) -> bool:
    """True iff x lies in M(n) up to tol on both the balance and the box."""
    _require_dimension(n)
    if tol < 0:
        raise InvalidInputError(f"tolerance must be >= 0, got {tol}")
    if len(x) != n:
        raise InvalidInputError(f"expected {n} coordinates, got {len(x)}")
    if abs(sum(x)) > tol:
        return False
    return all(abs(c) <= 1 + tol for c in x)


def build_simplex_model(n: int) -> PolytopeModel:
    """
    Factor the Gram matrix G = n/(n-1) I - 1/(n-1) J.

    G has rank n-1 and G 1 = 0, so the first n-1 vectors come from the Cholesky
    factor of the leading block and the last one is minus their sum.
    """
    _require_dimension(n)
    k = n - 1
    block = np.full((k, k), -1.0 / k) + np.eye(k) * (n / k)
    lower = np.linalg.cholesky(block)
    vectors = np.vstack([lower, -lower.sum(axis=0)])
    logger.debug(f"Built simplex model for n={n}")
    return PolytopeModel(n=n, simplex_vectors=vectors)


def embed(model: PolytopeModel, x: BalancedVector) -> np.ndarray:
    """Return the unique v in R^(n-1) with (v, u_k) = x_k for every k."""
    if model.n != x.n:
        raise InvalidInputError(f"model is for n={model.n}, vector has n={x.n}")
    v, *_ = np.linalg.lstsq(model.simplex_vectors, x.as_array(), rcond=None)
    return v


def coordinates(model: PolytopeModel, v: Sequence[float]) -> tuple[float, ...]:
    """Inverse of embed: x_k = (v, u_k)."""
    v = np.asarray(v, dtype=float)
    if v.shape != (model.n - 1,):
        raise InvalidInputError(f"expected a point of R^{model.n - 1}")
    return tuple(float(c) for c in model.simplex_vectors @ v)

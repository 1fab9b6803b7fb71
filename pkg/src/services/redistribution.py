"""
Pair redistribution and the even/odd balanced constructions built on it.

Every ``*_rows`` function draws ``count`` vectors at once and returns a
(count, n) array; the single-vector operations are thin wrappers over them.
Balance is exact by construction (telescoping sums); nothing is projected.
"""
import logging
from typing import Sequence

import numpy as np

from src.exceptions import InvalidDimensionError, InvalidInputError, NotInvertibleError
from src.geometry.orderings import balanced_greedy_order, balanced_order_odd
from src.geometry.polytope import BOX_TOL, BalancedVector
from src.services.rng import SeededGenerator

logger = logging.getLogger(__name__)


def _spread(s: np.ndarray, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    half_width = (1.0 - np.abs(s) / 2.0) * t
    return s / 2.0 + half_width, s / 2.0 - half_width


def redistribute_pair(x1: float, x2: float, t: float) -> tuple[float, float]:
    """
    Move (x1, x2) along the chord through it perpendicular to the diagonal.

    With S = x1 + x2 the result is S/2 +- (1 - |S|/2) t; the sum is preserved and
    both coordinates stay in [-1, 1].
    """
    for name, value in (("x1", x1), ("x2", x2), ("t", t)):
        if abs(value) > 1:
            raise InvalidInputError(f"{name}={value} outside [-1, 1]")
    y1, y2 = _spread(np.float64(x1 + x2), np.float64(t))
    return float(y1), float(y2)


def _interleave(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    rows, m = first.shape
    out = np.empty((rows, 2 * m))
    out[:, 0::2] = first
    out[:, 1::2] = second
    return out


def forward_even_rows(x: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Apply S_k = x_k - x_(k+1) (cyclic) and redistribute each S_k with t_k."""
    s = x - np.roll(x, -1, axis=1)
    return _interleave(*_spread(s, t))


def forward_odd_rows(x: np.ndarray, t: np.ndarray, b: np.ndarray) -> np.ndarray:
    """The size 2m+1 construction; b holds one sign per row."""
    b = np.asarray(b, dtype=float).reshape(-1, 1)
    xm = x[:, -1:]
    s = np.empty_like(x)
    s[:, :-2] = x[:, :-2] - x[:, 1:-1]
    s[:, -2:-1] = x[:, -2:-1] - 0.5 * (xm + b)
    s[:, -1:] = -0.5 * (xm - b) - x[:, :1]
    return np.hstack([_interleave(*_spread(s, t)), xm])


def even_degenerate_rows(m: int, count: int, gen: SeededGenerator) -> np.ndarray:
    if m < 1:
        raise InvalidDimensionError(f"degenerate even sampler needs m >= 1, got {m}")
    x = gen.uniforms((count, m))
    return np.hstack([x, -x])


def odd_degenerate_rows(m: int, count: int, gen: SeededGenerator) -> np.ndarray:
    if m < 1:
        raise InvalidDimensionError(f"degenerate odd sampler needs m >= 1, got {m}")
    x = gen.uniforms((count, m))
    b = gen.signs((count, 1))
    xm = x[:, -1:]
    return np.hstack([x, -x[:, :-1], -0.5 * (xm + b), -0.5 * (xm - b)])


def even_redistributed_rows(m: int, count: int, gen: SeededGenerator) -> np.ndarray:
    if m < 2:
        raise InvalidDimensionError(f"redistributed even sampler needs m >= 2, got {m}")
    x = gen.uniforms((count, m))
    t = gen.uniforms((count, m))
    return forward_even_rows(x, t)


def odd_redistributed_rows(m: int, count: int, gen: SeededGenerator) -> np.ndarray:
    if m < 2:
        raise InvalidDimensionError(f"redistributed odd sampler needs m >= 2, got {m}")
    x = gen.uniforms((count, m))
    t = gen.uniforms((count, m))
    b = gen.signs(count)
    return forward_odd_rows(x, t, b)


def _single(rows: np.ndarray) -> BalancedVector:
    return BalancedVector(tuple(rows[0]))


def sample_even_degenerate(m: int, gen: SeededGenerator) -> BalancedVector:
    """(X_1, ..., X_m, -X_1, ..., -X_m) with independent uniform X_k."""
    return _single(even_degenerate_rows(m, 1, gen))


def sample_odd_degenerate(m: int, gen: SeededGenerator) -> BalancedVector:
    """Mirror the first m-1 draws and split -X_m with a random sign B."""
    return _single(odd_degenerate_rows(m, 1, gen))


def sample_even_redistributed(m: int, gen: SeededGenerator) -> BalancedVector:
    return _single(even_redistributed_rows(m, 1, gen))


def sample_odd_redistributed(m: int, gen: SeededGenerator) -> BalancedVector:
    return _single(odd_redistributed_rows(m, 1, gen))


def symmetrize(y: BalancedVector, gen: SeededGenerator) -> BalancedVector:
    """Apply a uniform random permutation to the coordinates of y."""
    return y.permuted(gen.permutation(y.n))


def sample_odd_symmetrized(m: int, gen: SeededGenerator) -> BalancedVector:
    return symmetrize(sample_odd_redistributed(m, gen), gen)


def sample_even_symmetrized(m: int, gen: SeededGenerator) -> BalancedVector:
    return symmetrize(sample_even_redistributed(m, gen), gen)


def _solve_t(y: Sequence[float], m: int) -> list[float]:
    t = []
    for k in range(m):
        a, b = y[2 * k], y[2 * k + 1]
        denominator = 2.0 - abs(a + b)
        # both coordinates at +-1: every t gives the same pair
        t.append(0.0 if denominator <= 0 else (a - b) / denominator)
    return t


def _check_feasible(x: Sequence[float], t: Sequence[float]) -> None:
    worst = max(max(abs(v) for v in x), max(abs(v) for v in t))
    if worst > 1 + BOX_TOL:
        logger.error(f"Redistribution preimage leaves the cube: max |coordinate| = {worst:.6g}")
        raise NotInvertibleError(f"no preimage in [-1, 1]: a coordinate reaches {worst:.6g}")


def invert_even(y: BalancedVector, require_small: bool = True) -> tuple[list[float], list[float]]:
    """
    Recover draws (x, t) that the redistributed even construction maps to y.

    With r_j = y_(2j-1) + y_(2j), x_k = -(r_1 + ... + r_(k-1)). When
    ``require_small`` is set, y must satisfy |y_k| < 1/n, which guarantees a
    preimage. Otherwise x is shifted to centre its range (the forward map only
    sees differences of x), and a preimage exists iff the result lies in the cube.
    """
    n = y.n
    if n % 2:
        raise NotInvertibleError(f"even inversion needs even n, got {n}")
    m = n // 2
    if require_small and y.sup_norm >= 1.0 / n:
        raise NotInvertibleError(f"coordinates must be below 1/{n} in magnitude")

    r = [y[2 * k] + y[2 * k + 1] for k in range(m)]
    x = [0.0] * m
    for k in range(1, m):
        x[k] = x[k - 1] - r[k - 1]
    t = _solve_t(y, m)
    if not require_small:
        shift = 0.5 * (max(x) + min(x))
        x = [v - shift for v in x]
        _check_feasible(x, t)
    return x, t


def invert_odd(y: BalancedVector, b: int, require_small: bool = True) -> tuple[list[float], list[float]]:
    """
    Recover draws (x, t) that the redistributed odd construction maps to y with sign b.

    x_m = -(r_1 + ... + r_m) and x_k = (x_m + b)/2 + r_k + ... + r_(m-1).
    """
    n = y.n
    if n % 2 == 0 or n < 5:
        raise NotInvertibleError(f"odd inversion needs odd n >= 5, got {n}")
    if b not in (-1, 1):
        raise InvalidInputError(f"b must be -1 or 1, got {b}")
    m = (n - 1) // 2
    if require_small and y.sup_norm >= 1.0 / (2 * m):
        raise NotInvertibleError(f"coordinates must be below 1/{2 * m} in magnitude")

    r = [y[2 * k] + y[2 * k + 1] for k in range(m)]
    xm = -sum(r)
    x = [0.0] * m
    x[m - 1] = xm
    tail = 0.0
    for k in range(m - 2, -1, -1):
        tail += r[k]
        x[k] = 0.5 * (xm + b) + tail
    t = _solve_t(y, m)
    if not require_small:
        _check_feasible(x, t)
    return x, t


def forward_even(x: Sequence[float], t: Sequence[float]) -> tuple[float, ...]:
    return tuple(forward_even_rows(np.asarray([x], float), np.asarray([t], float))[0])


def forward_odd(x: Sequence[float], t: Sequence[float], b: int) -> tuple[float, ...]:
    return tuple(forward_odd_rows(np.asarray([x], float), np.asarray([t], float), [b])[0])


def symmetrized_preimage(w: BalancedVector):
    """
    Exhibit draws that the symmetrized samplers turn into w.

    Returns (sigma, x, t, b): the redistributed construction maps (x, t[, b]) to
    the reordered vector (w[sigma[0]], ..., w[sigma[n-1]]), so the random
    permutation sigma^-1 yields w. b is None for even n.
    """
    if w.n % 2 == 0:
        sigma = balanced_greedy_order(w)
        x, t = invert_even(w.permuted(sigma), require_small=False)
        return sigma, x, t, None
    sigma, b = balanced_order_odd(w)
    x, t = invert_odd(w.permuted(sigma), b, require_small=False)
    return sigma, x, t, b

"""
The cyclic difference map L and the partial-sum orderings used to show that
symmetrized samplers reach every point of M(n).
"""
import itertools
import logging
from typing import Sequence

from src.exceptions import InvalidDimensionError, InvalidInputError
from src.geometry.polytope import DEFAULT_TOL, BalancedVector

logger = logging.getLogger(__name__)


def cyclic_difference(x: Sequence[float]) -> tuple[float, ...]:
    """L(x) = (x1 - x2, x2 - x3, ..., xm - x1)."""
    m = len(x)
    if m < 2:
        raise InvalidDimensionError(f"cyclic difference needs m >= 2, got {m}")
    return tuple(x[k] - x[(k + 1) % m] for k in range(m))


def in_L_image(r: Sequence[float], tol: float = DEFAULT_TOL) -> bool:
    """
    Decide whether r = L(x) for some x in [-1, 1]^m.

    Any preimage satisfies x_k = x_1 - S_k with S_k = r_1 + ... + r_(k-1), so one
    exists iff the partial sums span a range of at most 2.
    """
    m = len(r)
    if m < 2:
        raise InvalidDimensionError(f"L-image test needs m >= 2, got {m}")
    if abs(sum(r)) > tol * max(1, m):
        raise InvalidInputError(f"pair-sum vector is unbalanced: sum = {sum(r):.3e}")
    if any(abs(c) > 2 + tol for c in r):
        raise InvalidInputError("pair-sum coordinate outside [-2, 2]")

    partial = list(itertools.accumulate(r[:-1], initial=0.0))
    return max(partial) - min(partial) <= 2 + tol


def extreme_points_2m(m: int) -> list[tuple[float, ...]]:
    """Extreme points of 2M(m): every coordinate is +-2 except at most one."""
    if m < 2:
        raise InvalidDimensionError(f"2M(m) needs m >= 2, got {m}")
    points = set()
    for free in range(m):
        for signs in itertools.product((2.0, -2.0), repeat=m - 1):
            rest = -sum(signs)
            if abs(rest) <= 2:
                point = list(signs)
                point.insert(free, rest)
                points.add(tuple(point))
    return sorted(points)


def partial_sums_within(z: Sequence[float], tol: float = DEFAULT_TOL) -> bool:
    """Every prefix sum z_1 + ... + z_k lies in [-1, 1]."""
    return all(abs(s) <= 1 + tol for s in itertools.accumulate(z))


def odd_sums_within(z: Sequence[float], b: int, tol: float = DEFAULT_TOL) -> bool:
    """Every sum z_k + ... + z_(n-3) + (z_n + b)/2, k = 1..n-3, lies in [-1, 1]."""
    n = len(z)
    offset = 0.5 * (z[-1] + b)
    tail = 0.0
    for k in range(n - 4, -1, -1):
        tail += z[k]
        if abs(tail + offset) > 1 + tol:
            return False
    return True


def _pick(candidates: list[int], w: BalancedVector) -> int:
    # smallest magnitude first, lowest index on ties
    return min(candidates, key=lambda i: (abs(w[i]), i))


def balanced_greedy_order(w: BalancedVector) -> list[int]:
    """
    Order w so that every prefix sum stays in [-1, 1].

    Each step takes an unused coordinate whose sign opposes the running sum;
    the remaining coordinates sum to minus the running sum, so one exists.
    """
    unused = list(range(w.n))
    order = []
    running = 0.0
    while unused:
        if running > 0:
            candidates = [i for i in unused if w[i] <= 0]
        elif running < 0:
            candidates = [i for i in unused if w[i] >= 0]
        else:
            candidates = unused
        # rounding can leave a residue of the wrong sign
        nxt = _pick(candidates or unused, w)
        order.append(nxt)
        unused.remove(nxt)
        running += w[nxt]
    return order


def balanced_order_odd(w: BalancedVector) -> tuple[list[int], int]:
    """
    Order an odd-length w and pick b so that the sums checked by odd_sums_within hold.

    The last slot takes a nonnegative coordinate and b = -1, so the target band
    for the tail sums S_k is [a - 1, a + 1] with a = (1 - z_n)/2 in [0, 1/2].
    Slots n-3 down to 1 are filled backwards; slots n-2 and n-1 take the two
    leftover coordinates.
    """
    n = w.n
    if n % 2 == 0 or n < 5:
        raise InvalidInputError(f"odd ordering needs odd n >= 5, got {n}")

    b = -1
    last = max(range(n), key=lambda i: (w[i], -i))
    a = 0.5 * (1 - w[last])
    unused = [i for i in range(n) if i != last]
    slots: list[int | None] = [None] * n
    slots[n - 1] = last

    tail = 0.0
    for k in range(n - 4, -1, -1):
        if tail >= a:
            candidates = [i for i in unused if w[i] <= 0]
        else:
            candidates = [i for i in unused if w[i] >= 0]
        nxt = _pick(candidates or unused, w)
        slots[k] = nxt
        unused.remove(nxt)
        tail += w[nxt]

    slots[n - 3], slots[n - 2] = sorted(unused)
    logger.debug(f"Odd ordering for n={n}: {slots}, b={b}")
    return slots, b

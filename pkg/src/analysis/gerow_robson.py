"""
Exact analysis of max-norm (Gerow-Robson) densities on M(n).

phi(n, .) is the density of a sum of n-2 independent uniforms on [-1, 1]; from
it come the polynomials P_n' and B_n, whose root structure decides whether a
density of the form h(x) = f(||x||_inf) with uniform marginals exists.
Everything here is exact except the quadrature helpers and q5_closed_form.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate
from sympy import Poly

from src.analysis.rational import (
    as_fraction,
    ascending,
    coefficient_strings,
    evaluate,
    fraction_to_str,
    linear,
    monomial,
    product,
    qq_poly,
    reduce_fraction,
    scaled,
)
from src.analysis.sturm import SturmChain
from src.exceptions import InvalidInputError, NumericError
from src.services.densities import Density, PolynomialDensity, PowerDensity

logger = logging.getLogger(__name__)

DEFAULT_REFINE_BITS = 32
RESIDUAL_QUAD_LIMIT = 200


def _require_n(n: int, minimum: int = 3) -> None:
    if n < minimum:
        raise InvalidInputError(f"n must be >= {minimum}, got {n}")


def _positive_part_power(x: Fraction, p: int) -> Fraction:
    """(x)_+^p, with (x)_+^0 the indicator of x > 0."""
    if x <= 0:
        return Fraction(0)
    return x**p


def _phi_norm(n: int) -> int:
    return math.factorial(n - 3) * 2 ** (n - 2)


def phi(n: int, t) -> Fraction:
    """phi_n(t) = 1/((n-3)! 2^(n-2)) sum_k C(n-2,k) (-1)^k (t + n-2-2k)_+^(n-3)."""
    _require_n(n)
    t = as_fraction(t)
    if abs(t) >= n - 2:
        return Fraction(0)
    p = n - 3
    total = sum(
        math.comb(n - 2, k) * (-1) ** k * _positive_part_power(t + n - 2 - 2 * k, p)
        for k in range(n - 1)
    )
    return Fraction(total, _phi_norm(n))


def _phi_antiderivative(n: int, t: Fraction) -> Fraction:
    p = n - 3
    total = sum(
        math.comb(n - 2, k) * (-1) ** k * _positive_part_power(t + n - 2 - 2 * k, p + 1)
        for k in range(n - 1)
    )
    return Fraction(total, _phi_norm(n) * (p + 1))


def phi_integral(n: int, a, b) -> Fraction:
    """Exact integral of phi_n over [a, b]."""
    _require_n(n)
    a, b = as_fraction(a), as_fraction(b)
    if a > b:
        raise InvalidInputError(f"empty interval [{a}, {b}]")
    return _phi_antiderivative(n, b) - _phi_antiderivative(n, a)


def big_c(n: int) -> Fraction:
    """C_n = 1/((n-3)! 2^(n-1) phi_(n+1)(1))."""
    _require_n(n, minimum=4)
    return 1 / (math.factorial(n - 3) * 2 ** (n - 1) * phi(n + 1, 1))


def alpha(n: int) -> int:
    return (n - 3) // 2


def _shifted_power_sum(c: int, p: int) -> Poly:
    """(c + s)_+^p + (c - s)_+^p as a polynomial valid for s in [0, 1]."""
    if c <= -1:
        return qq_poly()
    if c == 0:
        return monomial(p)
    # odd powers of s cancel
    return qq_poly(2 * math.comb(p, j) * c ** (p - j) if j % 2 == 0 else 0 for j in range(p + 1))


def pn_prime_poly(n: int) -> Poly:
    """
    The density P_n' on [0, 1] of |Z_2| for Z uniform on the slice
    {1 + z_2 + ... + z_n = 0, |z_k| <= 1}.

    Only even powers of s appear, up to s^(2 alpha_n).
    """
    _require_n(n)
    if n == 3:
        return qq_poly([1])
    p = n - 3
    total = qq_poly()
    for k in range(n - 1):
        term = _shifted_power_sum(n - 1 - 2 * k, p)
        if not term.is_zero:
            total = total + scaled(term, (-1) ** k * math.comb(n - 2, k))
    return scaled(total, big_c(n))


def pn_cdf_poly(n: int) -> Poly:
    """P_n(s) = P{|Z_2| <= s}, with P_n(0) = 0 and P_n(1) = 1."""
    return pn_prime_poly(n).integrate()


def build_b(n: int) -> Poly:
    """
    B_n(s) = prod_(j=0..alpha) (s + 2j)
             + (n - 1) sum_j c_j prod_(i != j) (s + 2i),
    where c_j is the coefficient of s^(2j) in P_n'.
    """
    _require_n(n)
    a = alpha(n)
    factors = [linear(2 * j) for j in range(a + 1)]
    coefficients = ascending(pn_prime_poly(n))
    result = product(factors)
    for j in range(a + 1):
        c_j = coefficients[2 * j] if 2 * j < len(coefficients) else Fraction(0)
        if c_j:
            others = product(f for i, f in enumerate(factors) if i != j)
            result = result + scaled(others, (n - 1) * c_j)
    return result


def laplace_transfer(n: int) -> tuple[Poly, Poly]:
    """
    Laplace transform of q_n(t) = g_n(e^-t) as a reduced rational function:
    n prod_(j=1..alpha) (s + 2j) / B_n(s), denominator primitive over the integers.
    """
    _require_n(n)
    numerator = scaled(product(linear(2 * j) for j in range(1, alpha(n) + 1)), n)
    return reduce_fraction(numerator, build_b(n))


class GrVerdict(str, Enum):
    DENSITY_EXISTS_ROBSON = "density_exists_robson"
    DENSITY_EXISTS_GEROW = "density_exists_gerow"
    NO_DENSITY_PROVEN = "no_density_proven"
    INCONCLUSIVE = "inconclusive"


@dataclass
class GrReport:
    """Outcome of the max-norm density classification for one n."""

    n: int
    degree: int
    distinct_real_root_count: int
    a0_interval: tuple[Fraction, Fraction] | None
    sign_at_minus3: int
    sign_at_minus2: int
    verdict: GrVerdict
    reason: str = ""
    transfer: tuple[Poly, Poly] | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        data = {
            "n": self.n,
            "degree": self.degree,
            "distinct_real_root_count": self.distinct_real_root_count,
            "a0_interval": [fraction_to_str(x) for x in self.a0_interval] if self.a0_interval else None,
            "sign_at_minus3": self.sign_at_minus3,
            "sign_at_minus2": self.sign_at_minus2,
            "verdict": self.verdict.value,
            "reason": self.reason,
        }
        if self.transfer is not None:
            numerator, denominator = self.transfer
            data["laplace_numerator"] = coefficient_strings(numerator)
            data["laplace_denominator"] = coefficient_strings(denominator)
        return data


def _sign(value: Fraction) -> int:
    return (value > 0) - (value < 0)


def inverse_single_pole(numerator: Poly, denominator: Poly) -> tuple[Fraction, Fraction]:
    """
    For a transfer c/(s + a) return (c, a): q(t) = c e^(-a t), and since
    q(t) = g(e^-t) the matching density is g(x) = c x^a.
    """
    if numerator.degree() != 0 or denominator.degree() != 1:
        raise InvalidInputError(f"not of the form c/(s + a): {numerator} / ({denominator})")
    lead = as_fraction(denominator.LC())
    return ascending(numerator)[0] / lead, ascending(denominator)[0] / lead


def q5_closed_form(t):
    """q_5(t) = (5/191) e^(-65t/23) (191 cos(w t) - 19 sqrt(191) sin(w t)), w = sqrt(191)/23."""
    root = math.sqrt(191)
    t = np.asarray(t, dtype=float)
    w = root / 23
    value = 5 / 191 * np.exp(-65 * t / 23) * (191 * np.cos(w * t) - 19 * root * np.sin(w * t))
    return float(value) if value.ndim == 0 else value


EXPECTED_TRANSFERS = {
    3: (qq_poly([3]), qq_poly([2, 1])),
    4: (qq_poly([4]), qq_poly([3, 1])),
    5: (qq_poly([230, 115]), qq_poly([192, 130, 23])),
}


def closed_form_check(n: int) -> bool:
    """
    Compare the computed transfer with the known closed forms.

    n = 3, 4: the transfer is n/(s + n - 1), so q_n(t) = n e^(-(n-1)t) and
    g_n(x) = n x^(n-1). n = 5: the transfer has complex poles and the explicit
    inverse q_5 is negative at t = 1.5, so no density g_5 >= 0 exists.
    """
    if n not in EXPECTED_TRANSFERS:
        raise InvalidInputError(f"closed forms are known for n in 3, 4, 5, got {n}")
    transfer = laplace_transfer(n)
    if transfer != EXPECTED_TRANSFERS[n]:
        logger.warning(f"Transfer for n={n} does not match its closed form: {transfer}")
        return False
    if n in (3, 4):
        c, a = inverse_single_pole(*transfer)
        return c == n and a == n - 1
    poles_real = SturmChain(transfer[1]).distinct_real_roots()
    return poles_real == 0 and q5_closed_form(1.5) < 0


def verify_no_gr_density(n: int, refine_bits: int = DEFAULT_REFINE_BITS) -> GrReport:
    """
    Classify n: existence for n = 3, 4; for n >= 5 either a proof of
    nonexistence or an inconclusive report, never an existence claim.

    Args:
        n: Dimension, at least 3
        refine_bits: Width 2^-refine_bits of the bracket reported for the
            largest root a0 of B_n in (-3, -2)

    Returns:
        GrReport with the Sturm root count of B_n, its signs at -3 and -2,
        the verdict and, for n <= 5, the reduced Laplace transfer
    """
    _require_n(n)
    try:
        b = build_b(n)
        chain = SturmChain(b)
        distinct = chain.distinct_real_roots()
        sign_m3, sign_m2 = _sign(evaluate(b, -3)), _sign(evaluate(b, -2))
    except (MemoryError, RecursionError) as e:
        logger.error(f"Exact arithmetic exhausted resources for n={n}: {e!r}")
        raise NumericError(f"n={n}: exact arithmetic exhausted resources ({e!r})") from e

    report = GrReport(
        n=n,
        degree=b.degree(),
        distinct_real_root_count=distinct,
        a0_interval=None,
        sign_at_minus3=sign_m3,
        sign_at_minus2=sign_m2,
        verdict=GrVerdict.INCONCLUSIVE,
    )

    if n <= 5:
        report.transfer = laplace_transfer(n)
        if distinct:
            report.a0_interval = chain.isolate()[-1]
        passed = closed_form_check(n)
        if not passed:
            report.reason = "closed form mismatch"
        elif n == 3:
            report.verdict, report.reason = GrVerdict.DENSITY_EXISTS_ROBSON, "g_3(s) = 3s^2"
        elif n == 4:
            report.verdict, report.reason = GrVerdict.DENSITY_EXISTS_GEROW, "g_4(s) = 4s^3"
        else:
            report.verdict, report.reason = GrVerdict.NO_DENSITY_PROVEN, "complex roots + q_5(1.5)<0 closed form"
        logger.info(f"n={n}: {report.verdict.value}")
        return report

    failures = []
    if distinct != b.degree():
        failures.append(f"{distinct} distinct real roots, degree {b.degree()}")
    if chain.count_roots(-2, None) != 0:
        failures.append("real root above -2")
    if chain.count_roots(-3, -2) == 0:
        failures.append("no root in (-3, -2)")
    if sign_m3 >= 0:
        failures.append("B(-3) >= 0")
    if sign_m2 <= 0:
        failures.append("B(-2) <= 0")

    if failures:
        report.reason = "; ".join(failures)
        logger.warning(f"n={n}: inconclusive ({report.reason})")
        return report

    report.a0_interval = chain.largest_root_in(-3, -2, refine_bits)
    report.verdict = GrVerdict.NO_DENSITY_PROVEN
    report.reason = "distinct real roots, a0 in (-3, -2), B(-3) < 0 < B(-2)"
    logger.info(f"n={n}: no density, a0 in ({float(report.a0_interval[0]):.9f}, {float(report.a0_interval[1]):.9f}]")
    return report


def _float_poly(p: Poly) -> Polynomial:
    return Polynomial([float(c) for c in ascending(p)] or [0.0])


def _quad(func, a: float, b: float, what: str) -> float:
    result = integrate.quad(func, a, b, limit=RESIDUAL_QUAD_LIMIT, full_output=1)
    if len(result) > 3:
        value, error, _, message = result[:4]
        logger.error(f"Quadrature for {what} failed: {message} (value={value}, error={error})")
        raise NumericError(f"quadrature for {what} failed: {message} (value={value}, abserr={error})")
    return result[0]


def rbs_condition_residual(g: Density, n: int, t: float) -> float:
    """
    g(t)/n + (1 - 1/n) int_t^1 g(s) P_n'(t/s) ds/s - 1.

    Uniform marginals under the max-norm model need this to vanish on (0, 1).
    """
    _require_n(n)
    if not 0 < t < 1:
        raise InvalidInputError(f"t must lie in (0, 1), got {t}")
    density = _float_poly(pn_prime_poly(n))
    tail = _quad(lambda s: g.pdf(s) * density(t / s) / s, t, 1.0, f"residual n={n}, t={t}")
    return float(g.pdf(t)) / n + (1 - 1 / n) * tail - 1


def gr_marginal_cdf(n: int, g: Density, t: float) -> float:
    """
    CDF of one coordinate under the max-norm model with magnitude density g:
    for t in [0, 1], F(t) = 1/2 + 1/2 int_0^t g + 1/2 (1 - 1/n) int_t^1 g(s) P_n(t/s) ds.
    """
    _require_n(n)
    if t <= -1:
        return 0.0
    if t >= 1:
        return 1.0
    if t < 0:
        return 1.0 - gr_marginal_cdf(n, g, -t)
    if t == 0:
        return 0.5
    cdf = _float_poly(pn_cdf_poly(n))
    head = _quad(g.pdf, 0.0, t, f"marginal head n={n}")
    tail = _quad(lambda s: g.pdf(s) * cdf(t / s), t, 1.0, f"marginal tail n={n}")
    return 0.5 + 0.5 * head + 0.5 * (1 - 1 / n) * tail


def volume_rational_factor(n: int) -> Fraction:
    """2^n phi_(n+2)(0); the (n-1)-volume of M(n) is sqrt(n) times this."""
    if n < 2:
        raise InvalidInputError(f"n must be >= 2, got {n}")
    return 2**n * phi(n + 2, 0)


def polytope_volume(n: int) -> float:
    return math.sqrt(n) * float(volume_rational_factor(n))


def robson_gerow_constant(n: int) -> float:
    """C_n in f_n(s) = C_n s, the density that exists for n = 3, 4."""
    _require_n(n)
    return n / ((n - 1) * polytope_volume(n))


def _order_at_zero(g: Density) -> tuple[float, float]:
    """(k, c) with g(s) ~ c s^k as s -> 0."""
    if isinstance(g, PowerDensity):
        return g.exponent, g.coefficient
    if isinstance(g, PolynomialDensity):
        for k, c in enumerate(g.coefficients):
            if c != 0:
                return float(k), c
        return math.inf, 0.0
    value = float(g.pdf(0.0))
    if value != 0:
        return 0.0, value
    raise NumericError("cannot resolve the limit at s = 0 for this density")


def gr_density_f(n: int, g: Density, s: float) -> float:
    """f(s) = g(s) / ((n-1) V_(n-1) s^(n-2)), the profile of h(x) = f(||x||_inf)."""
    _require_n(n)
    if not 0 <= s <= 1:
        raise InvalidInputError(f"s must lie in [0, 1], got {s}")
    scale = (n - 1) * polytope_volume(n)
    if s > 0:
        return float(g.pdf(s)) / (scale * s ** (n - 2))
    order, coefficient = _order_at_zero(g)
    if order < n - 2:
        raise NumericError(f"f is singular at s = 0 (g ~ {coefficient} s^{order:g})")
    return coefficient / scale if order == n - 2 else 0.0

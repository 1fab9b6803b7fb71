import pytest
import math
import os
import sys
from fractions import Fraction

import numpy as np

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from src.analysis.gerow_robson import (
    GrVerdict,
    big_c,
    build_b,
    closed_form_check,
    gr_density_f,
    gr_marginal_cdf,
    inverse_single_pole,
    laplace_transfer,
    phi,
    phi_integral,
    pn_cdf_poly,
    pn_prime_poly,
    polytope_volume,
    q5_closed_form,
    rbs_condition_residual,
    robson_gerow_constant,
    verify_no_gr_density,
    volume_rational_factor,
)
from src.analysis.rational import (
    as_fraction,
    ascending,
    coefficient_strings,
    evaluate,
    fraction_to_str,
    integer_form,
    integrate,
    is_even,
    qq_poly,
    reduce_fraction,
)
from src.analysis.sturm import SturmChain, is_squarefree, sturm_distinct_real_roots
from src.exceptions import InvalidInputError
from src.services.densities import PolynomialDensity, PowerDensity
from src.services.rng import SeededGenerator
from src.services.sampler_service import GrModelSampler


def poly(*coefficients):
    return qq_poly(coefficients)


def g5_marginal(t):
    """Closed-form marginal CDF on [0, 1] for g_5(s) = 5 s^4."""
    return (t + 1) / 2 + (t - 2 * t**3 + t**5) / 46


class TestExactPolynomials:
    """Polynomials over QQ"""

    def test_zero_and_degree(self):
        assert poly(1, 2, 0, 0).degree() == 1
        assert poly().is_zero
        assert ascending(poly()) == []

    def test_refuses_floats(self):
        with pytest.raises(InvalidInputError):
            as_fraction(0.5)
        assert as_fraction("3/4") == Fraction(3, 4)

    def test_ascending_coefficients(self):
        assert ascending(poly(Fraction(1, 2), 0, 3)) == [Fraction(1, 2), 0, 3]

    def test_evaluation(self):
        p = poly(1, -3, 2)
        assert evaluate(p, Fraction(1, 2)) == 0
        assert evaluate(p, 2) == 3

    def test_integrate(self):
        assert integrate(poly(0, 0, 3), 0, 1) == 1
        assert integrate(poly(1), -1, 1) == 2

    def test_parity(self):
        assert is_even(poly(1, 0, 5))
        assert not is_even(poly(1, 1))

    def test_integer_form(self):
        assert ascending(integer_form(poly(Fraction(1, 2), Fraction(-1, 3)))) == [-3, 2]
        assert ascending(integer_form(poly(4, 6))) == [2, 3]

    def test_reduce(self):
        a = poly(2, 1) * poly(3, 1)
        b = poly(2, 1) * poly(5, 1)
        numerator, denominator = reduce_fraction(a, b * poly(Fraction(1, 2)))
        assert denominator == poly(5, 1)
        assert numerator == poly(6, 2)

    def test_reduce_zero_denominator(self):
        with pytest.raises(ZeroDivisionError):
            reduce_fraction(poly(1), poly())

    def test_strings(self):
        assert fraction_to_str(Fraction(6, 4)) == "3/2"
        assert coefficient_strings(poly(1, Fraction(1, 2))) == ["1/1", "1/2"]


class TestPhi:
    """Density of a sum of n-2 uniforms on [-1, 1]"""

    @pytest.mark.parametrize("n, t, expected", [
        (3, 0, Fraction(1, 2)),
        (3, Fraction(1, 2), Fraction(1, 2)),
        (4, 0, Fraction(1, 2)),
        (5, 1, Fraction(1, 4)),
        (6, 1, Fraction(23, 96)),
    ])
    def test_values(self, n, t, expected):
        assert phi(n, t) == expected

    @pytest.mark.parametrize("n", [3, 4, 7, 12])
    def test_outside_support(self, n):
        assert phi(n, n - 2) == 0
        assert phi(n, -(n - 2)) == 0
        assert phi(n, n) == 0

    @pytest.mark.parametrize("n", [3, 4, 5, 8, 15, 40])
    def test_total_mass(self, n):
        """Test that phi_n integrates to 1 over its support"""
        assert phi_integral(n, -(n - 2), n - 2) == 1

    @pytest.mark.parametrize("n", [4, 6, 9])
    def test_symmetry(self, n):
        for t in (Fraction(1, 3), Fraction(7, 5), Fraction(5, 2)):
            assert phi(n, t) == phi(n, -t)

    @pytest.mark.parametrize("n, t", [(5, Fraction(1, 2)), (6, 0), (7, Fraction(3, 2))])
    def test_convolution(self, n, t):
        """Test phi_(n+1)(t) = 1/2 * int_(t-1)^(t+1) phi_n"""
        assert phi(n + 1, t) == phi_integral(n, t - 1, t + 1) / 2

    @pytest.mark.parametrize("n", range(3, 61))
    def test_value_at_one(self, n):
        """Test phi_(n+1)(1) = 1/2 * int_0^2 phi_n"""
        assert phi(n + 1, 1) == phi_integral(n, 0, 2) / 2

    def test_rejects_small_n(self):
        with pytest.raises(InvalidInputError):
            phi(2, 0)

    def test_rejects_empty_interval(self):
        with pytest.raises(InvalidInputError):
            phi_integral(5, 1, 0)


class TestSliceDensity:
    """P_n', the density of |Z_2| on the slice"""

    def test_big_c(self):
        assert big_c(4) == Fraction(1, 2)
        assert big_c(5) == Fraction(3, 23)
        with pytest.raises(InvalidInputError):
            big_c(3)

    def test_small_n(self):
        assert pn_prime_poly(3) == poly(1)
        assert pn_prime_poly(4) == poly(1)
        assert pn_prime_poly(5) == poly(Fraction(24, 23), 0, Fraction(-3, 23))

    @pytest.mark.parametrize("n", range(3, 21))
    def test_is_a_density(self, n):
        """Test even powers only, exact unit mass and nonnegativity"""
        p = pn_prime_poly(n)
        assert is_even(p)
        assert p.degree() <= 2 * ((n - 3) // 2)
        assert integrate(p, 0, 1) == 1
        assert all(evaluate(p, Fraction(k, 64)) >= 0 for k in range(65))

    @pytest.mark.parametrize("n", range(3, 61))
    def test_unit_mass(self, n):
        assert integrate(pn_prime_poly(n), 0, 1) == 1
        assert evaluate(pn_cdf_poly(n), 1) == 1

    def test_cdf(self):
        cdf = pn_cdf_poly(6)
        assert evaluate(cdf, 0) == 0
        assert evaluate(cdf, 1) == 1

    @pytest.mark.parametrize("n", [5, 6, 7, 8])
    def test_matches_slice_sampler(self, n):
        """Test P{|Z_2| <= s} against uniform draws from the slice"""
        z2 = np.abs(GrModelSampler(n, PowerDensity(1)).slice_rows(100_000, SeededGenerator(n))[:, 0])
        cdf = pn_cdf_poly(n)
        for s in (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
            expected = float(evaluate(cdf, s))
            observed = float(np.mean(z2 <= float(s)))
            se = math.sqrt(expected * (1 - expected) / len(z2))
            assert abs(observed - expected) <= 4 * se


class TestTransfer:
    """B_n and the Laplace transfer of q_n"""

    def test_b_small(self):
        assert build_b(3) == poly(2, 1)
        assert build_b(4) == poly(3, 1)
        assert build_b(5) == poly(Fraction(192, 23), Fraction(130, 23), 1)

    @pytest.mark.parametrize("n", range(3, 25))
    def test_degree(self, n):
        assert build_b(n).degree() == (n - 3) // 2 + 1

    def test_transfer_small(self):
        assert laplace_transfer(3) == (poly(3), poly(2, 1))
        assert laplace_transfer(4) == (poly(4), poly(3, 1))
        assert laplace_transfer(5) == (poly(230, 115), poly(192, 130, 23))

    @pytest.mark.parametrize("n", range(3, 61))
    def test_unit_mass(self, n):
        """Test that the transfer equals 1 at s = 1, i.e. g integrates to 1"""
        numerator, denominator = laplace_transfer(n)
        assert evaluate(numerator, 1) / evaluate(denominator, 1) == 1

    def test_inverse_single_pole(self):
        assert inverse_single_pole(*laplace_transfer(3)) == (3, 2)
        assert inverse_single_pole(poly(8), poly(6, 2)) == (4, 3)
        with pytest.raises(InvalidInputError):
            inverse_single_pole(*laplace_transfer(5))

    def test_q5(self):
        assert q5_closed_form(0.0) == pytest.approx(5.0)
        assert q5_closed_form(1.5) < 0
        assert q5_closed_form(np.array([0.0, 1.5])).shape == (2,)

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_closed_forms(self, n):
        assert closed_form_check(n)

    def test_closed_form_unknown_n(self):
        with pytest.raises(InvalidInputError):
            closed_form_check(6)


class TestSturm:
    """Exact real-root counting"""

    def test_linear(self):
        chain = SturmChain(poly(2, 1))
        assert chain.distinct_real_roots() == 1
        assert chain.count_roots(-3, -2) == 1
        assert chain.count_roots(-2, -2) == 1
        assert chain.count_roots(-1, None) == 0

    def test_complex_pair(self):
        assert SturmChain(poly(192, 130, 23)).distinct_real_roots() == 0

    def test_three_roots(self):
        p = poly(1, 1) * poly(2, 1) * poly(4, 1)
        count, intervals = sturm_distinct_real_roots(p)
        assert count == 3
        for (a, b), root in zip(intervals, (-4, -2, -1)):
            assert a <= root <= b

    def test_repeated_root(self):
        p = poly(1, 1) * poly(1, 1) * poly(2, 1)
        assert not is_squarefree(p)
        assert SturmChain(p).distinct_real_roots() == 2
        assert is_squarefree(poly(2, 1))

    def test_chain_ends_in_constant(self):
        chain = SturmChain(poly(1, 1) * poly(1, 1) * poly(2, 1)).chain
        assert chain[-1].degree() == 0
        assert len(chain) == 3

    def test_refine(self):
        a, b = SturmChain(poly(-2, 0, 1)).refine(1, 2, 30)
        assert b - a <= Fraction(1, 2**30)
        assert a < math.sqrt(2) <= b

    def test_largest_root_in(self):
        p = poly(1, 1) * poly(2, 1) * poly(4, 1)
        a, b = SturmChain(p).largest_root_in(-5, 0, 20)
        assert a <= -1 <= b

    def test_refine_needs_isolation(self):
        with pytest.raises(InvalidInputError):
            SturmChain(poly(-2, 0, 1)).refine(-2, 2, 10)

    def test_zero_polynomial(self):
        with pytest.raises(InvalidInputError):
            SturmChain(poly())


class TestVerify:
    """Classification of max-norm densities"""

    def test_n3(self):
        report = verify_no_gr_density(3)
        assert report.verdict == GrVerdict.DENSITY_EXISTS_ROBSON
        assert report.degree == 1

    def test_n4(self):
        assert verify_no_gr_density(4).verdict == GrVerdict.DENSITY_EXISTS_GEROW

    def test_n5(self):
        report = verify_no_gr_density(5)
        assert report.verdict == GrVerdict.NO_DENSITY_PROVEN
        assert report.distinct_real_root_count == 0
        assert report.a0_interval is None
        assert report.to_dict()["laplace_denominator"] == ["192/1", "130/1", "23/1"]

    @pytest.mark.parametrize("n", range(6, 13))
    def test_no_density(self, n):
        report = verify_no_gr_density(n, refine_bits=16)
        assert report.verdict == GrVerdict.NO_DENSITY_PROVEN
        assert report.distinct_real_root_count == report.degree
        assert report.sign_at_minus3 < 0 < report.sign_at_minus2
        a, b = report.a0_interval
        assert -3 <= a < b <= -2
        assert b - a <= Fraction(1, 2**16)

    @pytest.mark.slow
    def test_sweep(self):
        """Test n = 6..60"""
        verdicts = {n: verify_no_gr_density(n, refine_bits=8).verdict for n in range(6, 61)}
        assert set(verdicts.values()) == {GrVerdict.NO_DENSITY_PROVEN}

    def test_never_claims_existence_above_4(self):
        for n in range(5, 15):
            assert verify_no_gr_density(n, refine_bits=4).verdict not in (
                GrVerdict.DENSITY_EXISTS_ROBSON, GrVerdict.DENSITY_EXISTS_GEROW)

    def test_report_serializes(self):
        data = verify_no_gr_density(6, refine_bits=8).to_dict()
        assert data["verdict"] == "no_density_proven"
        assert all("/" in x for x in data["a0_interval"])


class TestResidualAndMarginal:
    """Quadrature checks of the uniform-marginal condition"""

    grid = [k / 10 for k in range(1, 10)]

    @pytest.mark.parametrize("n", [3, 4])
    def test_residual_vanishes(self, n):
        g = PowerDensity(n - 1)
        assert max(abs(rbs_condition_residual(g, n, t)) for t in self.grid) < 1e-10

    def test_residual_n5(self):
        assert max(abs(rbs_condition_residual(PowerDensity(4), 5, t)) for t in self.grid) > 0.005

    def test_residual_domain(self):
        with pytest.raises(InvalidInputError):
            rbs_condition_residual(PowerDensity(2), 3, 1.0)

    @pytest.mark.parametrize("t", [-0.7, -0.2, 0.0, 0.3, 0.9])
    def test_marginal_uniform_n3(self, t):
        assert gr_marginal_cdf(3, PowerDensity(2), t) == pytest.approx((1 + t) / 2, abs=1e-10)

    @pytest.mark.parametrize("t", [0.25, 0.5, 0.75])
    def test_marginal_n5_closed_form(self, t):
        assert gr_marginal_cdf(5, PowerDensity(4), t) == pytest.approx(g5_marginal(t), abs=1e-9)

    def test_marginal_n5_not_uniform(self):
        assert gr_marginal_cdf(5, PowerDensity(4), 0.5) == pytest.approx(0.756114, abs=1e-6)

    def test_marginal_bounds(self):
        g = PolynomialDensity((0.5, 1.0))
        assert gr_marginal_cdf(6, g, -1.0) == 0.0
        assert gr_marginal_cdf(6, g, 1.0) == 1.0

    def test_empirical_n5_marginal(self):
        """Test that sampled coordinates follow the non-uniform CDF"""
        rows = GrModelSampler(5, PowerDensity(4)).rows(100_000, SeededGenerator(55))
        observed = float(np.mean(rows[:, 0] <= 0.5))
        expected = g5_marginal(0.5)
        se = math.sqrt(expected * (1 - expected) / 100_000)
        assert abs(observed - expected) <= 4 * se
        assert observed > 0.75


class TestVolumes:
    """Volume of M(n) and the linear profile constant"""

    def test_rational_factors(self):
        assert volume_rational_factor(2) == 2
        assert volume_rational_factor(3) == 3
        assert volume_rational_factor(4) == Fraction(16, 3)

    def test_volumes(self):
        assert polytope_volume(2) == pytest.approx(2 * math.sqrt(2))
        assert polytope_volume(3) == pytest.approx(3 * math.sqrt(3))
        assert polytope_volume(4) == pytest.approx(32 / 3)

    def test_constants(self):
        assert robson_gerow_constant(3) == pytest.approx(1 / (2 * math.sqrt(3)))
        assert robson_gerow_constant(4) == pytest.approx(1 / 8)

    @pytest.mark.parametrize("s", [0.0, 0.2, 0.9])
    def test_linear_profile(self, s):
        assert gr_density_f(3, PowerDensity(2), s) == pytest.approx(s / (2 * math.sqrt(3)))
        assert gr_density_f(4, PowerDensity(3), s) == pytest.approx(s / 8)

    def test_profile_singular_at_zero(self):
        from src.exceptions import NumericError

        with pytest.raises(NumericError):
            gr_density_f(5, PowerDensity(1), 0.0)

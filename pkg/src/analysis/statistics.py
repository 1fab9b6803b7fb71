"""
Statistical checks for balanced samplers: marginal uniformity, balance,
covariance identities, support coverage and the variance-reduction demo.
"""
import logging
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy import stats

from src.exceptions import InvalidInputError
from src.geometry.polytope import BALANCE_TOL_PER_COORD, DEFAULT_TOL
from src.services.rng import SeededGenerator
from src.services.sampler_service import SampleBatch, SamplerConfig, sample_rows

logger = logging.getLogger(__name__)

MIN_COVARIANCE_COUNT = 1000
MIN_TRIALS = 100
MAX_COVERAGE_N = 8
MAX_ENUMERATED_CELLS = 10**6
CHI_SQUARE_BINS = 64


@dataclass
class UniformityResult:
    coordinate: int
    statistic: float
    p_value: float
    count: int
    test: str = "ks"

    def to_dict(self) -> dict:
        return asdict(self)


def ks_uniformity_values(values: Sequence[float], coordinate: int = 0) -> UniformityResult:
    """One-sample KS test of ``values`` against the uniform law on [-1, 1]."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise InvalidInputError("uniformity test on an empty sample")
    result = stats.kstest(values, "uniform", args=(-1.0, 2.0), method="asymp")
    return UniformityResult(coordinate, float(result.statistic), float(result.pvalue), int(values.size))


def ks_uniformity(batch: SampleBatch, coordinate: int) -> UniformityResult:
    if batch.count == 0:
        raise InvalidInputError("uniformity test on an empty batch")
    return ks_uniformity_values(batch.column(coordinate), coordinate)


def chi_square_uniformity(batch: SampleBatch, coordinate: int, bins: int = CHI_SQUARE_BINS) -> UniformityResult:
    """Equal-width chi-square diagnostic over [-1, 1]."""
    if batch.count == 0:
        raise InvalidInputError("uniformity test on an empty batch")
    observed, _ = np.histogram(batch.column(coordinate), bins=bins, range=(-1.0, 1.0))
    result = stats.chisquare(observed)
    return UniformityResult(coordinate, float(result.statistic), float(result.pvalue), batch.count, test="chi2")


def bonferroni_level(level: float, tests: int) -> float:
    return level / max(tests, 1)


@dataclass
class CovarianceSummary:
    n: int
    count: int
    covariance: np.ndarray
    pair_standard_errors: np.ndarray
    alpha_hat: float
    alpha_standard_error: float
    sum_identity_hat: float
    sum_identity_standard_error: float

    @property
    def alpha_target(self) -> float:
        return -1.0 / (3 * (self.n - 1))

    @property
    def sum_identity_target(self) -> float:
        return -self.n / 3.0

    def sum_identity_within(self, z: float = 3.0) -> bool:
        return abs(self.sum_identity_hat - self.sum_identity_target) <= z * self.sum_identity_standard_error

    def pairs_within(self, z: float = 3.0) -> bool:
        """Every off-diagonal covariance lies within z standard errors of alpha_target."""
        off = ~np.eye(self.n, dtype=bool)
        deviation = np.abs(self.covariance[off] - self.alpha_target)
        return bool(np.all(deviation <= z * self.pair_standard_errors[off]))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "count": self.count,
            "covariance": self.covariance.tolist(),
            "pair_standard_errors": self.pair_standard_errors.tolist(),
            "alpha_hat": self.alpha_hat,
            "alpha_standard_error": self.alpha_standard_error,
            "alpha_target": self.alpha_target,
            "sum_identity_hat": self.sum_identity_hat,
            "sum_identity_standard_error": self.sum_identity_standard_error,
            "sum_identity_target": self.sum_identity_target,
        }


def covariance_summary(batch: SampleBatch) -> CovarianceSummary:
    """
    Pairwise covariances with per-pair standard errors, plus the identity
    sum_(k != j) E(X_k X_j) = -n/3 forced by balance and Var X_k = 1/3.
    """
    if batch.count < MIN_COVARIANCE_COUNT:
        raise InvalidInputError(f"covariance summary needs >= {MIN_COVARIANCE_COUNT} samples, got {batch.count}")
    x = batch.values
    count, n = x.shape
    root = np.sqrt(count)

    centred = x - x.mean(axis=0)
    covariance = centred.T @ centred / (count - 1)
    squares = centred**2
    mean_products = centred.T @ centred / count
    product_var = (squares.T @ squares - count * mean_products**2) / (count - 1)
    pair_se = np.sqrt(np.clip(product_var, 0.0, None)) / root

    totals = centred.sum(axis=1)
    off_diagonal = (totals**2 - (centred**2).sum(axis=1)) / (n * (n - 1))
    off = ~np.eye(n, dtype=bool)

    row_sums = x.sum(axis=1)
    identity = row_sums**2 - (x**2).sum(axis=1)

    return CovarianceSummary(
        n=n,
        count=count,
        covariance=covariance,
        pair_standard_errors=pair_se,
        alpha_hat=float(covariance[off].mean()),
        alpha_standard_error=float(off_diagonal.std(ddof=1) / root),
        sum_identity_hat=float(identity.mean()),
        sum_identity_standard_error=float(identity.std(ddof=1) / root),
    )


@dataclass
class BalanceReport:
    n: int
    count: int
    max_abs_sum: float
    worst_row: int
    violations: int

    @property
    def threshold(self) -> float:
        return BALANCE_TOL_PER_COORD * self.n

    @property
    def balanced(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        data = asdict(self)
        data.update(threshold=self.threshold, balanced=self.balanced)
        return data


def balance_report(batch: SampleBatch) -> BalanceReport:
    """Worst absolute row sum and the number of rows above 1e-12 * n."""
    if batch.count == 0:
        raise InvalidInputError("balance report on an empty batch")
    sums = np.abs(batch.values.sum(axis=1))
    worst = int(np.argmax(sums))
    violations = int((sums > BALANCE_TOL_PER_COORD * batch.n).sum())
    if violations:
        logger.warning(f"{violations} of {batch.count} rows are unbalanced (worst |sum| = {sums[worst]:.3e})")
    return BalanceReport(batch.n, batch.count, float(sums[worst]), worst, violations)


@dataclass
class VarianceReductionResult:
    n: int
    trials: int
    method: str
    var_iid: float
    var_rbs: float
    mean_iid: float
    mean_rbs: float
    max_abs_mean_rbs: float

    @property
    def ratio(self) -> float | None:
        return self.var_rbs / self.var_iid if self.var_iid > 0 else None

    def to_dict(self) -> dict:
        data = asdict(self)
        data["ratio"] = self.ratio
        return data


def _as_polynomial(f) -> Polynomial:
    try:
        coefficients = np.asarray(f.coef if isinstance(f, Polynomial) else list(f), dtype=float)
    except (TypeError, ValueError) as e:
        raise InvalidInputError(f"invalid polynomial descriptor {f!r}: {e}") from e
    if coefficients.size == 0 or not np.all(np.isfinite(coefficients)):
        raise InvalidInputError(f"invalid polynomial coefficients: {coefficients!r}")
    return Polynomial(coefficients)


def variance_reduction_experiment(f, n: int, trials: int, gen: SeededGenerator, method: str = "auto") -> VarianceReductionResult:
    """
    Compare Var(mean of f(X_k)) under i.i.d. uniforms and under a balanced sampler.

    Balanced samples cancel the linear part of f exactly.

    Args:
        f: Ascending polynomial coefficients or a numpy Polynomial
        n: Coordinates per sample
        trials: Number of sample means per side
        gen: Generator feeding both the i.i.d. and the balanced draws
        method: Sampler method for the balanced side

    Returns:
        VarianceReductionResult with both variances and the balanced means
    """
    if trials < MIN_TRIALS:
        raise InvalidInputError(f"need at least {MIN_TRIALS} trials, got {trials}")
    if n < 2:
        raise InvalidInputError(f"n must be >= 2, got {n}")
    poly = _as_polynomial(f)
    config = SamplerConfig(n=n, method=method, seed=gen.seed)

    iid_means = poly(gen.uniforms((trials, n))).mean(axis=1)
    rbs_means = poly(sample_rows(config, trials, gen)).mean(axis=1)
    result = VarianceReductionResult(
        n=n,
        trials=trials,
        method=config.resolved_method,
        var_iid=float(iid_means.var(ddof=1)),
        var_rbs=float(rbs_means.var(ddof=1)),
        mean_iid=float(iid_means.mean()),
        mean_rbs=float(rbs_means.mean()),
        max_abs_mean_rbs=float(np.abs(rbs_means).max()),
    )
    logger.info(f"Variance reduction n={n}, method={result.method}: iid={result.var_iid:.3e}, rbs={result.var_rbs:.3e}")
    return result


@dataclass
class CoverageReport:
    n: int
    method: str
    buckets: int
    samples: int
    occupied_cells: int
    interior_cells: int | None
    empty_interior_cells: int | None
    l_image_violations: int | None
    cell_counts: dict = field(default_factory=dict, repr=False)

    @property
    def l_image_violation_fraction(self) -> float | None:
        if self.l_image_violations is None:
            return None
        return self.l_image_violations / self.samples

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "method": self.method,
            "buckets": self.buckets,
            "samples": self.samples,
            "occupied_cells": self.occupied_cells,
            "interior_cells": self.interior_cells,
            "empty_interior_cells": self.empty_interior_cells,
            "l_image_violations": self.l_image_violations,
            "l_image_violation_fraction": self.l_image_violation_fraction,
        }


def cell_keys(values: np.ndarray, buckets: int) -> np.ndarray:
    """sign(x) * ceil(|x| * buckets) per coordinate."""
    return (np.sign(values) * np.ceil(np.abs(values) * buckets)).astype(int)


def l_image_violations(values: np.ndarray, tol: float = DEFAULT_TOL) -> int:
    """Rows whose pair sums r_k = y_(2k-1) + y_(2k) are not a cyclic difference of a point of the cube."""
    r = values[:, 0::2] + values[:, 1::2]
    partial = np.cumsum(r[:, :-1], axis=1)
    partial = np.hstack([np.zeros((len(r), 1)), partial])
    spread = partial.max(axis=1) - partial.min(axis=1)
    return int((spread > 2 + tol).sum())


def interior_cells(n: int, buckets: int, epsilon: float) -> list[tuple[int, ...]]:
    """
    Cells whose box, clipped to [-(1 - epsilon), 1 - epsilon]^n, meets the
    hyperplane sum = 0 with a margin of one bucket on either side.
    """
    if (2 * buckets) ** n > MAX_ENUMERATED_CELLS:
        raise InvalidInputError(f"too many cells to enumerate for n={n}, buckets={buckets}")
    limit = 1.0 - epsilon
    values = [k for k in range(-buckets, buckets + 1) if k]
    lo = np.array([max((k - 1) / buckets if k > 0 else k / buckets, -limit) for k in values])
    hi = np.array([min(k / buckets if k > 0 else (k + 1) / buckets, limit) for k in values])
    usable = np.flatnonzero(lo < hi)
    index = np.array(np.meshgrid(*([usable] * n), indexing="ij")).reshape(n, -1).T
    low_sums = lo[index].sum(axis=1)
    high_sums = hi[index].sum(axis=1)
    grids = np.asarray(values)[index]
    margin = 1.0 / buckets
    keep = (low_sums <= -margin) & (high_sums >= margin)
    return [tuple(int(k) for k in row) for row in grids[keep]]


def coverage_probe(config: SamplerConfig, cells: int, samples: int, epsilon: float = 0.1) -> CoverageReport:
    """
    Occupancy of sign-and-magnitude cells of M(n) by ``samples`` draws.

    For even n the report also counts rows whose canonical pair sums leave the
    image of the cyclic difference map.

    Args:
        config: Sampler configuration; its seed drives the draws
        cells: Magnitude buckets per coordinate
        samples: Number of draws
        epsilon: Cells are clipped to [-(1 - epsilon), 1 - epsilon]^n before enumeration

    Returns:
        CoverageReport with per-cell counts, empty interior cells (when the
        grid is small enough to enumerate) and L-image violations for even n
    """
    if config.n > MAX_COVERAGE_N:
        raise InvalidInputError(f"coverage probe supports n <= {MAX_COVERAGE_N}, got {config.n}")
    if cells < 1 or samples < 1:
        raise InvalidInputError("cells and samples must be positive")
    values = sample_rows(config, samples, SeededGenerator(config.seed))
    keys, counts = np.unique(cell_keys(values, cells), axis=0, return_counts=True)
    cell_counts = {tuple(int(k) for k in key): int(c) for key, c in zip(keys, counts)}

    interior = empty = None
    if (2 * cells) ** config.n <= MAX_ENUMERATED_CELLS:
        candidates = interior_cells(config.n, cells, epsilon)
        interior = len(candidates)
        empty = sum(1 for cell in candidates if cell not in cell_counts)

    violations = l_image_violations(values) if config.n % 2 == 0 else None
    report = CoverageReport(
        n=config.n,
        method=config.resolved_method,
        buckets=cells,
        samples=samples,
        occupied_cells=len(cell_counts),
        interior_cells=interior,
        empty_interior_cells=empty,
        l_image_violations=violations,
        cell_counts=cell_counts,
    )
    logger.info(f"Coverage n={config.n}: {report.occupied_cells} cells occupied, {empty} interior cells empty")
    return report

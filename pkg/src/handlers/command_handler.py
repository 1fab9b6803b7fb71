"""
Handlers behind the command-line subcommands.

Each handler takes the parsed flags plus process settings, writes its
artifact and returns a CommandResult; exceptions propagate to the toolkit,
which turns them into exit codes.
"""
import logging
from argparse import Namespace
from collections import Counter
from dataclasses import dataclass, field
from functools import partial
from multiprocessing import Pool

import numpy as np

from src.analysis.gerow_robson import GrVerdict, verify_no_gr_density
from src.analysis.statistics import (
    MIN_COVARIANCE_COUNT,
    balance_report,
    bonferroni_level,
    chi_square_uniformity,
    covariance_summary,
    ks_uniformity,
    variance_reduction_experiment,
)
from src.config import Settings
from src.exceptions import ArtifactError, UsageError
from src.geometry.polytope import BalancedVector, build_simplex_model, embed
from src.handlers.artifacts import RunManifest, read_samples_csv, write_json_report, write_samples_csv
from src.services.densities import parse_density, polynomial_from_flag
from src.services.rng import SeededGenerator
from src.services.sampler_service import SampleBatch, SamplerConfig, sample_rows

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FAILURE = 3
EXIT_IO = 4

UNIFORMITY_LEVEL = 0.01


@dataclass
class CommandResult:
    exit_code: int
    body: dict = field(default_factory=dict)


def _flags(args: Namespace, *names: str) -> dict:
    return {name: getattr(args, name) for name in names}


def cmd_sample(args: Namespace, settings: Settings) -> CommandResult:
    if args.count < 0:
        raise UsageError(f"--count must be >= 0, got {args.count}")
    density = parse_density(args.g) if args.g else None
    config = SamplerConfig(n=args.n, method=args.method, seed=args.seed, g_density=density)

    values = sample_rows(config, args.count, SeededGenerator(args.seed))
    manifest = RunManifest("sample", _flags(args, "n", "method", "count", "seed", "g"), seed=args.seed)
    write_samples_csv(args.out, values, manifest)
    return CommandResult(EXIT_OK, {"rows": int(values.shape[0]), "n": config.n, "method": config.resolved_method, "out": str(args.out)})


def cmd_verify_gr(args: Namespace, settings: Settings) -> CommandResult:
    """Classify every n in [--from, --to]; results stay ordered by n."""
    first, last = args.from_, args.to
    if first < 3:
        raise UsageError(f"--from must be >= 3, got {first}")
    if last < first:
        raise UsageError(f"--to ({last}) is below --from ({first})")
    jobs = args.jobs or settings.jobs
    task = partial(verify_no_gr_density, refine_bits=settings.root_refine_bits)
    dimensions = range(first, last + 1)

    logger.info(f"Verifying n = {first}..{last} with {jobs} worker(s)")
    if jobs > 1:
        with Pool(processes=jobs) as pool:
            reports = pool.map(task, dimensions)
    else:
        reports = [task(n) for n in dimensions]

    verdicts = Counter(r.verdict.value for r in reports)
    failed = [r.n for r in reports if r.n >= 5 and r.verdict != GrVerdict.NO_DENSITY_PROVEN]
    summary = {"count": len(reports), "verdicts": dict(verdicts), "inconclusive": failed}
    manifest = RunManifest("verify-gr", {"from": first, "to": last, "jobs": jobs, "refine_bits": settings.root_refine_bits})
    write_json_report(args.out, manifest, [r.to_dict() for r in reports], summary)
    return CommandResult(EXIT_FAILURE if failed else EXIT_OK, summary)


def cmd_stats(args: Namespace, settings: Settings) -> CommandResult:
    table = read_samples_csv(args.input)
    if table.values.shape[0] == 0:
        raise ArtifactError(f"{args.input} has no data rows")
    batch = SampleBatch(values=table.values, validate=False)

    uniformity = [ks_uniformity(batch, k) for k in range(batch.n)]
    chi_square = [chi_square_uniformity(batch, k) for k in range(batch.n)]
    balance = balance_report(batch)
    covariance = covariance_summary(batch) if batch.count >= MIN_COVARIANCE_COUNT else None

    level = bonferroni_level(UNIFORMITY_LEVEL, batch.n)
    summary = {
        "n": batch.n,
        "count": batch.count,
        "uniformity_level": level,
        "uniform_marginals": all(u.p_value > level for u in uniformity),
        "balanced": balance.balanced,
        "max_abs_sum": balance.max_abs_sum,
        "alpha_hat": covariance.alpha_hat if covariance else None,
        "sum_identity_hat": covariance.sum_identity_hat if covariance else None,
    }
    results = [
        {"uniformity": [u.to_dict() for u in uniformity]},
        {"chi_square": [c.to_dict() for c in chi_square]},
        {"balance": balance.to_dict()},
        {"covariance": covariance.to_dict() if covariance else None},
    ]
    manifest = RunManifest("stats", {"in": str(args.input), "source": table.manifest})
    write_json_report(args.report, manifest, results, summary)
    return CommandResult(EXIT_OK if balance.balanced else EXIT_FAILURE, summary)


def cmd_demo_variance(args: Namespace, settings: Settings) -> CommandResult:
    try:
        coefficients = polynomial_from_flag(args.fn)
    except ValueError as e:
        raise UsageError(str(e)) from e
    result = variance_reduction_experiment(coefficients, args.n, args.trials, SeededGenerator(args.seed), method=args.method)
    body = result.to_dict()
    if args.out:
        manifest = RunManifest("demo-variance", _flags(args, "n", "fn", "trials", "seed", "method"), seed=args.seed)
        write_json_report(args.out, manifest, [body], {"var_iid": result.var_iid, "var_rbs": result.var_rbs, "mean_rbs": result.mean_rbs})
    return CommandResult(EXIT_OK, body)


def cmd_embed(args: Namespace, settings: Settings) -> CommandResult:
    """Append the (n-1) model coordinates of every row."""
    table = read_samples_csv(args.input)
    n = table.values.shape[1]
    model = build_simplex_model(n)
    points = np.array([embed(model, BalancedVector(tuple(row))) for row in table.values]).reshape(-1, n - 1)

    manifest = RunManifest("embed", {"in": str(args.input), "out": str(args.out), "source": table.manifest})
    write_samples_csv(args.out, table.values, manifest, embedding=points)
    return CommandResult(EXIT_OK, {"rows": int(points.shape[0]), "n": n, "out": str(args.out)})

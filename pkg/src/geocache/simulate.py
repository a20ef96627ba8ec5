"""Monte Carlo verification of hit probabilities and Boolean coverage.

All randomness flows through numpy Generators seeded per trial block from
(seed, block_index), so totals are reproducible regardless of how blocks
are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .coverage import CoverageDistribution
from .errors import ParameterError
from .policy import GeneralPolicy
from .popularity import PopularityDistribution

__all__ = ["SimReport", "simulate_hits", "simulate_boolean_ppp", "poisson_gof_pvalue"]

_TRIAL_BLOCK = 1 << 14


@dataclass(frozen=True)
class SimReport:
    estimate: float
    stderr: float
    trials: int
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "trials": self.trials,
            "seed": self.seed,
        }


def _trial_blocks(trials: int):
    start = 0
    index = 0
    while start < trials:
        yield index, min(_TRIAL_BLOCK, trials - start)
        start += _TRIAL_BLOCK
        index += 1


def _block_rng(seed: int, block_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(block_index)]))


def simulate_hits(
    policy: GeneralPolicy,
    pop: PopularityDistribution,
    dist: CoverageDistribution,
    trials: int,
    seed: int = 0,
) -> SimReport:
    """Estimate the hit probability by sampling (N, I) independently.

    A trial succeeds iff the smallest block containing the requested item
    has cardinality at most the sampled coverage number.
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    if seed < 0:
        raise ParameterError("seed must be a nonnegative integer")
    J = pop.size
    if policy.max_index() > J:
        raise ParameterError("policy references items beyond the catalog")

    # per-item hit threshold; items cached nowhere can never be hit
    r = policy.min_cardinalities(J)
    never = dist.kmax + 1
    threshold = np.array([never if v is None else v for v in r], dtype=np.int64)

    support = np.arange(dist.pmf.size)
    successes = 0
    for block, count in _trial_blocks(trials):
        rng = _block_rng(seed, block)
        n_cov = rng.choice(support, size=count, p=dist.pmf)
        items = rng.choice(J, size=count, p=pop.probs)
        successes += int(np.count_nonzero(threshold[items] <= n_cov))

    estimate = successes / trials
    stderr = math.sqrt(estimate * (1.0 - estimate) / trials)
    return SimReport(estimate=estimate, stderr=stderr, trials=trials, seed=seed)


def simulate_boolean_ppp(
    lam: float,
    radius: float,
    window_side: float,
    trials: int,
    seed: int = 0,
) -> CoverageDistribution:
    """Empirical coverage-count distribution of a planar Poisson process.

    Stations land uniformly in a square window wrapped into a torus (no
    edge bias); the coverage count is the number of stations within
    ``radius`` of the window center. The pmf of the count converges to
    Poisson(lam * pi * radius^2).
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    if seed < 0:
        raise ParameterError("seed must be a nonnegative integer")
    if not (lam > 0.0 and math.isfinite(lam)):
        raise ParameterError(f"intensity must be positive, got {lam}")
    if radius < 0.0:
        raise ParameterError(f"radius must be >= 0, got {radius}")
    if window_side < 10.0 * radius or window_side <= 0.0:
        raise ParameterError("window side must be at least 10x the radius")

    mu = lam * window_side * window_side
    center = 0.5 * window_side
    r2 = radius * radius
    histogram = np.zeros(8, dtype=np.int64)
    for block, count in _trial_blocks(trials):
        rng = _block_rng(seed, block)
        n_points = rng.poisson(mu, size=count)
        total = int(n_points.sum())
        xy = rng.random((total, 2)) * window_side
        d = np.abs(xy - center)
        d = np.minimum(d, window_side - d)  # toroidal metric
        inside = (d * d).sum(axis=1) <= r2
        trial_ids = np.repeat(np.arange(count), n_points)
        covered = np.bincount(trial_ids[inside], minlength=count)
        block_hist = np.bincount(covered, minlength=histogram.size)
        if block_hist.size > histogram.size:
            histogram = np.concatenate(
                (histogram, np.zeros(block_hist.size - histogram.size, dtype=np.int64))
            )
        histogram[: block_hist.size] += block_hist

    last = int(np.max(np.nonzero(histogram)[0])) if histogram.any() else 0
    histogram = histogram[: last + 1]
    return CoverageDistribution(
        pmf=histogram / trials,
        model_label="boolean-ppp-empirical",
        meta={
            "lambda": lam,
            "radius": radius,
            "window_side": window_side,
            "trials": trials,
            "seed": seed,
            "counts": histogram.tolist(),
        },
    )


def poisson_gof_pvalue(empirical: CoverageDistribution, mu: float, max_bin: int = 8) -> float:
    """Chi-square goodness-of-fit p-value of empirical counts against Poisson(mu).

    Counts are binned at 0..max_bin-1 with everything >= max_bin lumped
    into the final category, matching the expected Poisson masses.
    """
    counts = empirical.meta.get("counts")
    trials = empirical.meta.get("trials")
    if counts is None or trials is None:
        raise ParameterError("empirical distribution lacks counts/trials metadata")
    counts = np.asarray(counts, dtype=float)
    observed = np.zeros(max_bin + 1)
    upto = min(max_bin, counts.size)
    observed[:upto] = counts[:upto]
    if counts.size > max_bin:
        observed[max_bin] = counts[max_bin:].sum()
    expected = stats.poisson.pmf(np.arange(max_bin), mu)
    expected = np.append(expected, stats.poisson.sf(max_bin - 1, mu)) * trials
    result = stats.chisquare(observed, expected)
    return float(result.pvalue)

"""Shared random-instance generators for the test suite."""

import math

import numpy as np
import pytest

from geocache import CoverageDistribution, PopularityDistribution


def random_popularity(rng, J: int) -> PopularityDistribution:
    w = rng.random(J) + 1e-3
    w = np.sort(w)[::-1]
    return PopularityDistribution(w / math.fsum(w.tolist()))


def random_coverage(rng, kmax: int | None = None) -> CoverageDistribution:
    """Random finite-support coverage pmf; some entries zeroed for variety."""
    if kmax is None:
        kmax = int(rng.integers(1, 7))
    w = rng.random(kmax + 1)
    w[rng.random(kmax + 1) < 0.25] = 0.0
    if w.sum() <= 0.0:
        w[int(rng.integers(0, kmax + 1))] = 1.0
    return CoverageDistribution(pmf=w / math.fsum(w.tolist()), model_label="random")


def random_instance(rng, max_J: int = 12, max_L: int = 4):
    J = int(rng.integers(2, max_J + 1))
    L = int(rng.integers(1, max_L + 1))
    return random_popularity(rng, J), random_coverage(rng), L


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)

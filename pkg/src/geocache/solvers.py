"""Caching-policy constructions: DP optimum, greedy heuristics, baselines.

Solver names used throughout (and on the CLI):
  onc    -- optimal network-coding policy from the dynamic program
  ggb    -- greedy with general (possibly overlapping) blocks
  gdbnc  -- greedy with disjoint consecutive blocks
  mp     -- most-popular singletons
  ind    -- optimized independent randomized caching
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .coverage import CoverageDistribution
from .errors import ParameterError
from .policy import (
    GeneralPolicy,
    StructuredPolicy,
    canonical_sizes,
    hit_probability_general,
    hit_probability_structured,
)
from .popularity import PopularityDistribution

__all__ = [
    "SolverResult",
    "IndPolicy",
    "solve_dp",
    "greedy_general",
    "greedy_disjoint",
    "most_popular",
    "independent_caching",
    "greedy_bound_check",
    "BLOCK_SOLVERS",
]


@dataclass(frozen=True)
class SolverResult:
    policy: object
    hit_prob: float
    solver_name: str
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not (-1e-12 <= self.hit_prob <= 1.0 + 1e-12):
            raise ParameterError(f"hit probability out of [0,1]: {self.hit_prob}")


@dataclass(frozen=True)
class IndPolicy:
    """Marginal caching probabilities of the independent randomized baseline."""

    b: np.ndarray
    multiplier: float

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        if b.ndim != 1 or b.size < 1:
            raise ParameterError("caching probabilities must form a nonempty vector")
        if np.any(b < -1e-12) or np.any(b > 1.0 + 1e-12):
            raise ParameterError("caching probabilities must lie in [0,1]")
        b = np.clip(b, 0.0, 1.0)
        b.flags.writeable = False
        object.__setattr__(self, "b", b)


def _tails_for_search(dist: CoverageDistribution, J: int) -> np.ndarray:
    """Pbar(0..J) followed by an exact-zero sentinel slot at index J+1."""
    return np.concatenate((dist.tail_array(J), [0.0]))


# ---------------------------------------------------------------------------
# Optimal policy via dynamic programming (ONC)
# ---------------------------------------------------------------------------


def solve_dp(pop: PopularityDistribution, dist: CoverageDistribution, L: int) -> SolverResult:
    """Maximize the hit probability over structured policies by backward DP.

    Stage l holding n already-cached items scores each candidate size x by
    A([n+1, n+x]) * Pbar(x) plus the best continuation; the argmax chain is
    unrolled into sizes and reported in canonical nondecreasing order
    (reordering stage optima never changes the value). O(L * J^2).
    """
    if L < 1:
        raise ParameterError(f"block count must be >= 1, got {L}")
    J = pop.size
    prefix = pop.prefix
    tails = dist.tail_array(J)

    value = np.zeros((L + 2, J + 1))
    choice = np.zeros((L + 1, J + 1), dtype=int)
    for l in range(L, 0, -1):
        for n in range(J + 1):
            gains = (prefix[n:] - prefix[n]) * tails[: J - n + 1] + value[l + 1, n:]
            x = int(np.argmax(gains))  # first max: smallest size wins ties
            value[l, n] = gains[x]
            choice[l, n] = x

    raw = []
    n = 0
    for l in range(1, L + 1):
        x = int(choice[l, n])
        raw.append(x)
        n += x

    policy = StructuredPolicy(canonical_sizes(raw))
    hit = hit_probability_structured(policy, pop, dist)
    return SolverResult(
        policy=policy,
        hit_prob=hit,
        solver_name="onc",
        diagnostics={
            "dp_value": float(value[1, 0]),
            "raw_sizes": raw,
            "stage_maximizations": L * (J + 1),
        },
    )


# ---------------------------------------------------------------------------
# Greedy with general blocks (GGB)
# ---------------------------------------------------------------------------


def _best_first_block(prefix: np.ndarray, tails: np.ndarray, J: int) -> int:
    gains = (prefix[1:] - prefix[0]) * tails[1 : J + 1]
    return int(np.argmax(gains)) + 1


def greedy_general(pop: PopularityDistribution, dist: CoverageDistribution, K: int) -> SolverResult:
    """Greedy marginal-gain policy over arbitrary content subsets.

    The first block is the best popularity prefix. Each later block adds,
    over candidate cardinalities c, the top-c items ranked by the marginal
    gain a_j * (Pbar(c) - Pbar(r_j))^+ where r_j is the smallest block
    already covering j; the best (c, set) pair wins. Ties prefer smaller
    cardinality, then the lexicographically smallest item set.
    """
    if K < 1:
        raise ParameterError(f"block count must be >= 1, got {K}")
    J = pop.size
    probs = pop.probs
    tails = _tails_for_search(dist, J)
    sentinel = J + 1  # "not cached anywhere": tail contribution exactly 0

    m1 = _best_first_block(pop.prefix, tails, J)
    blocks = [frozenset(range(1, m1 + 1))]
    r = np.full(J, sentinel, dtype=int)
    r[:m1] = m1

    item_order = np.arange(J)
    evaluations = J
    for _ in range(2, K + 1):
        covered_tail = tails[r]
        best = None  # (gain, c, top_indices)
        for c in range(1, J + 1):
            g = probs * np.maximum(tails[c] - covered_tail, 0.0)
            order = np.lexsort((item_order, -g))
            top = order[:c]
            gain = float(np.sum(g[top]))
            evaluations += 1
            if best is None or gain > best[0]:
                best = (gain, c, np.sort(top))
        _, c, top = best
        blocks.append(frozenset(int(j) + 1 for j in top))
        r[top] = np.minimum(r[top], c)

    policy = GeneralPolicy(tuple(blocks))
    hit = hit_probability_general(policy, pop, dist)
    return SolverResult(
        policy=policy,
        hit_prob=hit,
        solver_name="ggb",
        diagnostics={"candidate_evaluations": evaluations},
    )


# ---------------------------------------------------------------------------
# Greedy with disjoint consecutive blocks (GDBNC)
# ---------------------------------------------------------------------------


def greedy_disjoint(
    pop: PopularityDistribution,
    dist: CoverageDistribution,
    L: int,
    *,
    nondecreasing: bool = False,
) -> SolverResult:
    """Greedy over consecutive disjoint blocks of the popularity ranking.

    Block l >= 2 takes the size maximizing A([used+1, used+m]) * Pbar(m),
    unconstrained by default; ``nondecreasing`` instead restricts each block
    to sizes >= the previous one. The result is reported in canonical order.
    """
    if L < 1:
        raise ParameterError(f"block count must be >= 1, got {L}")
    J = pop.size
    prefix = pop.prefix
    tails = _tails_for_search(dist, J)

    m1 = _best_first_block(prefix, tails, J)
    raw = [m1]
    used = m1
    for _ in range(2, L + 1):
        lo = raw[-1] if nondecreasing else 0
        if lo > J - used:
            raw.append(0)
            continue
        best_m, best_gain = lo, (prefix[used + lo] - prefix[used]) * tails[lo]
        for m in range(lo + 1, J - used + 1):
            gain = (prefix[used + m] - prefix[used]) * tails[m]
            if gain > best_gain:
                best_m, best_gain = m, gain
        raw.append(best_m)
        used += best_m

    policy = StructuredPolicy(canonical_sizes(raw))
    hit = hit_probability_structured(policy, pop, dist)
    return SolverResult(
        policy=policy,
        hit_prob=hit,
        solver_name="gdbnc",
        diagnostics={"raw_sizes": raw, "nondecreasing": nondecreasing},
    )


# ---------------------------------------------------------------------------
# Most-popular baseline (MP)
# ---------------------------------------------------------------------------


def most_popular(pop: PopularityDistribution, dist: CoverageDistribution, L: int) -> SolverResult:
    """Cache the L most popular items, one per block, no coding."""
    if L < 1:
        raise ParameterError(f"block count must be >= 1, got {L}")
    policy = StructuredPolicy((1,) * min(L, pop.size))
    hit = hit_probability_structured(policy, pop, dist)
    return SolverResult(policy=policy, hit_prob=hit, solver_name="mp", diagnostics={})


# ---------------------------------------------------------------------------
# Independent randomized caching baseline (IND)
# ---------------------------------------------------------------------------


def _pgf_coeffs(dist: CoverageDistribution):
    pmf = dist.pmf
    deriv = pmf[1:] * np.arange(1, pmf.size)
    return pmf, deriv


def _ind_objective(probs, pmf_coeffs, b) -> float:
    hit_terms = probs * (1.0 - npoly.polyval(1.0 - b, pmf_coeffs))
    return math.fsum(hit_terms.tolist())


def independent_caching(
    pop: PopularityDistribution, dist: CoverageDistribution, L: int
) -> tuple[IndPolicy, float]:
    """Optimize marginal caching probabilities b for independent sampling.

    Each station draws its cache contents independently with marginals b,
    so item j is hit with probability 1 - G(1-b_j) where G is the pgf of
    the coverage number. The concave program max sum_j a_j (1 - G(1-b_j))
    s.t. sum b_j <= L, 0 <= b_j <= 1 is solved by bisection on the dual
    multiplier mu with a per-item root-find of a_j G'(1-b) = mu.
    """
    if L < 1:
        raise ParameterError(f"block count must be >= 1, got {L}")
    J = pop.size
    probs = pop.probs
    pmf_coeffs, deriv_coeffs = _pgf_coeffs(dist)

    if L >= J:
        b = np.ones(J)
        return IndPolicy(b=b, multiplier=0.0), _ind_objective(probs, pmf_coeffs, b)

    gp0 = float(npoly.polyval(0.0, deriv_coeffs)) if deriv_coeffs.size else 0.0
    gp1 = float(npoly.polyval(1.0, deriv_coeffs)) if deriv_coeffs.size else 0.0

    if gp1 == 0.0:
        # never covered: hit probability is 0 for every feasible b
        b = np.zeros(J)
        b[:L] = 1.0
        return IndPolicy(b=b, multiplier=0.0), 0.0

    if dist.pmf.size <= 2 or not np.any(dist.pmf[2:] > 0.0):
        # single-coverage regime: G' is constant, the program is a box LP
        b = np.zeros(J)
        b[:L] = 1.0
        mu = float(probs[L - 1]) * gp1
        return IndPolicy(b=b, multiplier=mu), _ind_objective(probs, pmf_coeffs, b)

    def b_of_mu(mu: float) -> np.ndarray:
        t = np.where(probs > 0.0, mu / np.where(probs > 0.0, probs, 1.0), np.inf)
        b = np.zeros(J)
        b[t <= gp0] = 1.0
        mid = (t > gp0) & (t < gp1)
        if np.any(mid):
            target = t[mid]
            zlo = np.zeros(target.size)
            zhi = np.ones(target.size)
            for _ in range(80):
                zm = 0.5 * (zlo + zhi)
                below = npoly.polyval(zm, deriv_coeffs) < target
                zlo = np.where(below, zm, zlo)
                zhi = np.where(below, zhi, zm)
            b[mid] = 1.0 - 0.5 * (zlo + zhi)
        return b

    b = b_of_mu(0.0)
    total = float(b.sum())
    if total <= L + 1e-12:
        return IndPolicy(b=b, multiplier=0.0), _ind_objective(probs, pmf_coeffs, b)

    lo, hi = 0.0, float(probs[0]) * gp1
    best = (abs(total - L), b, 0.0)
    for _ in range(200):
        mu = 0.5 * (lo + hi)
        b = b_of_mu(mu)
        total = float(b.sum())
        gap = abs(total - L)
        if gap < best[0]:
            best = (gap, b, mu)
        if gap < 1e-9:
            break
        if total > L:
            lo = mu
        else:
            hi = mu
        if hi - lo <= 1e-18 * max(1.0, hi):
            break
    gap, b, mu = best
    if gap >= 1e-8:
        raise ParameterError(
            f"dual bisection stalled with |sum(b) - L| = {gap:.3e}"
        )
    return IndPolicy(b=b, multiplier=mu), _ind_objective(probs, pmf_coeffs, b)


# ---------------------------------------------------------------------------
# Greedy suboptimality bound report
# ---------------------------------------------------------------------------


def greedy_bound_check(
    pop: PopularityDistribution, dist: CoverageDistribution, L: int, K: int
) -> dict:
    """Check the (1 - e^(-L/K)) guarantee of the general-blocks greedy.

    The greedy run with K >= L blocks must reach at least (1 - e^(-L/K))
    times the optimal L-block hit probability (the DP optimum over
    structured policies equals the general optimum).
    """
    if not (K >= L >= 1):
        raise ParameterError(f"need K >= L >= 1, got L={L}, K={K}")
    greedy = greedy_general(pop, dist, K)
    optimal = solve_dp(pop, dist, L)
    factor = 1.0 - math.exp(-L / K)
    bound = factor * optimal.hit_prob
    return {
        "L": L,
        "K": K,
        "greedy_hit": greedy.hit_prob,
        "optimal_hit": optimal.hit_prob,
        "factor": factor,
        "bound": bound,
        "satisfied": bool(greedy.hit_prob >= bound - 1e-12),
        "slack": greedy.hit_prob - bound,
    }


BLOCK_SOLVERS = {
    "onc": solve_dp,
    "ggb": greedy_general,
    "gdbnc": greedy_disjoint,
    "mp": most_popular,
}

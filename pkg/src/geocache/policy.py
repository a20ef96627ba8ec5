"""Caching-policy representations and hit-probability evaluation.

A policy assigns content subsets C_1..C_L to the L memory blocks every
station carries; block i stores one linear combination of the items in
C_i, so a requested item j is recoverable iff some block containing j has
cardinality at most the coverage number N. Hence the hit probability

    P_hit = sum_j a_j * Pbar(min{|C_i| : j in C_i}),   min{} = infinity.

For pairwise-disjoint consecutive blocks this reduces to
sum_k A(C_k) * Pbar(|C_k|). Both evaluators below expand to identical
per-item terms and sum them exactly rounded, so they agree bitwise on
disjoint-interval policies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .coverage import CoverageDistribution
from .errors import ParameterError
from .popularity import PopularityDistribution

__all__ = [
    "GeneralPolicy",
    "StructuredPolicy",
    "canonical_sizes",
    "hit_probability_general",
    "hit_probability_structured",
    "canonicalize",
]


@dataclass(frozen=True)
class GeneralPolicy:
    """L content subsets (overlap allowed), indices 1-based."""

    blocks: tuple[frozenset[int], ...]

    def __post_init__(self):
        blocks = tuple(frozenset(b) for b in self.blocks)
        if len(blocks) < 1:
            raise ParameterError("policy needs at least one block")
        for b in blocks:
            if not b:
                raise ParameterError("blocks must be nonempty")
            if any((not isinstance(j, int)) or j < 1 for j in b):
                raise ParameterError("content indices must be integers >= 1")
        object.__setattr__(self, "blocks", blocks)

    @property
    def L(self) -> int:
        return len(self.blocks)

    def max_index(self) -> int:
        return max(max(b) for b in self.blocks)

    def min_cardinalities(self, J: int) -> list:
        """Per item j=1..J the smallest cardinality of a block containing j (None if absent)."""
        r = [None] * J
        for block in self.blocks:
            c = len(block)
            for j in block:
                if j <= J and (r[j - 1] is None or c < r[j - 1]):
                    r[j - 1] = c
        return r

    def to_json_dict(self) -> dict:
        return {"type": "general", "blocks": [sorted(b) for b in self.blocks]}


@dataclass(frozen=True)
class StructuredPolicy:
    """Consecutive disjoint blocks encoded by their sizes (0 = unused block).

    Nonzero sizes must be nondecreasing; block k covers the interval
    starting right after the blocks before it.
    """

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(m) for m in self.sizes)
        if len(sizes) < 1:
            raise ParameterError("structured policy needs at least one block size")
        if any(m < 0 for m in sizes):
            raise ParameterError("block sizes must be >= 0")
        nonzero = [m for m in sizes if m > 0]
        if any(b < a for a, b in zip(nonzero, nonzero[1:])):
            raise ParameterError("nonzero block sizes must be nondecreasing")
        object.__setattr__(self, "sizes", sizes)

    @property
    def L(self) -> int:
        return len(self.sizes)

    @property
    def total_items(self) -> int:
        return sum(self.sizes)

    def intervals(self) -> list:
        """(start, end, size) of each used block, 1-based inclusive."""
        out = []
        start = 1
        for m in self.sizes:
            if m > 0:
                out.append((start, start + m - 1, m))
                start += m
        return out

    def to_general(self) -> GeneralPolicy:
        blocks = tuple(
            frozenset(range(s, e + 1)) for s, e, _ in self.intervals()
        )
        if not blocks:
            raise ParameterError("structured policy with all-zero sizes has no blocks")
        return GeneralPolicy(blocks)

    def to_json_dict(self) -> dict:
        return {"type": "structured", "sizes": list(self.sizes)}


def canonical_sizes(sizes) -> tuple[int, ...]:
    """Nonzero sizes sorted nondecreasing, zero sizes trailing."""
    nz = sorted(m for m in sizes if m > 0)
    return tuple(nz) + (0,) * (len(tuple(sizes)) - len(nz))


def policy_from_json_dict(payload: dict):
    kind = payload.get("type")
    if kind == "structured":
        return StructuredPolicy(tuple(payload["sizes"]))
    if kind == "general":
        return GeneralPolicy(tuple(frozenset(b) for b in payload["blocks"]))
    raise ParameterError(f"unknown policy type {kind!r}")


def hit_probability_general(
    policy: GeneralPolicy, pop: PopularityDistribution, dist: CoverageDistribution
) -> float:
    """P_hit of an arbitrary block family (overlap allowed)."""
    J = pop.size
    if policy.max_index() > J:
        raise ParameterError("policy references items beyond the catalog")
    r = policy.min_cardinalities(J)
    probs = pop.probs
    terms = [
        probs[j] * dist.tail_at(r[j]) for j in range(J) if r[j] is not None
    ]
    return math.fsum(terms)


def hit_probability_structured(
    policy: StructuredPolicy, pop: PopularityDistribution, dist: CoverageDistribution
) -> float:
    """P_hit of consecutive disjoint blocks; expands to the same per-item
    terms as the general evaluator, so the two agree exactly."""
    J = pop.size
    if policy.total_items > J:
        raise ParameterError("structured policy exceeds the catalog size")
    probs = pop.probs
    terms = []
    for start, end, m in policy.intervals():
        t = dist.tail_at(m)
        terms.extend(probs[j - 1] * t for j in range(start, end + 1))
    return math.fsum(terms)


def canonicalize(
    policy: GeneralPolicy, pop: PopularityDistribution, dist: CoverageDistribution
) -> StructuredPolicy:
    """Reduce a general policy to a structured one of no smaller hit probability.

    Applies three value-monotone moves: keep each duplicated item only in a
    smallest containing block, repack onto the most popular items, and sort
    block sizes nondecreasing so more popular items land in smaller blocks.
    The coverage distribution only enters through the monotonicity argument,
    not the construction; it is accepted to mirror the evaluators' contract.
    """
    J = pop.size
    if policy.max_index() > J:
        raise ParameterError("policy references items beyond the catalog")
    del dist
    blocks = [set(b) for b in policy.blocks]
    owners = {}
    for idx, b in enumerate(blocks):
        for j in b:
            owners.setdefault(j, []).append(idx)
    for j in sorted(owners):
        containing = [i for i in owners[j] if j in blocks[i]]
        if len(containing) > 1:
            keep = min(containing, key=lambda i: (len(blocks[i]), i))
            for i in containing:
                if i != keep:
                    blocks[i].discard(j)
    return StructuredPolicy(canonical_sizes(len(b) for b in blocks))

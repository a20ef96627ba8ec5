"""Content popularity distributions and interval-mass queries.

Contents are indexed 1..J in nonincreasing order of request probability.
All solvers consume interval masses A([k, l]) = sum_{j=k}^{l} a_j, served
in O(1) from a prefix-sum table.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParameterError

_SUM_TOL = 1e-9


@dataclass(frozen=True)
class PopularityDistribution:
    """Nonincreasing probability vector a_1 >= ... >= a_J with prefix sums."""

    probs: np.ndarray
    prefix: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size < 1:
            raise ParameterError("popularity requires a nonempty 1-D probability vector")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0.0):
            raise ParameterError("popularity probabilities must be finite and nonnegative")
        if np.any(np.diff(probs) > 1e-15):
            raise ParameterError("popularity probabilities must be nonincreasing")
        total = math.fsum(probs.tolist())
        if abs(total - 1.0) > 1e-12:
            raise ParameterError(f"popularity probabilities must sum to 1, got {total!r}")
        probs = probs.copy()
        probs.flags.writeable = False
        prefix = np.concatenate(([0.0], np.cumsum(probs)))
        prefix.flags.writeable = False
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "prefix", prefix)

    @property
    def size(self) -> int:
        return int(self.probs.size)

    def mass(self, k: int, l: int) -> float:
        """Total probability of the catalog interval [k, l]; empty intervals give 0."""
        if k < 1:
            raise ParameterError(f"interval start must be >= 1, got {k}")
        j = self.size
        l = min(l, j)
        if k > l:
            return 0.0
        return float(self.prefix[l] - self.prefix[k - 1])


def from_probs(raw, *, already_sorted: bool = False) -> PopularityDistribution:
    """Build a popularity distribution from a raw nonnegative vector.

    Values are sorted into nonincreasing order (content indices are
    popularity ranks) and normalized; a warning is emitted when the input
    was not normalized to within 1e-9.
    """
    arr = np.asarray(raw, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ParameterError("popularity vector must be nonempty and 1-D")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise ParameterError("popularity vector must be finite and nonnegative")
    if not already_sorted:
        arr = np.sort(arr)[::-1]
    total = math.fsum(arr.tolist())
    if total <= 0.0:
        raise ParameterError("popularity vector must have positive total mass")
    if abs(total - 1.0) > _SUM_TOL:
        warnings.warn(
            f"popularity vector sums to {total:.6g}; normalizing", stacklevel=2
        )
    return PopularityDistribution(arr / total)


def zipf(J: int, gamma: float) -> PopularityDistribution:
    """Truncated Zipf popularity: a_j = j^(-gamma) / sum_{i=1}^{J} i^(-gamma)."""
    if J < 1:
        raise ParameterError(f"catalog size must be >= 1, got {J}")
    if not (gamma >= 0.0 and math.isfinite(gamma)):
        raise ParameterError(f"Zipf exponent must be finite and >= 0, got {gamma}")
    j = np.arange(1, J + 1, dtype=float)
    w = j ** (-gamma)
    return PopularityDistribution(w / math.fsum(w.tolist()))


def load_popularity(path) -> PopularityDistribution:
    """Load a popularity vector from JSON ({"probs": [...]}) or CSV/text.

    Text/CSV input carries one probability per line (a single-column CSV).
    Unnormalized vectors are normalized with a warning; values are sorted
    into nonincreasing order.
    """
    p = Path(path)
    text = p.read_text()
    if p.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        payload = json.loads(text)
        if not isinstance(payload, dict) or "probs" not in payload:
            raise ParameterError(f"{p}: JSON popularity input must carry a 'probs' array")
        values = payload["probs"]
    else:
        values = []
        for row in csv.reader(text.splitlines()):
            if not row or not row[0].strip():
                continue
            values.append(float(row[0]))
    return from_probs(values)

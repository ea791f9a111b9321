"""Generative model for pooled-count testing.

Labels take values in {1, ..., d}.  A population of p items carries labels
drawn uniformly over all sequences consistent with a rounded proportion
vector; tests are binary inclusion vectors, and each test reveals the count
of every label among the included items, possibly corrupted by noise.

All randomness flows through explicit seeds (ints or numpy SeedSequence);
no global RNG state is touched, so everything here is safe to run from
parallel workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SeedLike = "int | np.random.SeedSequence | np.random.Generator"


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Proportions:
    """Probability vector over d >= 2 labels, entries strictly positive."""

    pi: np.ndarray

    def __post_init__(self):
        pi = _frozen(np.asarray(self.pi, dtype=float))
        object.__setattr__(self, "pi", pi)
        if pi.ndim != 1 or pi.size < 2:
            raise ValueError("need at least 2 labels")
        if np.any(pi <= 0.0):
            raise ValueError("proportions must be strictly positive")
        if abs(pi.sum() - 1.0) > 1e-9:
            raise ValueError(f"proportions sum to {pi.sum()!r}, not 1")

    @property
    def d(self) -> int:
        return self.pi.size

    @staticmethod
    def uniform(d: int) -> "Proportions":
        return Proportions(np.full(d, 1.0 / d))


@dataclass(frozen=True)
class LabelCounts:
    """Integer items-per-label vector; counts sum to the population size p."""

    counts: np.ndarray

    def __post_init__(self):
        c = _frozen(np.asarray(self.counts, dtype=np.int64))
        object.__setattr__(self, "counts", c)
        if c.ndim != 1 or np.any(c < 0):
            raise ValueError("counts must be a nonnegative integer vector")

    @property
    def p(self) -> int:
        return int(self.counts.sum())

    @property
    def d(self) -> int:
        return self.counts.size


def round_proportions(pi: Proportions, p: int) -> LabelCounts:
    """Round pi*p to integer counts by the largest-remainder method.

    Ties in the fractional parts are broken toward the lowest label index.
    The result is an l-infinity-nearest empirical distribution with exactly
    p items.  Rejects p < d, where some strictly-positive label would be
    forced to zero items.
    """
    if p < pi.d:
        raise ValueError(f"p={p} < d={pi.d}: every label has positive proportion")
    target = pi.pi * p
    base = np.floor(target).astype(np.int64)
    short = p - int(base.sum())
    frac = target - base
    # stable argsort on (-frac, index): largest remainders first, low index wins ties
    order = np.lexsort((np.arange(pi.d), -frac))
    base[order[:short]] += 1
    return LabelCounts(base)


def sample_beta(counts: LabelCounts, seed) -> np.ndarray:
    """Draw a label sequence uniformly over all arrangements of `counts`.

    Builds the label multiset and applies a seeded uniform shuffle, which is
    exactly uniform over the consistent sequences.
    """
    base = np.repeat(np.arange(1, counts.d + 1, dtype=np.int64), counts.counts)
    return _rng(seed).permutation(base)


@dataclass(frozen=True)
class TestDesign:
    """Binary n x p inclusion matrix; one row per test."""

    __test__ = False  # not a pytest collectible despite the name

    rows: np.ndarray
    provenance: str = "explicit"

    def __post_init__(self):
        r = np.asarray(self.rows, dtype=np.int8)
        if r.ndim != 2:
            raise ValueError("rows must be a 2-D binary matrix")
        if r.size and not np.isin(r, (0, 1)).all():
            raise ValueError("design entries must be 0/1")
        object.__setattr__(self, "rows", _frozen(r))

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def p(self) -> int:
        return self.rows.shape[1]


def bernoulli_design(n: int, p: int, q: float, seed) -> TestDesign:
    """i.i.d. Bernoulli(q) inclusion matrix with n tests over p items."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"q={q} outside (0,1)")
    rows = (_rng(seed).random((n, p)) < q).astype(np.int8)
    return TestDesign(rows, provenance=f"bernoulli(q={q})")


def count_labels(beta: np.ndarray, row: np.ndarray, d: int | None = None) -> np.ndarray:
    """Per-label counts of included items for a single test row."""
    beta = np.asarray(beta)
    row = np.asarray(row)
    if beta.shape != row.shape:
        raise ValueError("beta and test row have mismatched lengths")
    if d is None:
        d = int(beta.max()) if beta.size else 0
    return np.bincount(beta[row == 1], minlength=d + 1)[1:]


@dataclass(frozen=True)
class NoiseModel:
    """Observation channel acting on the per-test count vector.

    Variants: noiseless; additive Gaussian with per-entry variance p*sigma2;
    the same Gaussian followed by round-half-away-from-zero and clipping to
    {0, ..., p}.
    """

    kind: str
    sigma2: float | None = None

    NOISELESS = "noiseless"
    GAUSSIAN = "gaussian"
    CLIPPED = "clipped"

    def __post_init__(self):
        if self.kind not in (self.NOISELESS, self.GAUSSIAN, self.CLIPPED):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind != self.NOISELESS and not (self.sigma2 is not None and self.sigma2 > 0):
            raise ValueError("sigma2 must be positive for noisy channels")

    @staticmethod
    def noiseless() -> "NoiseModel":
        return NoiseModel(NoiseModel.NOISELESS)

    @staticmethod
    def gaussian(sigma2: float) -> "NoiseModel":
        return NoiseModel(NoiseModel.GAUSSIAN, sigma2)

    @staticmethod
    def clipped_gaussian(sigma2: float) -> "NoiseModel":
        return NoiseModel(NoiseModel.CLIPPED, sigma2)

    @property
    def is_noiseless(self) -> bool:
        return self.kind == self.NOISELESS


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def noiseless_counts(beta: np.ndarray, design: TestDesign, d: int) -> np.ndarray:
    """n x d matrix of exact per-test label counts."""
    onehot = (np.asarray(beta)[:, None] == np.arange(1, d + 1)[None, :])
    return design.rows.astype(np.int64) @ onehot.astype(np.int64)


def observe(beta: np.ndarray, design: TestDesign, noise: NoiseModel, seed,
            d: int | None = None) -> np.ndarray:
    """Generate the n x d observation matrix for one label assignment.

    Noise is i.i.d. across (test, label) entries given the design, so
    observations across tests are conditionally independent given the design.
    """
    beta = np.asarray(beta)
    if design.p != beta.size:
        raise ValueError("design width does not match population size")
    if d is None:
        d = int(beta.max()) if beta.size else 0
    counts = noiseless_counts(beta, design, d)
    if noise.is_noiseless:
        return counts
    p = beta.size
    z = _rng(seed).normal(0.0, math.sqrt(p * noise.sigma2), size=counts.shape)
    y = counts + z
    if noise.kind == NoiseModel.CLIPPED:
        y = np.clip(_round_half_away(y), 0, p).astype(np.int64)
    return y

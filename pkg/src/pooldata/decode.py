"""Exhaustive maximum-likelihood decoding at desk scale.

Candidates are the label sequences with the prescribed per-label counts,
enumerated in lexicographic order.  ML scoring runs vectorized over the
whole candidate set; ties are broken uniformly at random from a dedicated
seed, and the exact error-probability oracle accounts for that tie rule
analytically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr

from .model import LabelCounts, NoiseModel, TestDesign
from .infotheory import log_multinomial

ENUMERATION_GUARD = 10**7


class EnumerationGuardError(RuntimeError):
    """Candidate set too large for exhaustive treatment."""


def _check_guard(counts: LabelCounts) -> int:
    total = int(round(math.exp(log_multinomial(counts.counts))))
    if total > ENUMERATION_GUARD:
        raise EnumerationGuardError(
            f"|B| = {total} exceeds the {ENUMERATION_GUARD} enumeration guard")
    return total


def enumerate_B(counts: LabelCounts):
    """Yield every sequence with the given counts, lexicographically.

    Streaming successor algorithm with O(p) state; never materializes the
    candidate list.
    """
    _check_guard(counts)
    seq = np.repeat(np.arange(1, counts.d + 1, dtype=np.int8), counts.counts)
    p = seq.size
    if p == 0:
        return
    while True:
        yield seq.copy()
        # standard next-permutation on the multiset
        i = p - 2
        while i >= 0 and seq[i] >= seq[i + 1]:
            i -= 1
        if i < 0:
            return
        j = p - 1
        while seq[j] <= seq[i]:
            j -= 1
        seq[i], seq[j] = seq[j], seq[i]
        seq[i + 1:] = seq[i + 1:][::-1]


def candidate_array(counts: LabelCounts) -> np.ndarray:
    """All candidates as an int8 matrix, rows in lexicographic order."""
    total = _check_guard(counts)
    out = np.empty((total, counts.p), dtype=np.int8)
    for i, b in enumerate(enumerate_B(counts)):
        out[i] = b
    return out


def candidate_counts(cands: np.ndarray, design: TestDesign, d: int) -> np.ndarray:
    """Per-candidate noiseless observations, shape (B, n, d)."""
    xt = design.rows.astype(np.int64).T  # (p, n)
    out = np.empty((cands.shape[0], design.n, d), dtype=np.int64)
    for t in range(1, d + 1):
        out[:, :, t - 1] = (cands == t).astype(np.int64) @ xt
    return out


@dataclass(frozen=True)
class DecodeResult:
    beta_hat: np.ndarray
    tie_count: int
    log_likelihood: float


@dataclass(frozen=True)
class OracleResult:
    pe_exact: float
    pe_unique: float
    candidates_total: int


def _log_cell_prob(centers: np.ndarray, y: np.ndarray, sd: float, p: int) -> np.ndarray:
    """Log-probability that N(center, sd^2) rounds-and-clips to integer y.

    Cells: y=0 gets (-inf, 0.5); y=p gets [p-0.5, inf); interior y gets
    [y-0.5, y+0.5).
    """
    z_hi = (y + 0.5 - centers) / sd
    z_lo = (y - 0.5 - centers) / sd
    with np.errstate(divide="ignore"):
        interior = np.log(np.maximum(ndtr(z_hi) - ndtr(z_lo), 1e-300))
    out = np.where(y <= 0, log_ndtr(z_hi),
                   np.where(y >= p, log_ndtr(-z_lo), interior))
    return out


def _tie_break(indices: np.ndarray, tie_seed) -> int:
    rng = np.random.default_rng(tie_seed)
    return int(indices[rng.integers(indices.size)])


def ml_decode(Y: np.ndarray, X: TestDesign, counts: LabelCounts,
              noise: NoiseModel, tie_seed, candidates: np.ndarray | None = None,
              cand_counts: np.ndarray | None = None) -> DecodeResult:
    """Exhaustive ML estimate over all candidates with the given counts.

    Noiseless: exact consistency with the observation.  Gaussian: least
    squares (the log-likelihood up to constants).  Clipped Gaussian: exact
    per-entry integral of the Gaussian over each rounding/clipping cell.
    Precomputed `candidates` / `cand_counts` may be shared across calls.
    """
    Y = np.asarray(Y)
    if candidates is None:
        candidates = candidate_array(counts)
    if cand_counts is None:
        cand_counts = candidate_counts(candidates, X, counts.d)

    if noise.is_noiseless:
        consistent = np.flatnonzero(
            (cand_counts == Y[None, :, :]).all(axis=(1, 2)))
        if consistent.size == 0:
            raise ValueError("no candidate is consistent with the observation")
        pick = _tie_break(consistent, tie_seed)
        return DecodeResult(candidates[pick].copy(), int(consistent.size), 0.0)

    p = counts.p
    sd = math.sqrt(p * noise.sigma2)
    if noise.kind == NoiseModel.GAUSSIAN:
        resid = cand_counts - Y[None, :, :]
        scores = -np.einsum("bij,bij->b", resid, resid, dtype=float) / (2.0 * sd * sd)
    else:
        logs = _log_cell_prob(cand_counts.astype(float), Y[None, :, :].astype(float),
                              sd, p)
        scores = logs.sum(axis=(1, 2))
    best = scores.max()
    ties = np.flatnonzero(scores == best)
    pick = _tie_break(ties, tie_seed)
    return DecodeResult(candidates[pick].copy(), int(ties.size), float(best))


def approx_success(beta_hat: np.ndarray, beta: np.ndarray, qmax: int) -> bool:
    """True when the estimate is within Hamming distance qmax of the truth."""
    beta_hat = np.asarray(beta_hat)
    beta = np.asarray(beta)
    if beta_hat.shape != beta.shape:
        raise ValueError("length mismatch")
    return int(np.count_nonzero(beta_hat != beta)) <= qmax


def exact_pe_oracle(X: TestDesign, counts: LabelCounts, qmax: int = 0) -> OracleResult:
    """Exact error probability of ML-with-uniform-tie-break, noiseless channel.

    Groups candidates by their full observation matrix; within a collision
    class of size s, the decoder picks uniformly among the s members, so the
    per-truth success probability is the fraction of class members within
    Hamming distance qmax (1/s for exact recovery).
    """
    cands = candidate_array(counts)
    total = cands.shape[0]
    obs = candidate_counts(cands, X, counts.d)
    flat = obs.reshape(total, -1)
    classes: dict[bytes, list[int]] = {}
    for i in range(total):
        classes.setdefault(flat[i].tobytes(), []).append(i)

    success = 0.0
    collided = 0
    for members in classes.values():
        s = len(members)
        if s > 1:
            collided += s
        if qmax == 0:
            success += 1.0  # each class contributes s * (1/s)
        else:
            sub = cands[members]
            dist = (sub[:, None, :] != sub[None, :, :]).sum(axis=2)
            success += (dist <= qmax).sum() / s
    pe_exact = 1.0 - success / total
    return OracleResult(pe_exact=min(max(pe_exact, 0.0), 1.0),
                        pe_unique=collided / total,
                        candidates_total=total)

"""Exact combinatorics and entropy primitives.

All entropies and log-counts are in nats.  Counts are handled in the
log-domain via log-gamma throughout, so population sizes up to 1e6 are fine.
The continuity convention 0*log(0) = 0 applies everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln, logsumexp

from .model import LabelCounts

LOG_2PI_E = math.log(2.0 * math.pi * math.e)


class QuadratureError(RuntimeError):
    """Raised when numerical integration cannot reach its error target."""


@dataclass(frozen=True)
class DiscretePmf:
    """Pmf on a contiguous integer range starting at `start`."""

    start: int
    probs: np.ndarray

    def __post_init__(self):
        pr = np.asarray(self.probs, dtype=float)
        if np.any(pr < 0):
            raise ValueError("negative probability")
        if abs(pr.sum() - 1.0) > 1e-9:
            raise ValueError(f"pmf sums to {pr.sum()!r}")
        pr.setflags(write=False)
        object.__setattr__(self, "probs", pr)

    @property
    def support(self) -> np.ndarray:
        return self.start + np.arange(self.probs.size)

    @property
    def mean(self) -> float:
        return float(np.dot(self.support, self.probs))

    @property
    def variance(self) -> float:
        m = self.mean
        return float(np.dot((self.support - m) ** 2, self.probs))


@dataclass(frozen=True)
class GeniePattern:
    """Per-label unknown-item counts ell, in the context of given label counts.

    Each ell_t is the number of label-t items left unidentified after the
    remaining counts[t] - ell_t are revealed.  The lower-bound formulas only
    depend on the revealed set through ell.
    """

    ell: np.ndarray
    context: LabelCounts

    def __post_init__(self):
        e = np.asarray(self.ell, dtype=np.int64)
        if e.shape != self.context.counts.shape:
            raise ValueError("ell and context have mismatched lengths")
        if np.any(e < 0) or np.any(e > self.context.counts):
            raise ValueError("need 0 <= ell_t <= counts_t for every label")
        e.setflags(write=False)
        object.__setattr__(self, "ell", e)

    @property
    def num_positive(self) -> int:
        return int(np.count_nonzero(self.ell))


def log_multinomial(counts) -> float:
    """log of (sum c_t)! / prod c_t!, exact via log-gamma."""
    c = np.asarray(counts, dtype=np.int64)
    if c.size == 0:
        return 0.0
    return float(gammaln(c.sum() + 1) - gammaln(c + 1).sum())


def log_binomial(n: int, k: int) -> float:
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def log_B_ell(pattern: GeniePattern) -> float:
    """log of the number of completions of the masked positions.

    Equals the multinomial count of the unknown items; when ell matches the
    full context it is the log-size of the whole candidate set.
    """
    return log_multinomial(pattern.ell)


def hypergeometric_pmf(k: int, m: int, p: int) -> DiscretePmf:
    """Count of special items when m of p items are drawn without replacement,
    k of them special.  Support [max(0, k+m-p), min(k, m)]."""
    if not (0 <= k <= p and 0 <= m <= p):
        raise ValueError(f"need 0 <= k,m <= p, got k={k} m={m} p={p}")
    lo = max(0, k + m - p)
    hi = min(k, m)
    j = np.arange(lo, hi + 1)
    logpr = (gammaln(k + 1) - gammaln(j + 1) - gammaln(k - j + 1)
             + gammaln(p - k + 1) - gammaln(m - j + 1) - gammaln(p - k - m + j + 1)
             - (gammaln(p + 1) - gammaln(m + 1) - gammaln(p - m + 1)))
    return DiscretePmf(lo, np.exp(logpr))


def hypergeometric_variance(k: int, m: int, p: int) -> float:
    """Closed-form variance; always at most k/4."""
    if p < 2:
        raise ValueError("need p >= 2")
    return k * (m / p) * ((p - m) / p) * ((p - k) / (p - 1))


def binomial_pmf(n: int, q: float) -> DiscretePmf:
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q={q} outside [0,1]")
    if n == 0 or q == 0.0:
        probs = np.zeros(n + 1)
        probs[0] = 1.0
        return DiscretePmf(0, probs)
    if q == 1.0:
        probs = np.zeros(n + 1)
        probs[-1] = 1.0
        return DiscretePmf(0, probs)
    j = np.arange(n + 1)
    logpr = (gammaln(n + 1) - gammaln(j + 1) - gammaln(n - j + 1)
             + j * math.log(q) + (n - j) * math.log1p(-q))
    return DiscretePmf(0, np.exp(logpr))


def pmf_entropy(pmf: DiscretePmf) -> float:
    """Shannon entropy in nats, 0*log(0) = 0."""
    pr = pmf.probs[pmf.probs > 0]
    return float(-np.dot(pr, np.log(pr)))


def massey_bound(variance: float) -> float:
    """Entropy cap for any integer-valued variable of the given variance:
    half the log of 2*pi*e*(variance + 1/12)."""
    if variance < 0:
        raise ValueError("variance must be nonnegative")
    return 0.5 * math.log(2.0 * math.pi * math.e * (variance + 1.0 / 12.0))


def log_hamming_ball(p: int, d: int, qmax: int) -> float:
    """log of sum_{j<=qmax} C(p,j) (d-1)^j: Hamming-ball size over d-ary
    length-p sequences, computed stably in the log-domain."""
    if not 0 <= qmax <= p:
        raise ValueError(f"qmax={qmax} outside [0, p={p}]")
    j = np.arange(qmax + 1)
    terms = gammaln(p + 1) - gammaln(j + 1) - gammaln(p - j + 1)
    if d > 1:
        terms = terms + j * math.log(d - 1)
    return float(logsumexp(terms))


def _mixture_kl_to_gaussian(offsets: np.ndarray, weights: np.ndarray,
                            noise_var: float) -> float:
    """KL( sum_j w_j N(j, s^2)  ||  N(mixture mean, s^2) ), by quadrature.

    The integrand is small wherever the mixture is close to the matched
    Gaussian, which keeps the result accurate even deep in the low-signal
    regime where the MI is itself tiny.
    """
    s = math.sqrt(noise_var)
    m = float(np.dot(weights, offsets))
    lw = np.log(weights)
    lo = float(offsets.min() - 8.0 * s)
    hi = float(offsets.max() + 8.0 * s)

    def integrand(y):
        logf = logsumexp(lw - 0.5 * ((y - offsets) ** 2) / noise_var)
        logphi = -0.5 * ((y - m) ** 2) / noise_var
        return math.exp(logf - 0.5 * math.log(2 * math.pi * noise_var)) * (logf - logphi)

    # split at component means so each panel is smooth for the adaptive rule
    edges = [lo] + [float(o) for o in offsets if lo < o < hi] + [hi]
    total = 0.0
    err = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        val, e = quad(integrand, a, b, epsabs=1e-12, epsrel=1e-10, limit=400)
        total += val
        err += e
    if err > 1e-6:
        raise QuadratureError(f"quadrature error estimate {err:.3g} exceeds 1e-6")
    return max(total, 0.0)


def gaussian_mixture_entropy(weights: DiscretePmf, noise_var: float) -> float:
    """Differential entropy (nats) of sum_j w_j N(j, noise_var).

    Uses the exact identity h = 0.5*log(2*pi*e*s^2) + Var_w/(2 s^2) - KL,
    where KL is the divergence of the mixture from the moment-matched
    Gaussian; only the KL term needs quadrature.  Absolute error < 1e-6.
    """
    if noise_var <= 0:
        raise ValueError("noise_var must be positive")
    keep = weights.probs > 0
    offsets = weights.support[keep].astype(float)
    w = weights.probs[keep]
    if offsets.size == 1:
        return 0.5 * math.log(2 * math.pi * math.e * noise_var)
    kl = _mixture_kl_to_gaussian(offsets, w, noise_var)
    m = float(np.dot(w, offsets))
    var_w = float(np.dot(w, (offsets - m) ** 2))
    return 0.5 * math.log(2 * math.pi * math.e * noise_var) + var_w / (2 * noise_var) - kl

"""Independent brute-force oracles shared by the unit and acceptance tests."""

import itertools
import math

import numpy as np


def entropy_of_dist(probs):
    return -sum(p * math.log(p) for p in probs if p > 0)


def brute_mi_bernoulli_noiseless(ell, extra, q):
    """I(X0; Y | X1) by joint enumeration over all inclusion patterns.

    X0 covers the sum(ell) unknown items, X1 the sum(extra) revealed ones;
    Y is the per-label total count of included items.  Exact, exponential.
    """
    ell = list(ell)
    extra = list(extra)
    labels0 = [t for t, e in enumerate(ell) for _ in range(e)]
    labels1 = [t for t, e in enumerate(extra) for _ in range(e)]
    d = len(ell)

    def patterns(labels):
        out = []
        for bits in itertools.product((0, 1), repeat=len(labels)):
            prob = 1.0
            counts = [0] * d
            for lab, b in zip(labels, bits):
                prob *= q if b else (1.0 - q)
                counts[lab] += b
            out.append((tuple(counts), prob))
        return out

    pat0 = patterns(labels0)
    pat1 = patterns(labels1)
    mi = 0.0
    for n1, p1 in pat1:
        cond = {}
        for n0, p0 in pat0:
            y = tuple(a + b for a, b in zip(n0, n1))
            cond[y] = cond.get(y, 0.0) + p0
        mi += p1 * entropy_of_dist(cond.values())
    return mi  # H(Y|X0,X1) = 0 in the noiseless channel


def mc_pe_lower_slack(pe_hat, est):
    """3 Wilson half-widths around the estimate."""
    return 3 * max(est.pe_hat - est.ci_low, est.ci_high - est.pe_hat)

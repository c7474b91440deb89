"""Shared statistical utilities for the test suite."""

import math

import numpy as np
from scipy import integrate, stats
from scipy.optimize import brentq


def chi_square_vs_pdf(samples, pdf, lo, hi, bins=100, min_expected=5.0):
    """Chi-square p-value of a sample histogram against an analytic pdf.

    Expected bin masses come from quadrature of ``pdf`` over each bin; bins
    with expected count below ``min_expected`` are pooled into their neighbor
    so the chi-square approximation stays valid.
    """
    samples = np.asarray(samples)
    edges = np.linspace(lo, hi, bins + 1)
    observed = np.histogram(samples, bins=edges)[0].astype(float)
    expected = np.empty(bins)
    for i in range(bins):
        expected[i] = integrate.quad(pdf, edges[i], edges[i + 1], limit=200)[0]
    expected *= len(samples) / expected.sum()

    obs_pooled, exp_pooled = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            obs_pooled.append(acc_o)
            exp_pooled.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 and obs_pooled:
        obs_pooled[-1] += acc_o
        exp_pooled[-1] += acc_e
    obs_pooled = np.array(obs_pooled)
    exp_pooled = np.array(exp_pooled) * (obs_pooled.sum() / sum(exp_pooled))
    return stats.chisquare(obs_pooled, exp_pooled).pvalue


def fit_bounded_exp_rate(samples):
    """Max-likelihood rate of a truncated exponential on [0, 1] via its mean."""
    m = float(np.mean(samples))

    def mean_minus_target(lam):
        return 1.0 / lam - 1.0 / math.expm1(lam) - m

    return brentq(mean_minus_target, 1e-4, 80.0)


def ks_2samp_pvalue(a, b):
    return stats.ks_2samp(a, b).pvalue


class BruteForceStack:
    """Independent reimplementation of the keep-best-distinct stack policy.

    Plain lists and tuples only; used as the oracle for stack equivalence.
    """

    def __init__(self, capacity, r_eq):
        self.capacity = capacity
        self.r_eq = r_eq
        self.items = []  # (value, eval_index, coords)

    def offer(self, value, eval_index, coords):
        if not math.isfinite(value):
            return
        eq = [it for it in self.items
              if sum(abs(a - b) for a, b in zip(it[2], coords)) < self.r_eq]
        if eq:
            if value < min(it[0] for it in eq):
                self.items = [it for it in self.items if it not in eq]
                self.items.append((value, eval_index, coords))
                self.items.sort(key=lambda it: (it[0], it[1]))
            return
        self.items.append((value, eval_index, coords))
        self.items.sort(key=lambda it: (it[0], it[1]))
        if len(self.items) > self.capacity:
            self.items.pop()

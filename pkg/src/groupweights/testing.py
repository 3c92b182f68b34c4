"""Weighted Bonferroni rejection, power formulas and the FWER bound term."""

from dataclasses import dataclass
import warnings

import numpy as np

from groupweights.numstats import DomainError, upper_tail_normal, upper_tail_normal_inv


@dataclass
class RejectionResult:
    """Per-test decisions plus summary counts.

    Test ``j`` is rejected iff ``p_values[j] <= thresholds[j]`` where the
    threshold is ``alpha * weights[j] / m``.
    """

    ids: np.ndarray
    p_values: np.ndarray
    weights: np.ndarray
    thresholds: np.ndarray
    rejected: np.ndarray
    alpha: float
    b_m: float = None

    @property
    def m(self):
        return self.p_values.size

    @property
    def n_rejected(self):
        return int(self.rejected.sum())


def weighted_reject(pvalues, weights, alpha, ids=None, sizes=None):
    """Reject ``H_j`` when ``P_j / w_j <= alpha / m``.

    Weights should average one; a larger deviation than 1e-6 only warns.
    ``sizes`` (group sizes) fills in the ``b_m`` summary when given.
    """
    p = np.asarray(pvalues, dtype=float)
    w = np.asarray(weights, dtype=float)
    if p.shape != w.shape or p.ndim != 1 or p.size == 0:
        raise ValueError(f"p-values {p.shape} and weights {w.shape} must be equal-length, non-empty 1-d arrays")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    m = p.size
    if abs(w.mean() - 1.0) > 1e-6:
        warnings.warn(f"weights average {w.mean():.9g}, not 1; FWER control at alpha is not guaranteed")
    thresholds = alpha * w / m
    if ids is None:
        ids = np.arange(m)
    b_m = fwer_inflation_bound(sizes) if sizes is not None else None
    return RejectionResult(np.asarray(ids), p, w, thresholds, p <= thresholds, alpha, b_m)


def bonferroni_reject(pvalues, alpha, ids=None):
    p = np.asarray(pvalues, dtype=float)
    return weighted_reject(p, np.ones(p.size), alpha, ids)


def per_hypothesis_power(xi, w, m, alpha):
    """Power of one two-sided weighted test with signal ``xi``.

    ``Q(z - xi) + Q(z + xi)`` with ``z = Q^{-1}(alpha w / (2 m))``; needs
    ``0 < w <= m / alpha``.
    """
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0) or np.any(w > m / alpha):
        raise DomainError("weight must lie in (0, m/alpha]")
    xi = np.asarray(xi, dtype=float)
    z = upper_tail_normal_inv(alpha * w / (2.0 * m))
    power = np.asarray(upper_tail_normal(z - xi)) + np.asarray(upper_tail_normal(z + xi))
    return power.item() if power.ndim == 0 else power


def average_power(xis, weights, m, alpha):
    """Mean per-hypothesis power over the tests with ``xi != 0``.

    The denominator is the number of true signals ``m1``, so null tests
    are left out of the sum as well.
    """
    xis = np.asarray(xis, dtype=float)
    weights = np.asarray(weights, dtype=float)
    alt = xis != 0
    if not alt.any():
        raise DomainError("average power needs at least one non-null test")
    return float(np.mean(per_hypothesis_power(xis[alt], weights[alt], m, alpha)))


def fwer_inflation_bound(sizes):
    """``sum_k sqrt(r_k) / sum_k r_k``, the excess-error order for estimated weights."""
    sizes = np.asarray(sizes, dtype=float)
    if sizes.size == 0:
        raise ValueError("need at least one group")
    return float(np.sqrt(sizes).sum() / sizes.sum())

"""Method-of-moments fits of the per-group two-component mixture.

A group's statistics are modelled as ``(1 - pi) N(0, 1) + pi N(xi, 1)``
(normal model) or ``(1 - pi) chi2_1(0) + pi chi2_1(xi**2)`` (chi-square
model).  Both estimators only need the group's sample mean and variance.
"""

from dataclasses import dataclass
import math

import numpy as np


class GroupTooSmallError(ValueError):
    pass


@dataclass(frozen=True)
class GroupSummary:
    group_id: object
    size: int
    mean: float
    variance: float


@dataclass(frozen=True)
class MixtureEstimate:
    """Fitted ``(pi_hat, xi_hat)`` for one group.

    ``degenerate`` marks groups whose moments show no usable signal; those
    carry ``pi_hat == xi_hat == 0``.  ``xi_hat`` keeps the sign of the group
    mean under the normal model; weights use its absolute value.
    """

    group_id: object
    pi_hat: float
    xi_hat: float
    degenerate: bool


def summarize_group(stats, group_id=0):
    stats = np.asarray(stats, dtype=float)
    if stats.size < 2:
        raise GroupTooSmallError(f"group {group_id!r} has {stats.size} statistic(s); need at least 2")
    return GroupSummary(group_id, int(stats.size), float(stats.mean()), float(stats.var(ddof=1)))


def _degenerate(summary):
    return MixtureEstimate(summary.group_id, 0.0, 0.0, True)


def mom_normal(summary):
    """Normal-model fit: ``pi = Y^2 / (Y^2 + S^2 - 1)``, ``xi = Y / pi``.

    The fit is degenerate unless the raw ``pi`` exceeds ``1 / r``.  A raw
    ``pi`` above one is clamped to one.
    """
    y, s2, r = summary.mean, summary.variance, summary.size
    denom = y * y + s2 - 1.0
    if denom <= 0.0 or y == 0.0:
        return _degenerate(summary)
    pi = y * y / denom
    if not math.isfinite(pi) or pi <= 1.0 / r:
        return _degenerate(summary)
    pi = min(pi, 1.0)
    return MixtureEstimate(summary.group_id, pi, y / pi, False)


def chisq_roots(b):
    """Real roots ``(large, small)`` of ``x^2 - b x + 1``, or ``None``.

    The roots multiply to one, so the small root is taken as the
    reciprocal of the large one to avoid cancellation.
    """
    disc = b * b - 4.0
    if disc < 0.0:
        return None
    big = 0.5 * (abs(b) + math.sqrt(disc))
    if b < 0:
        big = -big
    return big, 1.0 / big


def mom_chisq(summary):
    """Chi-square-model fit.

    ``xi^2`` is a root of ``x^2 - b x + 1`` with
    ``b = (S^2 - 1) / (Y - 1) + Y - 5`` and ``pi = (Y - 1) / xi^2``.  The root
    above one is preferred; the one below one is used only when it alone
    passes the ``pi > 1 / r`` guard.  Complex or negative roots, and
    ``Y <= 1``, give a degenerate fit.
    """
    y, s2, r = summary.mean, summary.variance, summary.size
    if not y > 1.0:
        return _degenerate(summary)
    b = (s2 - 1.0) / (y - 1.0) + y - 5.0
    roots = chisq_roots(b)
    if roots is None or roots[0] <= 0.0:
        return _degenerate(summary)
    for x in roots:
        pi = (y - 1.0) / x
        if math.isfinite(pi) and pi > 1.0 / r:
            return MixtureEstimate(summary.group_id, min(pi, 1.0), math.sqrt(x), False)
    return _degenerate(summary)


def estimate_group(stats, group_id, model):
    summary = summarize_group(stats, group_id)
    fit = mom_normal(summary) if model == "normal" else mom_chisq(summary)
    return summary, fit

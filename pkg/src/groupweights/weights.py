"""Optimal group weights: weight function, budget solver and smoothing."""

from dataclasses import dataclass, field
import numpy as np

from groupweights.estimation import estimate_group
from groupweights.numstats import upper_tail_normal

XI_FLOOR = 1e-6
BUDGET_TOL = 1e-10
MAX_ITER = 200


class NoSignalError(ValueError):
    """Every group signal (or raw weight) is zero; use unit weights instead."""


class SolverError(RuntimeError):
    pass


class ConfigurationError(ValueError):
    pass


@dataclass
class TestBattery:
    """``m`` test statistics with a group label per test."""

    __test__ = False  # keep pytest from collecting this class

    stats: np.ndarray
    groups: np.ndarray
    model: str = "normal"
    ids: np.ndarray = None

    def __post_init__(self):
        self.stats = np.asarray(self.stats, dtype=float)
        self.groups = np.asarray(self.groups)
        if self.stats.shape != self.groups.shape or self.stats.ndim != 1:
            raise ValueError("stats and groups must be 1-d arrays of equal length")
        if self.model not in ("normal", "chisq"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.ids is None:
            self.ids = np.arange(self.stats.size)

    @property
    def m(self):
        return self.stats.size


@dataclass(frozen=True)
class BudgetSolution:
    c: float
    achieved_mean_weight: float
    iterations: int
    bracket: tuple


@dataclass
class GroupWeights:
    """Final per-group weights and the fit that produced them.

    ``weights[k]`` applies to every test in ``labels[k]``.  ``budget`` is
    ``None`` when all groups were degenerate and unit weights were used.
    """

    labels: list
    weights: np.ndarray
    sizes: np.ndarray
    budget: BudgetSolution = None
    smoothing_lambda: float = 0.95
    estimates: list = field(default_factory=list)
    summaries: list = field(default_factory=list)
    raw_weights: np.ndarray = None

    @property
    def m(self):
        return int(self.sizes.sum())

    def per_test(self, groups):
        """Expand group weights to one weight per test label in ``groups``."""
        index = {label: k for k, label in enumerate(self.labels)}
        return self.weights[np.array([index[g] for g in np.asarray(groups).tolist()], dtype=int)]


def optimal_weight(xi, c, m, alpha):
    """``(m / alpha) * Q(|xi| / 2 + c / |xi|)`` with ``|xi|`` floored at 1e-6.

    ``Q`` is the standard normal upper tail.  The floor sends the weight to
    0 as ``xi -> 0`` for ``c > 0`` and to ``m / alpha`` for ``c < 0``.
    """
    a = np.maximum(np.abs(np.asarray(xi, dtype=float)), XI_FLOOR)
    w = (m / alpha) * np.asarray(upper_tail_normal(a / 2.0 + c / a))
    return w.item() if w.ndim == 0 else w


def mean_weight(c, xi_by_group, sizes, m, alpha):
    return float(np.dot(sizes, optimal_weight(xi_by_group, c, m, alpha)) / m)


def bisect_decreasing(f, lo, hi, tol=BUDGET_TOL, max_iter=MAX_ITER):
    """Root of a strictly decreasing ``f`` by bisection.

    The bracket ``[lo, hi]`` is pushed outward with doubling width until ``f(lo) >= 0 >= f(hi)``.
    Stops when ``|f(c)| <= tol`` or the bracket collapses to adjacent floats.
    Returns ``(c, f(c), iterations, (lo, hi))``.
    """
    f_lo, f_hi = f(lo), f(hi)
    n = 0
    while f_lo < 0 or f_hi > 0:
        n += 1
        if n > max_iter:
            raise SolverError(f"bracket expansion failed: f({lo})={f_lo}, f({hi})={f_hi}")
        width = hi - lo
        if f_lo < 0:
            lo, hi, f_hi = lo - 2 * width, lo, f_lo
            f_lo = f(lo)
        else:
            lo, hi, f_lo = hi, hi + 2 * width, f_hi
            f_hi = f(hi)
    bracket = (lo, hi)
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if abs(f_mid) <= tol or mid in (lo, hi):
            return mid, f_mid, it, bracket
        if f_mid > 0:
            lo = mid
        else:
            hi = mid
    raise SolverError(f"no convergence after {max_iter} iterations; bracket {bracket}, last {mid}: {f_mid}")


def solve_budget(xi_by_group, sizes, m, alpha):
    """Find the constant ``c`` with ``sum_k r_k w(xi_k, c) = m``."""
    xi = np.abs(np.asarray(xi_by_group, dtype=float))
    sizes = np.asarray(sizes, dtype=float)
    if sizes.sum() != m:
        raise ValueError(f"group sizes sum to {sizes.sum():g}, not m={m}")
    if not np.any(xi > 0):
        raise NoSignalError("all group signals are zero")
    c, resid, iterations, bracket = bisect_decreasing(
        lambda c: mean_weight(c, xi, sizes, m, alpha) - 1.0, -10.0, 10.0)
    return BudgetSolution(float(c), 1.0 + resid, iterations, bracket)


def smooth_and_renorm(raw, sizes, m, lam=0.95, alpha=None):
    """Shrink group weights toward their mean and restore the budget.

    ``w_k <- lam * w_k + (1 - lam) * mean(w)`` with an unweighted mean over
    groups, then rescaled so that ``sum_k r_k w_k = m``.  With ``alpha``
    given, weights are capped at ``m / alpha`` and the excess is spread over
    the uncapped groups.
    """
    raw = np.asarray(raw, dtype=float)
    sizes = np.asarray(sizes, dtype=float)
    if not 0.0 <= lam <= 1.0:
        raise ValueError("smoothing lambda must lie in [0, 1]")
    if not np.any(raw > 0):
        raise NoSignalError("all raw weights are zero")
    w = lam * raw + (1.0 - lam) * raw.mean()
    w *= m / np.dot(sizes, w)
    if alpha is not None:
        cap = m / alpha
        capped = np.zeros(w.shape, dtype=bool)
        while np.any(w[~capped] > cap):
            capped |= w > cap
            w[capped] = cap
            free = ~capped
            w[free] *= (m - np.dot(sizes[capped], w[capped])) / np.dot(sizes[free], w[free])
    return w


def group_weights_pipeline(battery, alpha=0.05, min_group_size=10, lam=0.95):
    """Estimate one weight per group from the battery's own statistics.

    Summarises each group, fits the mixture by moments, solves the budget
    for ``c``, evaluates the optimal weight at each group's ``|xi_hat|``,
    then smooths and renormalises.  If no group shows a signal every group
    gets weight one (plain Bonferroni).
    """
    labels, inverse, counts = np.unique(battery.groups, return_inverse=True, return_counts=True)
    for label, r in zip(labels.tolist(), counts.tolist()):
        if r < max(min_group_size, 2):
            raise ConfigurationError(f"group {label!r} has {r} tests; minimum is {min_group_size}")
    order = np.argsort(inverse, kind="stable")
    chunks = np.split(battery.stats[order], np.cumsum(counts)[:-1])
    summaries, estimates = [], []
    for label, chunk in zip(labels, chunks):
        s, e = estimate_group(chunk, label.item(), battery.model)
        summaries.append(s)
        estimates.append(e)
    m = battery.m
    xi = np.array([abs(e.xi_hat) for e in estimates])
    result = GroupWeights(labels.tolist(), np.ones(len(labels)), counts.astype(np.int64),
                          smoothing_lambda=lam, estimates=estimates, summaries=summaries)
    if not np.any(xi > 0):
        return result
    budget = solve_budget(xi, counts, m, alpha)
    raw = np.asarray(optimal_weight(xi, budget.c, m, alpha))
    result.budget = budget
    result.raw_weights = raw
    result.weights = smooth_and_renorm(raw, counts, m, lam, alpha)
    return result

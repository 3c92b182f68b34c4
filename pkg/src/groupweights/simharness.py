"""Monte Carlo power and FWER study of grouped weighting.

A scenario plants ``m1`` signals on a five-level ladder
``xi0 * (1, 1.5, 2, 2.5, 3)`` among ``m`` tests.  Nulls start in groups
``0..K-6`` and each ladder level gets its own group among the last five;
then a fraction ``p0`` of nulls and ``p1`` of alternatives swap sides.
Each replicate redraws the swap and the statistics, runs the weighted
and unweighted procedures on the same battery and records true and false
rejections.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
import math

import numpy as np

from groupweights.numstats import draw_statistics, make_rng, pvalues
from groupweights.testing import bonferroni_reject, weighted_reject
from groupweights.weights import TestBattery, group_weights_pipeline

LADDER = (1.0, 1.5, 2.0, 2.5, 3.0)
N_LEVELS = len(LADDER)


class ScenarioError(ValueError):
    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class Scenario:
    m: int = 10000
    m1: int = 100
    xi0: float = 2.0
    p0: float = 0.0
    p1: float = 0.0
    K: int = 10
    model: str = "normal"
    alpha: float = 0.05
    replicates: int = 500
    master_seed: int = 20070101
    mixed_levels: bool = False
    random_groups: bool = False
    min_group_size: int = 10
    smoothing_lambda: float = 0.95

    def validate(self):
        if self.m < 1:
            raise ScenarioError("m", "must be positive")
        if self.m1 < 0 or self.m1 > self.m:
            raise ScenarioError("m1", "must lie in [0, m]")
        if self.m1 % N_LEVELS:
            raise ScenarioError("m1", f"must be divisible by {N_LEVELS}")
        if not 0.0 <= self.p0 <= 1.0:
            raise ScenarioError("p0", "must lie in [0, 1]")
        if not 0.0 <= self.p1 <= 1.0:
            raise ScenarioError("p1", "must lie in [0, 1]")
        if self.K < N_LEVELS + 1 and not self.random_groups:
            raise ScenarioError("K", f"needs at least {N_LEVELS + 1} groups")
        if self.K < 1:
            raise ScenarioError("K", "must be positive")
        if self.model not in ("normal", "chisq"):
            raise ScenarioError("model", "must be 'normal' or 'chisq'")
        if not 0.0 < self.alpha < 1.0:
            raise ScenarioError("alpha", "must lie in (0, 1)")
        if self.replicates < 1:
            raise ScenarioError("replicates", "must be at least 1")
        if not 0.0 <= self.smoothing_lambda <= 1.0:
            raise ScenarioError("smoothing_lambda", "must lie in [0, 1]")
        if self.xi0 < 0 or not math.isfinite(self.xi0):
            raise ScenarioError("xi0", "must be finite and non-negative")
        return self


@dataclass
class ScenarioSignals:
    xi: np.ndarray
    groups: np.ndarray
    K: int

    @property
    def sizes(self):
        return np.bincount(self.groups, minlength=self.K)


@dataclass
class PowerEstimate:
    """Monte Carlo summary of one scenario.

    Powers are mean true-positive proportions over replicates.
    ``mc_standard_error`` is the binomial standard error
    ``sqrt(p (1 - p) / replicates)`` of the weighted FWER, with ``p = 0.5``
    substituted when the observed rate is 0 or 1.  ``diff_se`` is the
    standard error of the mean per-replicate power difference, in points.
    """

    weighted_power: float
    unweighted_power: float
    difference_pct_points: float
    fwer_weighted: float
    fwer_unweighted: float
    mc_standard_error: float
    r_squared: float
    replicates_run: int
    diff_se: float = 0.0
    b_m: float = float("nan")


def binomial_se(p, n):
    if p <= 0.0 or p >= 1.0:
        p = 0.5
    return math.sqrt(p * (1.0 - p) / n)


def _spread(items, receivers, groups):
    # round-robin: leftovers land in the lowest-index receiving groups
    for i, j in enumerate(items):
        groups[j] = receivers[i % len(receivers)]


def build_grouping(scenario, rng):
    """Assign per-test signals and group labels for one replicate."""
    m, m1, K = scenario.m, scenario.m1, scenario.K
    m0 = m - m1
    xi = np.zeros(m)
    per_level = m1 // N_LEVELS
    xi[m0:] = np.repeat(scenario.xi0 * np.asarray(LADDER), per_level)
    groups = np.empty(m, dtype=np.int64)
    if scenario.random_groups:
        groups[rng.permutation(m)] = np.arange(m) % K
    else:
        n_null_groups = K - N_LEVELS
        null_groups = np.arange(n_null_groups)
        signal_groups = np.arange(n_null_groups, K)
        groups[rng.permutation(m0)] = np.arange(m0) % n_null_groups
        if scenario.mixed_levels:
            groups[m0 + rng.permutation(m1)] = n_null_groups + np.arange(m1) % N_LEVELS
        else:
            groups[m0:] = n_null_groups + np.repeat(np.arange(N_LEVELS), per_level)
        n_move0 = math.floor(scenario.p0 * m0 + 0.5)
        n_move1 = math.floor(scenario.p1 * m1 + 0.5)
        _spread(rng.choice(m0, n_move0, replace=False), signal_groups, groups)
        _spread(m0 + rng.choice(m1, n_move1, replace=False), null_groups, groups)
    sizes = np.bincount(groups, minlength=K)
    if sizes.min() < scenario.min_group_size:
        k = int(sizes.argmin())
        raise ScenarioError("p0/p1", f"group {k} has {sizes[k]} tests, below the minimum {scenario.min_group_size}")
    return ScenarioSignals(xi, groups, K)


def r_squared(signals):
    """Share of signal variance explained by the grouping; 0 if all signals are equal."""
    xi = np.asarray(signals.xi, dtype=float)
    _, inverse = np.unique(signals.groups, return_inverse=True)
    total = np.sum((xi - xi.mean()) ** 2)
    if total == 0.0:
        return 0.0
    group_mean = np.bincount(inverse, weights=xi) / np.bincount(inverse)
    within = np.sum((xi - group_mean[inverse]) ** 2)
    return float(1.0 - within / total)


def run_replicate(signals, scenario, rng):
    """Draw one battery and return ``(weighted, unweighted)`` rejection results."""
    stats = draw_statistics(signals.xi, scenario.model, rng)
    p = pvalues(stats, scenario.model)
    battery = TestBattery(stats, signals.groups, scenario.model)
    gw = group_weights_pipeline(battery, scenario.alpha, scenario.min_group_size, scenario.smoothing_lambda)
    weighted = weighted_reject(p, gw.weights[signals.groups], scenario.alpha, sizes=gw.sizes)
    return weighted, bonferroni_reject(p, scenario.alpha)


def _replicate_counts(scenario, index):
    rng = make_rng(scenario.master_seed, index)
    signals = build_grouping(scenario, rng)
    weighted, unweighted = run_replicate(signals, scenario, rng)
    alt = signals.xi != 0
    return (int(weighted.rejected[alt].sum()), int(unweighted.rejected[alt].sum()),
            bool(weighted.rejected[~alt].any()), bool(unweighted.rejected[~alt].any()),
            r_squared(signals), weighted.b_m)


def _run_block(scenario, start, stop):
    return [_replicate_counts(scenario, i) for i in range(start, stop)]


def simulate(scenario, workers=1):
    """Run all replicates of ``scenario`` and reduce them to a :class:`PowerEstimate`.

    Replicate ``i`` uses the generator keyed by ``(master_seed, i)``, and
    results are reduced in replicate order, so the estimate does not
    depend on ``workers``.
    """
    scenario.validate()
    n = scenario.replicates
    if workers > 1 and n > 1:
        edges = np.linspace(0, n, min(workers * 4, n) + 1).astype(int)
        with ProcessPoolExecutor(workers) as pool:
            blocks = pool.map(_run_block, [scenario] * (len(edges) - 1), edges[:-1], edges[1:])
            rows = [row for block in blocks for row in block]
    else:
        rows = _run_block(scenario, 0, n)
    tp_w, tp_u, fw_w, fw_u, r2, b_m = (np.array(col, dtype=float) for col in zip(*rows))
    m1 = scenario.m1
    if m1:
        diff = 100.0 * (tp_w - tp_u) / m1
        power_w, power_u = tp_w.mean() / m1, tp_u.mean() / m1
    else:
        diff = np.zeros(n)
        power_w = power_u = float("nan")
    fwer_w, fwer_u = fw_w.mean(), fw_u.mean()
    return PowerEstimate(
        weighted_power=float(power_w),
        unweighted_power=float(power_u),
        difference_pct_points=float(diff.mean()),
        fwer_weighted=float(fwer_w),
        fwer_unweighted=float(fwer_u),
        mc_standard_error=binomial_se(fwer_w, n),
        r_squared=float(r2.mean()),
        replicates_run=n,
        diff_se=float(diff.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
        b_m=float(b_m.mean()),
    )


def run_sweep(scenarios, workers=1):
    return [simulate(s, workers) for s in scenarios]


def fwer_validation(m=10000, K=10, alpha=0.05, replicates=2000, model="normal", master_seed=20070101,
                    workers=1):
    """FWER of the weighted and unweighted arms under the global null.

    Groups are ``K`` equal random blocks of ``m`` all-null tests.
    """
    if replicates < 1:
        raise ScenarioError("replicates", "must be at least 1")
    scenario = Scenario(m=m, m1=0, xi0=0.0, K=K, model=model, alpha=alpha, replicates=replicates,
                        master_seed=master_seed, random_groups=True)
    return simulate(scenario, workers)


def scenario_row(scenario, estimate):
    """Flat dict for tabular output."""
    return {
        "p0": scenario.p0, "p1": scenario.p1, "xi0": scenario.xi0, "m1": scenario.m1, "K": scenario.K,
        "r_squared": estimate.r_squared, "power_weighted": estimate.weighted_power,
        "power_unweighted": estimate.unweighted_power, "diff_pct_points": estimate.difference_pct_points,
        "fwer_weighted": estimate.fwer_weighted, "fwer_unweighted": estimate.fwer_unweighted,
        "se": estimate.mc_standard_error, "replicates": estimate.replicates_run,
        "master_seed": scenario.master_seed, "diff_se": estimate.diff_se,
    }

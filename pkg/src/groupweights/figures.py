"""Plot-ready data for the weight, threshold, weight-by-moments and power-by-R^2 figures."""

import itertools
import math

import numpy as np

from groupweights.estimation import mom_normal, summarize_group
from groupweights.numstats import make_rng, sample_mixture, sample_normal
from groupweights.simharness import Scenario, simulate
from groupweights.weights import optimal_weight, smooth_and_renorm, solve_budget


def weight_curve(m=100000, alpha=0.05, xi_mean=4.5, xi_sd=1.0, seed=1, shown=5000):
    """``(xi, w(xi))`` for a random subset of a simulated battery, sorted by ``xi``."""
    rng = make_rng(seed, 0)
    xi = np.abs(xi_mean + xi_sd * sample_normal(m, rng))
    budget = solve_budget(xi, np.ones(m), m, alpha)
    pick = np.sort(xi[rng.choice(m, min(shown, m), replace=False)])
    return pick, np.asarray(optimal_weight(pick, budget.c, m, alpha)), budget


def fig1_rows(**kw):
    xi, w, budget = weight_curve(**kw)
    return ("xi", "weight"), [{"xi": x, "weight": y} for x, y in zip(xi, w)], budget


def fig2_rows(m=100000, alpha=0.05, **kw):
    xi, w, budget = weight_curve(m=m, alpha=alpha, **kw)
    with np.errstate(divide="ignore"):
        y = -np.log10(alpha * w / m)
    bonf = -math.log10(alpha / m)
    rows = [{"series": "weighted", "xi": x, "threshold": t} for x, t in zip(xi, y)]
    rows += [{"series": "bonferroni", "xi": x, "threshold": bonf} for x in (xi[0], xi[-1])]
    return ("series", "xi", "threshold"), rows, budget


def fig3_rows(groups=100, r=1000, alpha=0.05, seed=3, lam=0.95):
    """Per-group ``(xi_hat, S^2, relative weight)`` for groups with random mixture parameters."""
    rng = make_rng(seed, 0)
    summaries = []
    for k in range(groups):
        pi, xi = rng.uniform(0.0, 0.1), rng.uniform(0.0, 6.0)
        summaries.append(summarize_group(sample_mixture(r, pi, xi, "normal", rng), k))
    fits = [mom_normal(s) for s in summaries]
    xi_hat = np.array([abs(f.xi_hat) for f in fits])
    sizes = np.full(groups, r)
    m = groups * r
    if np.any(xi_hat > 0):
        budget = solve_budget(xi_hat, sizes, m, alpha)
        w = smooth_and_renorm(optimal_weight(xi_hat, budget.c, m, alpha), sizes, m, lam, alpha)
    else:
        w = np.ones(groups)
    rel = w / w.max()
    rows = [{"xi_hat": x, "variance": s.variance, "relative_weight": v}
            for x, s, v in zip(xi_hat, summaries, rel)]
    return ("xi_hat", "variance", "relative_weight"), rows, None


P0_GRID = (0.01, 0.1, 0.25, 0.5)
P1_GRID = (0.01, 0.1, 0.5, 0.95)


def fig4_symbol(p0, p1):
    if p0 >= 0.5:
        return "+"
    if p1 > 0.1:
        return "*"
    return "o"


def fig4_rows(replicates=100, master_seed=4, workers=1, **scenario_kw):
    rows = []
    for p0, p1 in itertools.product(P0_GRID, P1_GRID):
        scenario = Scenario(p0=p0, p1=p1, replicates=replicates, master_seed=master_seed, **scenario_kw)
        est = simulate(scenario, workers)
        rows.append({"r_squared": est.r_squared, "diff_pct_points": est.difference_pct_points,
                     "symbol": fig4_symbol(p0, p1), "p0": p0, "p1": p1})
    return ("r_squared", "diff_pct_points", "symbol", "p0", "p1"), rows, None

"""Normal tail kernels, 1-df chi-square p-values and mixture sampling.

Every tail probability is routed through :func:`upper_tail_normal`, which
evaluates ``erfc(t / sqrt(2)) / 2`` for non-negative ``t``.  ``erfc`` keeps
full relative precision far into the upper tail (where ``1 - Phi(t)`` would
cancel), so thresholds such as ``alpha / m = 5e-7`` or ``1e-300`` are safe.
"""

import numpy as np
from scipy import special


class DomainError(ValueError):
    """Argument outside the domain of a probability kernel."""


_SQRT1_2 = np.sqrt(0.5)


def _require_finite(x, name):
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} must be finite")


def _unwrap(x):
    return x.item() if isinstance(x, np.ndarray) and x.ndim == 0 else x


def upper_tail_normal(t):
    """Upper tail probability of the standard normal, ``P(Z > t)``.

    Accepts a scalar or an array.  Negative arguments use the complement
    ``1 - P(Z > -t)``, which loses nothing because the result is >= 0.5.
    """
    t = np.asarray(t, dtype=float)
    _require_finite(t, "t")
    out = 0.5 * special.erfc(np.abs(t) * _SQRT1_2)
    out = np.where(t < 0, 1.0 - out, out)
    return _unwrap(out)


def upper_tail_normal_inv(p):
    """Return ``t`` with ``upper_tail_normal(t) == p`` for ``0 < p < 1``.

    Starts from ``scipy.special.ndtri`` on whichever tail is small and
    polishes with one Newton step against :func:`upper_tail_normal`.
    """
    p = np.asarray(p, dtype=float)
    if not np.all((p > 0) & (p < 1)):
        raise DomainError("p must lie strictly inside (0, 1)")
    upper = p <= 0.5
    # 1 - p is exact for p > 0.5
    t = np.where(upper, -special.ndtri(np.where(upper, p, 0.5)),
                 special.ndtri(np.where(upper, 0.5, 1.0 - p)))
    # Newton on log(Q(t)) - log(p): Q'/Q = -phi/Q, well scaled in the far tail
    q = 0.5 * special.erfc(np.abs(t) * _SQRT1_2)
    q = np.where(t < 0, 1.0 - q, q)
    log_phi = -0.5 * t * t - 0.5 * np.log(2 * np.pi)
    step = np.where(upper, (np.log(q) - np.log(p)) * q / np.exp(log_phi),
                    (q - p) / np.exp(log_phi))
    t = t + np.where(np.isfinite(step), step, 0.0)
    return _unwrap(t)


def pvalue_normal_two_sided(t):
    """Two-sided p-value ``2 P(Z > |t|)`` of a standard normal statistic."""
    t = np.asarray(t, dtype=float)
    _require_finite(t, "t")
    p = np.minimum(2.0 * upper_tail_normal(np.abs(t)), 1.0)
    return _unwrap(np.asarray(p))


def pvalue_chisq_1df(x):
    """Upper tail of a central chi-square with one degree of freedom.

    Computed as ``2 P(Z > sqrt(x))`` through the same kernel as
    :func:`pvalue_normal_two_sided`; since ``sqrt(t*t) == |t|`` in IEEE
    arithmetic the two agree bit for bit on squared normal statistics.
    """
    x = np.asarray(x, dtype=float)
    _require_finite(x, "x")
    if np.any(x < 0):
        raise DomainError("chi-square statistic must be non-negative")
    return pvalue_normal_two_sided(np.sqrt(x))


def make_rng(master_seed, index=0):
    """Philox generator for stream ``index`` of ``master_seed``.

    Streams are keyed by ``SeedSequence([master_seed, index])`` so each
    Monte Carlo replicate owns an independent, reproducible generator.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(master_seed), int(index)])))


def sample_normal(size, rng):
    """Standard normal draws by inverting uniforms through ``ndtri``."""
    u = rng.random(size)
    # random() can return exactly 0
    u = np.where(u == 0.0, np.nextafter(0.0, 1.0), u)
    return special.ndtri(u)


def sample_mixture(count, pi, xi, model, rng):
    """Draw ``count`` statistics from the two-component mixture.

    Each draw is ``N(0, 1)`` with probability ``1 - pi`` and ``N(xi, 1)``
    with probability ``pi``; for ``model == "chisq"`` the draw is squared,
    giving ``chi2_1(0)`` or ``chi2_1(xi**2)``.  Membership and noise come
    from two uniform blocks of ``rng`` in that order.
    """
    if count < 1:
        raise DomainError("count must be positive")
    if not 0.0 <= pi <= 1.0:
        raise DomainError("pi must lie in [0, 1]")
    _require_finite(xi, "xi")
    if model not in ("normal", "chisq"):
        raise DomainError(f"unknown model {model!r}")
    signal = rng.random(count) < pi
    z = sample_normal(count, rng) + np.where(signal, xi, 0.0)
    return z * z if model == "chisq" else z


def draw_statistics(xis, model, rng):
    """One statistic per test with per-test non-centrality ``xis``."""
    xis = np.asarray(xis, dtype=float)
    z = sample_normal(xis.shape, rng) + xis
    return z * z if model == "chisq" else z


def pvalues(stats, model):
    """Dispatch to the model's p-value kernel."""
    if model == "normal":
        return np.asarray(pvalue_normal_two_sided(stats))
    if model == "chisq":
        return np.asarray(pvalue_chisq_1df(stats))
    raise DomainError(f"unknown model {model!r}")

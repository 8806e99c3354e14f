"""Sampled profiles for when exact refinement is too expensive.

Sample points are drawn once per profile from a seeded generator and shared by every
index, so two runs with the same seed produce identical statistics. Results are
estimates and are never marked certified.
"""
import logging
import math

import numpy as np

from stochsum.diagnostics import (
    ConvergenceProfile,
    ModeSpec,
    resolve_limit,
    sequence_horizon,
    sequence_term,
    window_stop,
)
from stochsum.exceptions import ConfigError
from stochsum.sequences import Mode
from stochsum.utils import mc_samples

logger = logging.getLogger(__name__)

# two-sided 95% normal quantile
Z_95 = 1.959963984540054


def as_sampler(X):
    """Vectorised ``omega -> |X(omega)|`` with infinite values mapped to ``inf``."""
    edges = np.array([float(b) for b in X.breakpoints[1:-1]])
    magnitudes = np.array([abs(v).project() for v in X.values])

    def sample(omegas):
        return magnitudes[np.searchsorted(edges, omegas, side="right")]

    return sample


def wilson_half_width(p, samples, z=Z_95):
    """Half width of the Wilson score interval for a proportion ``p`` out of ``samples``."""
    denominator = 1.0 + z * z / samples
    spread = z * math.sqrt(p * (1.0 - p) / samples + z * z / (4.0 * samples * samples))
    return spread / denominator


def monte_carlo_profile(x, limit, mode, indices, samples=None, seed=0):
    """Estimate an in-probability or almost-sure profile from uniform samples of [0, 1)."""
    if not isinstance(mode, ModeSpec):
        raise ConfigError("monte_carlo_profile expects a ModeSpec")
    if mode.mode not in (Mode.IN_PROBABILITY, Mode.ALMOST_SURE):
        raise ConfigError(f"Monte Carlo estimation does not support {mode.mode.value}")
    samples = mc_samples() if samples is None else int(samples)
    if samples < 1:
        raise ConfigError("samples must be positive")
    limit = resolve_limit(x, limit)
    indices = list(indices)

    rng = np.random.default_rng(seed)
    omegas = rng.random(samples)
    logger.info("Monte Carlo: %s samples, seed %s, mode %s", samples, seed, mode.mode.value)

    cache = {}

    def exceeds(m):
        if m not in cache:
            cache[m] = as_sampler(sequence_term(x, m) - limit)(omegas) > mode.lam
        return cache[m]

    horizon = sequence_horizon(x)
    clamped = False
    statistics = []
    for n in indices:
        hits = exceeds(n)
        if mode.mode is Mode.ALMOST_SURE:
            stop, cut = window_stop(n, mode.window, horizon)
            clamped = clamped or cut
            hits = hits.copy()
            for m in range(n + 1, stop + 1):
                hits |= exceeds(m)
        statistics.append(float(np.count_nonzero(hits)) / samples)

    return ConvergenceProfile(
        mode,
        indices,
        statistics,
        certified=False,
        lower_bound=mode.mode is Mode.ALMOST_SURE,
        window_clamped=clamped,
        half_widths=tuple(wilson_half_width(p, samples) for p in statistics),
    )

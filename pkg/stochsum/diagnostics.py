"""Convergence profiles of step-function sequences, computed exactly.

A profile records one statistic per index n for one convergence mode: the tail
probability ``P(|X_n - X_inf| > lambda)``, its windowed almost-sure counterpart
``P(max_{n<=m<=n+w} |X_m - X_inf| > lambda)``, or the L_p distance. Probabilities are
exact fractions. Verdicts turn a finite profile into converges / diverges / inconclusive.
"""
import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

from stochsum.exceptions import ConfigError, GuardRangeError, InsufficientSequenceError
from stochsum.extended_real import ExtendedReal
from stochsum.sequences import Mode
from stochsum.step_rv import (
    EventPredicate,
    event_intervals,
    expectation_p,
    finite_ae,
    prob,
    union_measure,
)
from stochsum.utils import divergence_quartile, worker_count

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModeSpec:
    mode: Mode
    lam: Optional[float] = None
    window: Optional[int] = None
    p: Optional[float] = None
    omegas: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.mode in (Mode.IN_PROBABILITY, Mode.ALMOST_SURE):
            if self.lam is None or not self.lam > 0:
                raise ConfigError(f"{self.mode.value} needs lambda > 0")
        if self.mode is Mode.ALMOST_SURE and (self.window is None or self.window < 1):
            raise ConfigError("almost-sure needs window >= 1")
        if self.mode is Mode.LP and (self.p is None or not self.p >= 1):
            raise ConfigError("lp needs p >= 1 or inf")

    @property
    def slug(self):
        """Short identifier used in report file names."""
        if self.mode is Mode.IN_PROBABILITY:
            return f"in-probability_lambda={self.lam:g}"
        if self.mode is Mode.ALMOST_SURE:
            return f"almost-sure_lambda={self.lam:g}_window={self.window}"
        if self.mode is Mode.LP:
            p = "inf" if math.isinf(self.p) else f"{self.p:g}"
            if self.window is not None:
                # Cauchy profiles compare members pairwise within the window
                return f"lp-cauchy_p={p}_window={self.window}"
            return f"lp_p={p}"
        return "ae-pointwise"


class VerdictKind(str, enum.Enum):
    CONVERGES = "converges-below"
    DIVERGES = "diverges"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    epsilon: float
    from_index: Optional[int] = None
    witness: Optional[tuple] = None

    @property
    def converges(self):
        return self.kind is VerdictKind.CONVERGES

    @property
    def diverges(self):
        return self.kind is VerdictKind.DIVERGES


@dataclass(frozen=True)
class ConvergenceProfile:
    mode: ModeSpec
    indices: tuple
    statistics: tuple
    # exact computation (True) or a Monte Carlo estimate (False)
    certified: bool = True
    # statistics are lower bounds of the untruncated quantity (windowed sup)
    lower_bound: bool = False
    hypothesis_violated: bool = False
    window_clamped: bool = False
    verdict: Optional[Verdict] = None
    half_widths: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(self.indices))
        object.__setattr__(self, "statistics", tuple(self.statistics))
        if len(self.indices) != len(self.statistics):
            raise ValueError("a profile needs one statistic per index")
        if self.mode.mode in (Mode.IN_PROBABILITY, Mode.ALMOST_SURE):
            if any(not 0 <= s <= 1 for s in self.statistics):
                raise ValueError("probability statistics must lie in [0, 1]")

    def with_verdict(self, epsilon, start=None):
        return replace(self, verdict=verdict(self, epsilon, start))

    def __iter__(self):
        return iter(zip(self.indices, self.statistics))


def sequence_term(x, n):
    if hasattr(x, "member"):
        return x.member(n)
    if n > len(x):
        raise InsufficientSequenceError(f"sequence has {len(x)} terms, X_{n} requested")
    return x[n - 1]


def sequence_horizon(x):
    if hasattr(x, "member"):
        return x.horizon
    return len(x)


def window_stop(n, window, horizon):
    """Last index of the window starting at n, and whether it was cut at the horizon.

    Raises ``GuardRangeError`` when n itself lies past the horizon.
    """
    if horizon is not None and n > horizon:
        raise GuardRangeError(f"index {n} lies past the sequence horizon {horizon}")
    stop = n + window
    if horizon is not None and stop > horizon:
        return horizon, True
    return stop, False


def resolve_limit(x, limit):
    if limit is None:
        limit = getattr(x, "limit", None)
    if limit is None:
        raise ConfigError("a limit X_inf is required for this profile")
    return limit


def _map(fn, indices):
    workers = worker_count()
    if workers == 1 or len(indices) < 2:
        return [fn(n) for n in indices]
    # executor.map yields in submission order, so results never depend on scheduling
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, indices))


def in_probability_profile(x, limit, lam, indices):
    """``P(|X_n - X_inf| > lam)`` at every n, exactly."""
    mode = ModeSpec(Mode.IN_PROBABILITY, lam=lam)
    limit = resolve_limit(x, limit)
    indices = list(indices)
    predicate = EventPredicate.abs_greater(lam)
    statistics = _map(lambda n: prob(sequence_term(x, n) - limit, predicate), indices)
    logger.debug("Diagnostics: in-probability profile over %s indices", len(indices))
    return ConvergenceProfile(mode, indices, statistics)


def almost_sure_profile(x, limit, lam, window, indices):
    """``P(max_{n <= m <= n+window} |X_m - X_inf| > lam)`` at every n, exactly.

    Truncating the supremum to a window can only shrink it, so every statistic is a
    lower bound of the untruncated one. Windows running past the end of a guarded
    family are cut at its horizon and the profile is flagged ``window_clamped``. An
    index past the horizon raises ``GuardRangeError``.
    """
    mode = ModeSpec(Mode.ALMOST_SURE, lam=lam, window=window)
    limit = resolve_limit(x, limit)
    indices = list(indices)
    horizon = sequence_horizon(x)
    predicate = EventPredicate.abs_greater(lam)

    clamped = False
    stops = {}
    for n in indices:
        stops[n], cut = window_stop(n, window, horizon)
        clamped = clamped or cut
    if clamped:
        logger.warning(
            "Diagnostics: almost-sure window %s clamped at the sequence horizon %s",
            window,
            horizon,
        )

    needed = sorted({m for n in indices for m in range(n, stops[n] + 1)})

    def event(m):
        return event_intervals(sequence_term(x, m) - limit, predicate)

    events = dict(zip(needed, _map(event, needed)))
    statistics = [
        union_measure(events[m] for m in range(n, stops[n] + 1)) for n in indices
    ]
    return ConvergenceProfile(
        mode, indices, statistics, lower_bound=True, window_clamped=clamped
    )


@dataclass(frozen=True)
class WindowSweep:
    profiles: tuple
    stabilized: bool


def almost_sure_sweep(x, limit, lam, window, indices):
    """Almost-sure profiles at windows w, 2w and 4w; stabilized when all three agree."""
    profiles = tuple(
        almost_sure_profile(x, limit, lam, window * factor, indices) for factor in (1, 2, 4)
    )
    stabilized = all(p.statistics == profiles[0].statistics for p in profiles[1:])
    return WindowSweep(profiles, stabilized)


def lp_profile(x, limit, p, indices):
    """``||X_n - X_inf||_p`` at every n, integrating over the finite part only."""
    p = float(p)
    mode = ModeSpec(Mode.LP, p=p)
    limit = resolve_limit(x, limit)
    indices = list(indices)
    violated = not finite_ae(limit)

    def statistic(n):
        term = sequence_term(x, n)
        return expectation_p(term - limit, p).value, not finite_ae(term)

    results = _map(statistic, indices)
    violated = violated or any(flag for _, flag in results)
    if violated:
        logger.warning("Diagnostics: L_p profile inputs are not all finite a.e.")
    return ConvergenceProfile(
        mode, indices, [value for value, _ in results], hypothesis_violated=violated
    )


def lp_cauchy_profile(x, p, window, indices):
    """``max_{n <= m < m' <= n+window} ||X_m - X_m'||_p``: L_p Cauchy behaviour
    without reference to a limit."""
    p = float(p)
    mode = ModeSpec(Mode.LP, p=p, window=window)
    horizon = sequence_horizon(x)
    indices = list(indices)

    def statistic(n):
        stop, _ = window_stop(n, window, horizon)
        terms = [sequence_term(x, m) for m in range(n, stop + 1)]
        return max(
            (
                expectation_p(terms[a] - terms[b], p).value
                for a in range(len(terms))
                for b in range(a + 1, len(terms))
            ),
            default=0.0,
        )

    return ConvergenceProfile(mode, indices, _map(statistic, indices))


@dataclass(frozen=True)
class PointwiseReport:
    omega: object
    values: tuple
    # max - min of the values over the tail indices [ceil(h/2), h]
    oscillation: float
    cauchy: bool
    limit_value: Optional[ExtendedReal] = None
    gap: Optional[float] = None
    converges: Optional[bool] = None


def ae_pointwise_check(x, limit, omegas, horizon, tol=1e-6):
    """Evaluate ``X_n(omega)`` for ``n <= horizon`` at each sample point.

    The Cauchy measurement is the oscillation over ``[ceil(horizon/2), horizon]``. With
    ``limit=None`` only Cauchy existence is reported, never a limit value.
    """
    if horizon < 1:
        raise ConfigError("horizon must be >= 1")
    tail_start = math.ceil(horizon / 2)
    reports = []
    for omega in omegas:
        values = tuple(sequence_term(x, n).evaluate(omega) for n in range(1, horizon + 1))
        tail = values[tail_start - 1 :]
        oscillation = (max(tail) - min(tail)).project()
        cauchy = oscillation <= tol
        report = PointwiseReport(omega, values, oscillation, cauchy)
        if limit is not None:
            target = limit.evaluate(omega)
            gap = abs(values[-1] - target).project()
            report = replace(
                report, limit_value=target, gap=gap, converges=cauchy and gap <= tol
            )
        reports.append(report)
    return reports


def verdict(profile, epsilon, start=None):
    """Turn a finite profile into a verdict.

    Converges below ``epsilon`` from the earliest index ``N >= start`` after which every
    statistic is below ``epsilon``, provided that tail covers at least the top quartile
    of the checked indices. Diverges when every statistic in that top quartile stays at
    or above ``epsilon``. Anything else is inconclusive.
    """
    if not epsilon > 0:
        raise ConfigError("epsilon must be positive")
    eligible = [
        (n, s) for n, s in zip(profile.indices, profile.statistics) if start is None or n >= start
    ]
    if not eligible:
        return Verdict(VerdictKind.INCONCLUSIVE, epsilon)

    top = max(1, math.ceil(len(eligible) * divergence_quartile()))
    tail_start = len(eligible)
    while tail_start > 0 and eligible[tail_start - 1][1] < epsilon:
        tail_start -= 1

    if tail_start <= len(eligible) - top:
        return Verdict(VerdictKind.CONVERGES, epsilon, from_index=eligible[tail_start][0])
    if all(s >= epsilon for _, s in eligible[-top:]):
        return Verdict(VerdictKind.DIVERGES, epsilon, witness=eligible[-1])
    return Verdict(VerdictKind.INCONCLUSIVE, epsilon)


def as_threshold(profile, epsilon=0):
    """First index from which every statistic is ``<= epsilon`` (None if the last is not)."""
    threshold = None
    for n, s in zip(reversed(profile.indices), reversed(profile.statistics)):
        if s > epsilon:
            break
        threshold = n
    return threshold


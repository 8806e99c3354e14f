"""Builtin sequences ``x = (X_1, X_2, ...)`` of step random variables."""
import enum
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

from stochsum.exceptions import ConfigError, GuardRangeError
from stochsum.extended_real import INF, ExtendedReal
from stochsum.step_rv import D_ONE, D_ZERO, DyadicRational, StepRandomVariable

logger = logging.getLogger(__name__)

# 4**(m + i) stays inside the double range up to n = 511 (m = 8, i = 255).
EXAMPLE1_HORIZON = 511


class Mode(str, enum.Enum):
    IN_PROBABILITY = "in-probability"
    ALMOST_SURE = "almost-sure"
    AE_POINTWISE = "ae-pointwise"
    LP = "lp"


ALL_MODES = frozenset(Mode)


@dataclass(frozen=True)
class SequenceFamily:
    name: str
    generator: Callable[[int], StepRandomVariable] = field(repr=False, compare=False)
    limit: StepRandomVariable
    declared_modes: frozenset = frozenset()
    # largest index the generator accepts; None for unbounded families
    horizon: Optional[int] = None
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_cached", lru_cache(maxsize=4096)(self.generator))

    def member(self, n):
        if n < 1:
            raise GuardRangeError(f"sequence indices start at 1, got {n}")
        if self.horizon is not None and n > self.horizon:
            raise GuardRangeError(f"{self.name} is only defined up to n={self.horizon}")
        return self._cached(n)

    def prefix(self, n):
        return [self.member(j) for j in range(1, n + 1)]

    def __getitem__(self, n):
        return self.member(n)


def example1_indices(n):
    """``(m, i)`` with ``n = 2**m + i`` and ``0 <= i < 2**m``."""
    m = n.bit_length() - 1
    return m, n - (1 << m)


def example1(n):
    """``4**(m+i)`` on ``[i/2^m, (i+1)/2^m)`` and 0 elsewhere, for ``n = 2**m + i``.

    ``X_1`` is identically zero so that full prefixes exist.
    """
    if not 1 <= n <= EXAMPLE1_HORIZON:
        raise GuardRangeError(f"example1 is guarded to 1 <= n <= {EXAMPLE1_HORIZON}, got {n}")
    if n == 1:
        return StepRandomVariable.constant(0)
    m, i = example1_indices(n)
    return StepRandomVariable.indicator(
        DyadicRational(i, m), DyadicRational(i + 1, m), ExtendedReal(4.0 ** (m + i))
    )


def example1_family():
    return SequenceFamily(
        name="example1",
        generator=example1,
        limit=StepRandomVariable.constant(0),
        declared_modes=frozenset({Mode.IN_PROBABILITY}),
        horizon=EXAMPLE1_HORIZON,
    )


def example2(epsilon="1/4"):
    """``X_1 = inf`` on ``[0, epsilon)``, every other term identically zero."""
    epsilon = DyadicRational.coerce(epsilon)
    if not D_ZERO < epsilon < D_ONE:
        raise ConfigError(f"example2 needs a dyadic epsilon in (0, 1), got {epsilon}")
    first = StepRandomVariable.indicator(D_ZERO, epsilon, INF)
    zero = StepRandomVariable.constant(0)

    def generator(n):
        return first if n == 1 else zero

    return SequenceFamily(
        name="example2",
        generator=generator,
        limit=zero,
        declared_modes=ALL_MODES,
        params={"epsilon": str(epsilon)},
    )


def synthetic_as(decay, support=None):
    """``X_n = decay(n)`` on ``support(n)`` and 0 elsewhere, converging to 0.

    With ``decay`` non-increasing and tending to 0, ``sup_{m>=n} |X_m| <= decay(n)``
    everywhere, so the family converges almost surely by construction. ``support`` is
    either a callable ``n -> (start, end)`` or one fixed ``(start, end)`` pair.
    """
    if support is not None and not callable(support):
        fixed = tuple(support)
        support = lambda n: fixed

    def generator(n):
        value = float(decay(n))
        if not value >= 0.0 or math.isinf(value):
            raise ConfigError(f"decay({n}) = {value} is not a finite non-negative real")
        if support is None:
            return StepRandomVariable.constant(value)
        start, end = support(n)
        return StepRandomVariable.indicator(start, end, value)

    return SequenceFamily(
        name="synthetic_as",
        generator=generator,
        limit=StepRandomVariable.constant(0),
        declared_modes=ALL_MODES,
    )


def synthetic_lp(norm_target, p=1.0, support_log2=0):
    """A family with ``||X_n||_p = norm_target(n)`` exactly, converging to 0 in L_p.

    ``X_n`` is the constant ``norm_target(n) * 2**(k/p)`` on ``[0, 2**-k)`` with
    ``k = support_log2``; for ``p = inf`` the constant is ``norm_target(n)`` itself.
    """
    p = float(p)
    if not p >= 1.0:
        raise ConfigError(f"synthetic_lp needs p >= 1, got {p}")
    if support_log2 < 0:
        raise ConfigError("support_log2 must be non-negative")
    inflation = 1.0 if math.isinf(p) else 2.0 ** (support_log2 / p)
    end = DyadicRational(1, support_log2)

    def generator(n):
        target = float(norm_target(n))
        if not target >= 0.0 or math.isinf(target):
            raise ConfigError(f"norm_target({n}) = {target} is not realizable")
        if support_log2 == 0:
            return StepRandomVariable.constant(target)
        return StepRandomVariable.indicator(D_ZERO, end, target * inflation)

    modes = {Mode.LP}
    if support_log2 == 0:
        # constants that tend to 0 also converge in every other mode
        modes = set(ALL_MODES)
    return SequenceFamily(
        name="synthetic_lp",
        generator=generator,
        limit=StepRandomVariable.constant(0),
        declared_modes=frozenset(modes),
        params={"p": p, "support_log2": support_log2},
    )


def constant(value=0):
    X = StepRandomVariable.constant(ExtendedReal.coerce(value))
    return SequenceFamily(
        name="constant",
        generator=lambda n: X,
        limit=X,
        declared_modes=ALL_MODES,
        params={"value": str(X.values[0])},
    )


def power_decay(power, scale=1.0):
    """``n -> scale / n**power`` with exact-rational powers where possible."""

    def decay(n):
        return float(Fraction(scale) / Fraction(n) ** power) if power else float(scale)

    return decay


@dataclass(frozen=True)
class FamilyInfo:
    name: str
    description: str
    declared_modes: frozenset
    horizon: Optional[int] = None


BUILTIN_FAMILIES = {
    "example1": FamilyInfo(
        "example1",
        "4^(m+i) on [i/2^m, (i+1)/2^m) for n = 2^m + i; converges in probability only",
        frozenset({Mode.IN_PROBABILITY}),
        EXAMPLE1_HORIZON,
    ),
    "example2": FamilyInfo(
        "example2",
        "X_1 = inf on [0, epsilon), X_n = 0 for n >= 2; X_1 is not finite a.e.",
        ALL_MODES,
    ),
    "synthetic_as": FamilyInfo(
        "synthetic_as",
        "scale/n^decay_power on [0, 1) (or on a dyadic support); almost sure convergence",
        ALL_MODES,
    ),
    "synthetic_lp": FamilyInfo(
        "synthetic_lp",
        "||X_n||_p = scale/n^norm_power exactly, realised on [0, 2^-support_log2)",
        frozenset({Mode.LP}),
    ),
    "constant": FamilyInfo("constant", "X_n = value for every n", ALL_MODES),
}


def family_from_spec(spec):
    """Build a family from ``{"family": name, ...params}``."""
    if isinstance(spec, str):
        spec = {"family": spec}
    if not isinstance(spec, dict):
        raise ConfigError(f"family spec must be a name or an object, got {spec!r}")
    name = spec.get("family")
    params = {k: v for k, v in spec.items() if k != "family"}
    try:
        if name == "example1":
            return example1_family()
        if name == "example2":
            return example2(params.get("epsilon", "1/4"))
        if name == "synthetic_as":
            decay = power_decay(
                _exponent(params.get("decay_power", 1)), float(params.get("scale", 1))
            )
            support = None
            if "support" in params:
                support = tuple(DyadicRational.coerce(b) for b in params["support"])
            family = synthetic_as(decay, support)
        elif name == "synthetic_lp":
            family = synthetic_lp(
                power_decay(
                    _exponent(params.get("norm_power", 1)), float(params.get("scale", 1))
                ),
                p=_parse_p(params.get("p", 1)),
                support_log2=int(params.get("support_log2", 0)),
            )
        elif name == "constant":
            return constant(params.get("value", 0))
        else:
            raise ConfigError(f"unknown family {name!r}")
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"bad parameters for family {name!r}: {e}") from e
    return SequenceFamily(
        name=family.name,
        generator=family.generator,
        limit=family.limit,
        declared_modes=family.declared_modes,
        horizon=family.horizon,
        params={**family.params, **params},
    )


def _exponent(value):
    value = float(value)
    return int(value) if value.is_integer() else value


def _parse_p(value):
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity"):
        return math.inf
    return float(value)

"""Random variables on ``[0, 1)`` with Lebesgue measure, as extended-real step functions.

Breakpoints are dyadic rationals held exactly, so every event probability and every
piece measure is an exact :class:`fractions.Fraction`. Pieces are half-open,
``[b_k, b_{k+1})``.
"""
import enum
import logging
import math
import re
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering

from stochsum.exceptions import GuardRangeError, PieceCapExceeded
from stochsum.extended_real import ZERO, ExtendedReal
from stochsum.utils import piece_cap

logger = logging.getLogger(__name__)

_POWER_FORM = re.compile(r"^\s*(?P<num>\d+)\s*/\s*2\s*\^\s*(?P<k>\d+)\s*$")


@total_ordering
@dataclass(frozen=True)
class DyadicRational:
    """``numerator / 2**log2_denominator`` in ``[0, 1]``, kept in lowest terms."""

    numerator: int
    log2_denominator: int = 0

    def __post_init__(self):
        num, k = self.numerator, self.log2_denominator
        if isinstance(num, bool) or not isinstance(num, int) or not isinstance(k, int):
            raise TypeError("dyadic rationals need integer numerator and exponent")
        if k < 0:
            raise ValueError("log2_denominator must be non-negative")
        if num == 0:
            k = 0
        else:
            shift = min(k, (num & -num).bit_length() - 1)
            num, k = num >> shift, k - shift
        if num < 0 or num > (1 << k):
            raise ValueError(f"{num}/2^{k} lies outside [0, 1]")
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "log2_denominator", k)

    @classmethod
    def from_fraction(cls, value):
        value = Fraction(value)
        den = value.denominator
        if den & (den - 1):
            raise ValueError(f"{value} is not a dyadic rational")
        return cls(value.numerator, den.bit_length() - 1)

    @classmethod
    def parse(cls, text):
        """Parse ``"num/2^k"``, ``"num/den"`` or an integer literal."""
        match = _POWER_FORM.match(text)
        if match:
            return cls(int(match.group("num")), int(match.group("k")))
        return cls.from_fraction(Fraction(text.strip()))

    @classmethod
    def coerce(cls, value):
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            return cls.parse(value)
        if isinstance(value, float):
            # floats are binary fractions, so exact conversion is always dyadic
            return cls.from_fraction(Fraction(value))
        return cls.from_fraction(value)

    def to_fraction(self):
        return Fraction(self.numerator, 1 << self.log2_denominator)

    def at_level(self, level):
        """Numerator of this value over the denominator ``2**level``."""
        return self.numerator << (level - self.log2_denominator)

    def __float__(self):
        return self.numerator / (1 << self.log2_denominator)

    def __lt__(self, other):
        if not isinstance(other, DyadicRational):
            return NotImplemented
        level = max(self.log2_denominator, other.log2_denominator)
        return self.at_level(level) < other.at_level(level)

    def __str__(self):
        if self.log2_denominator == 0:
            return str(self.numerator)
        return f"{self.numerator}/2^{self.log2_denominator}"


D_ZERO = DyadicRational(0)
D_ONE = DyadicRational(1)


@dataclass(frozen=True)
class StepRandomVariable:
    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        breakpoints = tuple(DyadicRational.coerce(b) for b in self.breakpoints)
        values = tuple(ExtendedReal.coerce(v) for v in self.values)
        if len(values) < 1 or len(values) != len(breakpoints) - 1:
            raise ValueError("a step function needs one value per piece and at least one piece")
        if breakpoints[0] != D_ZERO or breakpoints[-1] != D_ONE:
            raise ValueError("breakpoints must start at 0 and end at 1")
        for left, right in zip(breakpoints, breakpoints[1:]):
            if not left < right:
                raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", breakpoints)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, value):
        return cls((D_ZERO, D_ONE), (value,))

    @classmethod
    def indicator(cls, start, end, value, otherwise=ZERO):
        """``value`` on ``[start, end)`` and ``otherwise`` on the rest of ``[0, 1)``."""
        start, end = DyadicRational.coerce(start), DyadicRational.coerce(end)
        if not start < end:
            raise ValueError("indicator interval must be non-empty")
        breakpoints, values = [D_ZERO], []
        if start != D_ZERO:
            breakpoints.append(start)
            values.append(otherwise)
        breakpoints.append(end)
        values.append(value)
        if end != D_ONE:
            breakpoints.append(D_ONE)
            values.append(otherwise)
        return cls(tuple(breakpoints), tuple(values))

    @classmethod
    def from_dict(cls, data):
        return cls(
            tuple(DyadicRational.parse(str(b)) for b in data["breakpoints"]),
            tuple(ExtendedReal.parse(str(v)) for v in data["values"]),
        )

    def to_dict(self):
        return {
            "breakpoints": [str(b) for b in self.breakpoints],
            "values": [str(v) for v in self.values],
        }

    @property
    def level(self):
        return max(b.log2_denominator for b in self.breakpoints)

    def pieces(self):
        """Yield ``(start, end, value)`` for every piece."""
        return zip(self.breakpoints, self.breakpoints[1:], self.values)

    def piece_measures(self):
        return [end.to_fraction() - start.to_fraction() for start, end, _ in self.pieces()]

    def simplified(self):
        """Same function with equal neighbouring pieces merged."""
        breakpoints, values = [self.breakpoints[0]], []
        for end, value in zip(self.breakpoints[1:], self.values):
            if values and values[-1] == value:
                breakpoints[-1] = end
            else:
                breakpoints.append(end)
                values.append(value)
        if len(values) == len(self.values):
            return self
        return StepRandomVariable(tuple(breakpoints), tuple(values))

    def evaluate(self, omega):
        omega = DyadicRational.coerce(omega)
        if not (D_ZERO <= omega < D_ONE):
            raise GuardRangeError(f"omega={omega} is outside [0, 1)")
        return self.values[bisect_right(self.breakpoints, omega) - 1]

    def __neg__(self):
        return StepRandomVariable(self.breakpoints, tuple(-v for v in self.values))

    def __sub__(self, other):
        return linear_combination((1, -1), (self, other))

    def __add__(self, other):
        return linear_combination((1, 1), (self, other))

    def __str__(self):
        return "; ".join(f"[{s}, {e}) -> {v}" for s, e, v in self.pieces())


def evaluate(X, omega):
    return X.evaluate(omega)


class _Grid:
    """Common refinement of a family, with breakpoints as integers over ``2**level``."""

    def __init__(self, family, cap=None):
        family = list(family)
        if not family:
            raise ValueError("cannot refine an empty family")
        cap = piece_cap() if cap is None else cap
        self.level = max(X.level for X in family)
        points = set()
        for X in family:
            points.update(b.at_level(self.level) for b in X.breakpoints)
        self.points = sorted(points)
        if len(self.points) - 1 > cap:
            raise PieceCapExceeded(len(self.points) - 1, cap)
        self.position = {p: idx for idx, p in enumerate(self.points)}

    def __len__(self):
        return len(self.points) - 1

    def spans(self, X):
        """Yield ``(first, stop, value)`` grid-piece ranges covered by each piece of X."""
        for start, end, value in X.pieces():
            yield (
                self.position[start.at_level(self.level)],
                self.position[end.at_level(self.level)],
                value,
            )

    def spread(self, X):
        column = [ZERO] * len(self)
        for first, stop, value in self.spans(X):
            column[first:stop] = [value] * (stop - first)
        return column

    def breakpoints(self):
        return tuple(DyadicRational(p, self.level) for p in self.points)


@dataclass(frozen=True)
class Refinement:
    breakpoints: tuple
    # columns[k][piece] is the value of family member k on that piece
    columns: tuple

    def rows(self):
        return zip(*self.columns)

    def member(self, k):
        return StepRandomVariable(self.breakpoints, self.columns[k])


def common_refinement(family, cap=None):
    grid = _Grid(family, cap)
    return Refinement(grid.breakpoints(), tuple(tuple(grid.spread(X)) for X in family))


def linear_combination(coeffs, family, cap=None):
    """Pointwise ``sum(c_k * X_k)``, accumulated in family order on the refinement.

    Terms whose scalar or value is zero are skipped; adding an exact zero never changes
    a double, so the result still equals the left-to-right scalar sum at every point.
    """
    coeffs, family = list(coeffs), list(family)
    if len(coeffs) != len(family):
        raise ValueError("need exactly one coefficient per family member")
    grid = _Grid(family, cap)
    finite = [0.0] * len(grid)
    infinite = [0.0] * len(grid)
    for c, X in zip(coeffs, family):
        c = float(c)
        if c == 0.0:
            continue
        for first, stop, value in grid.spans(X):
            if not value:
                continue
            scaled = value.scale(c)
            for idx in range(first, stop):
                finite[idx] += scaled.finite_part
                infinite[idx] += scaled.infinite_coeff
    values = tuple(ExtendedReal(a, b) for a, b in zip(finite, infinite))
    return StepRandomVariable(grid.breakpoints(), values).simplified()


class PredicateKind(str, enum.Enum):
    ABS_GREATER = "abs-greater-than"
    GREATER = "greater-than"
    IS_INFINITE = "is-infinite"


@dataclass(frozen=True)
class EventPredicate:
    kind: PredicateKind
    threshold: ExtendedReal = ZERO
    negated: bool = False

    @classmethod
    def abs_greater(cls, threshold):
        return cls(PredicateKind.ABS_GREATER, ExtendedReal.coerce(threshold))

    @classmethod
    def greater(cls, threshold):
        return cls(PredicateKind.GREATER, ExtendedReal.coerce(threshold))

    @classmethod
    def infinite(cls):
        return cls(PredicateKind.IS_INFINITE)

    def __invert__(self):
        return EventPredicate(self.kind, self.threshold, not self.negated)

    def holds(self, value):
        if self.kind is PredicateKind.ABS_GREATER:
            result = abs(value) > self.threshold
        elif self.kind is PredicateKind.GREATER:
            result = value > self.threshold
        else:
            result = value.is_infinite
        return result != self.negated


def event_intervals(X, predicate):
    """The event ``{predicate(X)}`` as a sorted list of disjoint ``(start, end)``
    fractions, with touching intervals merged."""
    intervals = []
    for start, end, value in X.pieces():
        if not predicate.holds(value):
            continue
        start, end = start.to_fraction(), end.to_fraction()
        if intervals and intervals[-1][1] == start:
            intervals[-1] = (intervals[-1][0], end)
        else:
            intervals.append((start, end))
    return intervals


def union_measure(interval_lists):
    """Exact Lebesgue measure of the union of several interval lists."""
    merged = sorted(interval for intervals in interval_lists for interval in intervals)
    total = Fraction(0)
    current_start = current_end = None
    for start, end in merged:
        if current_end is None or start > current_end:
            if current_end is not None:
                total += current_end - current_start
            current_start, current_end = start, end
        elif end > current_end:
            current_end = end
    if current_end is not None:
        total += current_end - current_start
    return total


def prob(X, predicate):
    """Exact probability of an event.

    ``X`` is a step function or a family of them; for a family the event is the union,
    i.e. the set where at least one member satisfies ``predicate``.
    """
    family = [X] if isinstance(X, StepRandomVariable) else list(X)
    return union_measure(event_intervals(member, predicate) for member in family)


def finite_ae(X):
    # every piece has positive measure, so finite a.e. means finite everywhere
    return all(value.is_finite for value in X.values)


@dataclass(frozen=True)
class Expectation:
    value: float
    # set when infinite pieces were dropped from the integral
    restricted: bool = False


def expectation_p(X, p=1.0):
    """``(E|X|^p)^(1/p)`` over the finite part of X; ``p=inf`` gives the max |value|.

    Pieces where X is infinite are left out of the integral rather than making it
    diverge, and the result says so through ``restricted``.
    """
    p = float(p)
    if not p >= 1.0:
        raise ValueError(f"p must be at least 1, got {p}")
    restricted = not finite_ae(X)
    finite = [
        (abs(value.finite_part), measure)
        for (_, _, value), measure in zip(X.pieces(), X.piece_measures())
        if value.is_finite
    ]
    if restricted:
        logger.debug("Expectation: infinite pieces excluded from the integral")
    peak = max((magnitude for magnitude, _ in finite), default=0.0)
    if peak == 0.0:
        return Expectation(0.0, restricted)
    if math.isinf(p):
        return Expectation(peak, restricted)
    # normalise by the peak so that |value|**p cannot overflow
    total = math.fsum((magnitude / peak) ** p * float(measure) for magnitude, measure in finite)
    return Expectation(peak * total ** (1.0 / p), restricted)


def sup_family(family, reference, cap=None):
    """Pointwise maximum of ``|X_m - reference|`` over the family."""
    family = list(family)
    if not family:
        raise ValueError("sup over an empty family")
    grid = _Grid(family + [reference], cap)
    ref = grid.spread(reference)
    best = [None] * len(grid)
    for X in family:
        for first, stop, value in grid.spans(X):
            for idx in range(first, stop):
                gap = abs(value - ref[idx])
                if best[idx] is None or gap > best[idx]:
                    best[idx] = gap
    return StepRandomVariable(grid.breakpoints(), tuple(best)).simplified()

"""Extended real numbers ``a + b*inf``.

The set is the two dimensional real vector space spanned by ``1`` and ``inf``, ordered
lexicographically with the ``inf`` coefficient dominating. Every value has exactly one
representation as a pair of coefficients, so equality and hashing are coefficient-wise.

Only the vector space structure exists: values can be added, subtracted and scaled by
real numbers, never multiplied or divided by each other.
"""
import math
import numbers
import re
from dataclasses import dataclass
from functools import total_ordering

from stochsum.exceptions import UnsupportedOperation

_UNSIGNED = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?(?:/\d+)?"
_NUMBER = rf"[+-]?{_UNSIGNED}"
_INF_TERM = re.compile(
    rf"^\s*(?P<sign>[+-])?\s*(?:(?P<coeff>{_UNSIGNED})\s*\*\s*)?inf\s*$", re.IGNORECASE
)
_FINITE = re.compile(rf"^\s*(?P<value>{_NUMBER})\s*$")
_SPLIT = re.compile(r"(?<=[\d.])\s*(?=[+-])")


def _coefficient(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    value = float(value)
    if math.isnan(value):
        raise ValueError(f"{name} is NaN")
    if math.isinf(value):
        raise ValueError(f"{name} overflowed the double range")
    return value


def _parse_number(text):
    if "/" in text:
        num, den = text.split("/")
        return float(num) / float(den)
    return float(text)


@total_ordering
@dataclass(frozen=True)
class ExtendedReal:
    finite_part: float = 0.0
    infinite_coeff: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "finite_part", _coefficient(self.finite_part, "finite_part"))
        object.__setattr__(
            self, "infinite_coeff", _coefficient(self.infinite_coeff, "infinite_coeff")
        )

    @classmethod
    def coerce(cls, value):
        """Accept an ExtendedReal, a real number or its textual form."""
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            return cls.parse(value)
        return cls(value, 0.0)

    @classmethod
    def parse(cls, text):
        """Parse ``"a"``, ``"b*inf"``, ``"inf"`` or ``"a + b*inf"`` / ``"a - b*inf"``."""
        source = text
        text = text.strip()
        finite = _FINITE.match(text)
        if finite:
            return cls(_parse_number(finite.group("value")), 0.0)

        head, tail = text, ""
        parts = _SPLIT.split(text, maxsplit=1)
        if len(parts) == 2:
            head, tail = parts
        infinite = _INF_TERM.match(tail or head)
        if not infinite:
            raise ValueError(f"cannot parse extended real {source!r}")
        coeff = infinite.group("coeff")
        b = _parse_number(coeff) if coeff else 1.0
        if infinite.group("sign") == "-":
            b = -b

        a = 0.0
        if tail:
            finite = _FINITE.match(head)
            if not finite:
                raise ValueError(f"cannot parse extended real {source!r}")
            a = _parse_number(finite.group("value"))
        return cls(a, b)

    @property
    def is_finite(self):
        return self.infinite_coeff == 0.0

    @property
    def is_infinite(self):
        return self.infinite_coeff != 0.0

    @property
    def is_positive_infinite(self):
        return self.infinite_coeff > 0.0

    @property
    def is_negative_infinite(self):
        return self.infinite_coeff < 0.0

    def __add__(self, other):
        if not isinstance(other, ExtendedReal):
            if isinstance(other, numbers.Real):
                other = ExtendedReal(other)
            else:
                return NotImplemented
        return ExtendedReal(
            self.finite_part + other.finite_part,
            self.infinite_coeff + other.infinite_coeff,
        )

    __radd__ = __add__

    def __neg__(self):
        return ExtendedReal(-self.finite_part, -self.infinite_coeff)

    def __sub__(self, other):
        if not isinstance(other, (ExtendedReal, numbers.Real)):
            return NotImplemented
        return self + (-ExtendedReal.coerce(other))

    def __rsub__(self, other):
        return ExtendedReal.coerce(other) - self

    def scale(self, c):
        c = _coefficient(c, "scalar")
        return ExtendedReal(c * self.finite_part, c * self.infinite_coeff)

    def __mul__(self, other):
        if isinstance(other, ExtendedReal):
            raise UnsupportedOperation("extended reals can only be scaled by real numbers")
        if isinstance(other, numbers.Real):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        raise UnsupportedOperation("division of extended reals is not defined")

    __rtruediv__ = __truediv__

    def __abs__(self):
        # Componentwise, not the order-theoretic |u|: |-1 + inf| is 1 + inf.
        return ExtendedReal(abs(self.finite_part), abs(self.infinite_coeff))

    def _key(self):
        return (self.infinite_coeff, self.finite_part)

    def __eq__(self, other):
        if isinstance(other, numbers.Real) and not isinstance(other, bool):
            other = ExtendedReal(other) if math.isfinite(other) else None
        if not isinstance(other, ExtendedReal):
            return NotImplemented
        return self._key() == other._key()

    def __lt__(self, other):
        if isinstance(other, numbers.Real) and not isinstance(other, bool):
            other = ExtendedReal(other)
        if not isinstance(other, ExtendedReal):
            return NotImplemented
        return self._key() < other._key()

    def __hash__(self):
        return hash(self._key())

    def __bool__(self):
        return self.finite_part != 0.0 or self.infinite_coeff != 0.0

    def project(self):
        """Map onto the two-point compactification: finite values are kept, infinite
        values collapse to ``+inf`` or ``-inf`` by the sign of their inf coefficient."""
        if self.infinite_coeff > 0.0:
            return math.inf
        if self.infinite_coeff < 0.0:
            return -math.inf
        return self.finite_part

    def exceeds_every_natural(self):
        """Whether ``|u| > K`` for every natural K.

        One witness suffices: for a finite value ``K = max(10, ceil(|a|) + 1)`` already
        fails, while an infinite value beats every finite K.
        """
        witness = max(10, math.ceil(abs(self.finite_part)) + 1)
        return abs(self) > witness

    def __str__(self):
        a = _render(self.finite_part)
        if self.infinite_coeff == 0.0:
            return a
        sign = "-" if self.infinite_coeff < 0 else "+"
        return f"{a} {sign} {_render(abs(self.infinite_coeff))}*inf"

    def __repr__(self):
        return f"ExtendedReal({self.finite_part!r}, {self.infinite_coeff!r})"


def _render(value):
    if value == int(value) and abs(value) < 2**53:
        return str(int(value))
    return repr(value)


ZERO = ExtendedReal(0.0, 0.0)
ONE = ExtendedReal(1.0, 0.0)
INF = ExtendedReal(0.0, 1.0)


def add(u, v):
    return ExtendedReal.coerce(u) + ExtendedReal.coerce(v)


def scale(c, u):
    return ExtendedReal.coerce(u).scale(c)


def less_than(u, v):
    return ExtendedReal.coerce(u) < ExtendedReal.coerce(v)


def absolute(u):
    return abs(ExtendedReal.coerce(u))


def project_to_rstar(u):
    return ExtendedReal.coerce(u).project()


def is_infinite(u):
    return ExtendedReal.coerce(u).is_infinite

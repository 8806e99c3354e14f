"""Infinite summability matrices given row by row.

A matrix is a function ``i -> RowSpec`` (rows and columns are 1-based). Each row lists
its explicit coefficients and declares what lies beyond them: either nothing (a zero
tail) or an l1 bound on the remainder, which is what makes ``(Ax)_i`` computable with a
certified truncation error.
"""
import enum
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from stochsum.exceptions import (
    ConfigError,
    GuardRangeError,
    InsufficientSequenceError,
    MalformedRowError,
    UncertifiableTailError,
)
from stochsum.step_rv import StepRandomVariable, linear_combination
from stochsum.utils import regularity_tol

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RowSpec:
    coefficients: tuple
    # None means every coefficient after the explicit ones is exactly zero
    tail_bound: Optional[float] = None

    def __post_init__(self):
        coefficients = tuple(float(c) for c in self.coefficients)
        if not all(math.isfinite(c) for c in coefficients):
            raise MalformedRowError("row coefficients must be finite reals")
        if self.tail_bound is not None:
            bound = float(self.tail_bound)
            if not bound >= 0.0 or math.isinf(bound):
                raise MalformedRowError(f"l1 tail bound must be a finite value >= 0, got {bound}")
            object.__setattr__(self, "tail_bound", bound)
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def zero_tail(self):
        return self.tail_bound is None or self.tail_bound == 0.0

    def coefficient(self, j):
        return self.coefficients[j - 1] if j <= len(self.coefficients) else 0.0

    def l1(self):
        return math.fsum(abs(c) for c in self.coefficients) + (self.tail_bound or 0.0)


@dataclass(frozen=True)
class AnalyticFlags:
    """Closed-form facts about a builtin family, used to certify limits."""

    row_sums_one: bool = False
    column_limits_zero: bool = False
    norm: Optional[float] = None
    # Conservative (not necessarily regular) matrices: the column limits and the
    # limit of the row sums exist, with these values.
    column_limit: Optional[Callable[[int], float]] = None
    row_sum_limit: Optional[float] = None
    # closed forms of sum_j a_ij and sum_j |a_ij| as exact fractions
    exact_row_sum: Optional[Callable[[int], Fraction]] = None
    exact_row_l1: Optional[Callable[[int], Fraction]] = None

    @property
    def regular(self):
        return self.row_sums_one and self.column_limits_zero and self.norm is not None

    @property
    def conservative(self):
        if self.regular:
            return True
        return (
            self.norm is not None
            and self.column_limit is not None
            and self.row_sum_limit is not None
        )


@dataclass(frozen=True)
class SummabilityMatrix:
    name: str
    row_generator: Callable[[int], RowSpec] = field(repr=False)
    flags: Optional[AnalyticFlags] = None
    # number of rows for matrices given as a finite prefix; None for infinite ones
    rows_available: Optional[int] = None

    def row(self, i):
        if i < 1:
            raise GuardRangeError(f"row index must be >= 1, got {i}")
        if self.rows_available is not None and i > self.rows_available:
            raise GuardRangeError(f"{self.name} only defines {self.rows_available} rows")
        row = self.row_generator(i)
        if not isinstance(row, RowSpec):
            row = RowSpec(tuple(row))
        return row


def _one(i):
    return Fraction(1)


def _cesaro_row(i):
    return RowSpec((1.0 / i,) * i)


def cesaro():
    """Arithmetic means: ``a_ij = 1/i`` for ``j <= i``."""
    return SummabilityMatrix(
        name="cesaro",
        row_generator=_cesaro_row,
        flags=AnalyticFlags(
            row_sums_one=True,
            column_limits_zero=True,
            norm=1.0,
            exact_row_sum=_one,
            exact_row_l1=_one,
        ),
    )


def identity_matrix():
    return SummabilityMatrix(
        name="identity",
        row_generator=lambda i: RowSpec((0.0,) * (i - 1) + (1.0,)),
        flags=AnalyticFlags(
            row_sums_one=True,
            column_limits_zero=True,
            norm=1.0,
            exact_row_sum=_one,
            exact_row_l1=_one,
        ),
    )


def first_column_ones():
    """``a_i1 = 1`` for every row, the diagonal absorbing the rest of the row sum.

    Every row sums to one and the norm is one, but column 1 never decays: the matrix
    is conservative without being regular.
    """

    def row(i):
        # a_ii = 1 - a_i1 = 0 for i > 1
        return RowSpec((1.0,) + (0.0,) * (i - 1))

    return SummabilityMatrix(
        name="first_column_ones",
        row_generator=row,
        flags=AnalyticFlags(
            row_sums_one=True,
            column_limits_zero=False,
            norm=1.0,
            column_limit=lambda j: 1.0 if j == 1 else 0.0,
            row_sum_limit=1.0,
            exact_row_sum=_one,
            exact_row_l1=_one,
        ),
    )


def abel(tail_target=1e-6):
    """Geometric rows ``a_ij = (1 - q_i) q_i^(j-1)`` with ``q_i = i/(i+1)``.

    Row i is listed up to the first column J with ``q_i^J <= tail_target`` and declares
    ``q_i^J`` as its l1 tail bound.
    """
    if not 0.0 < tail_target < 1.0:
        raise ConfigError("abel tail_target must lie in (0, 1)")

    def row(i):
        q = i / (i + 1)
        columns = max(1, math.ceil(math.log(tail_target) / math.log(q)))
        coefficients = tuple((1.0 - q) * q ** (j - 1) for j in range(1, columns + 1))
        return RowSpec(coefficients, tail_bound=q**columns)

    return SummabilityMatrix(
        name="abel",
        row_generator=row,
        flags=AnalyticFlags(row_sums_one=True, column_limits_zero=True, norm=1.0),
    )


def dense(rows, tail="zero"):
    """A finite prefix of rows given explicitly; no analytic flags.

    ``tail`` is ``"zero"`` or ``{"l1": bound}`` and applies to every row.
    """
    tail_bound = None
    if isinstance(tail, dict):
        try:
            tail_bound = float(tail["l1"])
        except (KeyError, TypeError, ValueError) as e:
            raise MalformedRowError(f"malformed tail {tail!r}") from e
    elif tail != "zero":
        raise MalformedRowError(f"tail must be 'zero' or {{'l1': bound}}, got {tail!r}")
    specs = []
    for idx, row in enumerate(rows, start=1):
        if isinstance(row, RowSpec):
            specs.append(row)
            continue
        try:
            specs.append(RowSpec(tuple(row), tail_bound=tail_bound))
        except (TypeError, ValueError) as e:
            raise MalformedRowError(f"row {idx} is malformed: {e}") from e
    if not specs:
        raise MalformedRowError("a dense matrix needs at least one row")
    specs = tuple(specs)
    return SummabilityMatrix(
        name="dense",
        row_generator=lambda i: specs[i - 1],
        rows_available=len(specs),
    )


BUILTIN_MATRICES = {
    "cesaro": cesaro,
    "identity": identity_matrix,
    "first_column_ones": first_column_ones,
    "abel": abel,
}


def matrix_from_spec(spec):
    """Build a matrix from ``{"builtin": name, ...params}`` or ``{"dense": rows, "tail": ...}``."""
    if isinstance(spec, str):
        spec = {"builtin": spec}
    if not isinstance(spec, dict):
        raise ConfigError(f"matrix spec must be a name or an object, got {spec!r}")
    if "builtin" in spec:
        name = spec["builtin"]
        if not isinstance(name, str) or name not in BUILTIN_MATRICES:
            raise ConfigError(f"unknown builtin matrix {name!r}")
        params = {k: v for k, v in spec.items() if k != "builtin"}
        try:
            return BUILTIN_MATRICES[name](**params)
        except TypeError as e:
            raise ConfigError(f"bad parameters for matrix {name!r}: {e}") from e
    if "dense" in spec:
        try:
            return dense(spec["dense"], spec.get("tail", "zero"))
        except TypeError as e:
            raise MalformedRowError(f"dense rows must be a list of lists: {e}") from e
    raise ConfigError("matrix spec needs a 'builtin' or a 'dense' key")


def _member(x, j):
    if hasattr(x, "member"):
        return x.member(j)
    if j > len(x):
        raise InsufficientSequenceError(f"sequence has {len(x)} terms, row needs X_{j}")
    return x[j - 1]


def apply_row(A, i, x, precision=0.0, tail_norm_bound=None, cap=None):
    """``(Ax)_i = sum_j a_ij X_j`` as a step function.

    ``x`` is a list ``[X_1, X_2, ...]`` or anything with ``member(j)``. Rows with an l1
    tail need ``tail_norm_bound``, a uniform bound on ``|X_j|`` over the tail, such
    that ``tail_bound * tail_norm_bound <= precision``.
    """
    row = A.row(i)
    if not row.zero_tail:
        if tail_norm_bound is None:
            raise UncertifiableTailError(
                f"row {i} of {A.name} has an l1 tail; a bound on the tail terms is required"
            )
        error = row.tail_bound * float(tail_norm_bound)
        if error > precision:
            raise UncertifiableTailError(
                f"row {i} of {A.name}: truncation error {error:.3g} exceeds precision {precision:.3g}"
            )
        logger.debug("Summability: row %s truncated with error <= %s", i, error)

    coeffs, members = [], []
    for j, a in enumerate(row.coefficients, start=1):
        if a != 0.0:
            coeffs.append(a)
            members.append(_member(x, j))
    if not members:
        return StepRandomVariable.constant(0)
    return linear_combination(coeffs, members, cap=cap)


class Status(str, enum.Enum):
    HOLDS = "holds-at-depth"
    FAILS = "fails"
    UNDETERMINED = "undetermined"


class Overall(str, enum.Enum):
    REGULAR = "regular"
    NOT_REGULAR = "not-regular"
    UNDETERMINED = "undetermined-at-depth"


@dataclass(frozen=True)
class ConditionVerdict:
    status: Status
    witness: Optional[dict] = None


@dataclass(frozen=True)
class RegularityReport:
    matrix: str
    depth: int
    norm_estimate_M: float
    condition1: ConditionVerdict
    condition2: ConditionVerdict
    condition3: ConditionVerdict
    overall: Overall
    conservative: Optional[bool] = None

    @property
    def conditions(self):
        return (self.condition1, self.condition2, self.condition3)


def _trailing_start(d):
    return d - max(1, d // 4)


def check_regularity(A, depth, tol=None):
    """Check the three Silverman-Toeplitz conditions on the first ``depth`` rows.

    The norm condition is measured directly. The two limit conditions are tested for
    decay over a trailing window of rows, at every depth up to ``depth``, so a failure
    found at some depth is reported at every larger one. Finite checks alone never
    certify a limit; only analytic flags do.
    """
    tol = regularity_tol() if tol is None else tol
    if depth < 1 or not tol > 0:
        raise ConfigError("check_regularity needs depth >= 1 and tol > 0")
    if A.rows_available is not None and depth > A.rows_available:
        logger.warning(
            "Regularity: %s only has %s rows, checking at that depth instead of %s",
            A.name,
            A.rows_available,
            depth,
        )
        depth = A.rows_available

    flags = A.flags
    exact = (
        flags is not None
        and flags.exact_row_sum is not None
        and flags.exact_row_l1 is not None
    )
    magnitudes = [None]
    deviations = [None]
    norm = 0.0
    condition1 = ConditionVerdict(Status.HOLDS)
    for i in range(1, depth + 1):
        row = A.row(i)
        if exact:
            l1 = float(flags.exact_row_l1(i))
            deviation = float(abs(flags.exact_row_sum(i) - 1))
        else:
            l1 = row.l1()
            # the unknown tail may close the gap, so only the excess is certain
            deviation = max(0.0, abs(math.fsum(row.coefficients) - 1.0) - (row.tail_bound or 0.0))
        if not math.isfinite(l1) and condition1.status is Status.HOLDS:
            condition1 = ConditionVerdict(Status.FAILS, {"i": i, "value": l1})
        norm = max(norm, l1)
        magnitudes.append([abs(c) for c in row.coefficients])
        deviations.append(deviation)

    condition2 = condition3 = ConditionVerdict(Status.UNDETERMINED)
    if depth >= 2:
        condition2 = _column_decay(magnitudes, depth, tol)
        condition3 = _row_sum_decay(deviations, depth, tol)

    conditions = (condition1, condition2, condition3)
    if any(c.status is Status.FAILS for c in conditions):
        overall = Overall.NOT_REGULAR
    elif flags is not None and flags.regular:
        overall = Overall.REGULAR
    else:
        overall = Overall.UNDETERMINED

    report = RegularityReport(
        matrix=A.name,
        depth=depth,
        norm_estimate_M=norm,
        condition1=condition1,
        condition2=condition2,
        condition3=condition3,
        overall=overall,
        conservative=flags.conservative if flags is not None else None,
    )
    logger.info("Regularity: %s at depth %s is %s (M=%s)", A.name, depth, overall.value, norm)
    return report


def _column_decay(magnitudes, depth, tol):
    for d in range(2, depth + 1):
        start = _trailing_start(d)
        earlier_row = magnitudes[start]
        # entries past the end of row d are zero and never exceed tol
        for j, current in enumerate(magnitudes[d][:start], start=1):
            earlier = earlier_row[j - 1] if j <= len(earlier_row) else 0.0
            if current > tol and current >= earlier - tol:
                return ConditionVerdict(
                    Status.FAILS,
                    {
                        "j": j,
                        "value": current,
                        "i": d,
                        "earlier_i": start,
                        "earlier_value": earlier,
                    },
                )
    return ConditionVerdict(Status.HOLDS)


def _row_sum_decay(deviations, depth, tol):
    for d in range(2, depth + 1):
        start = _trailing_start(d)
        current = deviations[d]
        if current > tol and current >= deviations[start] - tol:
            return ConditionVerdict(Status.FAILS, {"i": d, "value": current})
    return ConditionVerdict(Status.HOLDS)

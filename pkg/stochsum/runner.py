"""Config driven experiments: transform a family with a matrix, profile both sides and
decide per mode whether the matrix preserved the convergence."""
import enum
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from django.utils.module_loading import import_string

from stochsum import settings as stochsum_settings
from stochsum.diagnostics import (
    ModeSpec,
    ae_pointwise_check,
    almost_sure_profile,
    almost_sure_sweep,
    in_probability_profile,
    lp_profile,
)
from stochsum.exceptions import ConfigError, StochSumError
from stochsum.montecarlo import monte_carlo_profile
from stochsum.sequences import Mode, SequenceFamily, family_from_spec
from stochsum.serializers import ExperimentConfigSerializer
from stochsum.step_rv import DyadicRational
from stochsum.summability import apply_row, check_regularity, matrix_from_spec
from stochsum.utils import report_backend_path, should_propagate_exceptions

logger = logging.getLogger(__name__)


class Preservation(str, enum.Enum):
    PRESERVED = "preserved"
    COUNTEREXAMPLE = "counterexample"
    INCONCLUSIVE = "inconclusive"
    INPUT_NOT_CONVERGENT = "input-not-convergent"


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    matrix: dict
    family: dict
    modes: tuple
    start: int
    stop: int
    seed: int = 0
    monte_carlo: bool = False
    samples: Optional[int] = None
    piece_cap: Optional[int] = None
    precision: float = 0.0
    tail_norm_bound: Optional[float] = None
    regularity_depth: int = 100
    regularity_tol: Optional[float] = None
    gnuplot: bool = False
    # the payload the config was built from, echoed into the report
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_data(cls, data):
        serializer = ExperimentConfigSerializer(data=data)
        if not serializer.is_valid():
            raise ConfigError(f"invalid experiment config: {json.dumps(serializer.errors)}")
        attrs = serializer.validated_data
        regularity = attrs.get("regularity") or {}
        return cls(
            name=attrs["name"],
            matrix=attrs["matrix"],
            family=attrs["family"],
            modes=tuple(dict(entry) for entry in attrs["modes"]),
            start=attrs["indices"]["start"],
            stop=attrs["indices"]["stop"],
            seed=attrs["seed"],
            monte_carlo=attrs["monte_carlo"],
            samples=attrs.get("samples"),
            piece_cap=attrs.get("piece_cap"),
            precision=attrs["precision"],
            tail_norm_bound=attrs.get("tail_norm_bound"),
            regularity_depth=regularity.get("depth", 100),
            regularity_tol=regularity.get("tol"),
            gnuplot=attrs["gnuplot"],
            raw=data,
        )

    def with_seed(self, seed):
        raw = {**self.raw, "seed": seed}
        return ExperimentConfig.from_data(raw)

    @property
    def indices(self):
        return range(self.start, self.stop + 1)


def load_config(path):
    """Read and validate a JSON experiment config."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    config = ExperimentConfig.from_data(data)
    logger.info("Runner: loaded config %s from %s", config.name, path)
    return config


@dataclass(frozen=True)
class ModeResult:
    entry: dict
    input_profile: object = None
    output_profile: object = None
    input_pointwise: Optional[list] = None
    output_pointwise: Optional[list] = None
    sweep_stabilized: Optional[bool] = None
    preservation: Optional[Preservation] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    regularity: object
    results: tuple
    schema_version: int = stochsum_settings.REPORT_SCHEMA_VERSION


def transformed_family(A, x, precision=0.0, tail_norm_bound=None, cap=None):
    """The sequence ``((Ax)_1, (Ax)_2, ...)`` as a family, rows computed once on demand."""
    horizons = [h for h in (x.horizon, A.rows_available) if h is not None]

    def generator(i):
        return apply_row(
            A, i, x, precision=precision, tail_norm_bound=tail_norm_bound, cap=cap
        )

    return SequenceFamily(
        name=f"{A.name}({x.name})",
        generator=generator,
        limit=x.limit,
        horizon=min(horizons) if horizons else None,
        params={"matrix": A.name, "family": x.name},
    )


def preservation(input_verdict, output_verdict):
    if not input_verdict.converges:
        return Preservation.INPUT_NOT_CONVERGENT
    if output_verdict.converges:
        return Preservation.PRESERVED
    if output_verdict.diverges:
        return Preservation.COUNTEREXAMPLE
    return Preservation.INCONCLUSIVE


def pointwise_preservation(inputs, outputs):
    if not all(report.converges for report in inputs):
        return Preservation.INPUT_NOT_CONVERGENT
    # outputs checked for Cauchy existence only carry converges=None
    if all(report.converges or (report.converges is None and report.cauchy) for report in outputs):
        return Preservation.PRESERVED
    if any(not report.cauchy for report in outputs):
        return Preservation.COUNTEREXAMPLE
    return Preservation.INCONCLUSIVE


def mode_spec(entry):
    mode = Mode(entry["mode"])
    return ModeSpec(
        mode,
        lam=entry.get("lam"),
        # a window on an lp entry would name a Cauchy profile the runner does not build
        window=entry.get("window") if mode is Mode.ALMOST_SURE else None,
        p=entry.get("p"),
        omegas=tuple(entry.get("omegas", ())),
    )


def profile_for(spec, x, limit, indices, monte_carlo=False, samples=None, seed=0):
    """One profile of ``x`` against ``limit``; only the probability modes can be sampled."""
    if monte_carlo and spec.mode in (Mode.IN_PROBABILITY, Mode.ALMOST_SURE):
        return monte_carlo_profile(x, limit, spec, indices, samples=samples, seed=seed)
    if spec.mode is Mode.IN_PROBABILITY:
        return in_probability_profile(x, limit, spec.lam, indices)
    if spec.mode is Mode.ALMOST_SURE:
        return almost_sure_profile(x, limit, spec.lam, spec.window, indices)
    if spec.mode is Mode.LP:
        return lp_profile(x, limit, spec.p, indices)
    raise ConfigError(f"{spec.mode.value} has no profile")


def run_mode(config, entry, family, transformed, matrix):
    spec = mode_spec(entry)
    logger.info("Runner: %s on %s", spec.slug, transformed.name)

    if spec.mode is Mode.AE_POINTWISE:
        omegas = [DyadicRational.coerce(omega) for omega in spec.omegas]
        tol = entry.get("tol", 1e-6)
        inputs = ae_pointwise_check(family, family.limit, omegas, config.stop, tol=tol)
        # a conservative but non-regular matrix has a limit of its own, so only the
        # existence of one can be checked
        flags = matrix.flags
        output_limit = family.limit if flags is not None and flags.regular else None
        outputs = ae_pointwise_check(transformed, output_limit, omegas, config.stop, tol=tol)
        return ModeResult(
            entry=entry,
            input_pointwise=inputs,
            output_pointwise=outputs,
            preservation=pointwise_preservation(inputs, outputs),
        )

    epsilon = entry.get("epsilon", 0.05)
    start = entry.get("start")
    sampling = {
        "monte_carlo": config.monte_carlo,
        "samples": config.samples,
        "seed": config.seed,
    }
    input_profile = profile_for(spec, family, family.limit, config.indices, **sampling)
    output_profile = profile_for(spec, transformed, family.limit, config.indices, **sampling)
    input_profile = input_profile.with_verdict(epsilon, start)
    output_profile = output_profile.with_verdict(epsilon, start)

    stabilized = None
    if spec.mode is Mode.ALMOST_SURE and entry.get("sweep") and not config.monte_carlo:
        sweep = almost_sure_sweep(
            transformed, family.limit, spec.lam, spec.window, config.indices
        )
        stabilized = sweep.stabilized

    return ModeResult(
        entry=entry,
        input_profile=input_profile,
        output_profile=output_profile,
        sweep_stabilized=stabilized,
        preservation=preservation(input_profile.verdict, output_profile.verdict),
    )


def run(config):
    """Run every configured mode and return the assembled report."""
    matrix = matrix_from_spec(config.matrix)
    family = family_from_spec(config.family)
    regularity = check_regularity(matrix, config.regularity_depth, config.regularity_tol)
    transformed = transformed_family(
        matrix,
        family,
        precision=config.precision,
        tail_norm_bound=config.tail_norm_bound,
        cap=config.piece_cap,
    )

    results = []
    for entry in config.modes:
        try:
            results.append(run_mode(config, entry, family, transformed, matrix))
        except StochSumError as e:
            logger.exception("Runner: mode %s of %s failed", entry.get("mode"), config.name)
            if should_propagate_exceptions():
                raise
            results.append(ModeResult(entry=entry, error=str(e)))

    return ExperimentReport(config=config, regularity=regularity, results=tuple(results))


def write_report(report, output_dir=None):
    """Hand the report to the configured backend and return the written paths."""
    backend = import_string(report_backend_path())(output_dir)
    return backend.write(report, gnuplot=report.config.gnuplot)

from stochsum.backends import render_profile_csv
from stochsum.diagnostics import ModeSpec, ae_pointwise_check
from stochsum.management.base import (
    StochSumCommand,
    add_family_arguments,
    add_matrix_arguments,
    family_from_options,
    matrix_from_options,
)
from stochsum.runner import profile_for, transformed_family
from stochsum.sequences import Mode
from stochsum.serializers import (
    ConvergenceProfileSerializer,
    NormExponentField,
    PointwiseReportSerializer,
)
from stochsum.step_rv import DyadicRational


class Command(StochSumCommand):
    help = "Compute one convergence profile of a family, or of its transform by a matrix."

    def add_arguments(self, parser):
        add_family_arguments(parser)
        add_matrix_arguments(parser, required=False)
        parser.add_argument("--mode", required=True, choices=[m.value for m in Mode])
        parser.add_argument("--lambda", dest="lam", type=float)
        parser.add_argument("--window", type=int)
        parser.add_argument("--p", default=None)
        parser.add_argument("--start", type=int, default=1)
        parser.add_argument("--stop", type=int, required=True)
        parser.add_argument("--epsilon", type=float, default=0.05, help="verdict threshold")
        parser.add_argument("--omega", action="append", default=[], help="ae-pointwise sample")
        parser.add_argument("--tol", type=float, default=1e-6)
        parser.add_argument("--monte-carlo", action="store_true")
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("--samples", type=int)
        parser.add_argument("--format", choices=["json", "csv"], default="json")
        parser.add_argument("--precision", type=float, default=0.0)
        parser.add_argument("--tail-norm-bound", type=float)

    def handle(self, *args, **options):
        family = family_from_options(options)
        x, label = family, "input"
        matrix = matrix_from_options(options)
        if matrix is not None:
            x = transformed_family(
                matrix,
                family,
                precision=options["precision"],
                tail_norm_bound=options["tail_norm_bound"],
            )
            label = "output"

        p = None
        if options["p"] is not None:
            p = NormExponentField().run_validation(options["p"])
        spec = ModeSpec(
            Mode(options["mode"]),
            lam=options["lam"],
            window=options["window"],
            p=p,
            omegas=tuple(DyadicRational.coerce(o) for o in options["omega"]),
        )

        if spec.mode is Mode.AE_POINTWISE:
            limit = family.limit
            if matrix is not None and not (matrix.flags is not None and matrix.flags.regular):
                limit = None
            reports = ae_pointwise_check(x, limit, spec.omegas, options["stop"], tol=options["tol"])
            self.emit(PointwiseReportSerializer(reports, many=True).data)
            return

        profile = profile_for(
            spec,
            x,
            family.limit,
            range(options["start"], options["stop"] + 1),
            monte_carlo=options["monte_carlo"],
            samples=options["samples"],
            seed=options["seed"],
        ).with_verdict(options["epsilon"])
        if options["format"] == "csv":
            self.stdout.write(render_profile_csv([(label, profile)]), ending="")
        else:
            self.emit(ConvergenceProfileSerializer(profile).data)

from stochsum.management.base import (
    StochSumCommand,
    add_family_arguments,
    add_matrix_arguments,
    family_from_options,
    matrix_from_options,
)
from stochsum.serializers import StepFunctionSerializer
from stochsum.summability import apply_row


class Command(StochSumCommand):
    help = "Print row i of the transformed sequence (Ax)_i as a step function."

    def add_arguments(self, parser):
        add_matrix_arguments(parser)
        add_family_arguments(parser)
        parser.add_argument("--epsilon", help="dyadic epsilon of example2")
        parser.add_argument("--row", type=int, required=True)
        parser.add_argument("--precision", type=float, default=0.0)
        parser.add_argument("--tail-norm-bound", type=float)

    def handle(self, *args, **options):
        matrix = matrix_from_options(options)
        family = family_from_options(options, epsilon=options["epsilon"])
        result = apply_row(
            matrix,
            options["row"],
            family,
            precision=options["precision"],
            tail_norm_bound=options["tail_norm_bound"],
        )
        payload = {"row": options["row"], "matrix": matrix.name, "family": family.name}
        payload.update(StepFunctionSerializer(result).data)
        self.emit(payload)

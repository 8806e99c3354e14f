from stochsum.management.base import StochSumCommand, add_matrix_arguments, matrix_from_options
from stochsum.serializers import RegularityReportSerializer
from stochsum.summability import check_regularity


class Command(StochSumCommand):
    help = "Check the regularity conditions of a summability matrix on its first rows."

    def add_arguments(self, parser):
        add_matrix_arguments(parser)
        parser.add_argument("--depth", type=int, required=True)
        parser.add_argument("--tol", type=float)

    def handle(self, *args, **options):
        matrix = matrix_from_options(options)
        report = check_regularity(matrix, options["depth"], options["tol"])
        self.emit(RegularityReportSerializer(report).data)

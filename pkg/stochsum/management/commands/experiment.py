from stochsum.management.base import StochSumCommand
from stochsum.runner import load_config, run, write_report


class Command(StochSumCommand):
    help = "Run an experiment config and write its report files."

    def add_arguments(self, parser):
        parser.add_argument("--config", required=True)
        parser.add_argument("--output-dir")
        parser.add_argument("--seed", type=int, help="override the Monte Carlo seed")

    def handle(self, *args, **options):
        config = load_config(options["config"])
        if options["seed"] is not None:
            config = config.with_seed(options["seed"])
        report = run(config)
        for path in write_report(report, options["output_dir"]):
            self.stdout.write(str(path))

from stochsum.management.base import StochSumCommand
from stochsum.sequences import BUILTIN_FAMILIES
from stochsum.summability import BUILTIN_MATRICES


class Command(StochSumCommand):
    help = "List the builtin sequence families and summability matrices."

    def handle(self, *args, **options):
        self.emit(
            {
                "families": [
                    {
                        "name": info.name,
                        "description": info.description,
                        "declared_modes": sorted(mode.value for mode in info.declared_modes),
                        "horizon": info.horizon,
                    }
                    for info in BUILTIN_FAMILIES.values()
                ],
                "matrices": sorted(BUILTIN_MATRICES),
            }
        )

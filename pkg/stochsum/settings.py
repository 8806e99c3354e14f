import os

from django.conf import settings

# Largest number of pieces a common refinement may produce. Example 1 at index n needs
# about n pieces, so the default leaves a lot of headroom while still catching runaway
# property tests.
PIECE_CAP = getattr(settings, "STOCHSUM_PIECE_CAP", 2**20)

# Monte Carlo path only. The exact path never samples.
MC_SAMPLES = getattr(settings, "STOCHSUM_MC_SAMPLES", 100_000)

# Where the experiment runner writes report.json and the profile tables.
OUTPUT_DIR = getattr(
    settings,
    "STOCHSUM_OUTPUT_DIR",
    os.environ.get("STOCHSUM_OUTPUT_DIR", "reports"),
)

# report writer backend settings
REPORT_BACKEND = getattr(
    settings,
    "STOCHSUM_REPORT_BACKEND",
    "stochsum.backends.FileReportBackend",
)

# Threads used to evaluate profile indices. Results are always assembled in index
# order, so the value never changes a report.
WORKERS = int(getattr(settings, "STOCHSUM_WORKERS", 1))

REGULARITY_TOL = getattr(settings, "STOCHSUM_REGULARITY_TOL", 1e-9)

# Share of the checked indices (the largest ones) a statistic must stay above
# epsilon on before a profile is declared divergent.
DIVERGENCE_QUARTILE = getattr(settings, "STOCHSUM_DIVERGENCE_QUARTILE", 0.25)

REPORT_SCHEMA_VERSION = 1

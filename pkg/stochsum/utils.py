from fractions import Fraction

from django.conf import settings

from stochsum import settings as stochsum_settings


def piece_cap():
    """Piece-count cap for common refinements, read at call time.

    :rtype: int
    """
    return getattr(settings, "STOCHSUM_PIECE_CAP", stochsum_settings.PIECE_CAP)


def mc_samples():
    return getattr(settings, "STOCHSUM_MC_SAMPLES", stochsum_settings.MC_SAMPLES)


def worker_count():
    return max(1, int(getattr(settings, "STOCHSUM_WORKERS", stochsum_settings.WORKERS)))


def should_propagate_exceptions():
    """Whether a failing experiment mode should abort the whole run.

    :rtype: bool
    """
    return getattr(settings, "STOCHSUM_PROPAGATE_EXCEPTIONS", True)


def format_number(value):
    """Render a statistic for reports.

    Fractions keep their exact ``p/q`` form, floats use ``repr`` so that the text is
    stable across runs and round-trips.
    """
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def output_dir():
    return getattr(settings, "STOCHSUM_OUTPUT_DIR", stochsum_settings.OUTPUT_DIR)


def report_backend_path():
    return getattr(settings, "STOCHSUM_REPORT_BACKEND", stochsum_settings.REPORT_BACKEND)


def regularity_tol():
    return getattr(settings, "STOCHSUM_REGULARITY_TOL", stochsum_settings.REGULARITY_TOL)


def divergence_quartile():
    return getattr(
        settings, "STOCHSUM_DIVERGENCE_QUARTILE", stochsum_settings.DIVERGENCE_QUARTILE
    )

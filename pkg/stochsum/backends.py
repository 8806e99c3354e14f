import csv
import io
import json
import logging
from pathlib import Path

from django.core.serializers.json import DjangoJSONEncoder

from stochsum.serializers import ExperimentReportSerializer
from stochsum.utils import format_number, output_dir

logger = logging.getLogger(__name__)

PROFILE_COLUMNS = ("n", "sequence", "statistic", "certified")


def render_report(report):
    """report.json contents: sorted keys, fixed indentation, trailing newline."""
    payload = ExperimentReportSerializer(report).data
    return json.dumps(payload, cls=DjangoJSONEncoder, indent=2, sort_keys=True) + "\n"


def render_profile_csv(profiles):
    """One row per ``(sequence, n)`` for ``profiles``, a list of ``(label, profile)``."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(PROFILE_COLUMNS)
    for label, profile in profiles:
        for n, statistic in profile:
            writer.writerow(
                [n, label, format_number(statistic), str(profile.certified).lower()]
            )
    return buffer.getvalue()


def render_gnuplot(profile):
    return "".join(f"{n} {float(statistic)!r}\n" for n, statistic in profile)


class FileReportBackend:
    """Writes an ExperimentReport under ``output_dir``.

    Every file is rendered from the report alone, so the same report always produces
    byte-identical files.
    """

    def __init__(self, directory=None):
        self.directory = Path(directory if directory is not None else output_dir())

    def write(self, report, gnuplot=False):
        self.directory.mkdir(parents=True, exist_ok=True)
        written = [self._write("report.json", render_report(report))]

        used = set()
        for result in report.results:
            profiles = [
                (label, profile)
                for label, profile in (
                    ("input", result.input_profile),
                    ("output", result.output_profile),
                )
                if profile is not None
            ]
            if not profiles:
                continue
            slug = profiles[0][1].mode.slug
            stem, suffix = slug, 2
            while stem in used:
                stem, suffix = f"{slug}-{suffix}", suffix + 1
            used.add(stem)
            written.append(self._write(f"profile_{stem}.csv", render_profile_csv(profiles)))
            if gnuplot:
                for label, profile in profiles:
                    written.append(self._write(f"{stem}_{label}.dat", render_gnuplot(profile)))

        logger.info("Reports: wrote %s files to %s", len(written), self.directory)
        return written

    def _write(self, name, content):
        path = self.directory / name
        path.write_text(content, encoding="utf-8")
        logger.debug("Reports: wrote %s", path)
        return path

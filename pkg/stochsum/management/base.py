import json
import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError
from django.core.serializers.json import DjangoJSONEncoder
from rest_framework.exceptions import ValidationError

from stochsum.exceptions import ConfigError, StochSumError
from stochsum.sequences import family_from_spec
from stochsum.summability import matrix_from_spec

logger = logging.getLogger(__name__)


class StochSumCommand(BaseCommand):
    """Maps library errors onto exit codes: 2 config, 3 guard range, 4 piece cap."""

    def execute(self, *args, **options):
        try:
            return super().execute(*args, **options)
        except StochSumError as e:
            raise CommandError(str(e), returncode=e.exit_code) from e
        except ValidationError as e:
            raise CommandError(json.dumps(e.detail), returncode=ConfigError.exit_code) from e

    def emit(self, payload):
        self.stdout.write(json.dumps(payload, cls=DjangoJSONEncoder, indent=2, sort_keys=True))


def add_matrix_arguments(parser, required=True):
    group = parser.add_mutually_exclusive_group(required=required)
    group.add_argument("--matrix", help="builtin matrix name, or a JSON matrix spec")
    group.add_argument("--matrix-file", help="path to a JSON matrix spec")


def matrix_from_options(options):
    if options.get("matrix_file"):
        path = Path(options["matrix_file"])
        try:
            spec = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read matrix spec {path}: {e}") from e
        return matrix_from_spec(spec)
    if options.get("matrix"):
        return matrix_from_spec(_spec_or_name(options["matrix"], "builtin"))
    return None


def add_family_arguments(parser):
    parser.add_argument("--family", required=True, help="builtin family name or JSON spec")
    parser.add_argument(
        "--family-param",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="extra family parameter, may be repeated",
    )
    parser.add_argument("--decay-power", type=float, help="decay power of synthetic families")


def family_from_options(options, epsilon=None):
    spec = _spec_or_name(options["family"], "family")
    for item in options.get("family_param") or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--family-param expects KEY=VALUE, got {item!r}")
        spec[key] = _json_or_text(value)
    if options.get("decay_power") is not None:
        key = "norm_power" if spec.get("family") == "synthetic_lp" else "decay_power"
        spec[key] = options["decay_power"]
    if epsilon is not None:
        spec["epsilon"] = epsilon
    return family_from_spec(spec)


def _spec_or_name(value, key):
    if value.lstrip().startswith("{"):
        try:
            return json.loads(value)
        except json.JSONDecodeError as e:
            raise ConfigError(f"malformed JSON spec {value!r}: {e}") from e
    return {key: value}


def _json_or_text(value):
    try:
        return json.loads(value)
    except json.JSONDecodeError:
        return value

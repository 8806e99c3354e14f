import math

from rest_framework import serializers

from stochsum.exceptions import StochSumError
from stochsum.sequences import Mode, family_from_spec
from stochsum.step_rv import DyadicRational
from stochsum.summability import matrix_from_spec
from stochsum.utils import format_number


def render_float(value):
    """JSON has no infinity; infinite floats are written as ``"inf"`` / ``"-inf"``."""
    if value is None:
        return None
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


class NormExponentField(serializers.Field):
    default_error_messages = {
        "invalid": "p must be a number >= 1 or 'inf'.",
    }

    def to_internal_value(self, data):
        if isinstance(data, str) and data.strip().lower() in ("inf", "infinity"):
            return math.inf
        try:
            value = float(data)
        except (TypeError, ValueError):
            self.fail("invalid")
        if not value >= 1.0:
            self.fail("invalid")
        return value

    def to_representation(self, value):
        return render_float(value)


class ModeEntrySerializer(serializers.Serializer):
    mode = serializers.ChoiceField(choices=[m.value for m in Mode])
    # "lambda" in the JSON payload
    lam = serializers.FloatField(required=False)
    window = serializers.IntegerField(required=False, min_value=1)
    p = NormExponentField(required=False)
    epsilon = serializers.FloatField(required=False, default=0.05)
    start = serializers.IntegerField(required=False, min_value=1)
    omegas = serializers.ListField(child=serializers.CharField(), required=False)
    tol = serializers.FloatField(required=False, default=1e-6)
    sweep = serializers.BooleanField(required=False, default=False)

    def to_internal_value(self, data):
        if isinstance(data, dict) and "lambda" in data:
            data = {**{k: v for k, v in data.items() if k != "lambda"}, "lam": data["lambda"]}
        return super().to_internal_value(data)

    def to_representation(self, instance):
        data = super().to_representation(instance)
        if "lam" in data:
            data["lambda"] = data.pop("lam")
        return data

    def validate_epsilon(self, value):
        if not value > 0:
            raise serializers.ValidationError("epsilon must be positive.")
        return value

    def validate_omegas(self, value):
        try:
            points = [DyadicRational.coerce(v) for v in value]
        except (TypeError, ValueError) as e:
            raise serializers.ValidationError(str(e)) from e
        if any(not point < DyadicRational(1) for point in points):
            raise serializers.ValidationError("sample points must lie in [0, 1).")
        return value

    def validate(self, attrs):
        mode = Mode(attrs["mode"])
        if mode in (Mode.IN_PROBABILITY, Mode.ALMOST_SURE):
            lam = attrs.get("lam")
            if lam is None or not lam > 0:
                raise serializers.ValidationError({"lambda": "lambda must be positive."})
        if mode is Mode.ALMOST_SURE and "window" not in attrs:
            raise serializers.ValidationError({"window": "almost-sure needs a window."})
        if mode is Mode.LP and "p" not in attrs:
            raise serializers.ValidationError({"p": "lp needs p."})
        if mode is Mode.AE_POINTWISE and not attrs.get("omegas"):
            raise serializers.ValidationError({"omegas": "ae-pointwise needs sample points."})
        return attrs


class IndexRangeSerializer(serializers.Serializer):
    start = serializers.IntegerField(min_value=1)
    stop = serializers.IntegerField(min_value=1)

    def validate(self, attrs):
        if attrs["start"] > attrs["stop"]:
            raise serializers.ValidationError("start must not exceed stop.")
        return attrs


class RegularityOptionsSerializer(serializers.Serializer):
    depth = serializers.IntegerField(min_value=1, default=100)
    tol = serializers.FloatField(required=False)

    def validate_tol(self, value):
        if not value > 0:
            raise serializers.ValidationError("tol must be positive.")
        return value


class ExperimentConfigSerializer(serializers.Serializer):
    name = serializers.CharField(default="experiment")
    matrix = serializers.JSONField()
    family = serializers.JSONField()
    modes = ModeEntrySerializer(many=True, allow_empty=False)
    indices = IndexRangeSerializer()
    seed = serializers.IntegerField(default=0)
    monte_carlo = serializers.BooleanField(default=False)
    samples = serializers.IntegerField(required=False, min_value=1)
    piece_cap = serializers.IntegerField(required=False, min_value=1)
    precision = serializers.FloatField(default=0.0, min_value=0.0)
    tail_norm_bound = serializers.FloatField(required=False, allow_null=True, min_value=0.0)
    regularity = RegularityOptionsSerializer(required=False)
    gnuplot = serializers.BooleanField(default=False)

    def validate_matrix(self, value):
        try:
            matrix_from_spec(value)
        except StochSumError as e:
            raise serializers.ValidationError(str(e)) from e
        return value

    def validate_family(self, value):
        try:
            family_from_spec(value)
        except StochSumError as e:
            raise serializers.ValidationError(str(e)) from e
        return value

    def validate(self, attrs):
        family = family_from_spec(attrs["family"])
        matrix = matrix_from_spec(attrs["matrix"])
        stop = attrs["indices"]["stop"]
        if family.horizon is not None and stop > family.horizon:
            raise serializers.ValidationError(
                {"indices": f"{family.name} is only defined up to n={family.horizon}."}
            )
        if matrix.rows_available is not None and stop > matrix.rows_available:
            raise serializers.ValidationError(
                {"indices": f"{matrix.name} only defines {matrix.rows_available} rows."}
            )
        return attrs


class StepFunctionSerializer(serializers.Serializer):
    breakpoints = serializers.SerializerMethodField()
    values = serializers.SerializerMethodField()
    min = serializers.SerializerMethodField()
    max = serializers.SerializerMethodField()

    def get_breakpoints(self, obj):
        return [str(b) for b in obj.breakpoints]

    def get_values(self, obj):
        return [str(v) for v in obj.values]

    def get_min(self, obj):
        return str(min(obj.values))

    def get_max(self, obj):
        return str(max(obj.values))


class ConditionVerdictSerializer(serializers.Serializer):
    status = serializers.CharField(source="status.value", read_only=True)
    witness = serializers.SerializerMethodField()

    def get_witness(self, obj):
        if obj.witness is None:
            return None
        return {
            key: render_float(value) if isinstance(value, float) else value
            for key, value in obj.witness.items()
        }


class RegularityReportSerializer(serializers.Serializer):
    matrix = serializers.CharField(read_only=True)
    depth = serializers.IntegerField(read_only=True)
    norm_estimate_M = serializers.SerializerMethodField()
    condition1 = ConditionVerdictSerializer(read_only=True)
    condition2 = ConditionVerdictSerializer(read_only=True)
    condition3 = ConditionVerdictSerializer(read_only=True)
    overall = serializers.CharField(source="overall.value", read_only=True)
    conservative = serializers.BooleanField(read_only=True, allow_null=True)

    def get_norm_estimate_M(self, obj):
        return render_float(obj.norm_estimate_M)


class VerdictSerializer(serializers.Serializer):
    kind = serializers.CharField(source="kind.value", read_only=True)
    epsilon = serializers.FloatField(read_only=True)
    from_index = serializers.IntegerField(read_only=True, allow_null=True)
    witness = serializers.SerializerMethodField()

    def get_witness(self, obj):
        if obj.witness is None:
            return None
        n, statistic = obj.witness
        return {"n": n, "statistic": format_number(statistic)}


class ModeSpecSerializer(serializers.Serializer):
    mode = serializers.CharField(source="mode.value", read_only=True)
    slug = serializers.CharField(read_only=True)
    parameters = serializers.SerializerMethodField()

    def get_parameters(self, obj):
        parameters = {}
        if obj.lam is not None:
            parameters["lambda"] = obj.lam
        if obj.window is not None:
            parameters["window"] = obj.window
        if obj.p is not None:
            parameters["p"] = render_float(obj.p)
        return parameters


class ConvergenceProfileSerializer(serializers.Serializer):
    mode = ModeSpecSerializer(read_only=True)
    certified = serializers.BooleanField(read_only=True)
    lower_bound = serializers.BooleanField(read_only=True)
    hypothesis_violated = serializers.BooleanField(read_only=True)
    window_clamped = serializers.BooleanField(read_only=True)
    verdict = VerdictSerializer(read_only=True, allow_null=True)
    indices = serializers.ListField(child=serializers.IntegerField(), read_only=True)
    statistics = serializers.SerializerMethodField()
    half_widths = serializers.SerializerMethodField()

    def get_statistics(self, obj):
        return [format_number(s) for s in obj.statistics]

    def get_half_widths(self, obj):
        if obj.half_widths is None:
            return None
        return [render_float(h) for h in obj.half_widths]


class PointwiseReportSerializer(serializers.Serializer):
    omega = serializers.SerializerMethodField()
    oscillation = serializers.SerializerMethodField()
    cauchy = serializers.BooleanField(read_only=True)
    limit_value = serializers.SerializerMethodField()
    gap = serializers.SerializerMethodField()
    converges = serializers.BooleanField(read_only=True, allow_null=True)
    final_value = serializers.SerializerMethodField()

    def get_omega(self, obj):
        return str(obj.omega)

    def get_oscillation(self, obj):
        return render_float(obj.oscillation)

    def get_limit_value(self, obj):
        return None if obj.limit_value is None else str(obj.limit_value)

    def get_gap(self, obj):
        return render_float(obj.gap)

    def get_final_value(self, obj):
        return str(obj.values[-1])


class ModeResultSerializer(serializers.Serializer):
    entry = ModeEntrySerializer(read_only=True)
    input_profile = ConvergenceProfileSerializer(read_only=True, allow_null=True)
    output_profile = ConvergenceProfileSerializer(read_only=True, allow_null=True)
    input_pointwise = PointwiseReportSerializer(read_only=True, many=True, allow_null=True)
    output_pointwise = PointwiseReportSerializer(read_only=True, many=True, allow_null=True)
    sweep_stabilized = serializers.BooleanField(read_only=True, allow_null=True)
    preservation = serializers.SerializerMethodField()
    error = serializers.CharField(read_only=True, allow_null=True)

    def get_preservation(self, obj):
        return None if obj.preservation is None else obj.preservation.value


class ExperimentReportSerializer(serializers.Serializer):
    schema_version = serializers.IntegerField(read_only=True)
    name = serializers.SerializerMethodField()
    config = serializers.SerializerMethodField()
    regularity = RegularityReportSerializer(read_only=True, allow_null=True)
    results = ModeResultSerializer(read_only=True, many=True)

    def get_name(self, obj):
        return obj.config.name

    def get_config(self, obj):
        return obj.config.raw

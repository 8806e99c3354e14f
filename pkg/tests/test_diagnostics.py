import math
import random
from fractions import Fraction

import pytest

from stochsum.diagnostics import (
    ConvergenceProfile,
    ModeSpec,
    VerdictKind,
    ae_pointwise_check,
    almost_sure_profile,
    almost_sure_sweep,
    as_threshold,
    in_probability_profile,
    lp_cauchy_profile,
    lp_profile,
    verdict,
)
from stochsum.exceptions import ConfigError, GuardRangeError
from stochsum.runner import Preservation, preservation, transformed_family
from stochsum.sequences import Mode, example1_indices, family_from_spec
from stochsum.step_rv import (
    DyadicRational,
    EventPredicate,
    StepRandomVariable,
    linear_combination,
    prob,
)
from stochsum.summability import cesaro, dense

from tests.factories import make_random_family

ZERO = StepRandomVariable.constant(0)


def harmonic(n):
    return math.fsum(1.0 / j for j in range(1, n + 1))


def lp_profile_of(stats):
    return ConvergenceProfile(ModeSpec(Mode.LP, p=1.0), range(1, len(stats) + 1), stats)


class TestModeSpec:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"mode": Mode.IN_PROBABILITY},
            {"mode": Mode.IN_PROBABILITY, "lam": 0},
            {"mode": Mode.ALMOST_SURE, "lam": 1.0},
            {"mode": Mode.ALMOST_SURE, "lam": 1.0, "window": 0},
            {"mode": Mode.LP},
            {"mode": Mode.LP, "p": 0.5},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            ModeSpec(**kwargs)

    def test_slugs(self):
        assert ModeSpec("in-probability", lam=1.0).slug == "in-probability_lambda=1"
        assert (
            ModeSpec(Mode.ALMOST_SURE, lam=0.1, window=64).slug
            == "almost-sure_lambda=0.1_window=64"
        )
        assert ModeSpec(Mode.LP, p=math.inf).slug == "lp_p=inf"
        assert ModeSpec(Mode.LP, p=2.0).slug == "lp_p=2"
        assert ModeSpec(Mode.LP, p=2.0, window=4).slug == "lp-cauchy_p=2_window=4"
        assert ModeSpec(Mode.AE_POINTWISE).slug == "ae-pointwise"

    def test_probabilities_are_bounded(self):
        with pytest.raises(ValueError):
            ConvergenceProfile(ModeSpec(Mode.IN_PROBABILITY, lam=1.0), (1,), (Fraction(3, 2),))
        with pytest.raises(ValueError):
            ConvergenceProfile(ModeSpec(Mode.LP, p=1.0), (1, 2), (0.5,))


class TestInProbability:
    @pytest.mark.parametrize("lam", [0.5, 1, 3.9])
    def test_example1_tail_probability(self, example1_seq, lam):
        profile = in_probability_profile(example1_seq, None, lam, range(2, 512))
        for n, statistic in profile:
            m, _ = example1_indices(n)
            assert statistic == Fraction(1, 2**m)
        assert list(profile.statistics) == sorted(profile.statistics, reverse=True)

    def test_cesaro_transform_of_example1_exceeds_one(self, cesaro_matrix, example1_seq):
        transformed = transformed_family(cesaro_matrix, example1_seq)
        for n in range(16, 512):
            assert prob(transformed.member(n), EventPredicate.greater(1)) == 1

    def test_limit_required(self):
        with pytest.raises(ConfigError):
            in_probability_profile([ZERO, ZERO], None, 1.0, [1])

    def test_list_past_end(self):
        with pytest.raises(GuardRangeError):
            in_probability_profile([ZERO], ZERO, 1.0, [1, 2])

    def test_threaded_matches_serial(self, settings, example1_seq):
        serial = in_probability_profile(example1_seq, None, 1.0, range(2, 200))
        settings.STOCHSUM_WORKERS = 4
        threaded = in_probability_profile(example1_seq, None, 1.0, range(2, 200))
        assert threaded == serial

        serial_as = almost_sure_profile(example1_seq, None, 1.0, 8, range(2, 100))
        settings.STOCHSUM_WORKERS = 1
        assert almost_sure_profile(example1_seq, None, 1.0, 8, range(2, 100)) == serial_as


class TestAlmostSure:
    @pytest.mark.parametrize(
        "spec, stop",
        [
            ("example1", 511),
            ("example2", 100),
            ({"family": "synthetic_as", "decay_power": 1}, 200),
            ({"family": "synthetic_as", "decay_power": 1, "support": ["0", "1/4"]}, 200),
            ({"family": "synthetic_lp", "p": 2}, 200),
            ({"family": "constant", "value": 2}, 50),
        ],
    )
    @pytest.mark.parametrize("lam", [0.1, 1])
    def test_dominates_in_probability_builtins(self, spec, stop, lam):
        family = family_from_spec(spec)
        indices = range(1, stop + 1)
        marginal = in_probability_profile(family, None, lam, indices)
        previous = marginal.statistics
        for window in (1, 8, 64):
            windowed = almost_sure_profile(family, None, lam, window, indices)
            assert windowed.lower_bound
            for low, high in zip(previous, windowed.statistics):
                assert low <= high
            previous = windowed.statistics

    def test_dominates_in_probability_random(self):
        rng = random.Random(20240611)
        for _ in range(100):
            family = make_random_family(rng)
            indices = range(1, len(family) + 1)
            for lam in (0.1, 1):
                marginal = in_probability_profile(family, ZERO, lam, indices)
                for window in (1, 8, 64):
                    windowed = almost_sure_profile(family, ZERO, lam, window, indices)
                    for low, high in zip(marginal.statistics, windowed.statistics):
                        assert low <= high

    def test_window_clamped_at_horizon(self, example1_seq):
        assert almost_sure_profile(example1_seq, None, 1.0, 8, range(500, 512)).window_clamped
        assert not almost_sure_profile(example1_seq, None, 1.0, 8, range(1, 11)).window_clamped

    def test_index_past_horizon(self, example1_seq, harmonic_as):
        with pytest.raises(GuardRangeError):
            almost_sure_profile(example1_seq, None, 1.0, 8, range(505, 700))
        with pytest.raises(GuardRangeError):
            in_probability_profile(example1_seq, None, 1.0, [600])

        # a dense prefix bounds the transformed sequence to its rows
        transformed = transformed_family(dense([[1], [0.5, 0.5], [0, 0, 1]]), harmonic_as)
        assert almost_sure_profile(transformed, None, 0.1, 8, range(1, 4)).window_clamped
        with pytest.raises(GuardRangeError):
            almost_sure_profile(transformed, None, 0.1, 8, range(1, 6))

    def test_example1_never_settles(self, example1_seq):
        profile = almost_sure_profile(example1_seq, None, 1.0, 64, range(2, 400))
        assert all(statistic >= Fraction(1, 2**8) for statistic in profile.statistics)

    def test_sweep(self, harmonic_as, example1_seq):
        sweep = almost_sure_sweep(harmonic_as, None, 0.1, 4, range(1, 30))
        assert sweep.stabilized
        assert [p.mode.window for p in sweep.profiles] == [4, 8, 16]

        sweep = almost_sure_sweep(example1_seq, None, 1.0, 1, range(2, 20))
        assert not sweep.stabilized

    def test_input_threshold(self, harmonic_as):
        profile = almost_sure_profile(harmonic_as, None, 0.1, 64, range(1, 30))
        assert profile.statistics[:9] == (1,) * 9
        assert set(profile.statistics[9:]) == {0}
        assert as_threshold(profile) == 10

    @pytest.mark.parametrize("decay_power", [1, 2])
    @pytest.mark.parametrize("lam", [0.1, 0.01])
    def test_cesaro_preserves_almost_sure(self, decay_power, lam):
        family = family_from_spec({"family": "synthetic_as", "decay_power": decay_power})
        transformed = transformed_family(cesaro(), family)
        indices = range(1, 801)

        output = almost_sure_profile(transformed, family.limit, lam, 64, indices)
        expected = next(
            n for n in indices if transformed.member(n).values[0].finite_part <= lam
        )
        threshold = as_threshold(output)
        assert threshold == expected
        assert set(output.statistics[threshold - 1 :]) == {0}
        assert set(output.statistics[: threshold - 1]) <= {1}

        if decay_power == 1:
            assert transformed.member(threshold).values[0].finite_part == pytest.approx(
                harmonic(threshold) / threshold, abs=1e-12
            )

        source = almost_sure_profile(family, None, lam, 64, indices)
        source_verdict = verdict(source, 0.05, threshold)
        output_verdict = verdict(output, 0.05, threshold)
        assert preservation(source_verdict, output_verdict) is Preservation.PRESERVED


class TestLp:
    @pytest.mark.parametrize("p", [1, 2, "inf"])
    @pytest.mark.parametrize("support_log2", [0, 3])
    def test_cesaro_of_harmonic_norms(self, p, support_log2):
        family = family_from_spec({"family": "synthetic_lp", "p": p, "support_log2": support_log2})
        transformed = transformed_family(cesaro(), family)
        indices = range(1, 301)
        norm = math.inf if p == "inf" else float(p)

        output = lp_profile(transformed, None, norm, indices)
        for n, statistic in output:
            assert statistic == pytest.approx(harmonic(n) / n, abs=1e-12)
        assert not output.hypothesis_violated

        source = lp_profile(family, None, norm, indices)
        out_verdict = verdict(output, 0.05)
        assert out_verdict.converges
        n = out_verdict.from_index
        assert output.statistics[n - 1] < 0.05 <= output.statistics[n - 2]
        assert preservation(verdict(source, 0.05), out_verdict) is Preservation.PRESERVED

    def test_scaled_support(self):
        family = family_from_spec({"family": "synthetic_lp", "p": 2, "support_log2": 3})
        for n, statistic in lp_profile(family, None, 2, range(1, 50)):
            assert statistic == pytest.approx(1 / n, rel=1e-12)

    def test_cauchy(self, harmonic_as):
        profile = lp_cauchy_profile(harmonic_as, 1, 4, range(1, 20))
        for n, statistic in profile:
            assert statistic == pytest.approx(1 / n - 1 / (n + 4), abs=1e-15)
        flat = lp_cauchy_profile(family_from_spec("constant"), 1, 4, range(1, 5))
        assert set(flat.statistics) == {0.0}

    def test_cauchy_index_past_horizon(self, example1_seq):
        profile = lp_cauchy_profile(example1_seq, 1, 4, range(505, 512))
        assert profile.mode.slug == "lp-cauchy_p=1_window=4"
        assert profile.mode.slug != lp_profile(example1_seq, None, 1, [505]).mode.slug
        with pytest.raises(GuardRangeError):
            lp_cauchy_profile(example1_seq, 1, 4, [600])

    @pytest.mark.parametrize("p", [1, 2, 3, math.inf])
    def test_scaling(self, p):
        rng = random.Random(20240612)
        for _ in range(20):
            x = make_random_family(rng, length=6, infinite_share=0.0)
            limit = make_random_family(rng, length=1, infinite_share=0.0)[0]
            base = lp_profile(x, limit, p, range(1, 7))
            for c in (-3, 0.5, 2):
                scaled = [linear_combination((c, -c), (X, limit)) for X in x]
                profile = lp_profile(scaled, ZERO, p, range(1, 7))
                for statistic, expected in zip(profile.statistics, base.statistics):
                    assert statistic == pytest.approx(abs(c) * expected, rel=1e-12, abs=1e-12)


class TestExample2:
    def test_cesaro_counterexample(self, cesaro_matrix, example2_quarter):
        transformed = transformed_family(cesaro_matrix, example2_quarter)
        indices = range(1, 41)

        output = in_probability_profile(transformed, example2_quarter.limit, 1.0, indices)
        assert set(output.statistics) == {Fraction(1, 4)}

        source = in_probability_profile(example2_quarter, None, 1.0, indices)
        assert source.statistics[0] == Fraction(1, 4)
        assert set(source.statistics[1:]) == {0}

        source_verdict = verdict(source, 0.05)
        assert source_verdict.converges and source_verdict.from_index == 2
        output_verdict = verdict(output, 0.05)
        assert output_verdict.diverges
        assert output_verdict.witness == (40, Fraction(1, 4))
        assert preservation(source_verdict, output_verdict) is Preservation.COUNTEREXAMPLE

    def test_lp_flags_infinite_member(self, example2_quarter):
        assert lp_profile(example2_quarter, None, 1, range(1, 5)).hypothesis_violated
        assert not lp_profile(example2_quarter, None, 1, range(2, 5)).hypothesis_violated


class TestPointwise:
    def test_converging_family(self, harmonic_as):
        (report,) = ae_pointwise_check(harmonic_as, harmonic_as.limit, ["1/2"], 100, tol=0.02)
        assert report.oscillation == pytest.approx(0.01)
        assert report.cauchy
        assert report.gap == pytest.approx(0.01)
        assert report.converges

    def test_example1_oscillates(self, example1_seq):
        (report,) = ae_pointwise_check(example1_seq, example1_seq.limit, [DyadicRational(3, 3)], 511)
        assert not report.cauchy
        assert report.converges is False

    def test_cauchy_only_without_limit(self, cesaro_matrix, example2_quarter):
        transformed = transformed_family(cesaro_matrix, example2_quarter)
        reports = ae_pointwise_check(transformed, None, ["1/8", "1/2"], 100)
        assert reports[0].oscillation == math.inf
        assert not reports[0].cauchy
        assert reports[1].cauchy
        assert all(report.converges is None and report.limit_value is None for report in reports)

    def test_bad_horizon(self, harmonic_as):
        with pytest.raises(ConfigError):
            ae_pointwise_check(harmonic_as, None, ["1/2"], 0)


class TestVerdict:
    def test_converges(self):
        result = verdict(lp_profile_of((1, 1, 1, 1, 0, 0, 0, 0)), 0.5)
        assert result.kind is VerdictKind.CONVERGES
        assert result.from_index == 5

    def test_diverges(self):
        result = verdict(lp_profile_of((0, 0, 1, 1, 1, 1, 1, 1)), 0.5)
        assert result.diverges
        assert result.witness == (8, 1)

    def test_inconclusive(self):
        assert verdict(lp_profile_of((0, 0, 0, 0, 0, 0, 0, 1)), 0.5).kind is VerdictKind.INCONCLUSIVE
        assert verdict(lp_profile_of((1, 0, 1, 0)), 0.5, start=9).kind is VerdictKind.INCONCLUSIVE

    def test_start(self):
        profile = lp_profile_of((0, 0, 1, 1, 0, 0, 0, 0))
        assert verdict(profile, 0.5).from_index == 5
        assert verdict(profile, 0.5, start=5).from_index == 5

    def test_epsilon_must_be_positive(self):
        with pytest.raises(ConfigError):
            verdict(lp_profile_of((0,)), 0)

    def test_with_verdict(self):
        profile = lp_profile_of((1, 0, 0, 0)).with_verdict(0.5)
        assert profile.verdict.converges
        assert profile.verdict.epsilon == 0.5

    def test_quartile_setting(self, settings):
        profile = lp_profile_of((1, 1, 1, 1, 1, 1, 0, 0))
        assert verdict(profile, 0.5).from_index == 7

        settings.STOCHSUM_DIVERGENCE_QUARTILE = 0.5
        assert verdict(profile, 0.5).kind is VerdictKind.INCONCLUSIVE

    def test_threshold(self):
        assert as_threshold(lp_profile_of((1, 0, 1, 0, 0))) == 4
        assert as_threshold(lp_profile_of((0, 0, 1))) is None
        assert as_threshold(lp_profile_of((0.3, 0.2, 0.1)), epsilon=0.25) == 2

import math

import numpy as np
import pytest

from syncurator import (
    Channel,
    MotionParams,
    PairKind,
    RankingFidelity,
    SynthSpec,
    generate_pair,
    ranking_fidelity,
    score_pair,
    serialize_bundle,
    standard_suite,
)
from syncurator.evalmetrics import eval_sync


class TestSpec:
    @pytest.mark.parametrize(
        "kwargs",
        [dict(n_frames=1), dict(dropout_rate=1.0), dict(lag_frames=81), dict(noise_sigma=-0.1)],
    )
    def test_invalid_specs(self, kwargs):
        with pytest.raises(ValueError):
            SynthSpec(**kwargs)

    def test_kind_auto_classification(self):
        assert SynthSpec().effective_kind is PairKind.IDENTICAL
        assert SynthSpec(lag_frames=1).effective_kind is PairKind.EDITED
        assert SynthSpec(noise_sigma=0.01).effective_kind is PairKind.EDITED
        assert SynthSpec(kind=PairKind.EDITED).effective_kind is PairKind.EDITED


class TestDeterminism:
    def test_pure_function_of_spec(self):
        spec = SynthSpec(lag_frames=3, noise_sigma=0.004, dropout_rate=0.1, seed=17)
        first = generate_pair(spec)
        second = generate_pair(spec)
        assert serialize_bundle(first.source) == serialize_bundle(second.source)
        assert serialize_bundle(first.edited) == serialize_bundle(second.edited)

    def test_zero_perturbation_views_identical_apart_from_view_field(self):
        pair = generate_pair(SynthSpec(seed=4))
        source_bytes = serialize_bundle(pair.source)
        edited_bytes = serialize_bundle(pair.edited)
        assert source_bytes != edited_bytes
        assert source_bytes.replace(b'"view":"source"', b'"view":"edited"') == edited_bytes

    def test_different_seeds_differ_under_noise(self):
        a = generate_pair(SynthSpec(noise_sigma=0.003, seed=1))
        b = generate_pair(SynthSpec(noise_sigma=0.003, seed=2))
        assert serialize_bundle(a.edited) != serialize_bundle(b.edited)


class TestLagBehavior:
    def test_half_period_lag_anticorrelates_speech_and_blink(self):
        motion = MotionParams(blink_period=20.0)  # match the speech period
        pair = generate_pair(SynthSpec(lag_frames=10, motion=motion))
        sync = eval_sync(pair)
        assert sync[Channel.SPEECH] == pytest.approx(math.cos(math.pi), abs=0.1)
        assert sync[Channel.BLINK] == pytest.approx(math.cos(math.pi), abs=0.1)
        score = score_pair(pair)
        assert score.sync_score < 0.0

    def test_channel_correlations_track_generating_cosines(self):
        motion = MotionParams()
        for lag in (2, 5, 8):
            sync = eval_sync(generate_pair(SynthSpec(lag_frames=lag)))
            assert sync[Channel.SPEECH] == pytest.approx(
                math.cos(2 * math.pi * lag / motion.speech_period), abs=0.1
            )
            assert sync[Channel.BLINK] == pytest.approx(
                math.cos(2 * math.pi * lag / motion.blink_period), abs=0.1
            )
            assert sync[Channel.GAZE] == pytest.approx(
                math.cos(2 * math.pi * lag / motion.gaze_period), abs=0.1
            )
            assert sync[Channel.POSE] == pytest.approx(
                math.cos(2 * math.pi * lag / motion.pose_period), abs=0.1
            )

    def test_dropout_discards(self):
        for seed in (0, 1, 2):
            result = score_pair(generate_pair(SynthSpec(dropout_rate=0.6, seed=seed)))
            assert result.discarded

    def test_monotone_degradation_over_seeds(self):
        means = []
        for lag in range(6):
            scores = [
                score_pair(
                    generate_pair(SynthSpec(lag_frames=lag, noise_sigma=0.005, seed=s))
                ).sync_score
                for s in range(20)
            ]
            means.append(np.mean(scores))
        assert all(later <= earlier for earlier, later in zip(means, means[1:]))


class TestRankingFidelity:
    def test_perfect_antiranking_without_noise(self):
        specs = [SynthSpec(lag_frames=lag) for lag in range(10)]
        result = ranking_fidelity(specs)
        assert result == RankingFidelity(rho=-1.0, degenerate=False)

    def test_equal_lags_degenerate(self):
        specs = [SynthSpec(lag_frames=3, noise_sigma=0.001, seed=s) for s in range(10)]
        result = ranking_fidelity(specs)
        assert result.degenerate
        assert result.rho == 0.0

    def test_standard_suite_with_noise(self):
        result = ranking_fidelity(standard_suite(seeds_per_lag=4))
        assert result.rho <= -0.9

    def test_requires_ten_specs(self):
        with pytest.raises(ValueError):
            ranking_fidelity([SynthSpec()] * 9)


def test_standard_suite_shape():
    specs = standard_suite(lags=range(5), seeds_per_lag=3, noise_sigma=0.002)
    assert len(specs) == 15
    assert {spec.lag_frames for spec in specs} == set(range(5))
    assert len({spec.seed for spec in specs}) == 15
    assert all(spec.noise_sigma == 0.002 for spec in specs)

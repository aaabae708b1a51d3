import math
from dataclasses import replace

import numpy as np
import pytest

from hoverbench.camera import CameraParams
from hoverbench.controller import DEFAULT_PARAMS, compute_control
from hoverbench.core import FullState, HeadState, Odometry
from hoverbench.nn import MLPModel, MLPSpec, TrainConfig, init_model
from hoverbench.pipeline import (
    ApproachKind,
    SweepConfig,
    TrainedApproach,
    build_corpus,
    generate_session,
    predict_control,
    predict_control_batch,
    predict_control_raw,
    run_sweep,
    train_approach,
)
from hoverbench.sim import PersonProfile

FAST_CFG = TrainConfig(max_epochs=15, early_stop_patience=4, plateau_patience_epochs=2, seed=0)


class TestGenerateSession:
    def test_tick_count(self):
        s = generate_session(PersonProfile(1.7, 1.0, 0.5, 0), duration=180.0, seed=1)
        assert len(s.instances) == 5400

    def test_deterministic(self):
        prof = PersonProfile(1.7, 1.0, 0.5, 0)
        a = generate_session(prof, duration=15.0, seed=7)
        b = generate_session(prof, duration=15.0, seed=7)
        assert a.instances == b.instances
        assert a.standoffs == b.standoffs

    def test_labels_recompute_exactly(self):
        s = generate_session(PersonProfile(1.7, 1.0, 0.6, 0), duration=15.0, seed=3)
        for inst in s.instances[::37]:
            again = compute_control(FullState(inst.s_pose, inst.odom), DEFAULT_PARAMS)
            assert again == inst.u

    def test_standoff_validation(self):
        with pytest.raises(ValueError):
            generate_session(
                PersonProfile(1.7, 1.0, 0.5, 0), duration=5.0, standoff_schedule=[2.5], seed=0
            )

    def test_explicit_schedule_used(self):
        s = generate_session(
            PersonProfile(1.7, 1.0, 0.5, 0), duration=5.0, standoff_schedule=[1.25], seed=0
        )
        assert s.standoffs == [1.25]

    def test_bad_duration(self):
        with pytest.raises(ValueError):
            generate_session(PersonProfile(1.7, 1.0, 0.5, 0), duration=0.0, seed=0)

    def test_odom_hold(self):
        prof = PersonProfile(1.7, 1.0, 0.5, 0)
        s = generate_session(prof, duration=3.0, seed=5, odom_hold_hz=5.0)
        odoms = [inst.odom for inst in s.instances]
        # held for 6 ticks at a time
        for base in range(0, 30, 6):
            assert all(odoms[base + k] == odoms[base] for k in range(6))


class TestBuildCorpus:
    def test_split_shape(self, small_corpus):
        counts = small_corpus.counts()
        total = sum(counts.values())
        assert total == 3 * 40 * 30
        assert counts["test"] == 40 * 30

    def test_test_sessions_held_out_whole(self, small_corpus):
        test_ids = set(small_corpus.test_session_ids())
        assert len(test_ids) == 1
        for inst in small_corpus.test_instances():
            assert inst.session_id in test_ids
        for sid, codes in small_corpus.assignment.items():
            if sid not in test_ids:
                assert "s" not in codes

    def test_validation_fraction(self):
        corpus = build_corpus(4, 1, seed=11, duration=30.0)
        counts = corpus.counts()
        frac = counts["validation"] / (counts["train"] + counts["validation"])
        assert abs(frac - 0.21) < 0.02

    def test_paper_scale_ratio(self):
        # 15 sessions with 3 held out mirrors the full protocol; short
        # sessions keep the test quick, the ratio is duration-invariant
        corpus = build_corpus(15, 3, seed=2, duration=4.0)
        counts = corpus.counts()
        total = sum(counts.values())
        assert counts["test"] / total == pytest.approx(3 / 15, abs=1e-9)

    def test_distinct_profiles(self, small_corpus):
        profiles = [s.profile for s in small_corpus.sessions]
        assert len({p.eye_height for p in profiles}) == len(profiles)

    def test_bad_counts(self):
        with pytest.raises(ValueError):
            build_corpus(3, 3, seed=0, duration=5.0)

    def test_determinism(self):
        a = build_corpus(2, 1, seed=4, duration=8.0)
        b = build_corpus(2, 1, seed=4, duration=8.0)
        assert a.assignment == b.assignment
        for sa, sb in zip(a.sessions, b.sessions):
            assert sa.instances == sb.instances


class _OracleM1:
    """Test double: perfect perception via a lookup from feature bytes."""

    def __init__(self, instances):
        self._table = {inst.im.as_array().tobytes(): inst.s_pose.as_array() for inst in instances}

    def predict(self, x):
        x = np.atleast_2d(x)
        return np.array([self._table[row.tobytes()] for row in x])


class TestTrainApproach:
    def test_ground_truth_needs_no_training(self, small_corpus):
        app = train_approach(ApproachKind.GROUND_TRUTH, small_corpus, 10, FAST_CFG, seed=0)
        assert app.m1 is None and app.m2 is None and app.m3 is None

    def test_model_shapes(self, small_corpus):
        a1 = train_approach(ApproachKind.A1, small_corpus, 200, FAST_CFG, seed=0)
        assert a1.m1.spec.input_dim == 6 and a1.m1.spec.output_dim == 4
        a2 = train_approach(ApproachKind.A2, small_corpus, 200, FAST_CFG, seed=0)
        assert a2.m2.spec.input_dim == 8 and a2.m2.spec.output_dim == 4
        a3 = train_approach(ApproachKind.A3, small_corpus, 200, FAST_CFG, seed=0)
        assert a3.m3.spec.input_dim == 6 and a3.m3.spec.output_dim == 4

    def test_architecture_isolation(self, small_corpus):
        # a2 inputs carry no ground-truth state; m1 targets carry no labels
        tr = small_corpus.train_arrays()
        assert tr["im"].shape[1] == 6 and tr["odom"].shape[1] == 2
        a1 = train_approach(ApproachKind.A1, small_corpus, 100, FAST_CFG, seed=1)
        assert a1.m1.spec.output_dim == tr["s_pose"].shape[1]

    def test_t_too_large(self, small_corpus):
        with pytest.raises(ValueError):
            train_approach(ApproachKind.A1, small_corpus, 10**6, FAST_CFG, seed=0)

    def test_deterministic(self, small_corpus):
        a = train_approach(ApproachKind.A2, small_corpus, 150, FAST_CFG, seed=9)
        b = train_approach(ApproachKind.A2, small_corpus, 150, FAST_CFG, seed=9)
        for pa, pb in zip(a.m2.parameters(), b.m2.parameters()):
            assert np.array_equal(pa, pb)

    def test_invalid_combo_rejected(self):
        with pytest.raises(ValueError):
            TrainedApproach(ApproachKind.A1)  # missing m1

    def test_a3_with_oracle_m1_beats_a2_on_validation(self, small_corpus):
        oracle = _OracleM1(
            [i for s in small_corpus.sessions for i in s.instances]
        )
        cfg = TrainConfig(max_epochs=25, seed=3)
        a3 = train_approach(ApproachKind.A3, small_corpus, 1500, cfg, seed=3, m1_override=oracle)
        a2 = train_approach(ApproachKind.A2, small_corpus, 1500, cfg, seed=3)
        assert a3.reports["m3"].best_validation_loss < a2.reports["m2"].best_validation_loss


class TestPredictControl:
    def test_ground_truth_matches_controller(self, small_corpus):
        app = TrainedApproach(ApproachKind.GROUND_TRUTH)
        inst = small_corpus.sessions[0].instances[100]
        u = predict_control(app, inst.im, inst.odom, true_s=inst.s_pose)
        assert u == inst.u

    def test_oracle_collapse(self, small_corpus):
        instances = small_corpus.sessions[0].instances[:300]
        app = TrainedApproach(ApproachKind.A1, m1=_OracleM1(instances))
        gt = TrainedApproach(ApproachKind.GROUND_TRUTH)
        for inst in instances[::17]:
            u_a1 = predict_control(app, inst.im, inst.odom)
            u_gt = predict_control(gt, inst.im, inst.odom, true_s=inst.s_pose)
            assert u_a1 == u_gt

    def test_actuation_clamped(self):
        class WildModel:
            spec = MLPSpec(8, (), 4)

            def predict(self, x):
                return np.tile(np.array([2.0, 0.0, 0.0, 5.0]), (np.atleast_2d(x).shape[0], 1))

        app = TrainedApproach(ApproachKind.A2, m2=WildModel())
        from hoverbench.camera import ImageFeatures

        im = ImageFeatures(0.1, 0.0, 0.2, 0.5, 0.0, 1)
        raw = predict_control_raw(app, im, Odometry(0, 0))
        assert raw == pytest.approx([2.0, 0.0, 0.0, 5.0])
        u = predict_control(app, im, Odometry(0, 0))
        assert u.as_array() == pytest.approx([1.0, 0.0, 0.0, 2.0])

    def test_ground_truth_requires_state(self, small_corpus):
        app = TrainedApproach(ApproachKind.GROUND_TRUTH)
        inst = small_corpus.sessions[0].instances[0]
        with pytest.raises(ValueError):
            predict_control(app, inst.im, inst.odom)

    def test_batch_ground_truth_bitwise_equals_labels(self, small_corpus):
        te = small_corpus.test_arrays()
        app = TrainedApproach(ApproachKind.GROUND_TRUTH)
        pred = predict_control_batch(app, te["im"], te["odom"], te["s_pose"])
        assert np.array_equal(pred, te["u"])


class TestSweep:
    def test_bookkeeping_and_determinism(self, small_corpus):
        cfg = SweepConfig(t_values=(64, 128), replicas=(2, 1), seed=5)
        a = run_sweep(small_corpus, cfg, FAST_CFG)
        b = run_sweep(small_corpus, cfg, FAST_CFG)
        assert len(a.rows) == (2 + 1) * 3 * 4
        assert a.rows == b.rows
        assert all(r.r2 <= 1.0 for r in a.rows)

    def test_replicas_validation(self):
        with pytest.raises(ValueError):
            SweepConfig(t_values=(64, 128), replicas=(1, 2))
        with pytest.raises(ValueError):
            SweepConfig(t_values=(64,), replicas=(51,))
        with pytest.raises(ValueError):
            SweepConfig(t_values=(64, 128), replicas=(2,))

    def test_t_exceeding_corpus_rejected(self, small_corpus):
        cfg = SweepConfig(t_values=(10**6,), replicas=(1,), seed=0)
        with pytest.raises(ValueError):
            run_sweep(small_corpus, cfg, FAST_CFG)

    def test_median_table(self, small_corpus):
        cfg = SweepConfig(t_values=(64,), replicas=(2,), seed=6)
        report = run_sweep(small_corpus, cfg, FAST_CFG)
        table = report.median_table()
        assert ("a1", "u_ax", 64) in table
        assert len(table) == 3 * 4

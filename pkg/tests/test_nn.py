import numpy as np
import pytest

from hoverbench.nn import (
    AdamState,
    MLPModel,
    MLPSpec,
    TrainConfig,
    adam_step,
    backward,
    forward,
    init_model,
    load_model,
    mae_loss,
    save_model,
    train,
)


def flat_params(model):
    return np.concatenate([p.ravel() for p in model.parameters()])


class TestInit:
    def test_deterministic(self):
        spec = MLPSpec(4, (8, 8), 2)
        a = init_model(spec, seed=3)
        b = init_model(spec, seed=3)
        assert all(np.array_equal(x, y) for x, y in zip(a.parameters(), b.parameters()))

    def test_zero_biases(self):
        m = init_model(MLPSpec(4, (8,), 2), seed=0)
        assert all(np.all(b == 0) for b in m.biases)

    def test_fan_bound(self):
        # 2 -> 3 layer limit sqrt(6/5); 3 -> 1 layer limit sqrt(6/4)
        m = init_model(MLPSpec(2, (3,), 1), seed=1)
        assert np.abs(m.weights[0]).max() <= np.sqrt(6 / 5)
        assert np.abs(m.weights[1]).max() <= np.sqrt(6 / 4)

    def test_bad_spec(self):
        with pytest.raises(ValueError):
            MLPSpec(0, (4,), 1)
        with pytest.raises(ValueError):
            MLPSpec(4, (4,), 1, activation="tanh")


class TestForward:
    def test_zero_weights_zero_output(self):
        m = init_model(MLPSpec(3, (4,), 2), seed=0)
        for w in m.weights:
            w[...] = 0.0
        assert np.array_equal(forward(m, np.ones(3)), np.zeros(2))

    def test_identity_single_layer(self):
        m = init_model(MLPSpec(3, (), 3), seed=0)
        m.weights[0][...] = np.eye(3)
        m.biases[0][...] = 0.0
        x = np.array([1.0, -2.0, 0.5])
        assert np.array_equal(forward(m, x), x)

    def test_hand_computed(self):
        # relu(1*1 - 0.5) * 2 = 1.0
        m = init_model(MLPSpec(1, (1,), 1), seed=0)
        m.weights[0][...] = 1.0
        m.biases[0][...] = -0.5
        m.weights[1][...] = 2.0
        m.biases[1][...] = 0.0
        assert forward(m, np.array([1.0]))[0] == pytest.approx(1.0, abs=1e-12)

    def test_shape_error(self):
        m = init_model(MLPSpec(3, (4,), 2), seed=0)
        with pytest.raises(ValueError):
            forward(m, np.ones(5))

    def test_batch_shape(self):
        m = init_model(MLPSpec(3, (4,), 2), seed=0)
        assert forward(m, np.ones((7, 3))).shape == (7, 2)


class TestMAE:
    def test_zero(self):
        x = np.array([[1.0, 2.0]])
        assert mae_loss(x, x) == 0.0

    def test_hand_value(self):
        assert mae_loss(np.array([2.0, 4.0]), np.array([1.0, 2.0])) == pytest.approx(1.5)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(5)
        pred = rng.normal(size=(20, 3))
        target = rng.normal(size=(20, 3))
        perm = rng.permutation(20)
        assert mae_loss(pred, target) == pytest.approx(mae_loss(pred[perm], target[perm]))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            mae_loss(np.ones((2, 2)), np.ones((2, 3)))


class TestBackward:
    def test_zero_at_perfect_fit(self):
        m = init_model(MLPSpec(2, (3,), 1), seed=2)
        x = np.array([[0.3, -0.2]])
        y = forward(m, x)
        gw, gb = backward(m, x, y)
        assert all(np.all(g == 0) for g in gw)
        assert all(np.all(g == 0) for g in gb)

    def test_deterministic(self):
        m = init_model(MLPSpec(3, (5,), 2), seed=4)
        rng = np.random.default_rng(0)
        x = rng.normal(size=(8, 3))
        y = rng.normal(size=(8, 2))
        g1 = backward(m, x, y)
        g2 = backward(m, x, y)
        for a, b in zip(g1[0] + g1[1], g2[0] + g2[1]):
            assert np.array_equal(a, b)

    @staticmethod
    def _numeric_grad(model, x, y, h=1e-5):
        grads = []
        for p in model.parameters():
            g = np.zeros_like(p)
            it = np.nditer(p, flags=["multi_index"])
            while not it.finished:
                idx = it.multi_index
                orig = p[idx]
                p[idx] = orig + h
                hi = mae_loss(forward(model, x), y)
                p[idx] = orig - h
                lo = mae_loss(forward(model, x), y)
                p[idx] = orig
                g[idx] = (hi - lo) / (2 * h)
                it.iternext()
            grads.append(g)
        return grads

    def _check_one(self, rng):
        dims = (int(rng.integers(1, 8)), int(rng.integers(1, 8)))
        spec = MLPSpec(int(rng.integers(1, 8)), dims, int(rng.integers(1, 5)))
        model = init_model(spec, seed=int(rng.integers(0, 2**31)))
        # resample until every relu argument and every residual is clear of
        # the kinks, so finite differences see a locally smooth landscape
        for _ in range(60):
            x = rng.normal(size=(3, spec.input_dim))
            y = rng.normal(size=(3, spec.output_dim))
            h = np.atleast_2d(x)
            clear = True
            for i, (w, b) in enumerate(zip(model.weights, model.biases)):
                z = h @ w + b
                if i != len(model.weights) - 1:
                    if np.min(np.abs(z)) < 1e-3:
                        clear = False
                        break
                    h = np.maximum(z, 0.0)
            if clear and np.min(np.abs(forward(model, x) - y)) > 1e-3:
                break
        else:
            pytest.skip("could not find a kink-free sample")
        analytic_w, analytic_b = backward(model, x, y)
        analytic = []
        for gw, gb in zip(analytic_w, analytic_b):
            analytic.extend((gw, gb))
        numeric = self._numeric_grad(model, x, y)
        num = np.concatenate([g.ravel() for g in numeric])
        ana = np.concatenate([g.ravel() for g in analytic])
        denom = max(np.linalg.norm(num), np.linalg.norm(ana), 1e-12)
        assert np.linalg.norm(num - ana) / denom < 1e-4

    def test_finite_difference_oracle(self):
        rng = np.random.default_rng(99)
        for _ in range(30):
            self._check_one(rng)


class TestAdam:
    def test_hand_first_step(self):
        cfg = TrainConfig()
        params = [np.zeros(1)]
        grads = [np.ones(1)]
        state = AdamState.like(params)
        adam_step(params, grads, state, t=1, cfg=cfg)
        # bias-corrected: m_hat = 1, v_hat = 1 -> -lr / (1 + eps)
        assert params[0][0] == pytest.approx(-0.001 / (1 + 1e-8), abs=1e-12)

    def test_zero_gradient_no_move(self):
        cfg = TrainConfig()
        params = [np.full(3, 0.5)]
        state = AdamState.like(params)
        adam_step(params, [np.zeros(3)], state, t=1, cfg=cfg)
        assert np.array_equal(params[0], np.full(3, 0.5))

    def test_elementwise_independence(self):
        cfg = TrainConfig()
        params = [np.zeros(2)]
        state = AdamState.like(params)
        adam_step(params, [np.array([1.0, 1.0])], state, t=1, cfg=cfg)
        assert params[0][0] == params[0][1]

    def test_requires_t_ge_1(self):
        cfg = TrainConfig()
        params = [np.zeros(1)]
        with pytest.raises(ValueError):
            adam_step(params, [np.ones(1)], AdamState.like(params), t=0, cfg=cfg)


class TestTrain:
    @staticmethod
    def _linear_data(n, seed=0):
        rng = np.random.default_rng(seed)
        x = rng.uniform(-1, 1, size=(n, 1))
        return x, 2.0 * x

    def test_zero_epochs(self):
        spec = MLPSpec(1, (4,), 1)
        model = init_model(spec, seed=0)
        x, y = self._linear_data(50)
        fitted, report = train(model, (x, y), (x, y), TrainConfig(max_epochs=0))
        assert report.epochs_run == 0
        assert report.val_curve == []
        assert all(np.array_equal(a, b) for a, b in zip(fitted.parameters(), model.parameters()))

    def test_fits_linear_function(self):
        spec = MLPSpec(1, (16,), 1)
        model = init_model(spec, seed=1)
        x, y = self._linear_data(1000, seed=1)
        xv, yv = self._linear_data(200, seed=2)
        fitted, report = train(model, (x, y), (xv, yv), TrainConfig(seed=1))
        assert report.best_validation_loss < 0.01

    def test_deterministic(self):
        spec = MLPSpec(1, (8,), 1)
        x, y = self._linear_data(200, seed=3)
        outs = []
        for _ in range(2):
            model = init_model(spec, seed=5)
            fitted, report = train(model, (x, y), (x, y), TrainConfig(max_epochs=12, seed=5))
            outs.append((report.val_curve, report.train_curve, flat_params(fitted).tobytes()))
        assert outs[0] == outs[1]

    def test_best_model_contract(self):
        spec = MLPSpec(1, (8,), 1)
        model = init_model(spec, seed=2)
        x, y = self._linear_data(300, seed=4)
        xv, yv = self._linear_data(100, seed=5)
        fitted, report = train(model, (x, y), (xv, yv), TrainConfig(max_epochs=30, seed=2))
        recomputed = mae_loss(forward(fitted, xv), yv)
        assert recomputed == pytest.approx(report.best_validation_loss, abs=1e-12)
        assert report.best_validation_loss == pytest.approx(min(report.val_curve), abs=0)

    def test_lr_trace_monotone_with_exact_halving(self):
        spec = MLPSpec(1, (8,), 1)
        model = init_model(spec, seed=3)
        x, y = self._linear_data(300, seed=6)
        cfg = TrainConfig(max_epochs=60, seed=3)
        _, report = train(model, (x, y), (x, y), cfg)
        trace = report.lr_trace
        for a, b in zip(trace, trace[1:]):
            assert b <= a
            assert b == a or b == pytest.approx(a * cfg.plateau_factor, rel=0, abs=0)

    def test_early_stop_bound(self):
        spec = MLPSpec(1, (8,), 1)
        model = init_model(spec, seed=4)
        x, y = self._linear_data(300, seed=7)
        cfg = TrainConfig(max_epochs=200, seed=4)
        _, report = train(model, (x, y), (x, y), cfg)
        if report.epochs_run < cfg.max_epochs:
            best_epoch = int(np.argmin(report.val_curve))
            assert report.epochs_run - (best_epoch + 1) <= cfg.early_stop_patience

    def test_empty_dataset_rejected(self):
        spec = MLPSpec(1, (4,), 1)
        model = init_model(spec, seed=0)
        with pytest.raises(ValueError):
            train(model, (np.zeros((0, 1)), np.zeros((0, 1))), (np.ones((1, 1)), np.ones((1, 1))), TrainConfig())


class TestSerialization:
    def test_roundtrip_exact(self, tmp_path):
        model = init_model(MLPSpec(6, (16, 8), 4), seed=9)
        path = tmp_path / "m.mlp"
        save_model(model, path, meta={"seed": 9, "config_hash": "abc123"})
        loaded, meta = load_model(path)
        assert meta["seed"] == 9
        assert meta["config_hash"] == "abc123"
        assert loaded.spec == model.spec
        for a, b in zip(loaded.parameters(), model.parameters()):
            assert np.array_equal(a, b)

    def test_rejects_garbage(self, tmp_path):
        path = tmp_path / "bad.mlp"
        path.write_bytes(b'{"format": "something-else"}\n')
        with pytest.raises(ValueError):
            load_model(path)

    def test_predictions_survive_roundtrip(self, tmp_path):
        model = init_model(MLPSpec(6, (16,), 4), seed=10)
        path = tmp_path / "m.mlp"
        save_model(model, path)
        loaded, _ = load_model(path)
        x = np.random.default_rng(0).normal(size=(5, 6))
        assert np.array_equal(forward(model, x), forward(loaded, x))

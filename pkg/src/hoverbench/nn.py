"""Dense feed-forward regression stack, implemented from scratch on numpy.

Covers everything the training protocol needs: Glorot-uniform initialization,
forward pass, exact mean-absolute-error subgradients, bias-corrected ADAM,
learning-rate reduction on validation plateau, and early stopping with
best-weights restoration.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

_MAGIC = "hoverbench-mlp-v1"


@dataclass(frozen=True)
class MLPSpec:
    input_dim: int
    hidden: tuple[int, ...] = (256, 128)
    output_dim: int = 1
    activation: str = "relu"

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        dims = (self.input_dim, *self.hidden, self.output_dim)
        if any(d < 1 for d in dims):
            raise ValueError(f"all layer dims must be >= 1, got {dims}")
        if self.activation != "relu":
            raise ValueError(f"unsupported activation {self.activation!r}")

    def layer_dims(self) -> list[tuple[int, int]]:
        dims = (self.input_dim, *self.hidden, self.output_dim)
        return [(dims[i], dims[i + 1]) for i in range(len(dims) - 1)]


@dataclass
class MLPModel:
    spec: MLPSpec
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def copy(self) -> "MLPModel":
        return MLPModel(self.spec, [w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def parameters(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def predict(self, x: np.ndarray) -> np.ndarray:
        return forward(self, x)


def init_model(spec: MLPSpec, seed: int = 0) -> MLPModel:
    """Glorot-uniform weights (limit sqrt(6/(fan_in+fan_out))), zero biases."""
    rng = np.random.default_rng(seed)
    weights = []
    biases = []
    for fan_in, fan_out in spec.layer_dims():
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MLPModel(spec, weights, biases)


def forward(model: MLPModel, x: np.ndarray) -> np.ndarray:
    """Affine+relu chain with a linear last layer; accepts (d,) or (N, d)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    h = np.atleast_2d(x)
    if h.shape[1] != model.spec.input_dim:
        raise ValueError(f"expected input dim {model.spec.input_dim}, got {h.shape[1]}")
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        h = h @ w + b
        if i != last:
            h = np.maximum(h, 0.0)
    return h[0] if single else h


def mae_loss(pred: np.ndarray, target: np.ndarray) -> float:
    """Mean absolute error over all elements of a batch."""
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {target.shape}")
    return float(np.mean(np.abs(pred - target)))


def backward(model: MLPModel, x: np.ndarray, target: np.ndarray):
    """Exact MAE subgradients for every weight and bias.

    Conventions at the kinks: sign(0) = 0 and relu'(0) = 0, so a perfect
    prediction yields exactly zero gradients.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    target = np.atleast_2d(np.asarray(target, dtype=float))
    if x.shape[0] != target.shape[0] or target.shape[1] != model.spec.output_dim:
        raise ValueError(f"bad batch shapes {x.shape} / {target.shape}")

    last = len(model.weights) - 1
    pre = []  # pre-activation per layer
    acts = [x]  # layer inputs
    h = x
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ w + b
        pre.append(z)
        h = np.maximum(z, 0.0) if i != last else z
        if i != last:
            acts.append(h)

    g = np.sign(pre[last] - target) / pre[last].size
    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.biases)
    for i in range(last, -1, -1):
        grads_w[i] = acts[i].T @ g
        grads_b[i] = g.sum(axis=0)
        if i > 0:
            g = (g @ model.weights[i].T) * (pre[i - 1] > 0.0)
    return grads_w, grads_b


@dataclass(frozen=True)
class TrainConfig:
    lr_init: float = 0.001
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    plateau_patience_epochs: int = 5
    plateau_factor: float = 0.5
    early_stop_patience: int = 10
    max_epochs: int = 200
    batch_size: int = 64
    min_delta: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.plateau_factor < 1.0:
            raise ValueError("plateau_factor must lie in (0, 1)")
        if self.plateau_patience_epochs < 1 or self.early_stop_patience < 1:
            raise ValueError("patience values must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]

    @classmethod
    def like(cls, params: list[np.ndarray]) -> "AdamState":
        return cls([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params])


def adam_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    state: AdamState,
    t: int,
    cfg: TrainConfig,
    lr: float | None = None,
):
    """One bias-corrected ADAM update; mutates params and state in place."""
    if t < 1:
        raise ValueError("step index t must be >= 1")
    lr = cfg.lr_init if lr is None else lr
    b1, b2 = cfg.adam_beta1, cfg.adam_beta2
    c1 = 1.0 - b1**t
    c2 = 1.0 - b2**t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter {p.shape}")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= lr * (m / c1) / (np.sqrt(v / c2) + cfg.adam_eps)
    return params, state


@dataclass
class TrainReport:
    epochs_run: int
    best_validation_loss: float | None
    train_curve: list[float]
    val_curve: list[float]
    lr_trace: list[float]
    config: TrainConfig

    def to_dict(self) -> dict:
        return {
            "epochs_run": self.epochs_run,
            "best_validation_loss": self.best_validation_loss,
            "train_curve": self.train_curve,
            "val_curve": self.val_curve,
            "lr_trace": self.lr_trace,
            "config": vars(self.config).copy(),
        }


def train(
    model: MLPModel,
    train_set: tuple[np.ndarray, np.ndarray],
    val_set: tuple[np.ndarray, np.ndarray],
    cfg: TrainConfig,
) -> tuple[MLPModel, TrainReport]:
    """Mini-batch training with plateau lr decay and early stopping.

    Shuffling is deterministic per cfg.seed. After each epoch the validation
    MAE is computed on the full validation set; the learning rate halves when
    it fails to improve by more than min_delta for plateau_patience_epochs,
    and training stops after early_stop_patience stale epochs (or max_epochs).
    Returns the parameter snapshot with the lowest validation loss seen.
    """
    x_tr, y_tr = (np.asarray(a, dtype=float) for a in train_set)
    x_val, y_val = (np.asarray(a, dtype=float) for a in val_set)
    if len(x_tr) == 0 or len(x_val) == 0:
        raise ValueError("train and validation sets must be non-empty")
    if x_tr.shape[1] != model.spec.input_dim or y_tr.shape[1] != model.spec.output_dim:
        raise ValueError("dataset dims do not match the model spec")

    work = model.copy()
    if cfg.max_epochs == 0:
        return work, TrainReport(0, None, [], [], [], cfg)

    rng = np.random.default_rng(cfg.seed)
    params = work.parameters()
    state = AdamState.like(params)
    lr = cfg.lr_init
    t = 0

    best_val = np.inf
    best_weights = [p.copy() for p in params]
    plateau_wait = 0
    stale = 0
    train_curve: list[float] = []
    val_curve: list[float] = []
    lr_trace: list[float] = []

    n = len(x_tr)
    for _epoch in range(cfg.max_epochs):
        lr_trace.append(lr)
        perm = rng.permutation(n)
        loss_sum = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            xb, yb = x_tr[idx], y_tr[idx]
            pred = forward(work, xb)
            loss_sum += float(np.sum(np.abs(pred - yb)))
            grads_w, grads_b = backward(work, xb, yb)
            grads = []
            for gw, gb in zip(grads_w, grads_b):
                grads.extend((gw, gb))
            t += 1
            adam_step(params, grads, state, t, cfg, lr)
        train_curve.append(loss_sum / (n * work.spec.output_dim))

        val_loss = mae_loss(forward(work, x_val), y_val)
        val_curve.append(val_loss)

        if val_loss < best_val:
            best_val = val_loss
            best_weights = [p.copy() for p in params]

        # Patience counters reset only on improvements beyond min_delta over
        # the best of all previous epochs; the snapshot above updates on any
        # strict improvement so the returned weights are the true minimum.
        if len(val_curve) == 1 or val_loss < min(val_curve[:-1]) - cfg.min_delta:
            plateau_wait = 0
            stale = 0
        else:
            plateau_wait += 1
            stale += 1
            if plateau_wait >= cfg.plateau_patience_epochs:
                lr *= cfg.plateau_factor
                plateau_wait = 0
            if stale >= cfg.early_stop_patience:
                break

    for p, bw in zip(params, best_weights):
        p[...] = bw
    report = TrainReport(len(val_curve), float(best_val), train_curve, val_curve, lr_trace, cfg)
    return work, report


def save_model(model: MLPModel, path, meta: dict | None = None) -> None:
    """Write a self-describing model file: one JSON header line, then the
    parameter arrays as row-major little-endian float64."""
    header = {
        "format": _MAGIC,
        "input_dim": model.spec.input_dim,
        "hidden": list(model.spec.hidden),
        "output_dim": model.spec.output_dim,
        "activation": model.spec.activation,
        "arrays": [list(a.shape) for a in model.parameters()],
        "meta": meta or {},
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        for a in model.parameters():
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def load_model(path) -> tuple[MLPModel, dict]:
    """Read a model file written by save_model; returns (model, meta)."""
    raw = Path(path).read_bytes()
    nl = raw.index(b"\n")
    header = json.loads(raw[:nl].decode("utf-8"))
    if header.get("format") != _MAGIC:
        raise ValueError(f"not a model file: {path}")
    spec = MLPSpec(header["input_dim"], tuple(header["hidden"]), header["output_dim"], header["activation"])
    offset = nl + 1
    arrays = []
    for shape in header["arrays"]:
        count = int(np.prod(shape))
        a = np.frombuffer(raw, dtype="<f8", count=count, offset=offset).reshape(shape).copy()
        arrays.append(a)
        offset += count * 8
    weights = arrays[0::2]
    biases = arrays[1::2]
    return MLPModel(spec, weights, biases), header.get("meta", {})

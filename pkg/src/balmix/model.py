"""Small dense softmax classifier trained with SGD and cosine annealing."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .data import Dataset, one_hot_matrix
from .errors import NumericError, ParameterError, UndefinedMetricError
from .losses import LossSpec, ce_soft
from .metrics import METRIC_NAMES, compute_metric
from .mixing import MixPolicy, balanced_mixup_batch, classic_mixup_batch, plain_batch
from .sampling import CLASS_Q, INSTANCE_Q, SampleStream

ACTIVATIONS = ("relu", "tanh")
SCHEDULES = ("cosine_to_zero", "constant")
PARAM_NAMES = ("W1", "b1", "W2", "b2")
MINIMIZED_METRICS = ("val_loss",)


@dataclass
class ModelParams:
    W2: np.ndarray
    b2: np.ndarray
    W1: np.ndarray | None = None
    b1: np.ndarray | None = None
    activation: str = "relu"

    @property
    def hidden(self) -> int:
        return 0 if self.W1 is None else self.W1.shape[1]

    def arrays(self) -> dict[str, np.ndarray]:
        return {k: getattr(self, k) for k in PARAM_NAMES if getattr(self, k) is not None}

    def copy(self) -> "ModelParams":
        return replace(self, **{k: v.copy() for k, v in self.arrays().items()})

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.arrays().values())


def init_params(dim: int, hidden: int, K: int, activation: str = "relu",
                rng: np.random.Generator | None = None) -> ModelParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases."""
    if activation not in ACTIVATIONS:
        raise ParameterError(f"activation must be one of {ACTIVATIONS}")
    if dim < 1 or K < 1 or hidden < 0:
        raise ParameterError("dim and K must be >= 1, hidden >= 0")
    rng = np.random.default_rng() if rng is None else rng

    def layer(fan_in, fan_out):
        bound = 1.0 / math.sqrt(fan_in)
        return rng.uniform(-bound, bound, (fan_in, fan_out)), rng.uniform(-bound, bound, fan_out)

    if hidden == 0:
        W2, b2 = layer(dim, K)
        return ModelParams(W2, b2, activation=activation)
    W1, b1 = layer(dim, hidden)
    W2, b2 = layer(hidden, K)
    return ModelParams(W2, b2, W1, b1, activation)


def _act(z, kind):
    return np.maximum(z, 0.0) if kind == "relu" else np.tanh(z)


def _act_grad(z, a, kind):
    return (z > 0).astype(z.dtype) if kind == "relu" else 1.0 - a * a


def _forward(params: ModelParams, x: np.ndarray):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ParameterError("features must be a B x d matrix")
    if not np.all(np.isfinite(x)):
        raise NumericError("non-finite input features")
    if params.W1 is None:
        if x.shape[1] != params.W2.shape[0]:
            raise ParameterError(f"expected {params.W2.shape[0]} features, got {x.shape[1]}")
        return x, None, None, x @ params.W2 + params.b2
    if x.shape[1] != params.W1.shape[0]:
        raise ParameterError(f"expected {params.W1.shape[0]} features, got {x.shape[1]}")
    z = x @ params.W1 + params.b1
    a = _act(z, params.activation)
    return x, z, a, a @ params.W2 + params.b2


def forward(params: ModelParams, features) -> np.ndarray:
    return _forward(params, features)[3]


def predict(params: ModelParams, features) -> np.ndarray:
    return forward(params, features).argmax(axis=1)


def backward(params: ModelParams, features, soft_labels, loss: LossSpec) -> tuple[float, ModelParams]:
    """Loss value and its exact gradient for every parameter array."""
    x, z, a, logits = _forward(params, features)
    lv = loss(logits, soft_labels)
    g = lv.grad
    if params.W1 is None:
        return lv.loss, ModelParams(x.T @ g, g.sum(axis=0), activation=params.activation)
    gW2 = a.T @ g
    gb2 = g.sum(axis=0)
    gz = (g @ params.W2.T) * _act_grad(z, a, params.activation)
    return lv.loss, ModelParams(gW2, gb2, x.T @ gz, gz.sum(axis=0), params.activation)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 8
    lr0: float = 0.01
    schedule: str = "cosine_to_zero"
    cycles: int = 1
    momentum: float = 0.0
    seed: int = 0
    monitor_metric: str = "mcc"
    policy: MixPolicy = field(default_factory=MixPolicy)
    loss: LossSpec = field(default_factory=LossSpec)
    sampler_q: float = INSTANCE_Q
    hidden: int = 32
    activation: str = "relu"
    # gradient steps per epoch; None means ceil(N / batch_size)
    steps_per_epoch: int | None = None

    def __post_init__(self):
        if self.epochs < 0:
            raise ParameterError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ParameterError("batch_size must be >= 1")
        if not self.lr0 > 0:
            raise ParameterError("lr0 must be positive")
        if self.schedule not in SCHEDULES:
            raise ParameterError(f"schedule must be one of {SCHEDULES}")
        if self.cycles < 1:
            raise ParameterError("cycles must be >= 1")
        if not 0.0 <= self.momentum < 1.0:
            raise ParameterError("momentum must lie in [0, 1)")
        if self.monitor_metric not in METRIC_NAMES + MINIMIZED_METRICS:
            raise ParameterError(f"unknown monitor metric {self.monitor_metric!r}")
        if not 0.0 <= self.sampler_q <= 1.0:
            raise ParameterError("sampler_q must lie in [0, 1]")


def lr_at(config: TrainConfig, step: int, total_steps: int) -> float:
    """Learning rate at ``step``; cosine decay toward 0, restarted ``cycles`` times."""
    if not 0 <= step < total_steps:
        raise ParameterError("step must lie in [0, total_steps)")
    if config.schedule == "constant":
        return config.lr0
    cycle_len = math.ceil(total_steps / config.cycles)
    t = (step % cycle_len) / cycle_len
    return config.lr0 * 0.5 * (1.0 + math.cos(math.pi * t))


@dataclass
class Checkpoint:
    params: ModelParams
    epoch: int
    val_metric: float


def _score(params: ModelParams, ds: Dataset, metric: str) -> float:
    if metric == "val_loss":
        return ce_soft(forward(params, ds.features), one_hot_matrix(ds.labels, ds.K)).loss
    try:
        return compute_metric(metric, ds.labels, predict(params, ds.features), ds.K)
    except UndefinedMetricError:
        return float("nan")


def train(ds_train: Dataset, ds_val: Dataset, config: TrainConfig) -> tuple[Checkpoint, list[dict]]:
    """Train from scratch and keep the parameters scoring best on ``ds_val``.

    Each epoch runs ``steps_per_epoch`` SGD steps on batches built by the
    configured sampler and mix policy, then scores ``monitor_metric`` on the
    validation set. Ties keep the earlier epoch; NaN scores never win.
    """
    if ds_train.N == 0:
        raise ParameterError("empty training set")
    if ds_train.K != ds_val.K or ds_train.dim != ds_val.dim:
        raise ParameterError("training and validation sets disagree on K or dim")
    loss = config.loss
    if loss.kind == "cb" and loss.class_counts is None:
        # a class missing from this split never contributes, any weight will do
        loss = replace(loss, class_counts=tuple(max(int(c), 1) for c in ds_train.class_counts))

    s_init, s_first, s_second, s_mix = (int(s) for s in np.random.SeedSequence(config.seed).generate_state(4))
    params = init_params(ds_train.dim, config.hidden, ds_train.K, config.activation,
                         np.random.default_rng(s_init))
    minimize = config.monitor_metric in MINIMIZED_METRICS
    best = Checkpoint(params.copy(), 0, math.inf if minimize else -math.inf)
    history: list[dict] = []
    if config.epochs == 0:
        return best, history

    policy = config.policy
    mix_rng = np.random.default_rng(s_mix)
    if policy.kind == "balanced":
        first = SampleStream.with_q(ds_train, INSTANCE_Q, s_first)
        second = SampleStream.with_q(ds_train, CLASS_Q, s_second)

        def next_batch():
            return balanced_mixup_batch(first, second, config.batch_size, policy, mix_rng)
    else:
        stream = SampleStream.with_q(ds_train, config.sampler_q, s_first)
        if policy.kind == "mixup":
            def next_batch():
                return classic_mixup_batch(stream, config.batch_size, policy, mix_rng)
        else:
            def next_batch():
                return plain_batch(stream, config.batch_size)

    steps = config.steps_per_epoch or math.ceil(ds_train.N / config.batch_size)
    total = steps * config.epochs
    velocity = {k: np.zeros_like(v) for k, v in params.arrays().items()}
    train_targets = one_hot_matrix(ds_train.labels, ds_train.K)
    step = 0
    for epoch in range(1, config.epochs + 1):
        batch_losses = []
        for _ in range(steps):
            mb = next_batch()
            value, grads = backward(params, mb.features, mb.soft_labels, loss)
            lr = lr_at(config, step, total)
            for name, g in grads.arrays().items():
                v = velocity[name]
                v *= config.momentum
                v += g
                getattr(params, name)[...] -= lr * v
            batch_losses.append(value)
            step += 1
        if not params.is_finite():
            raise NumericError(f"parameters diverged in epoch {epoch}")
        score = _score(params, ds_val, config.monitor_metric)
        history.append({
            "epoch": epoch,
            "lr": lr,
            "batch_loss": float(np.mean(batch_losses)),
            "train_loss": ce_soft(forward(params, ds_train.features), train_targets).loss,
            "val_metric": score,
        })
        improved = score < best.val_metric if minimize else score > best.val_metric
        if improved:
            best = Checkpoint(params.copy(), epoch, score)
    return best, history


def save_checkpoint(ckpt: Checkpoint, directory, seed: int | None = None) -> None:
    """Write ``params.bin`` (float64 little-endian, arrays concatenated in
    W1, b1, W2, b2 order, C order) and a ``checkpoint.json`` sidecar."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    arrays = ckpt.params.arrays()
    with open(directory / "params.bin", "wb") as fh:
        for v in arrays.values():
            fh.write(np.ascontiguousarray(v, dtype="<f8").tobytes())
    meta = {
        "arrays": [{"name": k, "shape": list(v.shape)} for k, v in arrays.items()],
        "activation": ckpt.params.activation,
        "seed": seed,
        "epoch": ckpt.epoch,
        "val_metric": ckpt.val_metric if math.isfinite(ckpt.val_metric) else None,
    }
    (directory / "checkpoint.json").write_text(json.dumps(meta, indent=2) + "\n")


def load_checkpoint(directory) -> Checkpoint:
    directory = Path(directory)
    meta = json.loads((directory / "checkpoint.json").read_text())
    flat = np.fromfile(directory / "params.bin", dtype="<f8")
    arrays, pos = {}, 0
    for entry in meta["arrays"]:
        size = int(np.prod(entry["shape"]))
        arrays[entry["name"]] = flat[pos:pos + size].reshape(entry["shape"]).astype(np.float64)
        pos += size
    if pos != flat.size:
        raise ParameterError("params.bin size does not match checkpoint.json")
    metric = meta["val_metric"]
    return Checkpoint(ModelParams(activation=meta["activation"], **arrays), meta["epoch"],
                      float("nan") if metric is None else metric)

"""Experiment runner: method grid x alpha x seed x fold, persistence, summaries."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import (
    Dataset,
    SplitSpec,
    generate_longtail,
    load_csv,
    stratified_kfold_indices,
    stratified_split_indices,
)
from .errors import ConfigError, ParameterError
from .losses import LossSpec
from .metrics import METRIC_NAMES, EvalReport, evaluate
from .mixing import MixPolicy, beta1_pdf
from .model import TrainConfig, predict, save_checkpoint, train
from .sampling import CLASS_Q, INSTANCE_Q, SQRT_Q

log = logging.getLogger(__name__)

METHODS = (
    "class_sampling",
    "instance_sampling",
    "sqrt_sampling",
    "focal",
    "cb",
    "balanced_mixup",
    "mixup",
)
MIXING_METHODS = ("balanced_mixup", "mixup")
GENERATOR_KEYS = {"K", "dim", "n_max", "imbalance_ratio", "noise_sigma", "seed", "radius"}
# keys that change where/how fast results are produced, not the results
NON_SEMANTIC_KEYS = ("out_dir", "workers")


@dataclass
class ExperimentConfig:
    """JSON-loadable experiment description.

    ``data`` is either ``{"path": "file.csv"}`` or ``{"generator": {...}}``
    with the arguments of :func:`balmix.data.generate_longtail`; a generator
    ``seed`` of ``null`` regenerates the data from each run seed.
    """

    data: dict = field(default_factory=lambda: {"generator": {
        "K": 5, "dim": 2, "n_max": 2000, "imbalance_ratio": 100.0, "noise_sigma": 0.7, "seed": None}})
    methods: list = field(default_factory=lambda: ["instance_sampling"])
    alphas: list = field(default_factory=lambda: [0.1, 0.2, 0.3])
    seeds: list = field(default_factory=lambda: [0])
    folds: int | None = None
    test_fraction: float = 0.2
    val_fraction: float = 0.1
    epochs: int = 30
    batch_size: int = 8
    lr0: float = 0.01
    schedule: str = "cosine_to_zero"
    cycles: int = 1
    momentum: float = 0.0
    monitor_metric: str = "mcc"
    hidden: int = 32
    activation: str = "relu"
    gamma: float = 2.0
    cb_beta: float = 0.999
    lambda_per: str = "example"
    orientation: str = "instance_major"
    n_bootstrap: int = 1000
    save_checkpoints: bool = True
    workers: int = 1
    out_dir: str = "results"

    def __post_init__(self):
        self.validate()

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**raw)
        except (TypeError, ParameterError) as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"{path}: no such config file") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be an object")
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def validate(self) -> None:
        if not isinstance(self.data, dict) or len(self.data) != 1 or not (
            "path" in self.data or "generator" in self.data
        ):
            raise ConfigError('data must be {"path": ...} or {"generator": {...}}')
        if "generator" in self.data:
            gen = self.data["generator"]
            missing = GENERATOR_KEYS - {"radius", "seed"} - set(gen)
            extra = set(gen) - GENERATOR_KEYS
            if missing or extra:
                raise ConfigError(f"generator keys: missing {sorted(missing)}, unknown {sorted(extra)}")
        if not self.methods:
            raise ConfigError("methods must be non-empty")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown methods {bad}; choose from {list(METHODS)}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError("methods contain duplicates")
        if any(m in MIXING_METHODS for m in self.methods):
            if not self.alphas or any(not (isinstance(a, (int, float)) and a > 0) for a in self.alphas):
                raise ConfigError("mixing methods need a non-empty grid of positive alphas")
        if not self.seeds or any(not isinstance(s, int) or s < 0 for s in self.seeds):
            raise ConfigError("seeds must be a non-empty list of nonnegative integers")
        if self.folds is not None and (not isinstance(self.folds, int) or self.folds < 2):
            raise ConfigError("folds must be null or an integer >= 2")
        for name in ("test_fraction", "val_fraction"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1)")
        if self.n_bootstrap != 0 and self.n_bootstrap < 2:
            raise ConfigError("n_bootstrap must be 0 (off) or >= 2")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        try:
            self.train_config("instance_sampling", None, 0)
            MixPolicy("balanced", 1.0, self.lambda_per, self.orientation)
        except ParameterError as exc:
            raise ConfigError(str(exc)) from None

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form, ignoring output-only keys."""
        d = {k: v for k, v in self.to_dict().items() if k not in NON_SEMANTIC_KEYS}
        return _hash(d)

    def train_config(self, method: str, alpha: float | None, seed: int) -> TrainConfig:
        """Map a method name onto sampler exponent, mix policy and loss."""
        q = {"class_sampling": CLASS_Q, "sqrt_sampling": SQRT_Q}.get(method, INSTANCE_Q)
        policy = MixPolicy()
        if method == "balanced_mixup":
            policy = MixPolicy("balanced", alpha, self.lambda_per, self.orientation)
        elif method == "mixup":
            policy = MixPolicy("mixup", alpha, self.lambda_per)
        loss = LossSpec({"focal": "focal", "cb": "cb"}.get(method, "ce"), self.gamma, self.cb_beta)
        return TrainConfig(
            epochs=self.epochs, batch_size=self.batch_size, lr0=self.lr0, schedule=self.schedule,
            cycles=self.cycles, momentum=self.momentum, seed=seed,
            monitor_metric=self.monitor_metric, policy=policy, loss=loss, sampler_q=q,
            hidden=self.hidden, activation=self.activation,
        )


def _hash(obj) -> str:
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass(frozen=True)
class RunSpec:
    method: str
    alpha: float | None
    seed: int
    fold: int | None


@dataclass
class RunRecord:
    config_hash: str
    run_id: str
    method: str
    alpha: float | None
    seed: int
    fold: int | None
    report: EvalReport
    history: list
    best_epoch: int
    duration: float

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "run_id": self.run_id,
            "method": self.method,
            "alpha": self.alpha,
            "seed": self.seed,
            "fold": self.fold,
            "best_epoch": self.best_epoch,
            "report": self.report.to_dict(),
            "history": [{k: _json_float(v) for k, v in h.items()} for h in self.history],
            "duration": self.duration,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        fields = {k: d[k] for k in ("config_hash", "run_id", "method", "alpha", "seed", "fold",
                                    "best_epoch", "duration")}
        return cls(report=EvalReport.from_dict(d["report"]), history=d["history"], **fields)


def _json_float(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def run_grid(config: ExperimentConfig) -> list[RunSpec]:
    folds = [None] if config.folds is None else list(range(config.folds))
    specs = []
    for method in config.methods:
        alphas = config.alphas if method in MIXING_METHODS else [None]
        for alpha in alphas:
            for seed in config.seeds:
                for fold in folds:
                    specs.append(RunSpec(method, None if alpha is None else float(alpha), seed, fold))
    return specs


def run_id(config_hash: str, spec: RunSpec) -> str:
    return _hash({"config": config_hash, **dataclasses.asdict(spec)})[:16]


def load_dataset(config: ExperimentConfig, seed: int) -> Dataset:
    if "path" in config.data:
        return load_csv(config.data["path"])
    gen = dict(config.data["generator"])
    if gen.get("seed") is None:
        gen["seed"] = seed
    return generate_longtail(**gen)


def _child_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def split_run(ds: Dataset, config: ExperimentConfig, spec: RunSpec) -> tuple[Dataset, Dataset, Dataset]:
    """``(train, val, test)`` for one run. Splits depend only on seed and fold,
    so every method in an experiment sees identical data."""
    if spec.fold is None:
        rest, test = stratified_split_indices(ds, SplitSpec(config.test_fraction, seed=_child_seed(spec.seed, 0)))
    else:
        rest, test = stratified_kfold_indices(ds, config.folds, _child_seed(spec.seed, 1))[spec.fold]
    pool = ds.subset(rest)
    tr, va = stratified_split_indices(pool, SplitSpec(config.val_fraction, seed=_child_seed(spec.seed, 2, spec.fold or 0)))
    return pool.subset(tr), pool.subset(va), ds.subset(test)


def execute_run(config: ExperimentConfig, spec: RunSpec, config_hash: str | None = None,
                ds: Dataset | None = None, out_dir=None) -> RunRecord:
    config_hash = config_hash or config.config_hash()
    start = time.perf_counter()
    if ds is None:
        ds = load_dataset(config, spec.seed)
    ds_train, ds_val, ds_test = split_run(ds, config, spec)
    ckpt, history = train(ds_train, ds_val, config.train_config(spec.method, spec.alpha, spec.seed))
    preds = predict(ckpt.params, ds_test.features)
    report = evaluate(ds_test.labels, preds, ds.K, config.n_bootstrap, seed=spec.seed)
    rid = run_id(config_hash, spec)
    record = RunRecord(config_hash, rid, spec.method, spec.alpha, spec.seed, spec.fold, report,
                       history, ckpt.epoch, time.perf_counter() - start)
    if out_dir is not None and config.save_checkpoints:
        save_checkpoint(ckpt, Path(out_dir) / "runs" / rid, seed=spec.seed)
    return record


def prepare_output(out_dir) -> Path:
    out = Path(out_dir)
    try:
        (out / "runs").mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc}") from None
    return out


def run_experiment(config: ExperimentConfig, out_dir=None, workers: int | None = None) -> list[RunRecord]:
    """Run every (method, alpha, seed, fold) combination and persist the records.

    All validation (config, data source, output directory) happens before any
    training starts. Runs may execute on worker threads; records are written
    afterwards by the calling thread in grid order.
    """
    out = prepare_output(out_dir if out_dir is not None else config.out_dir)
    chash = config.config_hash()
    data_seeded_per_run = "generator" in config.data and config.data["generator"].get("seed") is None
    try:
        shared = None if data_seeded_per_run else load_dataset(config, 0)
        for seed in config.seeds if data_seeded_per_run else []:
            load_dataset(config, seed)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot load data: {exc}") from None
    if config.folds is not None:
        n = shared.N if shared is not None else min(load_dataset(config, s).N for s in config.seeds)
        if config.folds > n:
            raise ConfigError(f"folds={config.folds} exceeds dataset size {n}")

    specs = run_grid(config)

    def job(spec):
        return execute_run(config, spec, chash, shared, out)

    n_workers = workers or config.workers
    if n_workers > 1:
        with ThreadPoolExecutor(n_workers) as pool:
            records = list(pool.map(job, specs))
    else:
        records = [job(s) for s in specs]
    for rec in records:
        path = out / "runs" / rec.run_id
        path.mkdir(parents=True, exist_ok=True)
        (path / "record.json").write_text(json.dumps(rec.to_dict(), indent=2) + "\n")
    (out / "config.json").write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")
    return records


def load_records(directory) -> list[RunRecord]:
    directory = Path(directory)
    runs = directory / "runs" if (directory / "runs").is_dir() else directory
    records = [RunRecord.from_dict(json.loads(p.read_text())) for p in sorted(runs.glob("*/record.json"))]
    return sorted(records, key=lambda r: (r.method, r.alpha is not None, r.alpha or 0.0, r.seed,
                                          -1 if r.fold is None else r.fold))


SUMMARY_STATS = ("min", "median", "max", "boot_mean", "boot_std")


def summarize(records: list[RunRecord], group_by=("method", "alpha")) -> list[dict]:
    """Per-group min / median / max of every metric across seeds and folds.

    ``boot_mean`` and ``boot_std`` average the per-run bootstrap statistics.
    Groups come out sorted by their key values; a group in which no metric
    has a defined value is dropped with a warning.
    """
    if not records:
        raise ParameterError("no records to summarize")
    groups: dict[tuple, list[RunRecord]] = {}
    for rec in records:
        key = tuple(getattr(rec, k) for k in group_by)
        groups.setdefault(key, []).append(rec)

    def order(key):
        return tuple((v is None, v if v is not None else 0) for v in key)

    rows = []
    for key in sorted(groups, key=order):
        recs = groups[key]
        row = dict(zip(group_by, key))
        row["n"] = len(recs)
        any_defined = False
        for name in METRIC_NAMES:
            vals = np.array([r.report.value(name) for r in recs], dtype=np.float64)
            vals = vals[np.isfinite(vals)]
            boots = [r.report.bootstrap.get(name) for r in recs]
            boots = [b for b in boots if b is not None]
            if vals.size:
                any_defined = True
                row[f"{name}_min"] = float(vals.min())
                row[f"{name}_median"] = float(np.median(vals))
                row[f"{name}_max"] = float(vals.max())
            else:
                row[f"{name}_min"] = row[f"{name}_median"] = row[f"{name}_max"] = None
            row[f"{name}_boot_mean"] = float(np.mean([b[0] for b in boots])) if boots else None
            row[f"{name}_boot_std"] = float(np.mean([b[1] for b in boots])) if boots else None
        if not any_defined:
            log.warning("group %s has no defined metric values; omitted", dict(zip(group_by, key)))
            continue
        rows.append(row)
    return rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def summary_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(rows[0])
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row[k]) for k in header])
    return buf.getvalue()


def summary_text(rows: list[dict], group_by=("method", "alpha")) -> str:
    """Aligned table with one ``min <- median -> max`` cell per metric (x100)."""
    if not rows:
        return ""

    def pct(v):
        return "  -  " if v is None else f"{100 * v:.2f}"

    header = list(group_by) + ["n"] + list(METRIC_NAMES)
    body = []
    for row in rows:
        cells = [_fmt(row[k]) if row[k] is not None else "-" for k in group_by] + [str(row["n"])]
        for name in METRIC_NAMES:
            cells.append(f"{pct(row[f'{name}_min'])} <- {pct(row[f'{name}_median'])} -> {pct(row[f'{name}_max'])}")
        body.append(cells)
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in [header] + body]
    return "\n".join(lines) + "\n"


def write_summary(records: list[RunRecord], out_dir, group_by=("method", "alpha")) -> list[dict]:
    rows = summarize(records, group_by)
    out = Path(out_dir)
    (out / "summary.csv").write_text(summary_csv(rows))
    (out / "summary.txt").write_text(summary_text(rows, group_by))
    return rows


def emit_beta_pdf(alpha: float, points: int) -> str:
    """CSV ``x,pdf`` of the Beta(alpha, 1) density on the grid ``i / points``, i = 1..points."""
    if not alpha > 0:
        raise ParameterError("alpha must be positive")
    if points < 2:
        raise ParameterError("points must be >= 2")
    x = np.arange(1, points + 1) / points
    pdf = beta1_pdf(x, alpha)
    lines = ["x,pdf"] + [f"{a!r},{b!r}" for a, b in zip(x.tolist(), pdf.tolist())]
    return "\n".join(lines) + "\n"


def emit_class_histogram(ds: Dataset) -> str:
    lines = ["class,count"] + [f"{k},{int(c)}" for k, c in enumerate(ds.class_counts)]
    return "\n".join(lines) + "\n"

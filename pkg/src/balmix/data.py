"""Datasets, synthetic long-tail generation, CSV I/O and stratified splitting."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IngestionError, ParameterError


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with integer class labels.

    ``class_counts`` has length ``K`` and is always recomputed from ``labels``;
    classes with no examples are allowed (they get a zero count).
    """

    features: np.ndarray
    labels: np.ndarray
    K: int

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64, copy=True)
        labels = np.array(self.labels, dtype=np.int64, copy=True)
        if features.ndim != 2:
            raise ParameterError(f"features must be 2-D, got shape {features.shape}")
        if labels.shape != (features.shape[0],):
            raise ParameterError("labels must be a vector with one entry per feature row")
        if self.K < 1:
            raise ParameterError("K must be >= 1")
        if labels.size and (labels.min() < 0 or labels.max() >= self.K):
            raise ParameterError(f"labels must lie in [0, {self.K})")
        if not np.all(np.isfinite(features)):
            raise ParameterError("features must be finite")
        features.setflags(write=False)
        labels.setflags(write=False)
        counts = np.bincount(labels, minlength=self.K).astype(np.int64)
        counts.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_counts", counts)

    @property
    def N(self) -> int:
        return int(self.labels.shape[0])

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])

    def class_indices(self) -> list[np.ndarray]:
        """Example indices of each class, in data order."""
        order = np.argsort(self.labels, kind="stable")
        bounds = np.concatenate([[0], np.cumsum(self.class_counts)])
        return [order[bounds[k]:bounds[k + 1]] for k in range(self.K)]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx], self.K)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.K == other.K
            and np.array_equal(self.labels, other.labels)
            and self.features.shape == other.features.shape
            and np.array_equal(self.features, other.features)
        )

    __hash__ = None


@dataclass(frozen=True)
class SplitSpec:
    validation_fraction: float = 0.1
    folds: int | None = None
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.validation_fraction < 1.0:
            raise ParameterError("validation_fraction must lie in (0, 1)")
        if self.folds is not None and self.folds < 2:
            raise ParameterError("folds must be >= 2")


def longtail_counts(K: int, n_max: int, imbalance_ratio: float) -> list[int]:
    """Geometric class-count decay from ``n_max`` (class 0) down to ``n_max / ratio``."""
    return [
        max(1, round_half_up(n_max * imbalance_ratio ** (-k / (K - 1))))
        for k in range(K)
    ]


def _class_means(K: int, dim: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    # Equally spaced slots (on a circle when dim >= 2, on a line otherwise),
    # randomly rotated and assigned to classes; slots never coincide.
    slots = rng.permutation(K)
    means = np.zeros((K, dim))
    if dim == 1:
        means[:, 0] = radius * (slots - (K - 1) / 2.0)
    else:
        theta = rng.uniform(0.0, 2.0 * np.pi)
        angles = theta + 2.0 * np.pi * slots / K
        means[:, 0] = radius * np.cos(angles)
        means[:, 1] = radius * np.sin(angles)
    return means


def generate_longtail(
    K: int,
    dim: int,
    n_max: int,
    imbalance_ratio: float,
    noise_sigma: float,
    seed: int,
    radius: float = 1.0,
) -> Dataset:
    """Draw a Gaussian-blob dataset whose class sizes decay geometrically.

    Class ``k`` receives ``round(n_max * imbalance_ratio ** (-k / (K - 1)))``
    examples (at least one), so class 0 is the head and class ``K - 1`` the
    tail. Each class is an isotropic Gaussian with standard deviation
    ``noise_sigma`` around a mean placed from ``seed``.
    """
    for name, value in [("imbalance_ratio", imbalance_ratio), ("noise_sigma", noise_sigma),
                        ("radius", radius)]:
        if not math.isfinite(value):
            raise ParameterError(f"{name} must be finite")
    if K < 2:
        raise ParameterError("K must be >= 2")
    if dim < 1:
        raise ParameterError("dim must be >= 1")
    if n_max < K:
        raise ParameterError("n_max must be >= K")
    if imbalance_ratio < 1:
        raise ParameterError("imbalance_ratio must be >= 1")
    if noise_sigma <= 0 or radius <= 0:
        raise ParameterError("noise_sigma and radius must be positive")

    rng = np.random.default_rng(seed)
    counts = longtail_counts(K, n_max, imbalance_ratio)
    means = _class_means(K, dim, radius, rng)
    labels = np.repeat(np.arange(K), counts)
    features = means[labels] + noise_sigma * rng.standard_normal((labels.size, dim))
    return Dataset(features, labels, K)


def one_hot(label: int, K: int) -> np.ndarray:
    if not 0 <= label < K:
        raise ParameterError(f"label {label} outside [0, {K})")
    out = np.zeros(K)
    out[label] = 1.0
    return out


def one_hot_matrix(labels, K: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= K):
        raise ParameterError(f"labels outside [0, {K})")
    out = np.zeros((labels.size, K))
    out[np.arange(labels.size), labels] = 1.0
    return out


def save_csv(ds: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"f{j}" for j in range(ds.dim)] + ["label"])
        for row, label in zip(ds.features, ds.labels):
            # repr gives the shortest string that round-trips exactly
            writer.writerow([repr(float(v)) for v in row] + [str(int(label))])


def load_csv(path) -> Dataset:
    """Read a ``f0,...,f{d-1},label`` CSV file. ``K`` is one plus the largest label."""
    path = Path(path)
    if not path.is_file():
        raise IngestionError(f"{path}: no such file")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise IngestionError(f"{path}: empty file")
        header = [h.strip() for h in header]
        d = len(header) - 1
        if d < 1 or header != [f"f{j}" for j in range(d)] + ["label"]:
            raise IngestionError(f"{path}:1: expected header f0,...,f{{d-1}},label")
        features, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != d + 1:
                raise IngestionError(f"{path}:{lineno}: expected {d + 1} fields, got {len(row)}")
            try:
                feats = [float(v) for v in row[:d]]
            except ValueError:
                raise IngestionError(f"{path}:{lineno}: malformed feature value") from None
            if not all(math.isfinite(v) for v in feats):
                raise IngestionError(f"{path}:{lineno}: non-finite feature value")
            text = row[d].strip()
            if not text.isdigit():
                raise IngestionError(f"{path}:{lineno}: label {text!r} is not a nonnegative integer")
            features.append(feats)
            labels.append(int(text))
    if not labels:
        raise IngestionError(f"{path}: no data rows")
    return Dataset(np.array(features), np.array(labels), max(labels) + 1)


def validation_counts(class_counts, fraction: float) -> list[int]:
    out = []
    for n in class_counts:
        n = int(n)
        m = round_half_up(fraction * n)
        lo = 0 if n <= 1 else 1
        out.append(min(max(m, lo), max(n - 1, 0)))
    return out


def stratified_split_indices(ds: Dataset, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    """Index arrays ``(train, val)`` partitioning ``range(ds.N)``, both sorted."""
    if ds.N == 0:
        raise ParameterError("cannot split an empty dataset")
    rng = np.random.default_rng(spec.seed)
    n_val = validation_counts(ds.class_counts, spec.validation_fraction)
    train, val = [], []
    for members, m in zip(ds.class_indices(), n_val):
        members = rng.permutation(members)
        val.append(members[:m])
        train.append(members[m:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(val))


def stratified_split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    train_idx, val_idx = stratified_split_indices(ds, spec)
    return ds.subset(train_idx), ds.subset(val_idx)


def stratified_kfold_indices(ds: Dataset, folds: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-fold ``(train, test)`` index arrays.

    Each class is shuffled and dealt round-robin over the folds. The starting
    fold of each class continues where the previous class stopped, so total
    fold sizes stay balanced as well.
    """
    if folds < 2:
        raise ParameterError("folds must be >= 2")
    if folds > ds.N:
        raise ParameterError(f"folds={folds} exceeds the number of examples ({ds.N})")
    rng = np.random.default_rng(seed)
    assignment = np.empty(ds.N, dtype=np.int64)
    offset = 0
    for members in ds.class_indices():
        members = rng.permutation(members)
        assignment[members] = (offset + np.arange(members.size)) % folds
        offset = (offset + members.size) % folds
    all_idx = np.arange(ds.N)
    return [(all_idx[assignment != f], all_idx[assignment == f]) for f in range(folds)]


def stratified_kfold(ds: Dataset, folds: int, seed: int) -> list[tuple[Dataset, Dataset]]:
    return [(ds.subset(tr), ds.subset(te)) for tr, te in stratified_kfold_indices(ds, folds, seed)]

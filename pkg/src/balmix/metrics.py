"""Confusion-matrix metrics, Kendall tau-b and stratified bootstrap."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BootstrapError, ParameterError, UndefinedMetricError

METRIC_NAMES = ("quad_kappa", "mcc", "kendall_tau", "balanced_acc", "macro_f1")


def confusion(labels, preds, K: int) -> np.ndarray:
    """``C[i, j]`` counts examples with true class ``i`` predicted as ``j``."""
    labels = np.asarray(labels, dtype=np.int64)
    preds = np.asarray(preds, dtype=np.int64)
    if labels.shape != preds.shape or labels.ndim != 1:
        raise ParameterError("labels and preds must be vectors of equal length")
    if labels.size == 0:
        raise ParameterError("need at least one example")
    if min(labels.min(), preds.min()) < 0 or max(labels.max(), preds.max()) >= K:
        raise ParameterError(f"labels and preds must lie in [0, {K})")
    return np.bincount(labels * K + preds, minlength=K * K).reshape(K, K)


def quad_kappa(cm) -> float:
    cm = np.asarray(cm, dtype=np.float64)
    K = cm.shape[0]
    if K < 2:
        raise UndefinedMetricError("quadratic kappa needs K >= 2")
    i, j = np.indices((K, K))
    w = (i - j) ** 2 / (K - 1) ** 2
    total = cm.sum()
    expected = np.outer(cm.sum(axis=1), cm.sum(axis=0)) / total
    denom = (w * expected).sum()
    if denom == 0:
        raise UndefinedMetricError("quadratic kappa: no expected disagreement")
    return float(1.0 - (w * cm).sum() / denom)


def mcc(cm) -> float:
    """Multiclass Matthews correlation; 0 when either marginal is constant."""
    cm = np.asarray(cm, dtype=np.float64)
    t = cm.sum(axis=1)
    p = cm.sum(axis=0)
    c = np.trace(cm)
    s = cm.sum()
    cov_tp = c * s - (t * p).sum()
    var_p = s * s - (p * p).sum()
    var_t = s * s - (t * t).sum()
    if var_p == 0 or var_t == 0:
        return 0.0
    return float(cov_tp / math.sqrt(var_p * var_t))


def kendall_tau(labels, preds) -> float:
    """Kendall tau-b, computed from the contingency table of the two rankings."""
    x = np.asarray(labels)
    y = np.asarray(preds)
    if x.shape != y.shape or x.ndim != 1:
        raise ParameterError("labels and preds must be vectors of equal length")
    if x.size < 2:
        raise ParameterError("Kendall tau needs at least two examples")
    _, xi = np.unique(x, return_inverse=True)
    _, yi = np.unique(y, return_inverse=True)
    U, V = xi.max() + 1, yi.max() + 1
    table = np.bincount(xi * V + yi, minlength=U * V).reshape(U, V).astype(np.int64)

    # above[i, j] = number of pairs partners strictly greater in both coordinates
    rev = np.cumsum(np.cumsum(table[::-1, ::-1], axis=0), axis=1)[::-1, ::-1]
    above = np.zeros_like(table)
    above[:-1, :-1] = rev[1:, 1:]
    # below_right[i, j] = partners with larger x and smaller y
    rl = np.cumsum(np.cumsum(table[::-1, :], axis=0), axis=1)[::-1, :]
    cross = np.zeros_like(table)
    cross[:-1, 1:] = rl[1:, :-1]
    concordant = int((table * above).sum())
    discordant = int((table * cross).sum())

    def pairs(counts):
        counts = counts.astype(np.int64)
        return int((counts * (counts - 1) // 2).sum())

    both = pairs(table.ravel())
    ties_x = pairs(table.sum(axis=1)) - both
    ties_y = pairs(table.sum(axis=0)) - both
    d1 = concordant + discordant + ties_x
    d2 = concordant + discordant + ties_y
    if d1 == 0 or d2 == 0:
        raise UndefinedMetricError("Kendall tau-b undefined: one ranking is constant")
    return (concordant - discordant) / math.sqrt(d1 * d2)


def balanced_accuracy(cm) -> float:
    """Mean recall over classes that occur in the ground truth."""
    cm = np.asarray(cm, dtype=np.float64)
    support = cm.sum(axis=1)
    present = support > 0
    if not present.any():
        raise ParameterError("empty confusion matrix")
    return float((np.diag(cm)[present] / support[present]).mean())


def macro_f1(cm) -> float:
    """Unweighted mean F1 over all K classes; a class never seen nor predicted scores 0."""
    cm = np.asarray(cm, dtype=np.float64)
    tp = np.diag(cm)
    fp = cm.sum(axis=0) - tp
    fn = cm.sum(axis=1) - tp
    denom = 2 * tp + fp + fn
    f1 = np.divide(2 * tp, denom, out=np.zeros_like(tp), where=denom > 0)
    return float(f1.mean())


def compute_metric(name: str, labels, preds, K: int) -> float:
    if name == "kendall_tau":
        return kendall_tau(labels, preds)
    cm = confusion(labels, preds, K)
    if name == "quad_kappa":
        return quad_kappa(cm)
    if name == "mcc":
        return mcc(cm)
    if name == "balanced_acc":
        return balanced_accuracy(cm)
    if name == "macro_f1":
        return macro_f1(cm)
    raise ParameterError(f"unknown metric {name!r}")


def stratified_resample_indices(labels, rng: np.random.Generator) -> np.ndarray:
    """Resample with replacement inside each true class; class counts are preserved."""
    labels = np.asarray(labels)
    order = np.argsort(labels, kind="stable")
    sorted_labels = labels[order]
    starts = np.searchsorted(sorted_labels, sorted_labels, side="left")
    ends = np.searchsorted(sorted_labels, sorted_labels, side="right")
    within = (rng.random(labels.size) * (ends - starts)).astype(np.int64)
    return order[np.minimum(starts + within, ends - 1)]


@dataclass
class BootstrapResult:
    mean: float
    std: float
    values: np.ndarray
    skipped: int


def bootstrap_values(labels, preds, metric: str, n_resamples: int, seed: int,
                     K: int | None = None, max_retries: int = 10) -> BootstrapResult:
    """Stratified bootstrap of ``metric``.

    Resample ``r`` uses its own generator seeded by ``(seed, r)``, so results
    do not depend on evaluation order. A resample whose metric is undefined is
    redrawn up to ``max_retries`` times and then skipped.
    """
    if n_resamples < 2:
        raise ParameterError("n_resamples must be >= 2")
    labels = np.asarray(labels, dtype=np.int64)
    preds = np.asarray(preds, dtype=np.int64)
    if K is None:
        K = int(max(labels.max(), preds.max())) + 1
    values = []
    skipped = 0
    for r in range(n_resamples):
        rng = np.random.default_rng([seed, r])
        for _ in range(1 + max_retries):
            idx = stratified_resample_indices(labels, rng)
            try:
                values.append(compute_metric(metric, labels[idx], preds[idx], K))
                break
            except UndefinedMetricError:
                continue
        else:
            skipped += 1
    if skipped * 2 > n_resamples:
        raise BootstrapError(f"{metric} undefined on {skipped} of {n_resamples} resamples")
    values = np.asarray(values)
    std = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return BootstrapResult(float(values.mean()), std, values, skipped)


def bootstrap(labels, preds, metric: str, n_resamples: int, seed: int, K: int | None = None):
    """``(mean, std)`` of a stratified bootstrap; see :func:`bootstrap_values`."""
    res = bootstrap_values(labels, preds, metric, n_resamples, seed, K)
    return res.mean, res.std


@dataclass
class EvalReport:
    quad_kappa: float
    mcc: float
    kendall_tau: float
    balanced_acc: float
    macro_f1: float
    confusion: np.ndarray
    # metric -> (mean, std); None when the bootstrap failed
    bootstrap: dict = field(default_factory=dict)
    n_resamples: int = 0

    def value(self, name: str) -> float:
        return getattr(self, name)

    def to_dict(self) -> dict:
        def clean(v):
            return None if v is None or not math.isfinite(v) else float(v)

        out = {}
        for name in METRIC_NAMES:
            boot = self.bootstrap.get(name)
            out[name] = {
                "value": clean(self.value(name)),
                "boot_mean": clean(boot[0]) if boot else None,
                "boot_std": clean(boot[1]) if boot else None,
            }
        out["n_resamples"] = self.n_resamples
        out["confusion"] = self.confusion.tolist()
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        def num(v):
            return float("nan") if v is None else v

        boot = {}
        for name in METRIC_NAMES:
            if d[name].get("boot_mean") is not None:
                boot[name] = (d[name]["boot_mean"], d[name]["boot_std"])
        return cls(
            **{name: num(d[name]["value"]) for name in METRIC_NAMES},
            confusion=np.asarray(d.get("confusion", []), dtype=np.int64),
            bootstrap=boot,
            n_resamples=d.get("n_resamples", 0),
        )


def evaluate(labels, preds, K: int, n_resamples: int = 1000, seed: int = 0) -> EvalReport:
    """All five metrics plus their stratified-bootstrap mean/std.

    Undefined point values are reported as NaN. ``n_resamples=0`` skips the
    bootstrap.
    """
    values = {}
    for name in METRIC_NAMES:
        try:
            values[name] = compute_metric(name, labels, preds, K)
        except UndefinedMetricError:
            values[name] = float("nan")
    boot = {}
    if n_resamples:
        for name in METRIC_NAMES:
            try:
                boot[name] = bootstrap(labels, preds, name, n_resamples, seed, K)
            except BootstrapError:
                boot[name] = None
    return EvalReport(**values, confusion=confusion(labels, preds, K), bootstrap=boot,
                      n_resamples=n_resamples)

"""Soft-label cross-entropy, focal loss and class-balanced loss.

Every loss returns the batch-mean value together with its gradient with
respect to the logits, so the model can backpropagate without autodiff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ParameterError

LOSS_KINDS = ("ce", "focal", "cb")
LOG_FLOOR = np.log(1e-12)


@dataclass(frozen=True)
class LossValue:
    loss: float
    grad: np.ndarray


@dataclass(frozen=True)
class LossSpec:
    kind: str = "ce"
    gamma: float = 2.0
    cb_beta: float = 0.999
    # required by "cb"; the trainer fills it from the training split when unset
    class_counts: tuple | None = None

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ParameterError(f"unknown loss kind {self.kind!r}")
        if self.gamma < 0:
            raise ParameterError("gamma must be >= 0")
        if not 0.0 <= self.cb_beta < 1.0:
            raise ParameterError("cb_beta must lie in [0, 1)")

    def __call__(self, logits, targets) -> LossValue:
        if self.kind == "ce":
            return ce_soft(logits, targets)
        if self.kind == "focal":
            return focal(logits, targets, self.gamma)
        if self.class_counts is None:
            raise ParameterError("class-balanced loss needs class_counts")
        return cb_loss(logits, targets, cb_weights(self.class_counts, self.cb_beta))


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def _check(logits, targets) -> tuple[np.ndarray, np.ndarray]:
    logits = np.asarray(logits, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if logits.ndim != 2 or logits.shape != targets.shape:
        raise ParameterError(f"logits {logits.shape} and targets {targets.shape} must be equal B x K")
    if not np.all(np.isfinite(logits)):
        raise NumericError("non-finite logits")
    return logits, targets


def _hard_labels(targets: np.ndarray) -> np.ndarray:
    if not (np.all((targets == 0) | (targets == 1)) and np.all(targets.sum(axis=1) == 1)):
        raise ParameterError("this loss is defined for hard one-hot labels only")
    return targets.argmax(axis=1)


def ce_soft(logits, soft_labels) -> LossValue:
    """Mean over the batch of ``-sum_c y_c log softmax(z)_c``."""
    logits, y = _check(logits, soft_labels)
    logp = log_softmax(logits)
    b = logits.shape[0]
    loss = -(y * np.maximum(logp, LOG_FLOOR)).sum() / b
    return LossValue(float(loss), (np.exp(logp) - y) / b)


def focal(logits, labels, gamma: float) -> LossValue:
    """Mean of ``-(1 - p_t)**gamma * log p_t`` over the batch."""
    if gamma < 0:
        raise ParameterError("gamma must be >= 0")
    logits, y = _check(logits, labels)
    t = _hard_labels(y)
    b = logits.shape[0]
    logp = log_softmax(logits)
    p = np.exp(logp)
    rows = np.arange(b)
    log_pt = logp[rows, t]
    pt = p[rows, t]
    one_minus = -np.expm1(log_pt)
    mod = one_minus**gamma
    loss = -(mod * np.maximum(log_pt, LOG_FLOOR)).sum() / b

    # d loss_i / d z_c = [gamma (1-pt)^(gamma-1) pt log pt - (1-pt)^gamma] (delta_tc - p_c)
    if gamma == 0:
        focus = np.zeros(b)
    else:
        safe = np.where(one_minus > 0, one_minus, 1.0)
        focus = np.where(one_minus > 0, gamma * mod / safe * pt * log_pt, 0.0)
    coef = focus - mod
    grad = coef[:, None] * (y - p) / b
    return LossValue(float(loss), grad)


def cb_weights(class_counts, cb_beta: float, normalize: bool = True) -> np.ndarray:
    """Inverse effective-number weights ``(1 - beta) / (1 - beta**n_k)``.

    With ``normalize`` the weights are rescaled to sum to ``K``.
    """
    n = np.asarray(class_counts, dtype=np.float64)
    if np.any(n < 1):
        raise ParameterError("class-balanced weights need every count >= 1")
    if not 0.0 <= cb_beta < 1.0:
        raise ParameterError("cb_beta must lie in [0, 1)")
    w = (1.0 - cb_beta) / -np.expm1(n * np.log(cb_beta)) if cb_beta > 0 else np.ones_like(n)
    if normalize:
        w = w * (n.size / w.sum())
    return w


def cb_loss(logits, labels, weights) -> LossValue:
    """Class-weighted cross-entropy: example ``i`` is scaled by ``weights[y_i]``."""
    logits, y = _check(logits, labels)
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (logits.shape[1],):
        raise ParameterError(f"expected {logits.shape[1]} class weights, got shape {weights.shape}")
    t = _hard_labels(y)
    b = logits.shape[0]
    logp = log_softmax(logits)
    w = weights[t]
    loss = -(w * np.maximum(logp[np.arange(b), t], LOG_FLOOR)).sum() / b
    grad = w[:, None] * (np.exp(logp) - y) / b
    return LossValue(float(loss), grad)

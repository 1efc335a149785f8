"""Beta sampling and MixUp / Balanced-MixUp batch construction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import one_hot_matrix
from .errors import ParameterError
from .sampling import SampleStream

MIX_KINDS = ("none", "mixup", "balanced")
LAMBDA_MODES = ("example", "batch")
ORIENTATIONS = ("instance_major", "literal")


def _johnk(a: float, b: float, rng: np.random.Generator, n: int) -> np.ndarray:
    # Johnk's rejection method, in log space so tiny shapes do not underflow.
    # Acceptance rate is reasonable only for a + b <= 1.
    out = np.empty(n)
    filled = 0
    while filled < n:
        m = max(2 * (n - filled), 16)
        log_u = np.log(rng.random(m)) / a
        log_v = np.log(rng.random(m)) / b
        log_s = np.logaddexp(log_u, log_v)
        ok = log_s <= 0.0
        take = np.exp(log_u[ok] - log_s[ok])[: n - filled]
        out[filled:filled + take.size] = take
        filled += take.size
    return out


def sample_beta(alpha: float, beta_param: float, rng: np.random.Generator, size=None):
    """Draw from Beta(alpha, beta_param).

    Beta(alpha, 1) uses the exact inverse transform ``U ** (1 / alpha)``;
    other shapes use Johnk's method when ``alpha + beta_param <= 1`` and a
    ratio of Gamma variates otherwise.
    """
    if not (alpha > 0 and beta_param > 0) or not np.isfinite(alpha) or not np.isfinite(beta_param):
        raise ParameterError("Beta parameters must be positive and finite")
    n = 1 if size is None else int(np.prod(size))
    if beta_param == 1.0:
        draws = rng.random(n) ** (1.0 / alpha)
    elif alpha + beta_param <= 1.0:
        draws = _johnk(alpha, beta_param, rng, n)
    else:
        x = rng.standard_gamma(alpha, n)
        y = rng.standard_gamma(beta_param, n)
        draws = x / (x + y)
    if size is None:
        return float(draws[0])
    return draws.reshape(size)


def beta1_pdf(x, alpha: float):
    """Density of Beta(alpha, 1): ``alpha * x**(alpha - 1)`` on (0, 1]."""
    x = np.asarray(x, dtype=np.float64)
    return alpha * x ** (alpha - 1.0)


@dataclass(frozen=True)
class MixPolicy:
    kind: str = "none"
    alpha: float = 0.1
    lambda_per: str = "example"
    # instance_major: the instance-sampled member gets 1 - Beta(alpha, 1) and
    # therefore dominates; literal: it gets the Beta(alpha, 1) draw itself
    orientation: str = "instance_major"
    # weight of the first member, bypassing the Beta draw; pins the identity
    # and pure-second-member cases
    fixed_lambda: float | None = None

    def __post_init__(self):
        if self.kind not in MIX_KINDS:
            raise ParameterError(f"unknown mix kind {self.kind!r}")
        if self.lambda_per not in LAMBDA_MODES:
            raise ParameterError(f"lambda_per must be one of {LAMBDA_MODES}")
        if self.orientation not in ORIENTATIONS:
            raise ParameterError(f"orientation must be one of {ORIENTATIONS}")
        if self.kind != "none" and not self.alpha > 0:
            raise ParameterError("alpha must be positive")
        if self.fixed_lambda is not None and not 0.0 <= self.fixed_lambda <= 1.0:
            raise ParameterError("fixed_lambda must lie in [0, 1]")

    def draw_lambdas(self, batch: int, beta_param: float, rng: np.random.Generator) -> np.ndarray:
        if self.fixed_lambda is not None:
            return np.full(batch, float(self.fixed_lambda))
        if self.lambda_per == "batch":
            return np.full(batch, sample_beta(self.alpha, beta_param, rng))
        return sample_beta(self.alpha, beta_param, rng, size=batch)


@dataclass(frozen=True)
class MixedBatch:
    """A batch of mixed inputs and soft labels.

    ``first`` holds the indices weighted by ``lambdas`` and ``second`` the
    indices weighted by ``1 - lambdas``. For Balanced-MixUp ``first`` comes
    from the instance-based stream.
    """

    features: np.ndarray
    soft_labels: np.ndarray
    lambdas: np.ndarray
    first: np.ndarray
    second: np.ndarray


def mixup_pair(xi, yi, xj, yj, lam: float):
    xi, yi, xj, yj = (np.asarray(a, dtype=np.float64) for a in (xi, yi, xj, yj))
    if xi.shape != xj.shape or yi.shape != yj.shape:
        raise ParameterError("mixup_pair operands have mismatched shapes")
    if not 0.0 <= lam <= 1.0:
        raise ParameterError("lambda must lie in [0, 1]")
    return lam * xi + (1.0 - lam) * xj, lam * yi + (1.0 - lam) * yj


def _mix(stream: SampleStream, first: np.ndarray, second: np.ndarray, lambdas: np.ndarray) -> MixedBatch:
    ds = stream.source
    lam = lambdas[:, None]
    xi, yi = ds.features[first], one_hot_matrix(ds.labels[first], ds.K)
    x = lam * xi + (1.0 - lam) * ds.features[second]
    y = lam * yi + (1.0 - lam) * one_hot_matrix(ds.labels[second], ds.K)
    # lam*x + (1-lam)*x is not bit-exact in floating point
    same = (first == second)[:, None]
    x = np.where(same, xi, x)
    y = np.where(same, yi, y)
    return MixedBatch(x, y, lambdas, first, second)


def plain_batch(stream: SampleStream, batch: int) -> MixedBatch:
    """Unmixed batch (every lambda is 1), used by the sampling-only baselines."""
    if batch < 1:
        raise ParameterError("batch must be >= 1")
    idx = stream.draw(batch)
    ds = stream.source
    return MixedBatch(ds.features[idx], one_hot_matrix(ds.labels[idx], ds.K), np.ones(batch), idx, idx)


def balanced_mixup_batch(
    instance_stream: SampleStream,
    class_stream: SampleStream,
    batch: int,
    policy: MixPolicy,
    rng: np.random.Generator,
) -> MixedBatch:
    """Mix an instance-sampled batch with a class-sampled batch.

    Pairs are formed positionally. ``Beta(alpha, 1)`` piles up near 0 for
    small alpha, so by default the class-sampled member receives that draw and
    the instance-sampled member the remainder; raising alpha shifts weight
    toward the (mostly minority) class-sampled examples. The returned
    ``lambdas`` are always the weights of the instance-sampled member.
    """
    if policy.kind != "balanced":
        raise ParameterError("balanced_mixup_batch needs a policy of kind 'balanced'")
    if batch < 1:
        raise ParameterError("batch must be >= 1")
    if instance_stream.source is not class_stream.source:
        raise ParameterError("both streams must draw from the same dataset")
    first = instance_stream.draw(batch)
    second = class_stream.draw(batch)
    lambdas = policy.draw_lambdas(batch, 1.0, rng)
    if policy.fixed_lambda is None and policy.orientation == "instance_major":
        lambdas = 1.0 - lambdas
    return _mix(instance_stream, first, second, lambdas)


def classic_mixup_batch(
    stream: SampleStream, batch: int, policy: MixPolicy, rng: np.random.Generator
) -> MixedBatch:
    """Mix a batch with a random permutation of itself, ``lambda ~ Beta(alpha, alpha)``."""
    if policy.kind != "mixup":
        raise ParameterError("classic_mixup_batch needs a policy of kind 'mixup'")
    if batch < 1:
        raise ParameterError("batch must be >= 1")
    first = stream.draw(batch)
    second = first[rng.permutation(batch)]
    lambdas = policy.draw_lambdas(batch, policy.alpha, rng)
    return _mix(stream, first, second, lambdas)

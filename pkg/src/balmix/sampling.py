"""Class-frequency power-law samplers.

A sampler with exponent ``q`` picks class ``j`` with probability
``n_j**q / sum_k n_k**q`` and then an example uniformly inside that class.
``q=1`` is instance-based sampling (uniform over examples), ``q=0`` is
class-based sampling (uniform over non-empty classes) and ``q=0.5`` is
square-root sampling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import ParameterError

INSTANCE_Q = 1.0
CLASS_Q = 0.0
SQRT_Q = 0.5


def class_probabilities(class_counts, q: float) -> np.ndarray:
    counts = np.asarray(class_counts, dtype=np.float64)
    if counts.ndim != 1 or counts.size == 0:
        raise ParameterError("class_counts must be a non-empty vector")
    if np.any(counts < 0) or not np.all(np.isfinite(counts)):
        raise ParameterError("class_counts must be finite and nonnegative")
    if not 0.0 <= q <= 1.0:
        raise ParameterError("q must lie in [0, 1]")
    present = counts > 0
    if not present.any():
        raise ParameterError("at least one class count must be positive")
    weights = np.zeros_like(counts)
    # empty classes stay at zero, including 0**0 when q == 0
    weights[present] = counts[present] ** q
    return weights / weights.sum()


@dataclass(frozen=True)
class SamplingStrategy:
    q: float
    class_probs: np.ndarray

    @classmethod
    def from_counts(cls, class_counts, q: float) -> "SamplingStrategy":
        probs = class_probabilities(class_counts, q)
        probs.setflags(write=False)
        return cls(q=float(q), class_probs=probs)


@dataclass
class SampleStream:
    """Seeded with-replacement stream of example indices into ``source``.

    Every draw consumes exactly two uniforms (class, then member), so
    ``draw(n)`` yields the same indices as ``n`` calls to :meth:`next_index`.
    """

    source: Dataset
    strategy: SamplingStrategy
    seed: int
    rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if self.source.N == 0:
            raise ParameterError("cannot sample from an empty dataset")
        if len(self.strategy.class_probs) != self.source.K:
            raise ParameterError("strategy and dataset disagree on K")
        self.rng = np.random.default_rng(self.seed)
        self._order = np.argsort(self.source.labels, kind="stable")
        self._starts = np.concatenate([[0], np.cumsum(self.source.class_counts)[:-1]])
        self._sizes = self.source.class_counts.astype(np.int64)
        self._cdf = np.cumsum(self.strategy.class_probs)
        self._last = int(np.flatnonzero(self.strategy.class_probs > 0)[-1])

    @classmethod
    def with_q(cls, source: Dataset, q: float, seed: int) -> "SampleStream":
        return cls(source, SamplingStrategy.from_counts(source.class_counts, q), seed)

    def draw_classes_and_indices(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        u = self.rng.random((n, 2))
        # side="right" skips zero-probability classes (flat cdf steps)
        cls = np.searchsorted(self._cdf, u[:, 0], side="right")
        cls = np.minimum(cls, self._last)
        within = np.minimum((u[:, 1] * self._sizes[cls]).astype(np.int64), self._sizes[cls] - 1)
        return cls, self._order[self._starts[cls] + within]

    def draw(self, n: int) -> np.ndarray:
        if n < 1:
            raise ParameterError("number of draws must be >= 1")
        return self.draw_classes_and_indices(n)[1]

    def next_index(self) -> int:
        return int(self.draw(1)[0])

    def epoch(self, length: int | None = None) -> np.ndarray:
        """``length`` consecutive draws (default: one per example in the source)."""
        return self.draw(self.source.N if length is None else length)

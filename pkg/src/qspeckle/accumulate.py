"""Streaming moments and delete-one jackknife for ensemble averages."""

from __future__ import annotations

import numpy as np


class MomentAccumulator:
    """Running mean and second central moment of a vector of quantities.

    Batches are folded in with the pairwise update of Chan, Golub and LeVeque,
    so partial accumulators built on disjoint chunks of a stream can be merged
    in any grouping.
    """

    def __init__(self, width: int = 1):
        self.count = 0
        self.mean = np.zeros(width)
        self.m2 = np.zeros(width)

    @property
    def width(self) -> int:
        return self.mean.size

    def update(self, values) -> "MomentAccumulator":
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values.reshape(-1, self.width) if self.width > 1 else values[:, None]
        if values.shape[0] == 0:
            return self
        batch = MomentAccumulator(self.width)
        batch.count = values.shape[0]
        batch.mean = values.mean(axis=0)
        batch.m2 = ((values - batch.mean) ** 2).sum(axis=0)
        self._absorb(batch)
        return self

    def _absorb(self, other: "MomentAccumulator"):
        if other.count == 0:
            return
        if self.count == 0:
            self.count, self.mean, self.m2 = other.count, other.mean.copy(), other.m2.copy()
            return
        n = self.count + other.count
        delta = other.mean - self.mean
        self.mean = self.mean + delta * (other.count / n)
        self.m2 = self.m2 + other.m2 + delta**2 * (self.count * other.count / n)
        self.count = n

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        out = MomentAccumulator(self.width)
        out._absorb(self)
        out._absorb(other)
        return out

    @property
    def variance(self) -> np.ndarray:
        if self.count < 2:
            return np.full(self.width, np.nan)
        return self.m2 / (self.count - 1)

    @property
    def standard_error(self) -> np.ndarray:
        return np.sqrt(self.variance / self.count)


def jackknife(statistic, *columns) -> tuple[float, float]:
    """Delete-one jackknife of a smooth function of sample means.

    ``statistic`` receives one array of leave-one-out means per column and must
    broadcast elementwise. Returns the full-sample value and its standard error.
    """
    cols = [np.asarray(c, dtype=float) for c in columns]
    n = cols[0].size
    full = [c.mean() for c in cols]
    value = float(statistic(*[np.asarray(m) for m in full]))
    if n < 2:
        return value, float("nan")
    loo = [(c.sum() - c) / (n - 1) for c in cols]
    theta = statistic(*loo)
    se = np.sqrt((n - 1) / n * np.sum((theta - theta.mean()) ** 2))
    return value, float(se)


def ratio_of_means(numerator, denominator) -> tuple[float, float]:
    return jackknife(lambda a, b: a / b, numerator, denominator)

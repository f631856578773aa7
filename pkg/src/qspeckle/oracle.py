"""Brute-force output photon statistics for small linear networks.

The network is a unitary ``U`` indexed ``[input, output]`` with a single
occupied input mode ``a``. For ``n`` photons the output state is

    (1/sqrt(n!)) (sum_k U[a, k] b_k^dagger)^n |0>,

which is expanded over every occupation pattern of the output modes. Counting
moments are then plain sums over that basis. Coherent inputs map to products
of coherent states; thermal inputs are a geometric mixture over photon number,
truncated with an explicit error bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np
from scipy.special import gammaln

from .errors import InvalidDimensionError, InvalidParameterError, OracleResourceError, TruncationError
from .scattering import ScatteringMatrix, unitarity_defect

MAX_DIMENSION = 10**6


@dataclass(frozen=True)
class OracleConfig:
    n_modes: int = 8
    max_photons: int = 6
    thermal_truncation: int = 100
    thermal_tail_bound: float = 1e-12

    def __post_init__(self):
        if not 1 <= self.n_modes <= 8:
            raise InvalidParameterError("n_modes", "oracle supports at most 8 modes per side")
        if not 0 <= self.max_photons <= 6:
            raise InvalidParameterError("max_photons", "oracle supports at most 6 photons")
        if self.thermal_truncation < 0:
            raise InvalidParameterError("thermal_truncation", "must be non-negative")


@dataclass(frozen=True)
class OracleMoments:
    """Output counting moments over all channels of the network.

    ``truncation_bound`` bounds the absolute error of every entry of
    ``means`` and ``covariance`` (zero for exact results).
    """

    means: np.ndarray
    second_moments: np.ndarray
    truncation_bound: float = 0.0
    tail_mass: float = 0.0

    @property
    def covariance(self) -> np.ndarray:
        return self.second_moments - np.outer(self.means, self.means)

    @property
    def variances(self) -> np.ndarray:
        return np.diag(self.covariance).copy()

    def subset(self, modes) -> tuple[float, float]:
        """Mean and variance of the total count in ``modes``."""
        idx = np.asarray(list(modes), dtype=int)
        mean = float(self.means[idx].sum())
        second = float(self.second_moments[np.ix_(idx, idx)].sum())
        return mean, second - mean * mean

    def subset_bound(self, modes) -> float:
        k = len(list(modes))
        return self.truncation_bound * k * k


def _network(u, a: int) -> np.ndarray:
    if isinstance(u, ScatteringMatrix):
        u = u.as_matrix()
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise InvalidDimensionError("U", f"expected a square unitary, got shape {u.shape}")
    if not 0 <= a < u.shape[0]:
        raise IndexError(f"input mode {a} out of range for {u.shape[0]} inputs")
    if unitarity_defect(u) > 1e-8:
        raise InvalidParameterError("U", "network is not unitary")
    return u[a]


def fock_dimension(n: int, k: int) -> int:
    return math.comb(n + k - 1, k - 1)


@lru_cache(maxsize=32)
def _patterns(n: int, k: int) -> np.ndarray:
    out = np.zeros((fock_dimension(n, k), k), dtype=np.int64)
    for row, modes in enumerate(combinations_with_replacement(range(k), n)):
        for m in modes:
            out[row, m] += 1
    out.setflags(write=False)
    return out


def _enumerated_moments(amplitudes: np.ndarray, n: int):
    k = amplitudes.size
    dim = fock_dimension(n, k)
    if dim > MAX_DIMENSION:
        raise OracleResourceError(f"Fock space of {n} photons in {k} modes has {dim} states")
    pats = _patterns(n, k)
    log_norm = 0.5 * (gammaln(n + 1) - gammaln(pats + 1).sum(axis=1))
    amp = np.exp(log_norm) * np.prod(amplitudes[None, :] ** pats, axis=1)
    prob = np.abs(amp) ** 2
    means = prob @ pats
    second = (pats * prob[:, None]).T @ pats
    return means.astype(float), second.astype(float), float(prob.sum())


def _multinomial_moments(p: np.ndarray, n: int):
    second = n * (n - 1) * np.outer(p, p)
    second[np.diag_indices_from(second)] += n * p
    return n * p, second


def oracle_fock(u, a: int, n: int, config: OracleConfig | None = None) -> OracleMoments:
    """Exact output moments for ``n`` photons injected through input ``a``.

    The Fock basis of the outputs is enumerated explicitly; the result must
    reproduce multinomial partitioning with ``p_k = |U[a, k]|^2``.
    """
    config = config or OracleConfig()
    row = _network(u, a)
    if row.size > 2 * config.n_modes:
        raise OracleResourceError(f"{row.size} output channels exceed the oracle budget")
    if int(n) != n or n < 0:
        raise InvalidParameterError("n", "photon number must be a non-negative integer")
    if n > config.max_photons:
        raise OracleResourceError(f"{n} photons exceed max_photons={config.max_photons}")
    means, second, norm = _enumerated_moments(row, int(n))
    if abs(norm - 1.0) > 1e-9:
        raise OracleResourceError(f"output state norm {norm} deviates from 1")
    return OracleMoments(means, second)


def oracle_coherent(u, a: int, mean: float) -> OracleMoments:
    """Coherent input: each output is an independent coherent state, hence Poisson."""
    if mean < 0:
        raise InvalidParameterError("mean", "must be non-negative")
    row = _network(u, a)
    lam = mean * np.abs(row) ** 2
    return OracleMoments(lam, np.outer(lam, lam) + np.diag(lam))


def thermal_tail(mean: float, cutoff: int) -> tuple[float, float, float]:
    """Tail sums of the Bose-Einstein distribution beyond ``cutoff``.

    Returns ``(P(n > K), sum_{n>K} n P(n), sum_{n>K} n^2 P(n))`` in closed form.
    """
    if mean == 0:
        return 0.0, 0.0, 0.0
    q = mean / (1.0 + mean)
    c = cutoff + 1
    head = q**c
    mass = head
    first = head * (c + q / (1 - q))
    second = head * (c * c + 2 * c * q / (1 - q) + q * (1 + q) / (1 - q) ** 2)
    return mass, first, second


def oracle_thermal(u, a: int, mean: float, config: OracleConfig | None = None) -> OracleMoments:
    """Thermal input as a truncated geometric mixture of Fock inputs.

    Photon numbers within ``config.max_photons`` use the enumerated Fock
    oracle; larger ones use multinomial moments. The reported bound covers the
    neglected tail for every mean and covariance entry.
    """
    config = config or OracleConfig()
    if mean < 0:
        raise InvalidParameterError("mean", "must be non-negative")
    row = _network(u, a)
    p = np.abs(row) ** 2
    k = p.size
    cutoff = config.thermal_truncation
    mass, tail1, tail2 = thermal_tail(mean, cutoff)
    if mass > config.thermal_tail_bound:
        raise TruncationError(
            f"thermal tail mass {mass:.3e} beyond cutoff {cutoff} exceeds {config.thermal_tail_bound:.1e}"
        )
    means = np.zeros(k)
    second = np.zeros((k, k))
    if mean > 0:
        q = mean / (1.0 + mean)
        for n in range(cutoff + 1):
            weight = (1.0 - q) * q**n
            if n <= config.max_photons and fock_dimension(n, k) <= MAX_DIMENSION:
                m1, m2, _ = _enumerated_moments(row, n)
            else:
                m1, m2 = _multinomial_moments(p, n)
            means += weight * m1
            second += weight * m2
    bound = tail2 + 2.0 * mean * tail1 + tail1 * tail1
    return OracleMoments(means, second, truncation_bound=bound, tail_mass=mass)

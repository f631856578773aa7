"""Exact photon-number moments of the outputs for one disorder realization.

Light enters through a single left mode ``a``; every other input carries
vacuum. Normal ordering the output number operators leaves only terms in
which the input-mode operators pair up, so for any set of output channels
with intensity coefficients ``p_k`` (``T_ab`` for transmitted modes,
``|r_aa'|^2`` for reflected ones):

    <n_k>               = mu p_k
    <n_k n_l> (k != l)  = <n(n-1)> p_k p_l
    var(n_k)            = mu p_k + mu (F - 1) p_k^2
    cov(n_k, n_l)       = mu (F - 1) p_k p_l

with ``mu`` the input mean and ``F`` its Fano factor (``mu (F - 1)`` is
``<n(n-1)> - mu^2``). These closed forms are checked against the brute-force
Fock-space oracle in :mod:`qspeckle.oracle`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, InvalidRealizationError
from .scattering import ScatteringMatrix, unitarity_defect
from .states import InputState, factorial_moment2

UNITARITY_GATE = 1e-8


@dataclass(frozen=True)
class RealizationStatistics:
    mode_means: np.ndarray
    mode_variances: np.ndarray
    total_transmission_mean: float
    total_transmission_variance: float
    total_reflection_mean: float
    total_reflection_variance: float
    transmitted_fraction: float


def _pair_excess(state: InputState) -> float:
    # <n(n-1)> - <n>^2 = mu (F - 1)
    mu = state.mean_photons
    return factorial_moment2(state) - mu * mu


def _checked_rows(s: ScatteringMatrix, a: int):
    n = s.n_modes
    if not 0 <= a < n:
        raise IndexError(f"input mode {a} out of range for {n} modes")
    defect = unitarity_defect(s)
    if defect > UNITARITY_GATE:
        raise InvalidRealizationError(defect, UNITARITY_GATE)
    return np.abs(s.t[a]) ** 2, np.abs(s.r_left[a]) ** 2


def _check_output(b: int, n: int, name: str = "b"):
    if not 0 <= b < n:
        raise IndexError(f"output mode {name}={b} out of range for {n} modes")


def output_moments(p, state: InputState):
    """Means and covariance matrix of the counts in channels with weights ``p``."""
    p = np.asarray(p, dtype=float)
    mu = state.mean_photons
    cov = _pair_excess(state) * np.outer(p, p)
    cov[np.diag_indices_from(cov)] += mu * p
    return mu * p, cov


def subset_total(p, state: InputState) -> tuple[float, float]:
    """Mean and variance of the summed count over channels with weights ``p``."""
    w = float(np.sum(p))
    mu = state.mean_photons
    return mu * w, mu * w + _pair_excess(state) * w * w


def mode_mean(s: ScatteringMatrix, a: int, b: int, state: InputState) -> float:
    """``<n_b> = T_ab * mu``."""
    t_row, _ = _checked_rows(s, a)
    _check_output(b, s.n_modes)
    return float(t_row[b] * state.mean_photons)


def mode_variance(s: ScatteringMatrix, a: int, b: int, state: InputState) -> float:
    t_row, _ = _checked_rows(s, a)
    _check_output(b, s.n_modes)
    tab = t_row[b]
    return float(state.mean_photons * tab + _pair_excess(state) * tab * tab)


def mode_cross_covariance(s: ScatteringMatrix, a: int, b0: int, b1: int, state: InputState) -> float:
    if b0 == b1:
        raise InvalidParameterError("b1", "cross-covariance needs b0 != b1; use mode_variance")
    t_row, _ = _checked_rows(s, a)
    _check_output(b0, s.n_modes, "b0")
    _check_output(b1, s.n_modes, "b1")
    return float(_pair_excess(state) * t_row[b0] * t_row[b1])


def two_point_numerator(s: ScatteringMatrix, a: int, b0: int, b1: int, state: InputState) -> float:
    """``<n_b0 n_b1> = <n(n-1)> T_ab0 T_ab1`` for ``b0 != b1``."""
    if b0 == b1:
        raise InvalidParameterError("b1", "two-point numerator needs b0 != b1")
    t_row, _ = _checked_rows(s, a)
    _check_output(b0, s.n_modes, "b0")
    _check_output(b1, s.n_modes, "b1")
    return float(factorial_moment2(state) * t_row[b0] * t_row[b1])


def total_transmission_stats(s: ScatteringMatrix, a: int, state: InputState) -> tuple[float, float]:
    t_row, _ = _checked_rows(s, a)
    return subset_total(t_row, state)


def total_reflection_stats(s: ScatteringMatrix, a: int, state: InputState) -> tuple[float, float]:
    _, r_row = _checked_rows(s, a)
    return subset_total(r_row, state)


def subset_total_stats(s: ScatteringMatrix, a: int, state: InputState,
                       transmitted=(), reflected=()) -> tuple[float, float]:
    """Count statistics summed over chosen right (transmitted) and left (reflected) outputs."""
    t_row, r_row = _checked_rows(s, a)
    for b in list(transmitted) + list(reflected):
        _check_output(b, s.n_modes)
    p = np.concatenate([t_row[list(transmitted)], r_row[list(reflected)]])
    return subset_total(p, state)


def realization_statistics(s: ScatteringMatrix, a: int, state: InputState) -> RealizationStatistics:
    t_row, r_row = _checked_rows(s, a)
    mu, kappa = state.mean_photons, _pair_excess(state)
    t_mean, t_var = subset_total(t_row, state)
    r_mean, r_var = subset_total(r_row, state)
    return RealizationStatistics(
        mode_means=mu * t_row,
        mode_variances=mu * t_row + kappa * t_row**2,
        total_transmission_mean=t_mean,
        total_transmission_variance=t_var,
        total_reflection_mean=r_mean,
        total_reflection_variance=r_var,
        transmitted_fraction=float(t_row.sum()),
    )


def ratio_observables(t_rows: np.ndarray, r_fractions: np.ndarray, state: InputState, pairs) -> dict:
    """Per-realization observables normalised by the input mean, for the ensemble driver.

    ``t_rows`` holds ``T_ab`` for a batch of realizations, shape ``(B, N)``.
    Per-photon quantities divide the moments above by ``mu``; the two-point
    numerator and its disorder denominator are kept unnormalised because the
    correlation is a ratio of their disorder means.
    """
    mu = state.mean_photons
    excess_per_photon = _pair_excess(state) / mu
    t_frac = t_rows.sum(axis=1)
    b0 = np.array([p[0] for p in pairs], dtype=int)
    b1 = np.array([p[1] for p in pairs], dtype=int)
    pair_products = t_rows[:, b0] * t_rows[:, b1]
    n = t_rows.shape[1]
    off_diag = (t_frac**2 - np.sum(t_rows**2, axis=1)) / max(n * (n - 1), 1)
    return {
        "transmitted_fraction": t_frac,
        "transmission_variance_ratio": t_frac + excess_per_photon * t_frac**2,
        "reflected_fraction": r_fractions,
        "reflection_variance_ratio": r_fractions + excess_per_photon * r_fractions**2,
        "mode_variance_ratio": np.mean(t_rows + excess_per_photon * t_rows**2, axis=1),
        "mode_cross_ratio": excess_per_photon * off_diag,
        "pair_numerators": factorial_moment2(state) * pair_products,
        "pair_denominators": mu * mu * pair_products,
        "pair_products": pair_products,
    }

"""Closed-form disorder-averaged predictions and the figure sweeps built on them.

All variance ratios are normalised by the input mean photon number. ``g`` is
the mesoscopic conductance ``N l / L``; ``math.inf`` drops the ``1/g``
corrections.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidParameterError, OutOfValidityError, UndefinedCorrelationError
from .states import InputState, StateKind, fano


class Quantity(str, enum.Enum):
    TOTAL_TRANSMISSION_VARIANCE_RATIO = "total_transmission_variance_ratio"
    TOTAL_REFLECTION_VARIANCE_RATIO = "total_reflection_variance_ratio"
    TWO_POINT_CORRELATION = "two_point_correlation"
    MODE_VARIANCE = "mode_variance"
    MODE_CROSS_COVARIANCE = "mode_cross_covariance"


class Figure(str, enum.Enum):
    FIG2_REFLECTION = "fig2r"
    FIG2_TRANSMISSION = "fig2t"
    FIG3 = "fig3"
    FIG4 = "fig4"


# Sweep grids; the source figures give no sampling, these are smooth defaults.
ELL_OVER_L_GRID = np.round(np.arange(0, 101) / 100.0, 2)
MEAN_PHOTON_GRID = np.logspace(-1.0, 1.0, 50)
FOCK_PHOTON_GRID = np.arange(1, 11)
CONDUCTANCE_GRID = np.arange(2.0, 51.0)
FIG4_ELL_OVER_L = 1.0 / 3.0


@dataclass(frozen=True)
class PredictionPoint:
    quantity: Quantity
    state: InputState
    ell_over_L: Optional[float]
    g: float
    value: float


def _check_ell(ell_over_L):
    ell = float(ell_over_L)
    if not 0.0 <= ell <= 1.0:
        raise InvalidParameterError("ell_over_L", f"must lie in [0, 1], got {ell_over_L!r}")
    return ell


def _check_g(g):
    g = float(g)
    if math.isnan(g) or g <= 1.0:
        raise OutOfValidityError("g", f"conductance must exceed 1 (localized regime), got {g!r}")
    return g


def _inverse_g(g):
    return 0.0 if math.isinf(g) else 1.0 / g


def predict_total_transmission_variance(state: InputState, ell_over_L, g=math.inf) -> float:
    """``l/L + (l/L)^2 (F - 1) [1 + (4/3 + l/L)/g]``."""
    ell = _check_ell(ell_over_L)
    inv_g = _inverse_g(_check_g(g))
    return ell + ell * ell * (fano(state) - 1.0) * (1.0 + inv_g * (4.0 / 3.0 + ell))


def predict_total_reflection_variance(state: InputState, ell_over_L) -> float:
    """``(1 - l/L) + (1 - l/L)^2 (F - 1)``, without 1/g corrections."""
    refl = 1.0 - _check_ell(ell_over_L)
    return refl + refl * refl * (fano(state) - 1.0)


def predict_two_point_correlation(state: InputState) -> float:
    """Disorder-averaged two-point correlation ``1 + (F - 1)/mu``.

    Exact: it is the same constant for every realization, pair of output
    directions, thickness and conductance.
    """
    mu = state.mean_photons
    if mu <= 0:
        raise UndefinedCorrelationError("two-point correlation is undefined for vacuum input")
    return 1.0 + (fano(state) - 1.0) / mu


def predict_mode_moments(state: InputState, mean_T, g=math.inf) -> tuple[float, float]:
    """Per-mode variance and cross-covariance ratios for mean coefficient ``mean_T``."""
    t = float(mean_T)
    if not 0.0 < t <= 1.0:
        raise InvalidParameterError("mean_T", f"must lie in (0, 1], got {mean_T!r}")
    inv_g = _inverse_g(_check_g(g))
    excess = fano(state) - 1.0
    variance = t + t * t * excess * (2.0 + 8.0 / 3.0 * inv_g)
    cross = t * t * excess * (1.0 + 4.0 / 3.0 * inv_g)
    return variance, cross


def default_states() -> list[InputState]:
    # Variance curves of Fock states do not depend on n (F = 0), so n = 1
    # stands for any n; the correlation figure sweeps the mean anyway.
    return [InputState.coherent(1.0), InputState.thermal(1.0), InputState.fock(1)]


def figure_sweep(which, states: Sequence[InputState] | None = None) -> list[PredictionPoint]:
    """Prediction table behind one of the figures.

    For the correlation-versus-photon-number figure only the kind of each
    state matters; its mean is swept over ``MEAN_PHOTON_GRID`` (integers
    ``FOCK_PHOTON_GRID`` for Fock states).
    """
    which = Figure(which)
    states = list(states) if states is not None else default_states()
    rows = []
    for state in states:
        if which is Figure.FIG2_REFLECTION:
            for ell in ELL_OVER_L_GRID:
                rows.append(PredictionPoint(Quantity.TOTAL_REFLECTION_VARIANCE_RATIO, state, float(ell),
                                            math.inf, predict_total_reflection_variance(state, ell)))
        elif which is Figure.FIG2_TRANSMISSION:
            for ell in ELL_OVER_L_GRID:
                rows.append(PredictionPoint(Quantity.TOTAL_TRANSMISSION_VARIANCE_RATIO, state, float(ell),
                                            math.inf, predict_total_transmission_variance(state, ell)))
        elif which is Figure.FIG3:
            grid = FOCK_PHOTON_GRID if state.kind is StateKind.FOCK else MEAN_PHOTON_GRID
            for mu in grid:
                swept = InputState(state.kind, float(mu))
                rows.append(PredictionPoint(Quantity.TWO_POINT_CORRELATION, swept, None, math.inf,
                                            predict_two_point_correlation(swept)))
        else:
            for g in CONDUCTANCE_GRID:
                rows.append(PredictionPoint(Quantity.TOTAL_TRANSMISSION_VARIANCE_RATIO, state, FIG4_ELL_OVER_L,
                                            float(g), predict_total_transmission_variance(state, FIG4_ELL_OVER_L, g)))
    return rows

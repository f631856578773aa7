"""Disorder averaging of the per-realization moments.

Realizations are processed in fixed blocks of indices. Each block is drawn
from per-index random substreams, so the set of realizations and the order in
which their statistics are folded together are independent of how many worker
processes share the work; results are bit-identical for any worker count.
"""

from __future__ import annotations

import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ._version import __version__
from .accumulate import MomentAccumulator, jackknife, ratio_of_means
from .analytics import (
    predict_mode_moments,
    predict_total_reflection_variance,
    predict_total_transmission_variance,
    predict_two_point_correlation,
)
from .errors import EmptyResultError, EnsembleQualityError, InvalidParameterError
from .moments import UNITARITY_GATE, ratio_observables
from .scattering import (
    EnsembleKind,
    EnsembleSpec,
    SliceCalibration,
    block_defects,
    block_size,
    calibrate_slices,
    draw_block,
)
from .states import InputState

MAX_REJECTED_FRACTION = 0.01

# Linear (plain mean) estimates and the per-realization observable behind each.
_LINEAR = {
    "mean_total_transmission": "transmitted_fraction",
    "total_transmission_variance_ratio": "transmission_variance_ratio",
    "mean_total_reflection": "reflected_fraction",
    "total_reflection_variance_ratio": "reflection_variance_ratio",
    "mode_variance_ratio": "mode_variance_ratio",
    "mode_cross_ratio": "mode_cross_ratio",
}


class LeadingOrderEnsembleWarning(UserWarning):
    """The independent-eigenvalue ensemble does not resolve 1/g correlations quantitatively."""


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float

    def to_dict(self) -> dict:
        return {"value": self.value, "stderr": self.stderr}


@dataclass
class EnsembleResult:
    spec: EnsembleSpec
    state: InputState
    input_mode: int
    probe_pairs: list
    estimates: dict
    per_pair_correlation: list
    analytic: dict
    analytic_g: float
    realizations_used: int
    rejected_realizations: int
    calibration: SliceCalibration | None = None
    wall_time: float = 0.0
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        """JSON-ready document with a fixed key order."""
        return {
            "tool": "qspeckle",
            "version": __version__,
            "spec_echo": self.spec.to_dict(),
            "state_echo": self.state.to_dict(),
            "master_seed": self.spec.master_seed,
            "input_mode": self.input_mode,
            "probe_pairs": [list(p) for p in self.probe_pairs],
            "realizations_used": self.realizations_used,
            "rejected_realizations": self.rejected_realizations,
            "estimates": {k: v.to_dict() for k, v in self.estimates.items()},
            "per_pair_two_point_correlation": [
                {"pair": list(p), **e.to_dict()} for p, e in zip(self.probe_pairs, self.per_pair_correlation)
            ],
            "analytic_g": None if math.isinf(self.analytic_g) else self.analytic_g,
            "analytic": dict(self.analytic),
            "calibration": self.calibration.to_dict() if self.calibration else None,
            "metadata": dict(self.metadata),
            "wall_time": self.wall_time,
        }


def default_probe_pairs(n_modes: int, input_mode: int = 0, count: int = 8) -> list[tuple[int, int]]:
    """``count`` distinct output pairs spread over all separations.

    The mode aligned with the input index is left out when enough modes remain.
    """
    modes = [b for b in range(n_modes) if b != input_mode]
    if len(modes) < 2:
        modes = list(range(n_modes))
    pairs = list(combinations(modes, 2))
    if not pairs:
        return []
    picks = np.unique(np.round(np.linspace(0, len(pairs) - 1, min(count, len(pairs)))).astype(int))
    return [pairs[i] for i in picks]


def _check_pairs(pairs, n_modes):
    out = []
    for pair in pairs:
        b0, b1 = (int(b) for b in pair)
        if b0 == b1:
            raise InvalidParameterError("probe_pairs", f"pair ({b0}, {b1}) must join distinct modes")
        if not (0 <= b0 < n_modes and 0 <= b1 < n_modes):
            raise InvalidParameterError("probe_pairs", f"pair ({b0}, {b1}) out of range for {n_modes} modes")
        out.append((b0, b1))
    return out


def _geometry_block(args):
    """Transmission row, reflected fraction and unitarity defect per realization."""
    spec, calibration, indices, input_mode = args
    blocks = draw_block(spec, indices, calibration)
    r11, _, t21, _ = blocks
    # Column convention: column ``a`` holds the amplitudes leaving input ``a``.
    t_rows = np.abs(t21[:, :, input_mode]) ** 2
    reflected = np.sum(np.abs(r11[:, :, input_mode]) ** 2, axis=1)
    return t_rows, reflected, block_defects(blocks)


def _map_blocks(jobs, workers):
    if workers <= 1 or len(jobs) <= 1:
        return [_geometry_block(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_geometry_block, jobs))


def sample_geometry(spec: EnsembleSpec, input_mode: int = 0, workers: int = 1,
                    calibration: SliceCalibration | None = None):
    """Draw ``spec.realizations`` accepted realizations.

    Returns ``(t_rows, reflected, rejected)`` where ``t_rows[i, b] = T_ab`` for
    the ``i``-th accepted realization. Realizations failing the unitarity gate
    are replaced by fresh indices beyond the nominal count.
    """
    if not 0 <= input_mode < spec.n_modes:
        raise InvalidParameterError("input_mode", f"{input_mode} out of range for {spec.n_modes} modes")
    if spec.kind is EnsembleKind.SLICE_COMPOSITION and calibration is None:
        calibration = calibrate_slices(spec)
    size = block_size(spec)
    workers = max(1, int(workers))
    t_parts, r_parts = [], []
    accepted, rejected, next_index = 0, 0, 0
    while accepted < spec.realizations:
        stop = next_index + (spec.realizations - accepted)
        jobs = [(spec, calibration, np.arange(s, min(s + size, stop)), input_mode)
                for s in range(next_index, stop, size)]
        next_index = stop
        for t_rows, reflected, defects in _map_blocks(jobs, workers):
            ok = defects <= UNITARITY_GATE
            rejected += int(np.count_nonzero(~ok))
            t_parts.append(t_rows[ok])
            r_parts.append(reflected[ok])
            accepted += int(np.count_nonzero(ok))
        if rejected > MAX_REJECTED_FRACTION * spec.realizations:
            raise EnsembleQualityError(
                f"{rejected} realizations failed the unitarity gate "
                f"(more than {MAX_REJECTED_FRACTION:.0%} of {spec.realizations})"
            )
    return np.concatenate(t_parts), np.concatenate(r_parts), rejected, calibration


def _linear_estimates(observables: dict, size: int) -> dict:
    names = list(_LINEAR)
    stacked = np.column_stack([observables[_LINEAR[k]] for k in names])
    acc = MomentAccumulator(len(names))
    for start in range(0, stacked.shape[0], size):
        acc.update(stacked[start:start + size])
    return {k: Estimate(float(m), float(s)) for k, m, s in zip(names, acc.mean, acc.standard_error)}


def _c2_estimate(t_rows: np.ndarray, pair_products: np.ndarray | None) -> Estimate:
    n = t_rows.shape[1]
    if pair_products is None:
        t_frac = t_rows.sum(axis=1)
        pair_mean = (t_frac**2 - np.sum(t_rows**2, axis=1)) / (n * (n - 1))
    else:
        pair_mean = pair_products.mean(axis=1)
    mean_t = t_rows.mean(axis=1)
    return Estimate(*jackknife(lambda p, t: p / (t * t) - 1.0, pair_mean, mean_t))


def _analytic(spec: EnsembleSpec, state: InputState, g_eff: float) -> dict:
    ell = spec.ell_over_L
    mode_var, mode_cross = predict_mode_moments(state, ell / spec.n_modes, g_eff)
    out = {
        "mean_total_transmission": ell,
        "total_transmission_variance_ratio": predict_total_transmission_variance(state, ell, g_eff),
        "mean_total_reflection": 1.0 - ell,
        "total_reflection_variance_ratio": predict_total_reflection_variance(state, ell),
        "mode_variance_ratio": mode_var,
        "mode_cross_ratio": mode_cross,
        "two_point_correlation": predict_two_point_correlation(state),
        "c2": 4.0 / (3.0 * spec.g),
    }
    return out


def run_ensembles(spec: EnsembleSpec, states, input_mode: int = 0, probe_pairs=None,
                  workers: int = 1) -> list[EnsembleResult]:
    """Run several input states over one shared set of disorder realizations."""
    start = time.perf_counter()
    states = list(states)
    for state in states:
        if state.mean_photons <= 0:
            raise InvalidParameterError("mean_photons", "ensemble ratios need a non-vacuum input state")
    pairs = default_probe_pairs(spec.n_modes, input_mode) if probe_pairs is None else probe_pairs
    pairs = _check_pairs(pairs, spec.n_modes)
    if not pairs:
        raise InvalidParameterError("probe_pairs", "at least two output modes are needed")
    t_rows, reflected, rejected, calibration = sample_geometry(spec, input_mode, workers)
    geometry_time = time.perf_counter() - start

    # Leading-order comparison for the independent-eigenvalue ensemble.
    g_eff = math.inf if spec.kind is EnsembleKind.INDEPENDENT_TAU else spec.g
    size = block_size(spec)
    results = []
    for state in states:
        t0 = time.perf_counter()
        obs = ratio_observables(t_rows, reflected, state, pairs)
        estimates = _linear_estimates(obs, size)
        estimates["two_point_correlation"] = Estimate(*ratio_of_means(
            obs["pair_numerators"].mean(axis=1), obs["pair_denominators"].mean(axis=1)))
        estimates["c2"] = _c2_estimate(t_rows, obs["pair_products"])
        per_pair = [Estimate(*ratio_of_means(obs["pair_numerators"][:, k], obs["pair_denominators"][:, k]))
                    for k in range(len(pairs))]
        results.append(EnsembleResult(
            spec=spec, state=state, input_mode=input_mode, probe_pairs=pairs,
            estimates=estimates, per_pair_correlation=per_pair,
            analytic=_analytic(spec, state, g_eff), analytic_g=g_eff,
            realizations_used=t_rows.shape[0], rejected_realizations=rejected,
            calibration=calibration,
            wall_time=geometry_time + time.perf_counter() - t0,
            metadata={"block_size": size, "workers": max(1, int(workers)),
                      "estimator": "two-point correlation = mean numerator / mean product; jackknife errors"},
        ))
    return results


def run_ensemble(spec: EnsembleSpec, state: InputState, input_mode: int = 0, probe_pairs=None,
                 workers: int = 1) -> EnsembleResult:
    """Monte Carlo disorder average for one input state."""
    return run_ensembles(spec, [state], input_mode, probe_pairs, workers)[0]


def measure_c2(spec: EnsembleSpec, probe_pairs=None, input_mode: int = 0, workers: int = 1) -> tuple[float, float]:
    """Long-range intensity correlation ``mean(T_ab0 T_ab1) / mean(T_ab)^2 - 1``.

    Averaged over ``probe_pairs`` (all ordered pairs ``b0 != b1`` when None).
    The independent-eigenvalue ensemble lacks eigenvalue repulsion; its value
    is reported with a :class:`LeadingOrderEnsembleWarning`.
    """
    if spec.kind is EnsembleKind.INDEPENDENT_TAU:
        warnings.warn("c2 from the independent-eigenvalue ensemble is leading-order only",
                      LeadingOrderEnsembleWarning, stacklevel=2)
    t_rows, _, _, _ = sample_geometry(spec, input_mode, workers)
    products = None
    if probe_pairs is not None:
        pairs = _check_pairs(probe_pairs, spec.n_modes)
        b0 = np.array([p[0] for p in pairs])
        b1 = np.array([p[1] for p in pairs])
        products = t_rows[:, b0] * t_rows[:, b1]
    est = _c2_estimate(t_rows, products)
    return est.value, est.stderr


@dataclass(frozen=True)
class ReportRow:
    quantity: str
    value: float
    stderr: float
    analytic: float
    pull: float


def convergence_report(result: EnsembleResult) -> list[ReportRow]:
    """Estimate, error and pull ``(value - analytic) / stderr`` per quantity."""
    if result.realizations_used == 0 or not result.estimates:
        raise EmptyResultError("ensemble result holds no realizations")
    rows = []
    for name, est in result.estimates.items():
        if name not in result.analytic:
            continue
        analytic = result.analytic[name]
        diff = est.value - analytic
        if est.stderr > 0:
            pull = diff / est.stderr
        else:
            pull = 0.0 if diff == 0 else math.copysign(math.inf, diff)
        rows.append(ReportRow(name, est.value, est.stderr, analytic, pull))
    return rows


def available_workers() -> int:
    return os.cpu_count() or 1

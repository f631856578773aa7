"""Random scattering matrices for a lossless quasi-1D diffusive medium.

Convention
----------
Matrices are indexed ``[input, output]``. With left modes ``a`` and right
modes ``b``, ``t[a, b]`` is the amplitude carried from left input ``a`` to
right output ``b``, so the output annihilation operators are

    a_b = sum_a' t[a', b] a_a'^in + sum_b' r[b', b] a_b'^in.

``ScatteringMatrix.as_matrix()`` returns ``[[r_left, t], [t_prime, r]]`` with
rows ordered (left inputs, right inputs) and columns ordered (left outputs,
right outputs). Composition is done internally in the usual column
convention (``out = S @ in``), whose blocks are the transposes of these.

Two ensembles are provided:

* ``INDEPENDENT_TAU``: polar form ``t = V diag(sqrt(tau)) U`` with Haar ``U``,
  ``V`` and independent ``tau = 1/cosh^2(x)``, ``x ~ U[0, L/l]``. Cheap and
  exact for the mean transmission, but without eigenvalue repulsion.
* ``SLICE_COMPOSITION``: star product of ``M`` weakly reflecting slices
  separated by Haar mode-mixing layers. Eigenvalue correlations build up as
  in DMPK; the slice strength is calibrated to the target mean transmission.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import CalibrationError, InvalidDimensionError, InvalidParameterError

CONSTRUCTION_TOL = 1e-12
# Entropy for the common random numbers used by slice calibration. Fixed so the
# calibrated ensemble depends on the physical parameters only, not the seed.
_CALIBRATION_ENTROPY = 0x51CE_CA1B
# Complex matrix elements per block of slice draws; bounds peak memory.
_SLICE_BLOCK_ELEMENTS = 2_000_000


class EnsembleKind(str, enum.Enum):
    INDEPENDENT_TAU = "independent_tau"
    SLICE_COMPOSITION = "slice_composition"


@dataclass(frozen=True)
class EnsembleSpec:
    """Disorder ensemble configuration.

    ``ell_over_L`` is the ratio of transport mean free path to thickness and
    ``n_modes`` the number of channels per side; their product is the
    conductance ``g``, which must exceed 1.
    """

    n_modes: int
    ell_over_L: float
    kind: EnsembleKind = EnsembleKind.INDEPENDENT_TAU
    realizations: int = 10_000
    master_seed: int = 0
    slices_per_mfp: int = 4
    calibration_realizations: int = 200
    calibration_tolerance: float = 0.02
    calibration_max_steps: int = 25

    def __post_init__(self):
        object.__setattr__(self, "kind", EnsembleKind(self.kind))
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise InvalidDimensionError("n_modes", f"must be a positive integer, got {self.n_modes!r}")
        ell = float(self.ell_over_L)
        if not (0.0 < ell <= 1.0):
            raise InvalidParameterError("ell_over_L", f"must lie in (0, 1], got {self.ell_over_L!r}")
        object.__setattr__(self, "ell_over_L", ell)
        if self.n_modes * ell <= 1.0:
            raise InvalidParameterError(
                "ell_over_L",
                f"conductance g = n_modes * ell_over_L = {self.n_modes * ell:g} must exceed 1",
            )
        if int(self.realizations) != self.realizations or self.realizations < 1:
            raise InvalidParameterError("realizations", f"must be a positive integer, got {self.realizations!r}")
        if int(self.master_seed) != self.master_seed or not (0 <= self.master_seed < 2**64):
            raise InvalidParameterError("master_seed", f"must be an unsigned 64-bit integer, got {self.master_seed!r}")
        if self.slices_per_mfp < 1:
            raise InvalidParameterError("slices_per_mfp", "must be at least 1")
        if self.calibration_realizations < 1:
            raise InvalidParameterError("calibration_realizations", "must be at least 1")
        if not (0 < self.calibration_tolerance < 1):
            raise InvalidParameterError("calibration_tolerance", "must lie in (0, 1)")

    @property
    def g(self) -> float:
        return self.n_modes * self.ell_over_L

    @property
    def n_slices(self) -> int:
        return max(1, math.ceil(self.slices_per_mfp / self.ell_over_L - 1e-9))

    def to_dict(self) -> dict:
        return {
            "n_modes": self.n_modes,
            "ell_over_L": self.ell_over_L,
            "kind": self.kind.value,
            "realizations": self.realizations,
            "master_seed": self.master_seed,
            "slices_per_mfp": self.slices_per_mfp,
            "calibration_realizations": self.calibration_realizations,
            "calibration_tolerance": self.calibration_tolerance,
            "calibration_max_steps": self.calibration_max_steps,
        }

    @classmethod
    def from_dict(cls, data) -> "EnsembleSpec":
        return cls(**data)


@dataclass(eq=False)
class ScatteringMatrix:
    """One disorder realization, blocks indexed ``[input, output]``."""

    t: np.ndarray
    r: np.ndarray
    t_prime: np.ndarray
    r_left: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.t.shape[0]

    @classmethod
    def identity(cls, n_modes: int) -> "ScatteringMatrix":
        eye = np.eye(n_modes, dtype=complex)
        zero = np.zeros((n_modes, n_modes), dtype=complex)
        return cls(t=eye, r=zero, t_prime=eye.copy(), r_left=zero.copy())

    @classmethod
    def from_matrix(cls, s) -> "ScatteringMatrix":
        s = np.asarray(s, dtype=complex)
        if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] % 2:
            raise InvalidDimensionError("S", f"expected a square 2N x 2N matrix, got shape {s.shape}")
        n = s.shape[0] // 2
        return cls(t=s[:n, n:], r=s[n:, n:], t_prime=s[n:, :n], r_left=s[:n, :n])

    def as_matrix(self) -> np.ndarray:
        return np.block([[self.r_left, self.t], [self.t_prime, self.r]])

    def transmission(self) -> np.ndarray:
        """Intensity coefficients ``T[a, b] = |t[a, b]|^2``."""
        return np.abs(self.t) ** 2

    def reflection(self) -> np.ndarray:
        """Left-side intensity reflection ``R[a, a'] = |r_left[a, a']|^2``."""
        return np.abs(self.r_left) ** 2

    def _column_blocks(self):
        return self.r_left.T, self.t_prime.T, self.t.T, self.r.T

    @classmethod
    def _from_column_blocks(cls, r11, t12, t21, r22) -> "ScatteringMatrix":
        return cls(t=np.ascontiguousarray(t21.T), r=np.ascontiguousarray(r22.T),
                   t_prime=np.ascontiguousarray(t12.T), r_left=np.ascontiguousarray(r11.T))


# --------------------------------------------------------------------------
# Random streams


def realization_rng(master_seed: int, index: int, namespace: int = 0) -> np.random.Generator:
    """Counter-based substream for realization ``index``.

    The stream is a pure function of ``(master_seed, namespace, index)`` so the
    realization drawn for a given index never depends on execution order.
    """
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(namespace), int(index)))
    return np.random.Generator(np.random.Philox(seq))


def _ginibre(rng: np.random.Generator, shape) -> np.ndarray:
    z = rng.standard_normal(tuple(shape) + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * np.sqrt(0.5)


def _haar_from_ginibre(z: np.ndarray) -> np.ndarray:
    # QR of a complex Ginibre matrix with the phases of diag(R) absorbed into Q.
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw an ``n x n`` unitary from the Haar measure."""
    if int(n) != n or n < 1:
        raise InvalidDimensionError("n", f"must be a positive integer, got {n!r}")
    return _haar_from_ginibre(_ginibre(rng, (n, n)))


def unitarity_defect(s) -> float:
    """``max |S^dagger S - I|`` for a ``ScatteringMatrix`` or plain array."""
    m = s.as_matrix() if isinstance(s, ScatteringMatrix) else np.asarray(s, dtype=complex)
    return float(_batch_defects(m[None])[0])


def _batch_defects(full: np.ndarray) -> np.ndarray:
    gram = np.conj(np.swapaxes(full, -1, -2)) @ full
    gram[..., np.arange(full.shape[-1]), np.arange(full.shape[-1])] -= 1.0
    return np.abs(gram).max(axis=(-2, -1))


def _assemble_column(r11, t12, t21, r22) -> np.ndarray:
    top = np.concatenate([r11, t12], axis=-1)
    bottom = np.concatenate([t21, r22], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


# --------------------------------------------------------------------------
# Independent-eigenvalue ensemble


def sample_transmission_eigenvalues(spec: EnsembleSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw ``N`` transmission eigenvalues ``1/cosh^2(x)`` with ``x ~ U[0, L/l]``.

    The ensemble mean is ``(l/L) tanh(L/l)``, tending to ``l/L`` for thick
    samples.
    """
    if not (0.0 < spec.ell_over_L <= 1.0):
        raise InvalidParameterError("ell_over_L", f"must lie in (0, 1], got {spec.ell_over_L!r}")
    x = rng.uniform(0.0, 1.0 / spec.ell_over_L, spec.n_modes)
    # 1/cosh^2 without overflow; floor keeps deep channels strictly positive.
    e = np.exp(-2.0 * x)
    return np.maximum(4.0 * e / (1.0 + e) ** 2, np.finfo(float).tiny)


def _check_taus(taus) -> np.ndarray:
    taus = np.asarray(taus, dtype=float)
    if taus.ndim != 1 or taus.size == 0:
        raise InvalidDimensionError("taus", "expected a non-empty 1-d sequence")
    if np.any(~np.isfinite(taus)) or np.any(taus <= 0.0) or np.any(taus > 1.0):
        raise InvalidParameterError("taus", "every transmission eigenvalue must lie in (0, 1]")
    return taus


def _polar_blocks(taus: np.ndarray, z: np.ndarray):
    """Column-convention blocks from eigenvalues ``(B, N)`` and Ginibre draws ``(B, 4, N, N)``."""
    haar = _haar_from_ginibre(z)
    u1, u2, v1, v2 = haar[:, 0], haar[:, 1], haar[:, 2], haar[:, 3]
    s = np.sqrt(taus)[:, None, :]
    c = np.sqrt(1.0 - taus)[:, None, :]
    r11 = -(v1 * c) @ u1
    t12 = (v1 * s) @ u2
    t21 = (v2 * s) @ u1
    r22 = (v2 * c) @ u2
    return r11, t12, t21, r22


def assemble_polar(taus, rng: np.random.Generator) -> ScatteringMatrix:
    """Build a unitary scattering matrix with transmission eigenvalues ``taus``.

    ``t = V diag(sqrt(tau)) U`` with independent Haar ``U`` and ``V``; the
    reflection blocks complete the polar decomposition.
    """
    taus = _check_taus(taus)
    n = taus.size
    z = _ginibre(rng, (4, n, n))
    blocks = _polar_blocks(taus[None], z[None])
    return ScatteringMatrix._from_column_blocks(*(b[0] for b in blocks))


# --------------------------------------------------------------------------
# Slice composition


def star_product(left: ScatteringMatrix, right: ScatteringMatrix) -> ScatteringMatrix:
    """Redheffer star product: ``left`` followed by ``right`` along the axis."""
    if left.n_modes != right.n_modes:
        raise InvalidDimensionError("right", "scattering matrices must share n_modes")
    a11, a12, a21, a22 = left._column_blocks()
    b11, b12, b21, b22 = right._column_blocks()
    eye = np.eye(left.n_modes)
    x = np.linalg.solve(eye - a22 @ b11, a21)
    y = np.linalg.solve(eye - b11 @ a22, b12)
    return ScatteringMatrix._from_column_blocks(
        a11 + a12 @ b11 @ x, a12 @ y, b21 @ x, b22 + b21 @ a22 @ y
    )


def cascade(slices, n_modes: int | None = None) -> ScatteringMatrix:
    """Star-product a sequence of slices; an empty sequence is the identity."""
    slices = list(slices)
    if not slices:
        if n_modes is None:
            raise InvalidDimensionError("n_modes", "required for an empty cascade")
        return ScatteringMatrix.identity(n_modes)
    return functools.reduce(star_product, slices)


def uniform_slice(n_modes: int, slice_transmission: float) -> ScatteringMatrix:
    """Weak scatterer with every channel transmitting ``slice_transmission``."""
    s = math.sqrt(slice_transmission)
    c = math.sqrt(1.0 - slice_transmission)
    eye = np.eye(n_modes, dtype=complex)
    return ScatteringMatrix(t=s * eye, r=c * eye, t_prime=s * eye, r_left=-c * eye)


def mixing_layer(forward: np.ndarray, backward: np.ndarray) -> ScatteringMatrix:
    """Reflectionless layer scrambling modes with unitaries in each direction."""
    zero = np.zeros_like(forward)
    return ScatteringMatrix._from_column_blocks(zero, backward, forward, zero.copy())


@dataclass(frozen=True)
class SliceCalibration:
    n_slices: int
    slice_transmission: float
    target: float
    achieved: float
    evaluations: int
    realizations: int

    def to_dict(self) -> dict:
        return {
            "n_slices": self.n_slices,
            "slice_transmission": self.slice_transmission,
            "target_mean_transmission": self.target,
            "achieved_mean_transmission": self.achieved,
            "evaluations": self.evaluations,
            "realizations_per_probe": self.realizations,
        }


def _draw_slice_mixers(rng: np.random.Generator, n: int, n_slices: int) -> np.ndarray:
    return _ginibre(rng, (n_slices + 1, 2, n, n))


def _compose_slice_blocks(z: np.ndarray, slice_transmission: float):
    """Batched composition ``mix_0 * S0 * mix_1 * ... * S0 * mix_M``.

    ``z`` has shape ``(B, M + 1, 2, N, N)``: Ginibre draws for the forward and
    backward unitaries of each mixing layer. Returns column-convention blocks.
    """
    haar = _haar_from_ginibre(z)
    n_layers, n = z.shape[1], z.shape[-1]
    s = math.sqrt(slice_transmission)
    c = math.sqrt(1.0 - slice_transmission)
    eye = np.eye(n)

    r11 = np.zeros(z.shape[:1] + (n, n), dtype=complex)
    t12 = haar[:, 0, 1].copy()
    t21 = haar[:, 0, 0].copy()
    r22 = np.zeros_like(r11)
    for k in range(1, n_layers):
        # scalar slice [[-c, s], [s, c]]
        k_inv = np.linalg.inv(eye + c * r22)
        x = k_inv @ t21
        r11 = r11 - c * (t12 @ x)
        t21 = s * x
        t12 = s * (t12 @ k_inv)
        r22 = c * eye + (s * s) * (r22 @ k_inv)
        # mixing layer
        wf, wb = haar[:, k, 0], haar[:, k, 1]
        t21 = wf @ t21
        r22 = wf @ r22 @ wb
        t12 = t12 @ wb
    return r11, t12, t21, r22


def _slice_block_size(spec: EnsembleSpec) -> int:
    per = (spec.n_slices + 1) * 2 * spec.n_modes**2
    return int(min(256, max(1, _SLICE_BLOCK_ELEMENTS // per)))


def _calibration_mean(spec: EnsembleSpec, slice_transmission: float) -> float:
    """Mean of ``Tr(t t^dagger)/N`` over the fixed calibration sample."""
    n, m = spec.n_modes, spec.n_slices
    size = _slice_block_size(spec)
    total = 0.0
    for start in range(0, spec.calibration_realizations, size):
        stop = min(start + size, spec.calibration_realizations)
        z = np.stack([
            _draw_slice_mixers(realization_rng(_CALIBRATION_ENTROPY, j, namespace=n), n, m)
            for j in range(start, stop)
        ])
        t21 = _compose_slice_blocks(z, slice_transmission)[2]
        total += float(np.sum(np.abs(t21) ** 2))
    return total / (spec.calibration_realizations * n)


@functools.lru_cache(maxsize=64)
def _calibrate(n_modes, ell_over_L, slices_per_mfp, realizations, tolerance, max_steps) -> SliceCalibration:
    spec = EnsembleSpec(n_modes, ell_over_L, EnsembleKind.SLICE_COMPOSITION, 1, 0,
                        slices_per_mfp, realizations, tolerance, max_steps)
    m = spec.n_slices
    target = ell_over_L
    if target >= 1.0:
        return SliceCalibration(m, 1.0, target, 1.0, 0, realizations)

    evaluations = 0

    def excess(tau0):
        nonlocal evaluations
        evaluations += 1
        if evaluations > max_steps:
            raise _BudgetExhausted(tau0)
        return _calibration_mean(spec, tau0) - target

    # Ohmic addition of slice resistances gives the starting bracket.
    tau_ohm = 1.0 / (1.0 + (1.0 / target - 1.0) / m)
    hi = 1.0
    lo = max(1e-6, 1.0 - 2.0 * (1.0 - tau_ohm))
    achieved = float("nan")
    try:
        f_lo = excess(lo)
        while f_lo >= 0.0:
            if lo <= 1e-6:
                raise CalibrationError("slice calibration cannot reach the target", f_lo + target)
            lo = max(1e-6, 1.0 - 2.0 * (1.0 - lo))
            f_lo = excess(lo)
        achieved = f_lo + target
        remaining = max_steps - evaluations
        if remaining < 1:
            raise _BudgetExhausted(lo)
        try:
            tau0 = optimize.brentq(excess, lo, hi, xtol=1e-7, maxiter=remaining)
        except RuntimeError:
            raise _BudgetExhausted(lo) from None
        achieved = _calibration_mean(spec, tau0)
    except _BudgetExhausted as exc:
        raise CalibrationError(
            f"slice calibration exhausted its budget of {max_steps} probes",
            achieved if math.isfinite(achieved) else _calibration_mean(spec, exc.tau0),
        ) from None
    if abs(achieved - target) > tolerance * target:
        raise CalibrationError(
            f"slice calibration missed the target {target:g} by more than {tolerance:.1%}", achieved
        )
    return SliceCalibration(m, float(tau0), target, achieved, evaluations, realizations)


class _BudgetExhausted(Exception):
    def __init__(self, tau0):
        self.tau0 = tau0


def calibrate_slices(spec: EnsembleSpec) -> SliceCalibration:
    """Find the per-slice transmission whose ensemble mean ``T_a`` equals ``l/L``.

    A fixed sample of ``spec.calibration_realizations`` realizations (common
    random numbers) is recomputed for every probe, which makes the sample mean
    a smooth increasing function of the slice transmission; a safeguarded
    bracketing root finder then needs only a handful of probes. Results are
    cached per physical configuration.
    """
    return _calibrate(spec.n_modes, spec.ell_over_L, spec.slices_per_mfp,
                      spec.calibration_realizations, spec.calibration_tolerance,
                      spec.calibration_max_steps)


def compose_slices(spec: EnsembleSpec, rng: np.random.Generator,
                   calibration: SliceCalibration | None = None) -> ScatteringMatrix:
    """One slice-composition realization drawn from ``rng``."""
    if spec.kind is not EnsembleKind.SLICE_COMPOSITION:
        raise InvalidParameterError("kind", "compose_slices needs a slice_composition spec")
    calibration = calibration or calibrate_slices(spec)
    z = _draw_slice_mixers(rng, spec.n_modes, calibration.n_slices)
    blocks = _compose_slice_blocks(z[None], calibration.slice_transmission)
    return ScatteringMatrix._from_column_blocks(*(b[0] for b in blocks))


# --------------------------------------------------------------------------
# Realization blocks for the Monte Carlo driver


def block_size(spec: EnsembleSpec) -> int:
    """Realizations processed together; depends on the spec only."""
    if spec.kind is EnsembleKind.SLICE_COMPOSITION:
        return _slice_block_size(spec)
    return int(min(256, max(1, _SLICE_BLOCK_ELEMENTS // (4 * spec.n_modes**2))))


def draw_block(spec: EnsembleSpec, indices, calibration: SliceCalibration | None = None):
    """Draw the realizations with the given indices as stacked column blocks.

    Realization ``i`` consumes ``realization_rng(spec.master_seed, i)`` exactly
    as the single-realization functions do, so ``draw_realization(spec, i)``
    reproduces element ``i`` of any block.
    """
    indices = np.asarray(indices, dtype=np.int64)
    n = spec.n_modes
    if spec.kind is EnsembleKind.INDEPENDENT_TAU:
        taus, zs = [], []
        for i in indices:
            rng = realization_rng(spec.master_seed, int(i))
            taus.append(sample_transmission_eigenvalues(spec, rng))
            zs.append(_ginibre(rng, (4, n, n)))
        blocks = _polar_blocks(np.stack(taus), np.stack(zs))
    else:
        calibration = calibration or calibrate_slices(spec)
        z = np.stack([
            _draw_slice_mixers(realization_rng(spec.master_seed, int(i)), n, calibration.n_slices)
            for i in indices
        ])
        blocks = _compose_slice_blocks(z, calibration.slice_transmission)
    return blocks


def block_defects(blocks) -> np.ndarray:
    return _batch_defects(_assemble_column(*blocks))


def draw_realization(spec: EnsembleSpec, index: int,
                     calibration: SliceCalibration | None = None) -> ScatteringMatrix:
    """Realization ``index`` of the ensemble described by ``spec``."""
    rng = realization_rng(spec.master_seed, index)
    if spec.kind is EnsembleKind.INDEPENDENT_TAU:
        return assemble_polar(sample_transmission_eigenvalues(spec, rng), rng)
    return compose_slices(spec, rng, calibration)

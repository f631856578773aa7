"""Single-mode input states described by their photon-number moments.

Only the mean and second moment of the photon number enter the output
statistics of a linear lossless network fed through one mode, so states are
stored as ``(kind, mean_photons)`` and everything else is derived.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import InvalidParameterError


class StateKind(str, enum.Enum):
    COHERENT = "coherent"
    THERMAL = "thermal"
    FOCK = "fock"


@dataclass(frozen=True)
class InputState:
    """Photon statistics of the light injected through the input mode.

    A vacuum (``mean_photons == 0``) of any kind is normalised to a coherent
    state of zero amplitude.
    """

    kind: StateKind
    mean_photons: float

    def __post_init__(self):
        kind = StateKind(self.kind)
        mu = float(self.mean_photons)
        if not math.isfinite(mu) or mu < 0:
            raise InvalidParameterError(
                "mean_photons", f"must be finite and non-negative, got {self.mean_photons!r}"
            )
        if kind is StateKind.FOCK and not mu.is_integer():
            raise InvalidParameterError(
                "mean_photons", f"Fock states need an integer photon number, got {mu!r}"
            )
        if mu == 0:
            kind = StateKind.COHERENT
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "mean_photons", mu)

    @classmethod
    def coherent(cls, mean_photons):
        return cls(StateKind.COHERENT, mean_photons)

    @classmethod
    def thermal(cls, mean_photons):
        return cls(StateKind.THERMAL, mean_photons)

    @classmethod
    def fock(cls, n):
        return cls(StateKind.FOCK, n)

    @property
    def fano(self) -> float:
        return fano(self)

    @property
    def second_moment(self) -> float:
        return photon_moments(self)[1]

    @property
    def label(self) -> str:
        """Short human-readable tag, e.g. ``fock(n=2)``."""
        if self.kind is StateKind.FOCK:
            return f"fock(n={int(self.mean_photons)})"
        return f"{self.kind.value}(mean={self.mean_photons:g})"

    def to_dict(self) -> dict:
        mu = int(self.mean_photons) if self.kind is StateKind.FOCK else self.mean_photons
        return {"kind": self.kind.value, "mean_photons": mu}

    @classmethod
    def from_dict(cls, data) -> "InputState":
        try:
            kind = data["kind"]
            mu = data["mean_photons"]
        except (KeyError, TypeError) as exc:
            raise InvalidParameterError("state", f"expected kind and mean_photons, got {data!r}") from exc
        try:
            kind = StateKind(str(kind).lower())
        except ValueError as exc:
            raise InvalidParameterError("state", f"unknown kind {kind!r}") from exc
        return cls(kind, mu)


def fano(state: InputState) -> float:
    """Photon-number Fano factor: 1 coherent, 1 + mean thermal, 0 Fock."""
    if state.kind is StateKind.COHERENT:
        return 1.0
    if state.kind is StateKind.THERMAL:
        return 1.0 + state.mean_photons
    return 0.0


def photon_moments(state: InputState) -> tuple[float, float]:
    """Return ``(<n>, <n^2>)`` of the input photon number."""
    mu = state.mean_photons
    return mu, mu * mu + fano(state) * mu


def factorial_moment2(state: InputState) -> float:
    """``<n(n-1)>``, the pair count that drives all output correlations."""
    mu, m2 = photon_moments(state)
    return m2 - mu

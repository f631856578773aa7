import math

import pytest
from hypothesis import given, strategies as st

from qspeckle import InputState, InvalidParameterError, StateKind, fano
from qspeckle.states import factorial_moment2, photon_moments


def test_fano_factors():
    assert fano(InputState.coherent(3.0)) == 1.0
    assert fano(InputState.thermal(1.0)) == 2.0
    assert fano(InputState.fock(4)) == 0.0


def test_second_moments():
    assert photon_moments(InputState.thermal(1.0)) == (1.0, 3.0)
    assert photon_moments(InputState.fock(3)) == (3.0, 9.0)
    assert photon_moments(InputState.coherent(2.0)) == (2.0, 6.0)


def test_factorial_moment_of_fock_state():
    assert factorial_moment2(InputState.fock(1)) == 0.0
    assert factorial_moment2(InputState.fock(4)) == 12.0


@pytest.mark.parametrize("kind", list(StateKind))
def test_vacuum_is_coherent(kind):
    s = InputState(kind, 0)
    assert s.kind is StateKind.COHERENT
    assert s.second_moment == 0.0


@pytest.mark.parametrize("bad", [-1.0, math.nan, math.inf])
def test_invalid_mean_names_field(bad):
    with pytest.raises(InvalidParameterError, match="mean_photons"):
        InputState.thermal(bad)


def test_fractional_fock_rejected():
    with pytest.raises(InvalidParameterError):
        InputState(StateKind.FOCK, 1.5)


def test_from_dict_rejects_unknown_kind():
    with pytest.raises(InvalidParameterError, match="state"):
        InputState.from_dict({"kind": "squeezed", "mean_photons": 1})


@given(st.sampled_from(list(StateKind)), st.integers(0, 50))
def test_round_trip(kind, n):
    s = InputState(kind, n)
    assert InputState.from_dict(s.to_dict()) == s


@given(st.floats(0.0, 1e3))
def test_second_moment_matches_fano(mu):
    for s in (InputState.coherent(mu), InputState.thermal(mu)):
        m, m2 = photon_moments(s)
        assert m2 - m * m == pytest.approx(s.fano * m, rel=1e-12, abs=1e-12)

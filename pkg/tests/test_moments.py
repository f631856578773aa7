import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qspeckle import EnsembleSpec, InputState, InvalidParameterError, ScatteringMatrix, draw_realization
from qspeckle.errors import InvalidRealizationError
from qspeckle.moments import (
    mode_cross_covariance,
    mode_mean,
    mode_variance,
    output_moments,
    realization_statistics,
    subset_total_stats,
    total_reflection_stats,
    total_transmission_stats,
    two_point_numerator,
)

STATES = [InputState.coherent(2.5), InputState.thermal(1.0), InputState.fock(1), InputState.fock(3)]


@pytest.fixture(scope="module")
def s():
    return draw_realization(EnsembleSpec(8, 0.5, master_seed=4), 0)


def test_transparent_network_preserves_statistics():
    s = ScatteringMatrix.identity(3)
    for state in STATES:
        mean, var = total_transmission_stats(s, 1, state)
        assert mean == state.mean_photons
        assert var == pytest.approx(state.fano * state.mean_photons)
        assert mode_variance(s, 1, 1, state) == pytest.approx(var)


@pytest.mark.parametrize("state", STATES, ids=lambda x: x.label)
def test_flux_conservation(s, state):
    t_mean, _ = total_transmission_stats(s, 2, state)
    r_mean, _ = total_reflection_stats(s, 2, state)
    assert t_mean + r_mean == pytest.approx(state.mean_photons, rel=1e-12)


@pytest.mark.parametrize("state", STATES, ids=lambda x: x.label)
def test_all_outputs_carry_input_statistics(s, state):
    mean, var = subset_total_stats(s, 0, state, transmitted=range(8), reflected=range(8))
    assert mean == pytest.approx(state.mean_photons, rel=1e-12)
    assert var == pytest.approx(state.fano * state.mean_photons, rel=1e-10, abs=1e-12)


def test_coherent_stays_poissonian(s):
    state = InputState.coherent(4.0)
    mean, var = total_transmission_stats(s, 0, state)
    assert var == pytest.approx(mean, rel=1e-14)
    assert mode_cross_covariance(s, 0, 1, 5, state) == 0.0


def test_fock_single_photon_anticorrelated(s):
    state = InputState.fock(1)
    assert mode_cross_covariance(s, 0, 1, 5, state) < 0
    assert two_point_numerator(s, 0, 1, 5, state) == 0.0


def test_fock_variance_is_binomial(s):
    # n photons partition binomially between transmitted and the rest.
    state = InputState.fock(3)
    mean, var = total_transmission_stats(s, 0, state)
    p = mean / 3
    assert var == pytest.approx(3 * p * (1 - p), rel=1e-12)


def test_two_point_numerator_thermal(s):
    state = InputState.thermal(1.0)
    t = s.transmission()[0]
    # <n(n-1)> = 2 mu^2 for a thermal state
    assert two_point_numerator(s, 0, 2, 6, state) == pytest.approx(2 * t[2] * t[6])
    assert mode_mean(s, 0, 2, state) == pytest.approx(t[2])


def test_same_mode_pair_rejected(s):
    with pytest.raises(InvalidParameterError):
        mode_cross_covariance(s, 0, 3, 3, InputState.thermal(1))
    with pytest.raises(InvalidParameterError):
        two_point_numerator(s, 0, 3, 3, InputState.thermal(1))


def test_index_errors(s):
    with pytest.raises(IndexError):
        mode_mean(s, 9, 0, InputState.coherent(1))
    with pytest.raises(IndexError):
        mode_variance(s, 0, 8, InputState.coherent(1))


def test_unitarity_gate(s):
    bad = ScatteringMatrix(t=s.t * 1.01, r=s.r, t_prime=s.t_prime, r_left=s.r_left)
    with pytest.raises(InvalidRealizationError):
        total_transmission_stats(bad, 0, InputState.coherent(1))


def test_realization_statistics_consistent(s):
    state = InputState.thermal(2.0)
    st_ = realization_statistics(s, 1, state)
    mean, var = total_transmission_stats(s, 1, state)
    assert st_.total_transmission_mean == pytest.approx(mean)
    assert st_.total_transmission_variance == pytest.approx(var)
    assert st_.mode_variances[4] == pytest.approx(mode_variance(s, 1, 4, state))


@given(st.lists(st.floats(0, 1), min_size=2, max_size=10), st.sampled_from(STATES))
@settings(max_examples=50)
def test_covariance_sums_to_subset_variance(p, state):
    p = np.array(p) / max(1.0, sum(p))
    means, cov = output_moments(p, state)
    w = p.sum()
    assert cov.sum() == pytest.approx(state.mean_photons * w + state.mean_photons * (state.fano - 1) * w * w,
                                      rel=1e-10, abs=1e-12)
    assert means.sum() == pytest.approx(state.mean_photons * w)


def hadamard_medium():
    """Two transmitted outputs at 50/50, no reflection."""
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    z = np.zeros((2, 2))
    return ScatteringMatrix(t=h, r=z, t_prime=h, r_left=z.copy())


def splitter_medium():
    """One mode per side, half transmitted and half reflected."""
    c = np.array([[1 / np.sqrt(2)]])
    return ScatteringMatrix(t=c, r=-c, t_prime=c, r_left=c)


def test_identity_medium_means():
    s = ScatteringMatrix.identity(3)
    assert mode_mean(s, 1, 1, InputState.thermal(2.5)) == 2.5
    assert mode_mean(s, 1, 0, InputState.thermal(2.5)) == 0.0
    assert mode_variance(s, 1, 0, InputState.thermal(2.5)) == 0.0


def test_splitter_examples():
    s = hadamard_medium()
    assert mode_mean(s, 0, 1, InputState.fock(2)) == pytest.approx(1.0)
    assert mode_variance(s, 0, 0, InputState.fock(1)) == pytest.approx(0.25)
    assert mode_cross_covariance(s, 0, 0, 1, InputState.fock(1)) == pytest.approx(-0.25)
    assert mode_cross_covariance(s, 0, 0, 1, InputState.thermal(1)) == pytest.approx(0.25)
    assert two_point_numerator(s, 0, 0, 1, InputState.thermal(1)) == pytest.approx(0.5)
    assert two_point_numerator(s, 0, 0, 1, InputState.coherent(3)) == pytest.approx(9 * 0.25)
    for state in STATES:
        assert mode_cross_covariance(s, 0, 0, 1, InputState.coherent(state.mean_photons)) == 0.0


def test_reflection_examples():
    assert total_reflection_stats(splitter_medium(), 0, InputState.fock(4))[1] == pytest.approx(1.0)
    thick = ScatteringMatrix(t=np.zeros((1, 1)), r=np.ones((1, 1)), t_prime=np.zeros((1, 1)),
                             r_left=np.ones((1, 1)))
    for state in STATES:
        mean, var = total_reflection_stats(thick, 0, state)
        assert var / mean == pytest.approx(state.fano)
    mean, var = total_transmission_stats(ScatteringMatrix.identity(2), 0, InputState.fock(5))
    assert (mean, var) == (5.0, 0.0)

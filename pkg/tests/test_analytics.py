
import pytest
from hypothesis import given, strategies as st

from qspeckle import (
    Figure,
    InputState,
    OutOfValidityError,
    Quantity,
    UndefinedCorrelationError,
    figure_sweep,
    predict_mode_moments,
    predict_total_reflection_variance,
    predict_total_transmission_variance,
    predict_two_point_correlation,
)
from qspeckle.analytics import CONDUCTANCE_GRID, ELL_OVER_L_GRID
from qspeckle.errors import InvalidParameterError

CS, TS, FS = InputState.coherent(1.0), InputState.thermal(1.0), InputState.fock(1)
ell = st.floats(0.0, 1.0)


def test_fock_transmission_leading_order():
    assert predict_total_transmission_variance(InputState.fock(2), 0.25) == pytest.approx(0.1875)


def test_fock_transmission_with_bracket():
    # 0.25 - 0.0625 * (1 + (4/3 + 1/4)/16)
    expected = 0.25 - 0.0625 * (1 + (4 / 3 + 0.25) / 16)
    assert predict_total_transmission_variance(InputState.fock(2), 0.25, 16) == pytest.approx(expected)


@pytest.mark.parametrize("state,fano", [(CS, 1.0), (TS, 2.0), (FS, 0.0)])
def test_reflection_endpoint_is_fano(state, fano):
    assert predict_total_reflection_variance(state, 0.0) == fano
    assert predict_total_reflection_variance(state, 1.0) == 0.0


@given(ell)
def test_coherent_curves_are_shot_noise(x):
    assert predict_total_transmission_variance(CS, x) == pytest.approx(x)
    assert predict_total_reflection_variance(CS, x) == pytest.approx(1 - x)


@given(ell)
def test_state_ordering(x):
    t = [predict_total_transmission_variance(s, x) for s in (FS, CS, TS)]
    assert t[0] <= t[1] <= t[2]


@given(ell, st.floats(1.01, 1e6))
def test_finite_g_moves_away_from_shot_noise(x, g):
    assert predict_total_transmission_variance(TS, x, g) >= predict_total_transmission_variance(TS, x)
    assert predict_total_transmission_variance(FS, x, g) <= predict_total_transmission_variance(FS, x)
    assert predict_total_transmission_variance(CS, x, g) == pytest.approx(x)


@pytest.mark.parametrize("g", [1.0, 0.5])
def test_localized_regime(g):
    with pytest.raises(OutOfValidityError):
        predict_total_transmission_variance(TS, 0.5, g)


def test_ell_range():
    with pytest.raises(InvalidParameterError, match="ell_over_L"):
        predict_total_reflection_variance(TS, 1.2)


@pytest.mark.parametrize("state,c", [(CS, 1.0), (InputState.coherent(7), 1.0), (TS, 2.0),
                                     (InputState.thermal(0.3), 2.0), (FS, 0.0),
                                     (InputState.fock(2), 0.5), (InputState.fock(4), 0.75)])
def test_two_point_correlation(state, c):
    assert predict_two_point_correlation(state) == pytest.approx(c)


def test_correlation_undefined_for_vacuum():
    with pytest.raises(UndefinedCorrelationError):
        predict_two_point_correlation(InputState.thermal(0))


def test_mode_moments():
    var, cross = predict_mode_moments(TS, 0.01)
    assert var == pytest.approx(0.01 + 2e-4)
    assert cross == pytest.approx(1e-4)
    var, cross = predict_mode_moments(CS, 0.01, 3.0)
    assert (var, cross) == (pytest.approx(0.01), 0.0)


def test_figure_sweeps():
    f2 = figure_sweep(Figure.FIG2_TRANSMISSION)
    assert len(f2) == 3 * len(ELL_OVER_L_GRID)
    assert {p.quantity for p in f2} == {Quantity.TOTAL_TRANSMISSION_VARIANCE_RATIO}
    f3 = figure_sweep("fig3", [CS])
    assert all(p.value == 1.0 for p in f3)
    fock = figure_sweep("fig3", [FS])
    assert [p.value for p in fock][:2] == [0.0, 0.5]
    f4 = figure_sweep("fig4", [TS])
    assert len(f4) == len(CONDUCTANCE_GRID)
    values = [p.value for p in f4]
    assert values == sorted(values, reverse=True)
    assert all(p.ell_over_L == pytest.approx(1 / 3) for p in f4)


def test_unknown_figure():
    with pytest.raises(ValueError):
        figure_sweep("fig9")


def test_sweep_is_deterministic():
    assert figure_sweep("fig2r") == figure_sweep("fig2r")


def test_worked_examples():
    assert predict_total_transmission_variance(CS, 0.5, 7.0) == pytest.approx(0.5)
    assert predict_total_transmission_variance(InputState.fock(3), 1.0) == pytest.approx(0.0)
    assert predict_total_transmission_variance(TS, 1 / 3, 10) == pytest.approx(0.4630, abs=5e-5)
    assert predict_total_reflection_variance(InputState.fock(2), 0.5) == pytest.approx(0.25)
    assert predict_mode_moments(InputState.fock(2), 0.1) == pytest.approx((0.08, -0.01))
    assert predict_mode_moments(TS, 0.1) == pytest.approx((0.12, 0.01))


@given(st.sampled_from([CS, TS, FS, InputState.thermal(3.0), InputState.fock(5)]))
def test_endpoint_symmetry(state):
    assert predict_total_transmission_variance(state, 1.0) == pytest.approx(
        predict_total_reflection_variance(state, 0.0))


@given(st.integers(1, 1000), st.floats(1e-6, 1e6))
def test_bunching_dichotomy(n, mu):
    assert predict_two_point_correlation(InputState.fock(n)) < 1 < predict_two_point_correlation(
        InputState.thermal(mu))


def test_fig4_coherent_flat_and_fig2r_endpoints():
    assert all(p.value == pytest.approx(1 / 3) for p in figure_sweep("fig4", [CS]))
    at_zero = [p.value for p in figure_sweep("fig2r") if p.ell_over_L == 0.0]
    assert at_zero == [1.0, 2.0, 0.0]

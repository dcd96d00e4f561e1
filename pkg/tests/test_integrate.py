import numpy as np
import pytest

from qubit_aging import IntegrationControls, NonFinite
from qubit_aging.integrate import (
    REASON_STEADY,
    REASON_TMAX,
    batch_integrate_steady,
    integrate_steady,
)


def linear_decay(t, y):
    return -2.0 * y


def test_settles_on_linear_decay():
    controls = IntegrationControls(t_max=50.0)
    times, states, converged, reason = integrate_steady(linear_decay, np.array([1.0]), controls)
    assert converged and reason == REASON_STEADY
    assert abs(states[-1, 0]) < 1e-9 / 2.0
    assert times[0] == 0.0 and np.all(np.diff(times) > 0)


def test_already_steady_returns_immediately():
    times, states, converged, _ = integrate_steady(
        linear_decay, np.array([1e-12]), IntegrationControls()
    )
    assert converged and len(times) == 1


def test_tmax_without_settling():
    # Pure rotation never settles.
    def rotate(t, y):
        return np.array([-y[1], y[0]])

    controls = IntegrationControls(t_max=5.0)
    _, states, converged, reason = integrate_steady(rotate, np.array([1.0, 0.0]), controls)
    assert not converged and reason == REASON_TMAX
    assert np.hypot(*states[-1]) == pytest.approx(1.0, abs=1e-6)


def test_blowup_raises_nonfinite():
    def explode(t, y):
        return y * y

    with pytest.raises(NonFinite):
        integrate_steady(explode, np.array([1.0]), IntegrationControls(t_max=10.0))


def test_fixed_step_matches_adaptive():
    controls = IntegrationControls(t_max=30.0)
    fixed = IntegrationControls(t_max=30.0, fixed_step=0.01)

    def flow(t, y):
        return np.array([-(y[0] - 0.25)])

    _, states_a, conv_a, _ = integrate_steady(flow, np.array([1.0]), controls)
    _, states_f, conv_f, _ = integrate_steady(flow, np.array([1.0]), fixed)
    assert conv_a and conv_f
    assert states_a[-1, 0] == pytest.approx(states_f[-1, 0], abs=1e-8)


def test_batch_driver_tracks_cells_independently():
    # Layout (n_vars=2, n_cells=2) row-major: cell 0 decays in both
    # variables, cell 1 rotates forever; only cell 0 may converge.
    def rhs(t, y):
        v0c0, v0c1, v1c0, v1c1 = y
        return np.array([-2.0 * v0c0, -v1c1, -v1c0, v0c1])

    controls = IntegrationControls(t_max=30.0)
    y, res, converged = batch_integrate_steady(
        rhs, np.array([1.0, 1.0, 0.5, 0.0]), 2, controls, window=5.0
    )
    assert converged.tolist() == [True, False]
    assert abs(y[0]) < 1e-9 and abs(y[2]) < 1e-9
    assert np.hypot(y[1], y[3]) == pytest.approx(1.0, abs=1e-5)
    assert res[0] < 1e-9 <= res[1]


def test_batch_length_mismatch_rejected():
    with pytest.raises(ValueError):
        batch_integrate_steady(lambda t, y: -y, np.ones(5), 2, IntegrationControls())

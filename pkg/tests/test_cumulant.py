import numpy as np
import pytest
from scipy.integrate import solve_ivp

from qubit_aging import (
    CollectiveState,
    CumulantState,
    IntegrationControls,
    ModelParams,
    RequiresZeroV,
    cumulant_rhs,
    integrate_cumulant,
    integrate_to_steady,
    zero_state,
)
from qubit_aging.cumulant import _complex_derivatives, batch_steady, reality_residual


def fig6_params(**kw):
    base = dict(n_qubits=100, detuning=3.0, drive=3.2,
                coherent_coupling=0.04, dissipative_coupling=0.0)
    base.update(kw)
    return ModelParams(**base)


def test_undriven_uncoupled_steady_moments():
    params = fig6_params(drive=0.0, coherent_coupling=0.0)
    n, p = 100, 0.3
    final, nbar = integrate_cumulant(params, p, zero_state())
    assert nbar == pytest.approx(1 - p, abs=1e-6)
    assert final.e == pytest.approx(n * (1 - p) ** 2, rel=1e-5)
    for moment in (final.a, final.b, final.c, final.d):
        assert abs(moment) < 1e-7


def test_g0_subsystem_closes_to_collective():
    # At g = 0 the (q, a) pair decouples from the higher moments and
    # obeys the collective equations with g = V = 0.
    params = fig6_params(coherent_coupling=0.0)
    p = 0.5
    _, nbar = integrate_cumulant(params, p, zero_state())
    reference = integrate_to_steady(params, p, CollectiveState(0.0, 0.0 + 0j))
    assert nbar == pytest.approx(reference.steady.q, abs=1e-6)


def test_nonzero_v_rejected_everywhere():
    params = fig6_params(dissipative_coupling=0.2)
    with pytest.raises(RequiresZeroV):
        cumulant_rhs(zero_state(), params, 0.5)
    with pytest.raises(RequiresZeroV):
        integrate_cumulant(params, 0.5, zero_state())
    with pytest.raises(RequiresZeroV):
        batch_steady(params, np.array([0.1, 0.2]))


def test_matches_uncorrelated_solution_at_small_p():
    # Before the correlated transitions kick in the two routes agree.
    params = fig6_params()
    _, nbar = integrate_cumulant(params, 0.1, zero_state())
    reference = integrate_to_steady(params, 0.1, CollectiveState(0.0, 0.0 + 0j))
    assert abs(nbar - reference.steady.q) < 0.05


def test_zero_state_fixed_point_condition():
    # The all-zero state is stationary exactly when the pump vanishes
    # (p = 1) and the drive is off.
    stationary = fig6_params(drive=0.0)
    d = cumulant_rhs(zero_state(), stationary, 1.0)
    assert max(abs(d.q), abs(d.a), abs(d.b), abs(d.c), abs(d.d), abs(d.e)) == 0

    driven = fig6_params()
    d = cumulant_rhs(zero_state(), driven, 1.0)
    assert abs(d.a) == pytest.approx(driven.drive / 2)

    pumped = fig6_params(drive=0.0)
    d = cumulant_rhs(zero_state(), pumped, 0.6)
    assert d.q == pytest.approx(2 * pumped.kappa * 0.4)


def test_pair_moments_stay_real_when_carried_complex():
    # Integrate with b and e carried as full complex variables: the
    # equations themselves must keep their imaginary parts at zero.
    params = fig6_params()
    p = 0.5

    def rhs(t, y):
        state = CumulantState(
            q=y[0],
            a=complex(y[1], y[2]),
            b=complex(y[3], y[4]),
            c=complex(y[5], y[6]),
            d=complex(y[7], y[8]),
            e=complex(y[9], y[10]),
        )
        dq, da, db, dc, dd, de = _complex_derivatives(state, params, p)
        return np.array([
            dq.real if isinstance(dq, complex) else dq,
            da.real, da.imag, db.real, db.imag,
            dc.real, dc.imag, dd.real, dd.imag, de.real, de.imag,
        ])

    sol = solve_ivp(rhs, (0, 100), np.zeros(11), rtol=1e-9, atol=1e-12)
    assert np.abs(sol.y[4]).max() < 1e-8   # Im b
    assert np.abs(sol.y[10]).max() < 1e-8  # Im e


def test_reality_residual_is_zero_on_valid_states():
    params = fig6_params()
    rng = np.random.default_rng(17)
    for _ in range(20):
        state = CumulantState(
            q=float(rng.uniform(0, 1)),
            a=complex(rng.normal(), rng.normal()),
            b=float(rng.normal()),
            c=complex(rng.normal(), rng.normal()),
            d=complex(rng.normal(), rng.normal()),
            e=float(rng.normal()),
        )
        im_b, im_e = reality_residual(state, params, float(rng.uniform(0, 1)))
        assert im_b < 1e-12 and im_e < 1e-12


def test_batch_matches_scalar_points():
    params = fig6_params()
    ps = np.array([0.1, 0.4])
    nbar, _conv = batch_steady(params, ps)
    for p, nb in zip(ps, nbar):
        _, reference = integrate_cumulant(params, float(p), zero_state())
        assert nb == pytest.approx(reference, abs=1e-6)


def test_jump_locations_robust_to_tolerance(loose_controls):
    # The correlated transitions sit still when the integration
    # tolerances are halved.
    params = fig6_params()
    grid = np.arange(0.70, 0.90001, 0.005)
    base = IntegrationControls(rtol=1e-8, atol=1e-10, steady_tol=1e-7, t_max=200.0)
    tight = IntegrationControls(rtol=0.5e-8, atol=0.5e-10, steady_tol=1e-7, t_max=200.0)
    nb_a, _ = batch_steady(params, grid, controls=base)
    nb_b, _ = batch_steady(params, grid, controls=tight)
    from qubit_aging import detect_jumps

    jumps_a = detect_jumps(grid, nb_a)
    jumps_b = detect_jumps(grid, nb_b)
    assert len(jumps_a) == len(jumps_b) >= 2
    for ja, jb in zip(jumps_a, jumps_b):
        assert abs(ja.location - jb.location) < 0.005
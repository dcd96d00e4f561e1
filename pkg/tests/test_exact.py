import numpy as np
import pytest
from scipy.integrate import solve_ivp

from qubit_aging import (
    IntegrationControls,
    MeanFieldState,
    ModelParams,
    NonPhysical,
    TooLarge,
    build_system,
    evolve_exact,
    maximally_mixed,
    meanfield_rhs,
    product_state,
)
from qubit_aging.exact import SIGMA_M, SIGMA_P, SIGMA_Z, lindblad_generator, site_operator


def fig_rates(n, p=0.0):
    return ModelParams(n_qubits=n, detuning=3.0, drive=3.2,
                       coherent_coupling=0.04, dissipative_coupling=0.2,
                       inactive_ratio=p)


def test_single_active_qubit_reduction():
    params = ModelParams(n_qubits=1, detuning=0.0, drive=0.0,
                         coherent_coupling=0.0, dissipative_coupling=0.0)
    system = build_system(params)
    assert np.abs(system.hamiltonian).max() == 0
    assert len(system.jump_ops) == 1
    op, rate = system.jump_ops[0]
    assert rate == 1.0
    assert np.array_equal(op, SIGMA_P)


def test_pair_coupling_weight_matches_ordered_sum():
    # With both orderings of the distinct-pair sum counted, the N=2
    # Hamiltonian carries 2g on sigma_z sigma_z.
    g = 0.03
    params = ModelParams(n_qubits=2, detuning=0.0, drive=0.0,
                         coherent_coupling=g, dissipative_coupling=0.0)
    system = build_system(params)
    expected = 2 * g * np.kron(SIGMA_Z, SIGMA_Z)
    assert np.abs(system.hamiltonian - expected).max() < 1e-15


def test_pair_jump_count_and_rates():
    params = fig_rates(4, p=0.5)
    system = build_system(params)
    # 4 local channels + one per ordered distinct pair.
    assert len(system.jump_ops) == 4 + 4 * 3
    pair_rates = {rate for _, rate in system.jump_ops[4:]}
    assert pair_rates == {params.dissipative_coupling / 4}


def test_generator_is_trace_free():
    system = build_system(fig_rates(6, p=0.5))
    generator = lindblad_generator(system)
    drho = generator(maximally_mixed(6).elements)
    assert abs(np.trace(drho)) < 1e-12


def test_generator_matches_collective_loss_rate():
    # At a diagonal product state the population flow reduces to
    # -loss_rate * q + 2k(1-p): this pins the ordered-pair convention.
    params = fig_rates(5, p=0.4)
    system = build_system(params)
    generator = lindblad_generator(system)
    w = 0.37
    rho = product_state([w] * 5)
    drho = generator(rho.elements)
    dq = np.einsum("ij,ji->", drho, system.population_op).real
    expected = -params.loss_rate() * w + 2 * params.kappa * (1 - 0.4)
    assert dq == pytest.approx(expected, abs=1e-12)


def test_generator_matches_meanfield_at_product_states():
    # Expectations of an exactly-product state factorise exactly, so the
    # generator's single-qubit moment derivatives must equal the
    # mean-field right-hand side. Validates both transcriptions at once.
    rng = np.random.default_rng(21)
    params = ModelParams(n_qubits=5, detuning=-0.8, drive=2.1,
                         coherent_coupling=0.06, dissipative_coupling=0.45,
                         inactive_ratio=0.4)
    system = build_system(params)
    generator = lindblad_generator(system)
    n = 5
    w = rng.uniform(0.1, 0.9, n)
    mag = np.sqrt(w * (1 - w)) * rng.uniform(0, 0.9, n)
    q = mag * np.exp(1j * rng.uniform(0, 2 * np.pi, n))
    rho = product_state(w, q)
    drho = generator(rho.elements)

    mf_state = MeanFieldState(w=w, q=q, n_active=system.n_active)
    dw_mf, dq_mf = meanfield_rhs(mf_state, params)
    for j in range(n):
        n_j = site_operator(SIGMA_P @ SIGMA_M, j, n)
        sp_j = site_operator(SIGMA_P, j, n)
        dw = np.einsum("ij,ji->", drho, n_j).real
        dq = np.einsum("ij,ji->", drho, sp_j)
        assert dw == pytest.approx(dw_mf[j], abs=1e-12)
        assert dq == pytest.approx(dq_mf[j], abs=1e-12)


def test_pure_pump_and_pure_decay():
    active = ModelParams(n_qubits=1, detuning=0.0, drive=0.0,
                         coherent_coupling=0.0, dissipative_coupling=0.0)
    res = evolve_exact(build_system(active), maximally_mixed(1))
    assert res.converged
    assert res.steady_nbar == pytest.approx(1.0, abs=1e-8)

    inactive = active.with_inactive_ratio(1.0)
    res = evolve_exact(build_system(inactive), maximally_mixed(1))
    assert res.steady_nbar == pytest.approx(0.0, abs=1e-8)


def _oracle_two_qubit(p, t_eval):
    """Hand-coded 4x4 master equation for two qubits at the reference
    rates, written out in the basis (ee, eg, ge, gg) with explicit
    matrices and its own integrator call."""
    delta, omega, g, v, kappa = 3.0, 3.2, 0.04, 0.2, 1.0
    sz = np.diag([1.0, -1.0]).astype(complex)
    sp = np.array([[0, 1], [0, 0]], dtype=complex)
    sm = sp.T.conj()
    eye = np.eye(2, dtype=complex)
    sz1, sz2 = np.kron(sz, eye), np.kron(eye, sz)
    sp1, sp2 = np.kron(sp, eye), np.kron(eye, sp)
    sm1, sm2 = np.kron(sm, eye), np.kron(eye, sm)
    h = (delta / 2) * (sz1 + sz2) + (omega / 2) * (sp1 + sm1 + sp2 + sm2) \
        + 2 * g * (sz1 @ sz2)
    # p = 0.5: qubit 1 pumped, qubit 2 decaying; pair op both orderings.
    jumps = [(sp1, kappa), (sm2, kappa), (sm1 - sm2, v / 2), (sm2 - sm1, v / 2)]

    def rhs(t, y):
        rho = y.reshape(4, 4)
        out = -1j * (h @ rho - rho @ h)
        for op, rate in jumps:
            opd = op.conj().T
            out += rate * (2 * op @ rho @ opd - opd @ op @ rho - rho @ opd @ op)
        return out.ravel()

    rho0 = np.eye(4, dtype=complex).ravel() / 4
    sol = solve_ivp(rhs, (0, t_eval[-1]), rho0, t_eval=t_eval,
                    rtol=1e-11, atol=1e-13)
    number_op = (sp1 @ sm1 + sp2 @ sm2) / 2
    return np.array([
        np.einsum("ij,ji->", sol.y[:, k].reshape(4, 4), number_op).real
        for k in range(len(t_eval))
    ])


def test_two_qubit_trajectory_matches_oracle():
    params = fig_rates(2, p=0.5)
    controls = IntegrationControls(rtol=1e-11, atol=1e-13, steady_tol=0.0, t_max=10.0)
    res = evolve_exact(build_system(params), maximally_mixed(2), controls)
    probe_times = np.arange(1.0, 10.5, 1.0)
    oracle = _oracle_two_qubit(0.5, probe_times)
    for t_probe, reference in zip(probe_times, oracle):
        idx = np.argmin(np.abs(res.times - t_probe))
        assert abs(res.times[idx] - t_probe) < 1e-9
        assert res.nbar[idx] == pytest.approx(reference, abs=1e-8)


def test_active_qubit_exchange_invariance():
    # Swapping the initial data of two pumped qubits cannot change the
    # population record.
    params = fig_rates(3, p=1 / 3)
    controls = IntegrationControls(steady_tol=0.0, t_max=5.0)
    a = evolve_exact(build_system(params), product_state([0.3, 0.7, 0.5]), controls)
    b = evolve_exact(build_system(params), product_state([0.7, 0.3, 0.5]), controls)
    for t_probe in np.arange(1.0, 5.5, 1.0):
        ia = np.argmin(np.abs(a.times - t_probe))
        ib = np.argmin(np.abs(b.times - t_probe))
        assert abs(a.nbar[ia] - b.nbar[ib]) < 1e-10


def test_invariants_enforced_along_run():
    params = fig_rates(3, p=1 / 3)
    res = evolve_exact(build_system(params), maximally_mixed(3),
                       IntegrationControls(t_max=20.0))
    res.rho_final.validate()
    assert res.converged
    assert 0.0 <= res.steady_nbar <= 1.0


def test_dimension_guard():
    with pytest.raises(TooLarge):
        build_system(ModelParams(n_qubits=11, detuning=0.0, drive=0.0,
                                 coherent_coupling=0.0, dissipative_coupling=0.0))


def test_density_matrix_validation():
    bad_trace = maximally_mixed(1)
    bad_trace.elements *= 2.0
    with pytest.raises(NonPhysical):
        bad_trace.validate()

    not_hermitian = maximally_mixed(1)
    not_hermitian.elements[0, 1] = 0.1
    with pytest.raises(NonPhysical):
        not_hermitian.validate()

    not_positive = product_state([0.5], [0.9])  # |q| > sqrt(w(1-w))
    with pytest.raises(NonPhysical):
        not_positive.validate()


def test_rho_dimension_mismatch():
    params = fig_rates(2, p=0.5)
    with pytest.raises(NonPhysical):
        evolve_exact(build_system(params), maximally_mixed(3))
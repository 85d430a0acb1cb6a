"""Tests for the cascaded master equation and the reduced qubit model."""

import math

import numpy as np
import pytest

import phononet as pn
from phononet.cascade import (
    CascadedModel,
    DensityMatrix,
    default_fock_cutoff,
    fidelity,
    integrate,
    reduced_two_qubit_model,
    transferred_target,
)
from phononet.transfer import analytic_schedule, tabulated_schedule


def _zero_schedule(t0=-1.0, t1=1.0):
    ts = np.linspace(t0, t1, 5)
    return tabulated_schedule(ts, np.zeros(5), np.zeros(5))


def test_fock_cutoff_rule():
    assert default_fock_cutoff(0.0) == 6
    assert default_fock_cutoff(0.5) == 8
    assert default_fock_cutoff(20.0) == 30  # capped


def test_density_matrix_validation():
    with pytest.raises(pn.ValidationError, match="trace"):
        DensityMatrix(np.diag([0.5, 0.4]).astype(complex), 0.0)
    m = np.diag([0.5, 0.5]).astype(complex)
    m[0, 1] = 0.3
    with pytest.raises(pn.ValidationError, match="Hermitian"):
        DensityMatrix(m, 0.0)


def test_zero_generator_keeps_state():
    model = CascadedModel(_zero_schedule(), n_th=0.0, include_cavity=False)
    rho0 = model.initial_state((1.0, 1.0))
    traj = integrate(model, rho0, (-1.0, 1.0), np.array([1.0]))
    np.testing.assert_allclose(traj[-1].matrix, rho0.matrix, atol=1e-12)


def test_pure_cavity_decay_leaves_qubits_alone():
    # all Gamma_k = 0 except the optical loss channel: the cavity decays at
    # gamma_op, the qubits stay frozen.  A tiny gamma stands in for the
    # (switched-off) waveguide coupling.
    gop = 1.0
    sch = _zero_schedule(0.0, 6.0)
    model = CascadedModel(sch, n_th=0.0, gamma=1e-12, gamma_op=gop, fock_cutoff=3)
    nc = 4
    rho_c = np.zeros((nc, nc), complex)
    rho_c[1, 1] = 1.0
    rho1 = np.outer([1 / math.sqrt(2), 1 / math.sqrt(2)], [1 / math.sqrt(2), 1 / math.sqrt(2)])
    rho = np.kron(np.kron(rho_c, rho1), np.diag([1.0, 0.0])).astype(complex)
    traj = integrate(model, DensityMatrix(rho, 0.0), (0.0, 3.0), np.array([3.0]))
    assert model.cavity_occupation(traj[-1].matrix) == pytest.approx(
        math.exp(-gop * 3.0), rel=1e-6
    )
    assert model.excited_population(traj[-1].matrix, 1) == pytest.approx(0.5, abs=1e-8)
    assert model.excited_population(traj[-1].matrix, 2) == pytest.approx(0.0, abs=1e-10)


def test_generator_is_trace_free():
    sch = analytic_schedule(1.0)
    model = CascadedModel(sch, n_th=0.5, gamma=10.0, fock_cutoff=4)
    rho = model.initial_state((0.2, 0.98)).matrix
    for t in (-3.0, 0.0, 2.0):
        drho = model.rhs(t, rho)
        assert abs(np.trace(drho)) < 1e-12


def test_hamiltonian_hermitian():
    sch = analytic_schedule(1.0)
    model = CascadedModel(sch, n_th=0.5, gamma=10.0, fock_cutoff=3)
    H = model.hamiltonian(0.5)
    assert np.max(np.abs(H - H.conj().T)) < 1e-14


def test_thermal_steady_state_of_cavity():
    # Gamma_1,2 = 0: the cavity balances the thermal channel against the
    # cold optical bath at occupation n_th * gamma / (gamma + gamma_op)
    n_th, gam, gop = 0.8, 1.0, 1.5
    sch = _zero_schedule(0.0, 40.0)
    model = CascadedModel(sch, n_th=n_th, gamma=gam, gamma_op=gop, fock_cutoff=12)
    nc = 13
    rho = np.kron(
        np.kron(np.diag(np.r_[1.0, np.zeros(nc - 1)]), np.diag([1.0, 0.0])),
        np.diag([1.0, 0.0]),
    ).astype(complex)
    traj = integrate(model, DensityMatrix(rho, 0.0), (0.0, 30.0), np.array([30.0]))
    assert model.cavity_occupation(traj[-1].matrix) == pytest.approx(
        n_th * gam / (gam + gop), rel=1e-4
    )


def test_populations_match_amplitude_oracle_at_zero_temperature():
    gm, gam = 1.0, 5.0
    sch = analytic_schedule(gm, cutoff_floor=1e-4 * gm)
    model = CascadedModel(sch, n_th=0.0, gamma=gam, fock_cutoff=2)
    ts = np.linspace(-14.0, 14.0, 29)
    traj = integrate(model, model.initial_state(), (-14.0, 14.0), ts)
    amps = pn.evolve_amplitudes(sch, np.linspace(-14, 14, 28001))
    v1 = np.interp(ts, amps.times, amps.v1)
    v2 = np.interp(ts, amps.times, amps.v2)
    p1 = np.array([model.excited_population(r.matrix, 1) for r in traj])
    p2 = np.array([model.excited_population(r.matrix, 2) for r in traj])
    assert np.max(np.abs(p1 - v1**2)) < 1e-3
    assert np.max(np.abs(p2 - v2**2)) < 1e-3


def test_trace_positivity_and_cutoff_convergence():
    sch = analytic_schedule(1.0, cutoff_floor=1e-4)
    model = CascadedModel(sch, n_th=0.5, gamma=10.0)  # default cutoff rule
    n_max = model.hilbert.fock_cutoff
    ts = np.linspace(-14, 14, 11)
    traj = integrate(model, model.initial_state(), (-14.0, 14.0), ts)
    for snap in traj:
        assert abs(np.trace(snap.matrix).real - 1) < 1e-8
        assert snap.min_eigenvalue() > -1e-8
    f1 = fidelity(model.reduce_to_qubit2(traj[-1].matrix), transferred_target())
    model2 = CascadedModel(sch, n_th=0.5, gamma=10.0, fock_cutoff=2 * n_max)
    traj2 = integrate(model2, model2.initial_state(), (-14.0, 14.0), np.array([14.0]))
    f2 = fidelity(model2.reduce_to_qubit2(traj2[-1].matrix), transferred_target())
    assert abs(f2 - f1) < 1e-3


def test_fidelity_basics():
    psi = np.array([1.0, 1.0]) / math.sqrt(2)
    rho = np.outer(psi, psi)
    assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-12)
    chi = np.array([1.0, -1.0]) / math.sqrt(2)
    assert fidelity(rho, np.outer(chi, chi)) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(pn.ValidationError, match="mismatch"):
        fidelity(rho, np.eye(4) / 4)


def test_reduced_model_vacuum_limit():
    sch = analytic_schedule(1.0)
    model, traj = reduced_two_qubit_model(0.0, sch)
    f = fidelity(model.reduce_to_qubit2(traj[-1].matrix), transferred_target())
    assert f >= 1 - 1e-3


def test_reduced_model_monotone_in_noise():
    sch = analytic_schedule(1.0, cutoff_floor=1e-4)
    psi = (1.0, 1.0)
    fs = []
    for n_eff in (0.0, 0.05, 0.2, 0.5, 1.0):
        model, traj = reduced_two_qubit_model(n_eff, sch, psi)
        fs.append(fidelity(model.reduce_to_qubit2(traj[-1].matrix), transferred_target(psi)))
    assert np.all(np.diff(fs) < 0)


def test_reduced_matches_three_system_with_flat_channel():
    # gamma_op = 0 turns the cascade cavity into a perfect mirror, so the
    # qubits see the raw white noise; the 2-qubit model with N_eff = n_th
    # must agree
    n_th = 0.4
    sch = analytic_schedule(1.0, cutoff_floor=1e-4)
    full = CascadedModel(sch, n_th=n_th, gamma=10.0, gamma_op=0.0, fock_cutoff=6)
    traj = integrate(full, full.initial_state(), sch.window, np.array([sch.window[1]]))
    f_full = fidelity(full.reduce_to_qubit2(traj[-1].matrix), transferred_target())
    red, rtraj = reduced_two_qubit_model(n_th, sch)
    f_red = fidelity(red.reduce_to_qubit2(rtraj[-1].matrix), transferred_target())
    assert f_full == pytest.approx(f_red, abs=0.02)


def test_integrate_rejects_bad_spans_and_dimensions():
    model = CascadedModel(_zero_schedule(), n_th=0.0, include_cavity=False)
    rho0 = model.initial_state()
    with pytest.raises(pn.ValidationError, match="increasing"):
        integrate(model, rho0, (1.0, -1.0))
    other = CascadedModel(_zero_schedule(), 0.0, gamma=1.0, fock_cutoff=2)
    with pytest.raises(pn.ValidationError, match="dimension"):
        integrate(other, rho0, (-1.0, 1.0))

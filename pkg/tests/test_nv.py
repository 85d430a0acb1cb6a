"""Tests for the Raman spin-phonon interface formulas."""

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

import phononet as pn
from phononet.nv import RamanParams, effective_spin_phonon, figure_of_merit_sweep


def _params(delta=0.0, om0=0.02, om1=0.02, lam=0.01, wm=1.0, ge=0.1):
    return RamanParams(lam, wm, om0, om1, delta, ge)


def test_single_leg_off_kills_coupling():
    r = effective_spin_phonon(_params(om1=0.0))
    assert r.lambda_eff == 0.0
    assert r.gamma_eff_1 == 0.0
    assert r.gamma_eff_0 > 0


def test_zero_detuning_magnitude_and_sign():
    p = _params()
    r = effective_spin_phonon(p)
    assert abs(r.lambda_eff) == pytest.approx(
        4 * p.coupling_lambda * p.omega_rabi0 * p.omega_rabi1 / p.omega_m**2, rel=1e-15
    )
    assert r.lambda_eff < 0  # the elimination carries a sign at Delta = 0


def test_zero_detuning_figure_of_merit():
    p = _params()
    r = effective_spin_phonon(p)
    assert r.figure_of_merit == pytest.approx(p.coupling_lambda / p.gamma_e, rel=1e-15)


def test_raman_resonance_raises():
    with pytest.raises(pn.ValidationError, match="singular"):
        effective_spin_phonon(_params(delta=0.5))


def test_exchange_symmetry_for_equal_rabi():
    # Delta -> -Delta swaps (Omega_0, Delta_0) with (Omega_1, Delta_1)
    a = effective_spin_phonon(_params(delta=0.13))
    b = effective_spin_phonon(_params(delta=-0.13))
    assert a.lambda_eff == pytest.approx(b.lambda_eff, rel=1e-14)
    assert a.gamma_eff_0 == pytest.approx(b.gamma_eff_1, rel=1e-14)
    assert a.gamma_eff_mean == pytest.approx(b.gamma_eff_mean, rel=1e-14)


def test_decay_scales_quadratically_in_rabi():
    base = effective_spin_phonon(_params(delta=0.1))
    doubled = effective_spin_phonon(_params(delta=0.1, om0=0.04))
    assert doubled.gamma_eff_0 == pytest.approx(4 * base.gamma_eff_0, rel=1e-14)
    assert base.gamma_eff_0 >= 0 and base.gamma_eff_1 >= 0


def test_sweep_peaks_at_zero_detuning():
    p = _params()
    grid = np.linspace(-2.0, 2.0, 801)
    grid = grid[np.abs(np.abs(grid) - 0.5) > 1e-6]
    fom = figure_of_merit_sweep(p, grid)
    peak = grid[np.argmax(fom)]
    assert abs(peak) == pytest.approx(abs(grid[np.argmin(np.abs(grid))]), abs=1e-12)
    assert fom.max() <= p.coupling_lambda / p.gamma_e + 1e-12


def test_large_detuning_asymptote():
    p = _params()
    fom = figure_of_merit_sweep(p, np.array([50.0, 100.0, 200.0]))
    assert fom[-1] == pytest.approx(p.coupling_lambda / p.gamma_e, rel=1e-3)
    assert np.all(fom < p.coupling_lambda / p.gamma_e)


def test_unequal_rabi_peak_found_by_independent_minimizer():
    p = _params(om0=0.02, om1=0.05)
    grid = np.linspace(0.6, 3.0, 4001)  # stay clear of the resonances
    fom = figure_of_merit_sweep(p, grid)
    grid_peak = grid[np.argmax(fom)]

    def neg(d):
        r = effective_spin_phonon(_params(delta=d, om0=0.02, om1=0.05))
        return -r.figure_of_merit

    res = minimize_scalar(neg, bounds=(0.6, 3.0), method="bounded",
                          options={"xatol": 1e-10})
    assert grid_peak == pytest.approx(res.x, abs=2 * (grid[1] - grid[0]))


def test_sweep_rejects_resonant_grid():
    with pytest.raises(pn.ValidationError, match="resonance"):
        figure_of_merit_sweep(_params(), np.array([0.0, 0.5, 1.0]))

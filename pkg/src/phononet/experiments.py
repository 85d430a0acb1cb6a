"""Experiment runners behind the CLI.

Each runner takes a resolved parameter dict (frequencies in ordinary Hz,
converted to angular units here) and returns a table:
(column names, rows, extra metadata).  Runners are pure and deterministic;
sweep-type experiments expose their points for the worker pool.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import cascade, circulator, network, nv, transfer, waveguide
from .errors import ConfigError

TWO_PI = 2 * math.pi

# --------------------------------------------------------------------------
# parameter schemas: name -> (default, description); None default = required
# --------------------------------------------------------------------------

SCHEMAS: dict[str, dict[str, tuple[object, str]]] = {
    "filter": {
        "gamma_hz": (1.0, "waveguide coupling rate of the cooled mode"),
        "omega_m_hz": (1200.0, "mechanical frequency"),
        "kappa_hz": (300.0, "optical field decay rate"),
        "gamma0_hz": (0.0, "intrinsic mechanical damping"),
        "g_alpha_hz": (None, "drive-enhanced coupling; null = impedance matched"),
        "n_th": (40.0, "channel thermal occupation"),
        "model": ("beam_splitter", "beam_splitter | full"),
        "n_points": (4001, "frequency grid points"),
        "span_gammas": (10.0, "half-span of the grid in units of gamma"),
        "fit_dip": (True, "fit the inverted-Lorentzian dip model"),
    },
    "multimode": {
        "n_modes": (10, "number of chain resonators"),
        "coupling_k_hz": (1.0, "nearest-neighbour coupling K"),
        "omega_m_hz": (100.0, "resonator frequency"),
        "gamma0_over_k": (0.05, "intrinsic damping / K"),
        "kappa_over_k": (0.5, "optical decay / K"),
        "g_alpha_over_k": (0.5, "drive-enhanced coupling / K"),
        "n_th": (10.0, "thermal occupation of the intrinsic baths"),
        "site": (None, "measured resonator (null = far end)"),
        "n_points": (4001, "frequency grid points"),
        "span_k": (3.0, "half-span of the grid in units of K"),
    },
    "transfer": {
        "gamma_max_hz": (1.0, "peak qubit decay rate"),
        "tau_p_gamma_max": (28.0, "pulse window in units of 1/Gamma_max"),
        "cutoff_floor_rel": (0.0, "clamp Gamma below this fraction of Gamma_max"),
        "n_points": (28001, "time grid points"),
    },
    "fidelity": {
        "gamma_max_over_gamma": ([0.01, 0.1], "pulse rate(s) / channel rate"),
        "n_th": ([0.5, 5.0, 20.0], "channel occupation(s)"),
        "gamma0_over_gamma": (1.6e-4, "intrinsic loss setting the dip floor"),
        "state": ("superposition", "superposition | excited"),
        "include_no_filter": (True, "add unfiltered reference rows"),
        "cutoff_floor_rel": (1e-4, "pulse floor clamp (fraction of Gamma_max)"),
        "rtol": (1e-8, "master-equation tolerance"),
    },
    "circulator": {
        "gamma_hz": (1.0, "port coupling rate"),
        "t_over_gamma": (0.5, "tunneling amplitude / gamma"),
        "phi": (math.pi / 2, "complex tunneling phase (rad)"),
        "gamma0_over_gamma": (0.0, "intrinsic loss / gamma"),
        "omega_m_hz": (1000.0, "resonator frequency"),
        "n_points": (1001, "frequency grid points"),
        "span_gammas": (5.0, "half-span of the grid in units of gamma"),
    },
    "waveguide": {
        "quantity": ("dispersion", "dispersion | rethermalization"),
        "n_sites": (200, "chain length"),
        "omega0_hz": (4.0e9, "bare resonator frequency"),
        "coupling_k_hz": (5.0e7, "nearest-neighbour coupling K"),
        "lattice_a_m": (1.0e-6, "lattice spacing"),
        "gamma0_hz": (4.0e3, "intrinsic damping per resonator"),
        "n_th": (20.0, "bath occupation"),
        "z_over_mfp": ([0.05, 0.2], "propagation distances / mean free path"),
        "dip_floor_rel": (0.05, "injected dip floor / n_th"),
        "dip_width_over_k": (0.005, "injected dip half-width / K"),
        "n_points": (801, "frequency grid points (rethermalization)"),
    },
    "design": {
        "gamma_hz": (2.5e7, "mechanical port rate the tunneling must match"),
        "t_target_over_gamma": (0.5, "target tunneling / gamma"),
        "phi_target": (math.pi / 2, "target phase (rad)"),
        "omega_m_hz": (4.0e9, "mechanical frequency"),
        "delta_hz": (None, "cavity detuning; null = -omega_m"),
        "tunnel_j_hz": (1.0e9, "optical tunneling J"),
        "kappa_hz": (5.0e7, "optical decay rate"),
        "g_hz": (1.0e5, "single-photon optomechanical coupling"),
    },
    "nv": {
        "lambda_hz": (1.0e7, "bare deformation coupling"),
        "omega_m_hz": (1.0e9, "mechanical frequency"),
        "omega_rabi0_hz": (2.0e7, "Rabi frequency of leg 0"),
        "omega_rabi1_hz": (2.0e7, "Rabi frequency of leg 1"),
        "gamma_e_hz": (1.0e8, "excited-state decay"),
        "delta_span_omega_m": (2.0, "detuning grid half-span / omega_m"),
        "n_points": (801, "detuning grid points"),
    },
}

EXPERIMENTS = tuple(SCHEMAS)


def resolve_parameters(experiment: str, params: dict) -> dict:
    """Apply defaults and reject unknown or missing keys."""
    if experiment not in SCHEMAS:
        raise ConfigError(
            f"unknown experiment {experiment!r}; expected one of {', '.join(EXPERIMENTS)}"
        )
    schema = SCHEMAS[experiment]
    out = {}
    for key, value in params.items():
        if key not in schema:
            raise ConfigError(f"unknown key 'parameters.{key}' for experiment {experiment!r}")
        out[key] = value
    for key, (default, _doc) in schema.items():
        out.setdefault(key, default)
    return out


def _ang(f_hz: float) -> float:
    return TWO_PI * f_hz


def _aslist(x) -> list:
    return list(x) if isinstance(x, (list, tuple)) else [x]


# --------------------------------------------------------------------------
# runners
# --------------------------------------------------------------------------


def run_filter(p: dict, pool: ThreadPoolExecutor | None = None):
    gamma = _ang(p["gamma_hz"])
    omega_m = _ang(p["omega_m_hz"])
    kappa = _ang(p["kappa_hz"])
    gamma0 = _ang(p["gamma0_hz"])
    g_alpha = None if p["g_alpha_hz"] is None else _ang(p["g_alpha_hz"])
    rwa = {"beam_splitter": True, "full": False}.get(p["model"])
    if rwa is None:
        raise ConfigError(f"parameters.model must be beam_splitter|full, got {p['model']!r}")
    net = network.om_filter_network(
        omega_m=omega_m, gamma=gamma, kappa=kappa, g_alpha=g_alpha,
        gamma0=gamma0, n_th=p["n_th"], rotating_wave=rwa,
    )
    grid = np.linspace(
        omega_m - p["span_gammas"] * gamma,
        omega_m + p["span_gammas"] * gamma,
        int(p["n_points"]),
    )
    spec = network.filtered_noise_spectrum(net, grid)
    extras = {
        "gamma_op_hz": 2 * abs(net.couplings[0].amplitude) ** 2 / kappa / TWO_PI,
        "g_alpha_resolved_hz": abs(net.couplings[0].amplitude) / TWO_PI,
    }
    if p["fit_dip"]:
        fit = network.fit_lorentzian_dip(spec)
        spec = spec.with_fit(fit)
        extras["fit"] = {
            "center_shift_over_gamma": (fit.center - omega_m) / gamma,
            "width_over_gamma": fit.width / gamma,
            "floor": fit.floor,
            "n_th": fit.n_th,
            "rms": fit.rms,
        }
    rows = [((w - omega_m) / gamma, v) for w, v in zip(spec.grid, spec.values)]
    return ["omega_over_gamma", "N_F"], rows, extras


def run_multimode(p: dict, pool: ThreadPoolExecutor | None = None):
    K = _ang(p["coupling_k_hz"])
    omega_m = _ang(p["omega_m_hz"])
    n_modes = int(p["n_modes"])
    net = network.multimode_cooling_network(
        n_modes=n_modes, omega_m=omega_m, coupling=K,
        kappa=p["kappa_over_k"] * K, g_alpha=p["g_alpha_over_k"] * K,
        gamma0=p["gamma0_over_k"] * K, n_th=p["n_th"],
    )
    site = n_modes if p["site"] is None else int(p["site"])
    if not 1 <= site <= n_modes:
        raise ConfigError(f"parameters.site must lie in [1, {n_modes}]")
    grid = np.linspace(omega_m - p["span_k"] * K, omega_m + p["span_k"] * K, int(p["n_points"]))
    spec = network.internal_spectrum(net, grid, f"b{site}")
    rows = [((w - omega_m) / K, v) for w, v in zip(spec.grid, spec.values)]
    return ["omega_minus_omega_m_over_k", "S"], rows, {"site": site}


def run_transfer(p: dict, pool: ThreadPoolExecutor | None = None):
    gmax = _ang(p["gamma_max_hz"])
    tau = p["tau_p_gamma_max"] / gmax
    sch = transfer.analytic_schedule(gmax, tau, p["cutoff_floor_rel"] * gmax)
    ts = np.linspace(-tau / 2, tau / 2, int(p["n_points"]))
    amps = transfer.evolve_amplitudes(sch, ts)
    g1 = sch.gamma1(ts)
    g2 = sch.gamma2(ts)
    resid = np.abs(np.sqrt(g1) * amps.v1 + np.sqrt(g2) * amps.v2) / math.sqrt(gmax)
    rows = [
        (t * gmax, a / gmax, b / gmax, x, y, e, tr, r)
        for t, a, b, x, y, e, tr, r in zip(
            ts, g1, g2, amps.v1, amps.v2, amps.g1, amps.transfer, resid
        )
    ]
    extras = {
        "final_transfer": abs(amps.final_transfer),
        "max_norm_defect": float(np.max(np.abs(amps.v1**2 + amps.v2**2 - 1))),
    }
    cols = [
        "t_gamma_max", "gamma1_over_max", "gamma2_over_max",
        "v1", "v2", "g1_envelope", "transfer_quadrature", "dark_residual_scaled",
    ]
    return cols, rows, extras


def _fidelity_point(args):
    gm_rel, n_th, gamma0_rel, filtered, state, floor_rel, rtol = args
    if filtered:
        n0 = gamma0_rel * n_th
        n_eff = transfer.effective_occupation_closed(n_th, n0, 1.0, gm_rel)
    else:
        n_eff = n_th
    sch = transfer.analytic_schedule(1.0, cutoff_floor=floor_rel)  # units of Gamma_max
    psi = (1.0, 1.0) if state == "superposition" else (0.0, 1.0)
    model, traj = cascade.reduced_two_qubit_model(n_eff, sch, psi, rtol=rtol)
    rho2 = model.reduce_to_qubit2(traj[-1].matrix)
    f = cascade.fidelity(rho2, cascade.transferred_target(psi))
    return gm_rel, n_th, n_eff, f, int(filtered)


def run_fidelity(p: dict, pool: ThreadPoolExecutor | None = None):
    if p["state"] not in ("superposition", "excited"):
        raise ConfigError("parameters.state must be superposition|excited")
    points = []
    for gm_rel in _aslist(p["gamma_max_over_gamma"]):
        for n_th in _aslist(p["n_th"]):
            points.append(
                (gm_rel, n_th, p["gamma0_over_gamma"], True,
                 p["state"], p["cutoff_floor_rel"], p["rtol"])
            )
    if p["include_no_filter"]:
        for gm_rel in _aslist(p["gamma_max_over_gamma"]):
            for n_th in _aslist(p["n_th"]):
                points.append(
                    (gm_rel, n_th, p["gamma0_over_gamma"], False,
                     p["state"], p["cutoff_floor_rel"], p["rtol"])
                )
    runner = pool.map if pool is not None else map
    rows = list(runner(_fidelity_point, points))
    cols = ["gamma_max_over_gamma", "n_th", "n_eff", "fidelity", "filtered"]
    return cols, rows, {"sweep_points": len(rows)}


def run_circulator(p: dict, pool: ThreadPoolExecutor | None = None):
    gamma = _ang(p["gamma_hz"])
    omega_m = _ang(p["omega_m_hz"])
    spec = circulator.CirculatorSpec(
        tunneling=p["t_over_gamma"] * gamma,
        phase=p["phi"],
        gamma=gamma,
        gamma0=p["gamma0_over_gamma"] * gamma,
        omega_m=omega_m,
    )
    grid = np.linspace(
        omega_m - p["span_gammas"] * gamma,
        omega_m + p["span_gammas"] * gamma,
        int(p["n_points"]),
    )
    probs = circulator.scattering_probabilities(spec, grid)
    rows = [
        ((w - omega_m) / gamma, *pr) for w, pr in zip(grid, probs)
    ]
    return ["delta_omega_over_gamma", "P_11", "P_12", "P_13"], rows, {}


def run_waveguide(p: dict, pool: ThreadPoolExecutor | None = None):
    chain = waveguide.ChainSpec(
        n_sites=int(p["n_sites"]),
        omega0=_ang(p["omega0_hz"]),
        coupling_K=_ang(p["coupling_k_hz"]),
        lattice_a=p["lattice_a_m"],
        intrinsic_gamma0=_ang(p["gamma0_hz"]),
        bath_occupation=p["n_th"],
    )
    channel = waveguide.continuum_parameters(chain)
    extras = {
        # c = K a with angular K carries m/s directly (omega = c q, q in rad/m)
        "sound_speed_m_per_s": channel.sound_speed,
        "omega_offset_hz": channel.omega_offset / TWO_PI,
        "bandwidth_hz": channel.bandwidth / TWO_PI,
        "mean_free_path_m": channel.mean_free_path,
    }
    if p["quantity"] == "dispersion":
        N = chain.n_sites
        rows = []
        for n in range(-(N // 2 - 1), N // 2 + 1):
            qa = 2 * math.pi * n / N
            w_exact = waveguide.dispersion_exact(chain, n)
            w_tb = waveguide.dispersion_tight_binding(chain, qa)
            w_lin = channel.omega_offset + channel.sound_speed * abs(qa) / chain.lattice_a
            rows.append((n, qa, w_exact / TWO_PI, w_tb / TWO_PI, w_lin / TWO_PI))
        cols = ["mode_index", "qa", "omega_exact_hz", "omega_tight_binding_hz", "omega_linear_hz"]
        return cols, rows, extras
    if p["quantity"] != "rethermalization":
        raise ConfigError("parameters.quantity must be dispersion|rethermalization")

    K = chain.coupling_K
    n_th = p["n_th"]
    width = p["dip_width_over_k"] * K
    wc = chain.band_center
    grid = wc + np.linspace(-20 * width, 20 * width, int(p["n_points"]))
    dip = n_th - (n_th - p["dip_floor_rel"] * n_th) * width**2 / ((grid - wc) ** 2 + width**2)
    drive = network.NoiseSpectrum(grid, dip)
    site = chain.n_sites - 1
    rows = []
    for z_rel in _aslist(p["z_over_mfp"]):
        gamma0 = z_rel * K / site  # site * a / mean_free_path = z_rel
        cz = waveguide.ChainSpec(
            chain.n_sites, chain.omega0, K, chain.lattice_a, gamma0, n_th
        )
        oracle = waveguide.simulate_lossy_chain(cz, drive, site)
        closed = waveguide.propagate_spectrum(
            drive, site * chain.lattice_a, waveguide.continuum_parameters(cz)
        )
        for w, a, b in zip(grid, oracle.values, closed.values):
            rows.append((z_rel, (w - wc) / K, a, b))
    cols = ["z_over_mfp", "delta_omega_over_k", "n_f_oracle", "n_f_closed"]
    return cols, rows, extras


def run_design(p: dict, pool: ThreadPoolExecutor | None = None):
    gamma = _ang(p["gamma_hz"])
    omega_m = _ang(p["omega_m_hz"])
    delta = -omega_m if p["delta_hz"] is None else _ang(p["delta_hz"])
    design = circulator.solve_drives_for_target(
        p["t_target_over_gamma"] * gamma,
        p["phi_target"],
        delta=delta,
        tunnel_J=_ang(p["tunnel_j_hz"]),
        kappa=_ang(p["kappa_hz"]),
        om_coupling_g=_ang(p["g_hz"]),
        omega_m=omega_m,
    )
    eff = circulator.effective_coupling(design, omega_m)
    alpha = math.sqrt(abs(eff.alpha1) * abs(eff.alpha2))
    row = (
        design.drive1 / TWO_PI, design.drive2 / TWO_PI,
        design.phase1, design.phase2,
        abs(eff.alpha1), abs(eff.alpha2),
        _ang(p["g_hz"]) * alpha / TWO_PI,
        eff.t_eff / TWO_PI,
        eff.t_eff / (p["t_target_over_gamma"] * gamma),
        eff.phase,
        eff.gamma_op / TWO_PI,
        eff.gamma_op / gamma,
    )
    cols = [
        "drive1_hz", "drive2_hz", "phase1", "phase2",
        "alpha1_abs", "alpha2_abs", "g_alpha_hz",
        "t_eff_hz", "t_eff_over_target", "phase_eff", "gamma_op_hz", "gamma_op_over_gamma",
    ]
    return cols, [row], {}


def run_nv(p: dict, pool: ThreadPoolExecutor | None = None):
    omega_m = _ang(p["omega_m_hz"])
    params = nv.RamanParams(
        coupling_lambda=_ang(p["lambda_hz"]),
        omega_m=omega_m,
        omega_rabi0=_ang(p["omega_rabi0_hz"]),
        omega_rabi1=_ang(p["omega_rabi1_hz"]),
        delta=0.0,
        gamma_e=_ang(p["gamma_e_hz"]),
    )
    span = p["delta_span_omega_m"] * omega_m
    grid = np.linspace(-span, span, int(p["n_points"]))
    # keep the Raman resonances +-omega_m/2 off the grid
    grid = grid[np.abs(np.abs(grid) - omega_m / 2) > 1e-9 * omega_m]
    rows = []
    import warnings as _warnings

    for d in grid:
        with _warnings.catch_warnings():
            _warnings.simplefilter("ignore")
            r = nv.effective_spin_phonon(
                nv.RamanParams(
                    params.coupling_lambda, omega_m,
                    params.omega_rabi0, params.omega_rabi1, d, params.gamma_e,
                )
            )
        rows.append(
            (d / omega_m, r.lambda_eff / TWO_PI, r.gamma_eff_0 / TWO_PI,
             r.gamma_eff_1 / TWO_PI, r.figure_of_merit)
        )
    cols = ["delta_over_omega_m", "lambda_eff_hz", "gamma_eff_0_hz", "gamma_eff_1_hz",
            "figure_of_merit"]
    return cols, rows, {}


RUNNERS = {
    "filter": run_filter,
    "multimode": run_multimode,
    "transfer": run_transfer,
    "fidelity": run_fidelity,
    "circulator": run_circulator,
    "waveguide": run_waveguide,
    "design": run_design,
    "nv": run_nv,
}

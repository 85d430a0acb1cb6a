"""Raman spin-phonon interface for a driven three-level defect.

Two laser fields (Rabi frequencies Omega_0, Omega_1, detunings
Delta_j = Delta ± omega_m/2) bridge the qubit states through an excited
level that couples to the resonator via a deformation potential lambda.
Eliminating the excited state gives

    lambda_eff = lambda * Omega_0 * Omega_1 / (Delta^2 - omega_m^2/4),
    Gamma_eff_j = Gamma_e * Omega_j^2 / Delta_j^2.

At Delta = 0 the magnitude is 4 lambda Omega_0 Omega_1 / omega_m^2 (the
sign is negative; some summaries quote the magnitude with a plus sign) and
the figure of merit |lambda_eff| / mean(Gamma_eff) peaks at lambda/Gamma_e.
Note: a widely circulated alternative expression for the mean decay,
4 lambda Omega_0 Omega_1 / omega_m^2, is dimensionally inconsistent with
the adiabatic elimination and is not used here.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = ["RamanParams", "RamanRates", "effective_spin_phonon", "figure_of_merit_sweep"]


@dataclass(frozen=True)
class RamanParams:
    coupling_lambda: float
    omega_m: float
    omega_rabi0: float
    omega_rabi1: float
    delta: float
    gamma_e: float

    def __post_init__(self) -> None:
        if self.gamma_e <= 0:
            raise ValidationError("excited-state decay Gamma_e must be > 0")
        if self.omega_m <= 0:
            raise ValidationError("omega_m must be > 0")

    @property
    def delta0(self) -> float:
        return self.delta + self.omega_m / 2

    @property
    def delta1(self) -> float:
        return self.delta - self.omega_m / 2


@dataclass(frozen=True)
class RamanRates:
    lambda_eff: float          # signed coupling
    gamma_eff_0: float
    gamma_eff_1: float

    @property
    def gamma_eff_mean(self) -> float:
        return 0.5 * (self.gamma_eff_0 + self.gamma_eff_1)

    @property
    def figure_of_merit(self) -> float:
        """|lambda_eff| / mean decay; inf when both drives are off."""
        m = self.gamma_eff_mean
        return abs(self.lambda_eff) / m if m > 0 else math.inf


def effective_spin_phonon(params: RamanParams) -> RamanRates:
    """Adiabatically eliminated coupling and per-level decay rates."""
    den = params.delta**2 - params.omega_m**2 / 4
    if den == 0.0:
        raise ValidationError("Raman resonance Delta = ±omega_m/2: elimination singular")
    d0, d1 = params.delta0, params.delta1
    for d, om in ((d0, params.omega_rabi0), (d1, params.omega_rabi1)):
        if om != 0 and abs(d) < 5 * abs(om):
            warnings.warn(
                "dispersive condition |Delta_j| >> Omega_j marginal (ratio < 5)",
                stacklevel=2,
            )
    lam_eff = params.coupling_lambda * params.omega_rabi0 * params.omega_rabi1 / den
    g0 = params.gamma_e * params.omega_rabi0**2 / d0**2
    g1 = params.gamma_e * params.omega_rabi1**2 / d1**2
    return RamanRates(lam_eff, g0, g1)


def figure_of_merit_sweep(params: RamanParams, delta_grid: np.ndarray) -> np.ndarray:
    """|lambda_eff|/mean(Gamma_eff) over a grid of overall detunings."""
    delta_grid = np.asarray(delta_grid, dtype=float)
    if np.any(np.isclose(np.abs(delta_grid), params.omega_m / 2, rtol=0, atol=1e-12)):
        raise ValidationError("grid touches the Raman resonance ±omega_m/2")
    out = np.empty_like(delta_grid)
    for i, d in enumerate(delta_grid):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            out[i] = effective_spin_phonon(
                RamanParams(
                    params.coupling_lambda, params.omega_m,
                    params.omega_rabi0, params.omega_rabi1, d, params.gamma_e,
                )
            ).figure_of_merit
    return out

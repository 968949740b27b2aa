"""Physical parameters, free energies, chemical potentials, and the
quadratization auxiliaries for the binary fluid-surfactant model.

The free energy couples a fluid order parameter phi (bulk states +-1) and a
surfactant concentration rho (bulk states 0 and rho_s):

    E = int [ 1/2 |grad phi|^2 + alpha/2 (Lap phi)^2 + (phi^2-1)^2 / (4 eps^2)
              + beta/2 |grad rho|^2 + rho^2 (rho-rho_s)^2 / (4 eta^2)
              - theta rho |grad phi|^2 ] dx

The auxiliaries U = phi^2 - 1 and V = rho (rho - rho_s) make both quartic
wells quadratic, which is what lets the time steppers stay linear.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .spectral import (
    Field,
    biharmonic,
    check_same_grid,
    divergence,
    grad_sq,
    gradient,
    laplacian,
)


@dataclass(frozen=True)
class ModelParams:
    """Physical constants; defaults are the standard production values."""

    m_phi: float = 2.5e-4
    m_rho: float = 2.5e-4
    alpha: float = 2.5e-4
    beta: float = 1.0
    eps: float = 0.05
    eta: float = 0.08
    theta: float = 0.3
    rho_s: float = 1.0

    def __post_init__(self):
        if self.m_phi <= 0 or self.m_rho <= 0:
            raise ValueError("mobilities must be positive")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.beta <= 0 or self.eps <= 0 or self.eta <= 0 or self.rho_s <= 0:
            raise ValueError("beta, eps, eta, rho_s must be positive")
        if self.theta < 0:
            raise ValueError("theta must be nonnegative")

    def with_overrides(self, **kwargs) -> "ModelParams":
        return replace(self, **kwargs)


@dataclass
class SimState:
    """One time level of the simulation: (phi, rho, U, V, t, n).

    The optional *_prev fields hold the previous time level for the
    two-step (BDF2) integrator.
    """

    phi: Field
    rho: Field
    u_aux: Field
    v_aux: Field
    time: float = 0.0
    step: int = 0
    phi_prev: Optional[Field] = None
    rho_prev: Optional[Field] = None
    u_prev: Optional[Field] = None
    v_prev: Optional[Field] = None

    def __post_init__(self):
        check_same_grid(self.phi, self.rho, self.u_aux, self.v_aux)

    @property
    def grid(self):
        return self.phi.grid

    @property
    def has_history(self) -> bool:
        return self.phi_prev is not None


def h_of(phi: Field) -> Field:
    """Quadratization coefficient for the phi well: H(phi) = phi."""
    return phi.copy()


def g_of(rho: Field, p: ModelParams) -> Field:
    """Quadratization coefficient for the rho well: G(rho) = rho - rho_s/2."""
    return Field(rho.grid, rho.values - 0.5 * p.rho_s)


def init_aux(phi0: Field, rho0: Field, p: ModelParams) -> tuple[Field, Field]:
    """Initial auxiliaries U0 = phi0^2 - 1, V0 = rho0 (rho0 - rho_s)."""
    check_same_grid(phi0, rho0)
    u0 = Field(phi0.grid, phi0.values ** 2 - 1.0)
    v0 = Field(rho0.grid, rho0.values * (rho0.values - p.rho_s))
    return u0, v0


def initial_state(phi0: Field, rho0: Field, p: ModelParams) -> SimState:
    u0, v0 = init_aux(phi0, rho0, p)
    return SimState(phi0, rho0, u0, v0)


def energy_original(phi: Field, rho: Field, p: ModelParams) -> float:
    """Free energy of (phi, rho) with the quartic wells in closed form."""
    grid = check_same_grid(phi, rho)
    gphi2 = grad_sq(phi).values
    lap_phi = laplacian(phi).values
    grho2 = grad_sq(rho).values
    r = rho.values
    density = (
        0.5 * gphi2
        + 0.5 * p.alpha * lap_phi ** 2
        + (phi.values ** 2 - 1.0) ** 2 / (4.0 * p.eps ** 2)
        + 0.5 * p.beta * grho2
        + (r * (r - p.rho_s)) ** 2 / (4.0 * p.eta ** 2)
        - p.theta * r * gphi2
    )
    return grid.cell_area * float(np.sum(density))


def energy_quadratized(state: SimState, p: ModelParams) -> float:
    """Quadratized energy with the wells expressed through U and V.

    Coincides with energy_original whenever U = phi^2 - 1 and
    V = rho (rho - rho_s) hold exactly; under time stepping the two drift
    apart at first order in the step size.
    """
    grid = state.grid
    gphi2 = grad_sq(state.phi).values
    lap_phi = laplacian(state.phi).values
    grho2 = grad_sq(state.rho).values
    density = (
        0.5 * gphi2
        + 0.5 * p.alpha * lap_phi ** 2
        + state.u_aux.values ** 2 / (4.0 * p.eps ** 2)
        + 0.5 * p.beta * grho2
        + state.v_aux.values ** 2 / (4.0 * p.eta ** 2)
        - p.theta * state.rho.values * gphi2
    )
    return grid.cell_area * float(np.sum(density))


def mu_phi_continuous(phi: Field, rho: Field, p: ModelParams) -> Field:
    """Chemical potential dE/dphi:
    -Lap phi + alpha Lap^2 phi + phi (phi^2 - 1)/eps^2 + 2 theta div(rho grad phi).
    """
    check_same_grid(phi, rho)
    px, py = gradient(phi)
    coupling = divergence(rho * px, rho * py)
    lap = laplacian(phi)
    bih = biharmonic(phi)
    return Field(
        phi.grid,
        -lap.values
        + p.alpha * bih.values
        + phi.values * (phi.values ** 2 - 1.0) / p.eps ** 2
        + 2.0 * p.theta * coupling.values,
    )


def mu_rho_continuous(phi: Field, rho: Field, p: ModelParams) -> Field:
    """Chemical potential dE/drho:
    -beta Lap rho + rho (rho - rho_s)(rho - rho_s/2)/eta^2 - theta |grad phi|^2.
    """
    check_same_grid(phi, rho)
    r = rho.values
    well = r * (r - p.rho_s) * (r - 0.5 * p.rho_s) / p.eta ** 2
    return Field(
        rho.grid,
        -p.beta * laplacian(rho).values + well - p.theta * grad_sq(phi).values,
    )

"""Time integrators for the coupled fluid-surfactant Cahn-Hilliard system.

Three steppers are provided:

* ``step_ls1`` -- first order, linear, decoupled; provably dissipates the
  quadratized energy for any step size.
* ``step_ls2`` -- BDF2 variant with extrapolated quadratization coefficients;
  second order, observed (not proven) stable.
* ``step_reference_implicit`` -- Crank-Nicolson on the original nonlinear
  system, solved by damped fixed-point iteration; a small-step oracle.

Each linear step eliminates the auxiliary variable, leaving one Helmholtz-like
variable-coefficient system per phase variable that is solved matrix-free by
preconditioned conjugate gradients (the eliminated operators are SPD on
mean-zero perturbations).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.sparse.linalg import LinearOperator, bicgstab

from .model import ModelParams, SimState, init_aux
from .spectral import Field, SpectralError

_rfft2 = np.fft.rfft2
_irfft2 = np.fft.irfft2


class SolverError(Exception):
    """Krylov solver failed to converge or broke down."""

    def __init__(self, message, residual=None, iters=None):
        super().__init__(message)
        self.residual = residual
        self.iters = iters


class StepFailure(Exception):
    """A time step could not be completed."""


@dataclass(frozen=True)
class SolverOptions:
    rel_tol: float = 1e-10
    max_iter: int = 500
    precond: str = "constant-coefficient"  # or "none"
    fallback: bool = True

    def __post_init__(self):
        if not (0.0 < self.rel_tol <= 1e-2):
            raise ValueError("rel_tol must lie in (0, 1e-2]")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.precond not in ("constant-coefficient", "none"):
            raise ValueError(f"unknown preconditioner {self.precond!r}")


@dataclass(frozen=True)
class StepReport:
    iters_rho: int
    iters_phi: int
    residual_rho: float
    residual_phi: float
    dt: float


def _pcg(apply_op, b, precond, rel_tol, max_iter):
    """Preconditioned CG on flat arrays; returns (x, iters, relres).

    Raises SolverError on breakdown (suspected indefiniteness) or when the
    iteration cap is reached; the caller decides whether to fall back.
    """
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros_like(b), 0, 0.0
    x = np.zeros_like(b)
    r = b.copy()
    z = precond(r) if precond is not None else r
    p = z.copy()
    rz = float(np.vdot(r, z).real)
    for it in range(1, max_iter + 1):
        ap = apply_op(p)
        pap = float(np.vdot(p, ap).real)
        if not np.isfinite(pap) or pap <= 0.0:
            raise SolverError(
                "CG breakdown: operator appears indefinite",
                residual=float(np.linalg.norm(r)) / b_norm,
                iters=it,
            )
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        res = float(np.linalg.norm(r)) / b_norm
        if res <= rel_tol:
            return x, it, res
        z = precond(r) if precond is not None else r
        rz_new = float(np.vdot(r, z).real)
        beta = rz_new / rz
        p = z + beta * p
        rz = rz_new
    raise SolverError(
        f"CG did not converge in {max_iter} iterations",
        residual=float(np.linalg.norm(r)) / b_norm,
        iters=max_iter,
    )


def _bicgstab_fallback(apply_op, b, precond, rel_tol, max_iter):
    """Nonsymmetric-safe fallback used when CG breaks down."""
    n = b.size
    shape = b.shape
    a_lin = LinearOperator(
        (n, n), matvec=lambda v: apply_op(v.reshape(shape)).ravel(), dtype=float
    )
    m_lin = None
    if precond is not None:
        m_lin = LinearOperator(
            (n, n), matvec=lambda v: precond(v.reshape(shape)).ravel(), dtype=float
        )
    counter = {"n": 0}

    def cb(_):
        counter["n"] += 1

    x, info = bicgstab(
        a_lin, b.ravel(), rtol=rel_tol, atol=0.0, maxiter=max_iter, M=m_lin, callback=cb
    )
    res = float(np.linalg.norm(apply_op(x.reshape(shape)) - b)) / float(np.linalg.norm(b))
    if info != 0 or not np.isfinite(res):
        raise SolverError(
            f"fallback BiCGStab failed (info={info})", residual=res, iters=counter["n"]
        )
    return x.reshape(shape), counter["n"], res


def _solve(apply_op, b, precond, opts, force_fallback=False):
    if force_fallback:
        return _bicgstab_fallback(apply_op, b, precond, opts.rel_tol, opts.max_iter)
    try:
        return _pcg(apply_op, b, precond, opts.rel_tol, opts.max_iter)
    except SolverError:
        if not opts.fallback:
            raise
        return _bicgstab_fallback(apply_op, b, precond, opts.rel_tol, opts.max_iter)


def krylov_solve(apply_op, rhs: Field, precond=None, opts: SolverOptions = SolverOptions()):
    """Solve apply_op(x) = rhs matrix-free; returns (x, iterations).

    ``apply_op`` and ``precond`` map Field -> Field; ``precond`` must
    approximate the inverse of ``apply_op``.
    """
    grid = rhs.grid
    if not np.isfinite(rhs.values).all():
        raise SpectralError("non-finite right-hand side")

    def apply_arr(v):
        return apply_op(Field(grid, v)).values

    precond_arr = None
    if precond is not None:
        def precond_arr(v):
            return precond(Field(grid, v)).values

    x, iters, _ = _solve(apply_arr, rhs.values, precond_arr, opts)
    return Field(grid, x), iters


def _symbol_inverse(symbol):
    inv = 1.0 / symbol
    return lambda v, inv=inv: _irfft2(inv * _rfft2(v), s=v.shape)


def _lap(grid, v):
    return _irfft2(-grid.k2 * _rfft2(v), s=grid.shape)


def _grad(grid, vhat):
    gx = _irfft2(1j * grid.dkx * vhat, s=grid.shape)
    gy = _irfft2(1j * grid.dky * vhat, s=grid.shape)
    return gx, gy


def _div_hat(grid, fx, fy):
    return 1j * grid.dkx * _rfft2(fx) + 1j * grid.dky * _rfft2(fy)


def _grad_sq(grid, v):
    gx, gy = _grad(grid, _rfft2(v))
    return gx * gx + gy * gy


def _rho_operator(grid, p, coeff, a_mass):
    """a_mass*rho - M_rho*Lap(-beta*Lap rho + coeff*rho), applied spectrally."""
    k2 = grid.k2

    def apply_arr(v):
        vhat = _rfft2(v)
        lap = _irfft2(-k2 * vhat, s=grid.shape)
        pr = -p.beta * lap + coeff * v
        return a_mass * v + p.m_rho * _irfft2(k2 * _rfft2(pr), s=grid.shape)

    symbol = a_mass + p.m_rho * (p.beta * k2 * k2 + float(np.mean(coeff)) * k2)
    return apply_arr, _symbol_inverse(symbol)


def _phi_operator(grid, p, coeff, rho_imp, theta_w, a_mass):
    """a_mass*phi - M_phi*Lap(-Lap phi + alpha*Lap^2 phi + coeff*phi
    + theta_w*div(rho_imp grad phi)), applied spectrally."""
    k2 = grid.k2
    lin = k2 * k2 + p.alpha * k2 * k2 * k2  # -Lap acting on (-Lap + alpha Lap^2)

    def apply_arr(v):
        vhat = _rfft2(v)
        gx, gy = _grad(grid, vhat)
        var_hat = _rfft2(coeff * v) + theta_w * _div_hat(grid, rho_imp * gx, rho_imp * gy)
        return a_mass * v + p.m_phi * _irfft2(lin * vhat + k2 * var_hat, s=grid.shape)

    rho_bar = float(np.mean(rho_imp))
    symbol = a_mass + p.m_phi * (
        (1.0 - theta_w * rho_bar) * k2 * k2
        + p.alpha * k2 * k2 * k2
        + float(np.mean(coeff)) * k2
    )
    return apply_arr, _symbol_inverse(symbol)


def _pin_mean(sol, rhs, a_mass):
    """The zero mode of the eliminated operators decouples exactly (the outer
    Laplacian annihilates means), so mean(sol) = mean(rhs)/a_mass.  Enforcing
    it keeps the discrete masses conserved independently of the Krylov
    tolerance."""
    sol += float(np.mean(rhs)) / a_mass - float(np.mean(sol))
    return sol


def _check_finite(values, label):
    if not np.isfinite(values).all():
        raise StepFailure(f"divergence detected: non-finite {label}")


def _phi_guard(theta, rho_new):
    """The gradient-block coefficient 1 - 2*theta*rho turns indefinite for
    large surfactant concentration; force the nonsymmetric solver there."""
    if 1.0 - 2.0 * theta * float(rho_new.max()) <= 0.0:
        warnings.warn(
            "phi-step operator may be indefinite (1 - 2*theta*max(rho) <= 0); "
            "using fallback Krylov method",
            RuntimeWarning,
        )
        return True
    return False


def _ls1_rho_update(grid, p, dt, opts, rho_n, v_n, phi_n):
    """Surfactant half of the first-order step; reads only time-n data."""
    g_n = rho_n - 0.5 * p.rho_s
    d_n = v_n - 2.0 * g_n * rho_n
    coeff = (2.0 / p.eta ** 2) * g_n * g_n
    g1 = (1.0 / p.eta ** 2) * g_n * d_n - p.theta * _grad_sq(grid, phi_n)
    rhs = rho_n / dt + p.m_rho * _lap(grid, g1)
    apply_arr, precond = _rho_operator(grid, p, coeff, 1.0 / dt)
    if opts.precond == "none":
        precond = None
    rho_new, iters, res = _solve(apply_arr, rhs, precond, opts)
    rho_new = _pin_mean(rho_new, rhs, 1.0 / dt)
    v_new = 2.0 * g_n * rho_new + d_n
    return rho_new, v_new, iters, res


def _ls1_phi_update(grid, p, dt, opts, phi_n, u_n, rho_new):
    """Fluid half of the first-order step; the coupling term takes the new
    surfactant field but the Crank-Nicolson average halves its implicit
    weight (theta implicit, theta explicit)."""
    h_n = phi_n
    s_n = u_n - 2.0 * h_n * phi_n
    coeff = (2.0 / p.eps ** 2) * h_n * h_n
    gx, gy = _grad(grid, _rfft2(phi_n))
    div_old = _irfft2(_div_hat(grid, rho_new * gx, rho_new * gy), s=grid.shape)
    g2 = (1.0 / p.eps ** 2) * h_n * s_n + p.theta * div_old
    rhs = phi_n / dt + p.m_phi * _lap(grid, g2)
    apply_arr, precond = _phi_operator(grid, p, coeff, rho_new, p.theta, 1.0 / dt)
    if opts.precond == "none":
        precond = None
    force = _phi_guard(p.theta, rho_new)
    phi_new, iters, res = _solve(apply_arr, rhs, precond, opts, force_fallback=force)
    phi_new = _pin_mean(phi_new, rhs, 1.0 / dt)
    u_new = 2.0 * h_n * phi_new + s_n
    return phi_new, u_new, iters, res


def step_ls1(state: SimState, p: ModelParams, dt: float, opts: SolverOptions = SolverOptions()):
    """Advance one step with the first-order linear decoupled scheme."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    grid = state.grid
    rho_new, v_new, it_r, res_r = _ls1_rho_update(
        grid, p, dt, opts, state.rho.values, state.v_aux.values, state.phi.values
    )
    _check_finite(rho_new, "rho")
    phi_new, u_new, it_p, res_p = _ls1_phi_update(
        grid, p, dt, opts, state.phi.values, state.u_aux.values, rho_new
    )
    _check_finite(phi_new, "phi")
    new_state = SimState(
        phi=Field(grid, phi_new),
        rho=Field(grid, rho_new),
        u_aux=Field(grid, u_new),
        v_aux=Field(grid, v_new),
        time=state.time + dt,
        step=state.step + 1,
        phi_prev=state.phi,
        rho_prev=state.rho,
        u_prev=state.u_aux,
        v_prev=state.v_aux,
    )
    return new_state, StepReport(it_r, it_p, res_r, res_p, dt)


def step_ls2(state: SimState, p: ModelParams, dt: float, opts: SolverOptions = SolverOptions()):
    """Advance one step with the BDF2 scheme (needs the previous level)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if not state.has_history:
        raise StepFailure("BDF2 step requires a previous time level; bootstrap with step_ls1")
    grid = state.grid
    phi_n, rho_n = state.phi.values, state.rho.values
    u_n, v_n = state.u_aux.values, state.v_aux.values
    phi_m, rho_m = state.phi_prev.values, state.rho_prev.values
    u_m, v_m = state.u_prev.values, state.v_prev.values

    phi_star = 2.0 * phi_n - phi_m
    h_star = phi_star
    g_star = (2.0 * rho_n - rho_m) - 0.5 * p.rho_s
    a_mass = 1.5 / dt

    # Step 1: surfactant.  Eliminating V^{n+1} = 2 G* rho^{n+1} + D*.
    d_star = (4.0 * v_n - v_m - 2.0 * g_star * (4.0 * rho_n - rho_m)) / 3.0
    coeff_r = (2.0 / p.eta ** 2) * g_star * g_star
    g1 = (1.0 / p.eta ** 2) * g_star * d_star - p.theta * _grad_sq(grid, phi_star)
    rhs1 = (4.0 * rho_n - rho_m) / (2.0 * dt) + p.m_rho * _lap(grid, g1)
    apply1, precond1 = _rho_operator(grid, p, coeff_r, a_mass)
    if opts.precond == "none":
        precond1 = None
    rho_new, it_r, res_r = _solve(apply1, rhs1, precond1, opts)
    rho_new = _pin_mean(rho_new, rhs1, a_mass)
    _check_finite(rho_new, "rho")
    v_new = 2.0 * g_star * rho_new + d_star

    # Step 2: fluid.  Coupling fully implicit at weight 2*theta.
    s_star = (4.0 * u_n - u_m - 2.0 * h_star * (4.0 * phi_n - phi_m)) / 3.0
    coeff_p = (2.0 / p.eps ** 2) * h_star * h_star
    g2 = (1.0 / p.eps ** 2) * h_star * s_star
    rhs2 = (4.0 * phi_n - phi_m) / (2.0 * dt) + p.m_phi * _lap(grid, g2)
    apply2, precond2 = _phi_operator(grid, p, coeff_p, rho_new, 2.0 * p.theta, a_mass)
    if opts.precond == "none":
        precond2 = None
    force = _phi_guard(p.theta, rho_new)
    phi_new, it_p, res_p = _solve(apply2, rhs2, precond2, opts, force_fallback=force)
    phi_new = _pin_mean(phi_new, rhs2, a_mass)
    _check_finite(phi_new, "phi")
    u_new = 2.0 * h_star * phi_new + s_star

    new_state = SimState(
        phi=Field(grid, phi_new),
        rho=Field(grid, rho_new),
        u_aux=Field(grid, u_new),
        v_aux=Field(grid, v_new),
        time=state.time + dt,
        step=state.step + 1,
        phi_prev=state.phi,
        rho_prev=state.rho,
        u_prev=state.u_aux,
        v_prev=state.v_aux,
    )
    return new_state, StepReport(it_r, it_p, res_r, res_p, dt)


def step_reference_implicit(
    state: SimState,
    p: ModelParams,
    dt: float,
    nl_tol: float = 1e-10,
    nl_max: int = 200,
    damping: float = 0.5,
) -> SimState:
    """Crank-Nicolson on the original nonlinear system (validation oracle).

    Nonlinear terms are evaluated at the midpoint and resolved by a damped
    fixed-point iteration whose inner solves invert the constant-coefficient
    implicit part diagonally in transform space.  Intended for small dt only;
    raises StepFailure when the iteration does not contract.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    grid = state.grid
    k2 = grid.k2
    phi_n, rho_n = state.phi.values, state.rho.values

    # (I - dt/2 * M * Lap L) with L_phi = -Lap + alpha Lap^2, L_rho = -beta Lap.
    inv_phi = _symbol_inverse(1.0 + 0.5 * dt * p.m_phi * (k2 * k2 + p.alpha * k2 * k2 * k2))
    inv_rho = _symbol_inverse(1.0 + 0.5 * dt * p.m_rho * p.beta * k2 * k2)
    lin_phi_n = p.m_phi * _irfft2(
        -(k2 * k2 + p.alpha * k2 * k2 * k2) * _rfft2(phi_n), s=grid.shape
    )
    lin_rho_n = p.m_rho * _irfft2(-p.beta * k2 * k2 * _rfft2(rho_n), s=grid.shape)

    def nonlinear_phi(phi, rho):
        gx, gy = _grad(grid, _rfft2(phi))
        div = _irfft2(_div_hat(grid, rho * gx, rho * gy), s=grid.shape)
        return phi * (phi * phi - 1.0) / p.eps ** 2 + 2.0 * p.theta * div

    def nonlinear_rho(phi, rho):
        well = rho * (rho - p.rho_s) * (rho - 0.5 * p.rho_s) / p.eta ** 2
        return well - p.theta * _grad_sq(grid, phi)

    phi_k, rho_k = phi_n.copy(), rho_n.copy()
    scale_phi = max(float(np.linalg.norm(phi_n)), 1.0)
    scale_rho = max(float(np.linalg.norm(rho_n)), 1.0)
    for _ in range(nl_max):
        phi_mid = 0.5 * (phi_k + phi_n)
        rho_mid = 0.5 * (rho_k + rho_n)
        n_phi = p.m_phi * _lap(grid, nonlinear_phi(phi_mid, rho_mid))
        n_rho = p.m_rho * _lap(grid, nonlinear_rho(phi_mid, rho_mid))
        phi_next = inv_phi(phi_n + dt * (0.5 * lin_phi_n + n_phi))
        rho_next = inv_rho(rho_n + dt * (0.5 * lin_rho_n + n_rho))
        if not (np.isfinite(phi_next).all() and np.isfinite(rho_next).all()):
            raise StepFailure("implicit reference diverged (non-finite iterate)")
        res = max(
            float(np.linalg.norm(phi_next - phi_k)) / scale_phi,
            float(np.linalg.norm(rho_next - rho_k)) / scale_rho,
        )
        if res <= nl_tol:
            phi_k, rho_k = phi_next, rho_next
            break
        phi_k = (1.0 - damping) * phi_k + damping * phi_next
        rho_k = (1.0 - damping) * rho_k + damping * rho_next
    else:
        raise StepFailure(
            f"implicit reference fixed point did not converge in {nl_max} iterations "
            f"(residual {res:.3e}); reduce dt"
        )
    phi_f = Field(grid, phi_k)
    rho_f = Field(grid, rho_k)
    u_f, v_f = init_aux(phi_f, rho_f, p)
    return SimState(
        phi=phi_f,
        rho=rho_f,
        u_aux=u_f,
        v_aux=v_f,
        time=state.time + dt,
        step=state.step + 1,
        phi_prev=state.phi,
        rho_prev=state.rho,
        u_prev=state.u_aux,
        v_prev=state.v_aux,
    )

"""Periodic pseudo-spectral machinery on uniform 2D grids.

Fields live on an nx-by-ny collocation grid over [0, lx) x [0, ly); all
differential operators are diagonal in Fourier space and applied through the
real-to-complex FFT.  Nonlinear products are formed pointwise in physical
space by the callers (pseudo-spectral collocation).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class SpectralError(Exception):
    """Raised on corrupted fields, grid mismatches, or singular solves."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with cached wavenumber arrays.

    Wavenumbers are k_j = 2*pi*m/l for m in [-n/2, n/2-1].  Sizes must be
    even and >= 4 so the standard real-to-complex transform layout applies.
    """

    nx: int
    ny: int
    lx: float = 2.0 * np.pi
    ly: float = 2.0 * np.pi

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4 or self.nx % 2 or self.ny % 2:
            raise SpectralError(f"grid sizes must be even and >= 4, got {self.nx}x{self.ny}")
        if self.lx <= 0 or self.ly <= 0:
            raise SpectralError("domain lengths must be positive")
        kx = 2.0 * np.pi * np.fft.fftfreq(self.nx, d=self.lx / self.nx)
        ky = 2.0 * np.pi * np.fft.rfftfreq(self.ny, d=self.ly / self.ny)
        kx = kx[:, None]
        ky = ky[None, :]
        # Odd-derivative wavenumbers: the Nyquist mode is zeroed so that
        # first derivatives of real fields stay real.
        dkx = kx.copy()
        dkx[self.nx // 2, 0] = 0.0
        dky = ky.copy()
        dky[0, -1] = 0.0
        object.__setattr__(self, "kx", kx)
        object.__setattr__(self, "ky", ky)
        object.__setattr__(self, "dkx", dkx)
        object.__setattr__(self, "dky", dky)
        object.__setattr__(self, "k2", kx * kx + ky * ky)

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def cell_area(self) -> float:
        return self.lx * self.ly / (self.nx * self.ny)

    @property
    def area(self) -> float:
        return self.lx * self.ly

    def coords(self):
        """Meshgrid node coordinates (x, y), each of shape (nx, ny)."""
        x = np.arange(self.nx) * (self.lx / self.nx)
        y = np.arange(self.ny) * (self.ly / self.ny)
        return np.meshgrid(x, y, indexing="ij")

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return (self.nx, self.ny, self.lx, self.ly) == (other.nx, other.ny, other.lx, other.ly)

    def __hash__(self):
        return hash((self.nx, self.ny, self.lx, self.ly))


@dataclass
class Field:
    """Real scalar field sampled on a Grid (row-major nx-by-ny values)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise SpectralError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())

    # Pointwise arithmetic; grids must match.
    def _coerce(self, other):
        if isinstance(other, Field):
            check_same_grid(self, other)
            return other.values
        return other

    def __add__(self, other):
        return Field(self.grid, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.values - self._coerce(other))

    def __rsub__(self, other):
        return Field(self.grid, self._coerce(other) - self.values)

    def __mul__(self, other):
        return Field(self.grid, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Field(self.grid, self.values / self._coerce(other))

    def __neg__(self):
        return Field(self.grid, -self.values)


@dataclass
class Spectrum:
    """Complex rfft2 coefficients of a real Field."""

    grid: Grid
    coefficients: np.ndarray


def check_same_grid(*fields):
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise SpectralError("fields live on different grids")
    return g


def _require_finite(f: Field, what: str = "field"):
    if not np.isfinite(f.values).all():
        raise SpectralError(f"non-finite values in {what}")


def forward(f: Field) -> Spectrum:
    """Real-to-complex Fourier transform (unnormalized numpy convention)."""
    _require_finite(f)
    return Spectrum(f.grid, np.fft.rfft2(f.values))


def inverse(spec: Spectrum) -> Field:
    """Inverse transform back to a real field.

    The rfft layout only stores the half-spectrum; conjugate symmetry of the
    ky=0 and ky=Nyquist columns (in kx) is what realness still requires, and
    a violation beyond 1e-10 (relative) is rejected.
    """
    c = spec.coefficients
    scale = max(np.abs(c).max(), 1.0)
    for col in (0, c.shape[1] - 1):
        sym = c[:, col] - np.conj(np.roll(c[::-1, col], 1))
        if np.abs(sym).max() > 1e-10 * scale:
            raise SpectralError("spectrum violates conjugate symmetry of a real field")
    return Field(spec.grid, np.fft.irfft2(c, s=spec.grid.shape))


def laplacian(f: Field) -> Field:
    g = f.grid
    return Field(g, np.fft.irfft2(-g.k2 * np.fft.rfft2(f.values), s=g.shape))


def biharmonic(f: Field) -> Field:
    g = f.grid
    return Field(g, np.fft.irfft2(g.k2 * g.k2 * np.fft.rfft2(f.values), s=g.shape))


def gradient(f: Field) -> tuple[Field, Field]:
    """Spectral (d/dx, d/dy); Nyquist-mode derivatives are zeroed."""
    g = f.grid
    fhat = np.fft.rfft2(f.values)
    fx = np.fft.irfft2(1j * g.dkx * fhat, s=g.shape)
    fy = np.fft.irfft2(1j * g.dky * fhat, s=g.shape)
    return Field(g, fx), Field(g, fy)


def divergence(fx: Field, fy: Field) -> Field:
    g = check_same_grid(fx, fy)
    dhat = 1j * g.dkx * np.fft.rfft2(fx.values) + 1j * g.dky * np.fft.rfft2(fy.values)
    return Field(g, np.fft.irfft2(dhat, s=g.shape))


def grad_sq(f: Field) -> Field:
    """|grad f|^2 formed pointwise from the spectral gradient."""
    fx, fy = gradient(f)
    return Field(f.grid, fx.values ** 2 + fy.values ** 2)


def solve_symbol(grid: Grid, symbol: np.ndarray, rhs: Field, pin_zero: bool = False) -> Field:
    """Invert a Fourier-diagonal operator: returns f with symbol*fhat = rhs_hat.

    With pin_zero the zero mode is set to 0 (used when the symbol vanishes
    there, i.e. operators annihilating constants acting on mean-zero data).
    """
    rhat = np.fft.rfft2(rhs.values)
    if pin_zero:
        sym = symbol.copy() if symbol.shape == rhat.shape else np.broadcast_to(symbol, rhat.shape).copy()
        if abs(rhat[0, 0]) > 1e-10 * (grid.nx * grid.ny):
            raise SpectralError("singular operator: rhs has nonzero mean but the zero mode is pinned")
        sym[0, 0] = 1.0
        rhat[0, 0] = 0.0
        return Field(grid, np.fft.irfft2(rhat / sym, s=grid.shape))
    if np.any(symbol == 0.0):
        raise SpectralError("singular operator: symbol vanishes at a nonzero mode")
    return Field(grid, np.fft.irfft2(rhat / symbol, s=grid.shape))


def solve_constant_coeff(a: float, b: float, c: float, rhs: Field) -> Field:
    """Solve (a - b*Lap + c*Lap^2) f = rhs exactly in transform space.

    Requires a + b*k^2 + c*k^4 != 0 at every mode, except that a == 0 is
    allowed for mean-zero rhs (the constant mode is pinned to 0).
    """
    g = rhs.grid
    symbol = a + b * g.k2 + c * g.k2 * g.k2
    if a == 0.0 and symbol[0, 0] == 0.0:
        return solve_symbol(g, symbol, rhs, pin_zero=True)
    if np.any(symbol == 0.0):
        raise SpectralError("singular operator: a + b k^2 + c k^4 vanishes at some mode")
    return solve_symbol(g, symbol, rhs)


def mean(f: Field) -> float:
    """(1/|domain|) * integral of f; equals the arithmetic average on a uniform grid."""
    return float(np.mean(f.values))


def inner(f: Field, g: Field) -> float:
    """L2 inner product by the (spectrally accurate) trapezoid rule."""
    grid = check_same_grid(f, g)
    return grid.cell_area * float(np.sum(f.values * g.values))


def norm_l2(f: Field) -> float:
    return float(np.sqrt(inner(f, f)))

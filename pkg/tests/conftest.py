import numpy as np
import pytest

from chsurf import Field, Grid


class TrigField:
    """Low-order trigonometric polynomial with closed-form derivatives.

    Serves as the independent oracle path: sampling and differentiating it
    never touches the FFT machinery under test.
    """

    def __init__(self, rng, n_terms=5, kmax=3, scale=0.3):
        self.terms = [
            (
                scale * rng.normal(),
                int(rng.integers(-kmax, kmax + 1)),
                int(rng.integers(-kmax, kmax + 1)),
                rng.uniform(0.0, 2.0 * np.pi),
            )
            for _ in range(n_terms)
        ]

    def __call__(self, x, y):
        out = np.zeros_like(x, dtype=float)
        for a, m, n, ph in self.terms:
            out += a * np.cos(m * x + n * y + ph)
        return out

    def dx(self, x, y):
        out = np.zeros_like(x, dtype=float)
        for a, m, n, ph in self.terms:
            out -= a * m * np.sin(m * x + n * y + ph)
        return out

    def dy(self, x, y):
        out = np.zeros_like(x, dtype=float)
        for a, m, n, ph in self.terms:
            out -= a * n * np.sin(m * x + n * y + ph)
        return out

    def lap(self, x, y):
        out = np.zeros_like(x, dtype=float)
        for a, m, n, ph in self.terms:
            out -= a * (m * m + n * n) * np.cos(m * x + n * y + ph)
        return out

    def sample(self, grid: Grid) -> Field:
        x, y = grid.coords()
        return Field(grid, self(x, y))


def oracle_energy(phi_fn, rho_fn, p, n=512):
    """Free energy by direct 512^2 quadrature using analytic derivatives."""
    x, y = Grid(n, n).coords()
    phi, rho = phi_fn(x, y), rho_fn(x, y)
    gphi2 = phi_fn.dx(x, y) ** 2 + phi_fn.dy(x, y) ** 2
    grho2 = rho_fn.dx(x, y) ** 2 + rho_fn.dy(x, y) ** 2
    density = (
        0.5 * gphi2
        + 0.5 * p.alpha * phi_fn.lap(x, y) ** 2
        + (phi ** 2 - 1.0) ** 2 / (4.0 * p.eps ** 2)
        + 0.5 * p.beta * grho2
        + (rho * (rho - p.rho_s)) ** 2 / (4.0 * p.eta ** 2)
        - p.theta * rho * gphi2
    )
    return (2.0 * np.pi) ** 2 * float(np.mean(density))


def oracle_energy_quadratized(phi_fn, rho_fn, u_fn, v_fn, p, n=512):
    """Quadratized energy by direct quadrature with independent U, V."""
    x, y = Grid(n, n).coords()
    rho = rho_fn(x, y)
    gphi2 = phi_fn.dx(x, y) ** 2 + phi_fn.dy(x, y) ** 2
    grho2 = rho_fn.dx(x, y) ** 2 + rho_fn.dy(x, y) ** 2
    density = (
        0.5 * gphi2
        + 0.5 * p.alpha * phi_fn.lap(x, y) ** 2
        + u_fn(x, y) ** 2 / (4.0 * p.eps ** 2)
        + 0.5 * p.beta * grho2
        + v_fn(x, y) ** 2 / (4.0 * p.eta ** 2)
        - p.theta * rho * gphi2
    )
    return (2.0 * np.pi) ** 2 * float(np.mean(density))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def grid64():
    return Grid(64, 64)


@pytest.fixture
def grid32():
    return Grid(32, 32)

"""Closed-form wavefunctions used as initial conditions and oracles."""

from __future__ import annotations

import math

import numpy as np

from .lattice import ComplexField, Grid

__all__ = [
    "gaussian",
    "gaussian_evolved",
    "well_eigenstate",
    "well_energy",
    "well_basis",
    "harmonic_ground",
    "gaussian_bump",
    "desk_grid",
    "well_grid",
]


def desk_grid(n: int = 2048) -> Grid:
    return Grid(-20.0, 20.0, n)


def well_grid(n: int = 2048) -> Grid:
    return Grid(0.0, 1.0, n)


def gaussian(grid: Grid, sigma: float = 1.0, x0: float = 0.0, k: float = 0.0) -> ComplexField:
    """Minimum-uncertainty packet (2 pi sigma^2)^(-1/4) exp(-(x-x0)^2/4sigma^2 + ikx)."""
    x = grid.x
    amp = (2.0 * math.pi * sigma**2) ** -0.25
    return ComplexField(grid, amp * np.exp(-((x - x0) ** 2) / (4.0 * sigma**2) + 1j * k * x))


def gaussian_evolved(
    x: np.ndarray, t: float, sigma: float = 1.0, x0: float = 0.0, k: float = 0.0, mass: float = 1.0
) -> np.ndarray:
    """Free evolution of :func:`gaussian` at time ``t`` (hbar = 1), on arbitrary abscissae."""
    s = sigma**2 * (1.0 + 1j * t / (2.0 * mass * sigma**2))
    amp = (2.0 * math.pi * sigma**2) ** -0.25 * np.sqrt(sigma**2 / s)
    xc = x - x0 - k * t / mass
    return amp * np.exp(-(xc**2) / (4.0 * s) + 1j * k * (x - x0) - 1j * k**2 * t / (2.0 * mass) + 1j * k * x0)


def well_eigenstate(grid: Grid, n: int, width: float = 1.0) -> ComplexField:
    """sqrt(2/L) sin(n pi x / L) for the infinite well [x_min, x_min + L]."""
    if n < 1:
        raise ValueError("well quantum number starts at 1")
    x = grid.x - grid.x_min
    return ComplexField(grid, math.sqrt(2.0 / width) * np.sin(n * math.pi * x / width))


def well_energy(n: int, width: float = 1.0, mass: float = 1.0) -> float:
    return (n * math.pi / width) ** 2 / (2.0 * mass)


def well_basis(grid: Grid, n_max: int) -> list[ComplexField]:
    return [well_eigenstate(grid, n, grid.length) for n in range(1, n_max + 1)]


def harmonic_ground(grid: Grid, omega: float = 1.0, mass: float = 1.0, x0: float = 0.0, p0: float = 0.0) -> ComplexField:
    """Ground state of m w^2 x^2 / 2, optionally displaced to a coherent state (x0, p0)."""
    a = mass * omega
    x = grid.x
    return ComplexField(
        grid, (a / math.pi) ** 0.25 * np.exp(-a * (x - x0) ** 2 / 2.0 + 1j * p0 * (x - x0))
    )


def gaussian_bump(grid: Grid, center: float = 0.5, sigma: float = 0.05) -> ComplexField:
    """Normalised Gaussian well inside the box, negligible at the walls."""
    return gaussian(grid, sigma, center).normalized()

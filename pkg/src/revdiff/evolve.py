"""Crank-Nicolson evolution of the complex diffusion equation, its time
reversal, and an implicit-Euler heat solver used as the irreversible foil.

Units are hbar = 1; the particle mass defaults to 1 so the diffusion
coefficient hbar / 2m is 1/2.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import DomainError, PreconditionError, SolverError
from .lattice import ComplexField, Grid, RealField, l2_norm_sq, trapezoid_weights

__all__ = [
    "TimeWindow",
    "Potential",
    "FieldHistory",
    "SchrodingerPropagator",
    "step_schrodinger",
    "evolve_window",
    "evolve_to",
    "time_reverse",
    "integrate_backward",
    "energy",
    "HeatPropagator",
    "step_heat",
    "evolve_heat",
    "stationary_state",
]

Boundary = Literal["dirichlet", "periodic"]
Direction = Literal["forward", "backward"]

# residual tolerance on each direct solve, relative to the right-hand side
SOLVE_RTOL = 1e-10


@dataclass(frozen=True)
class TimeWindow:
    t0: float
    n_steps: int

    def __post_init__(self):
        if int(self.n_steps) != self.n_steps or self.n_steps < 0:
            raise ValueError(f"n_steps must be a non-negative integer, got {self.n_steps}")
        if self.n_steps > 0 and not self.t0 > 0:
            raise ValueError(f"t0 must be positive, got {self.t0}")
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @property
    def dt(self) -> float:
        return self.t0 / self.n_steps if self.n_steps else 0.0

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt

    def step_of(self, t: float) -> int:
        """Step index k with k * dt == t, within a hundredth of a step."""
        if self.n_steps == 0:
            if abs(t) > 1e-12:
                raise DomainError(f"time {t} outside empty window")
            return 0
        k = t / self.dt
        kr = int(round(k))
        if abs(k - kr) > 1e-2 or not 0 <= kr <= self.n_steps:
            raise DomainError(f"time {t} is not a step of the window [0, {self.t0}] (dt={self.dt})")
        return kr

    def reversed_step(self, k: int) -> int:
        return self.n_steps - k


@dataclass(frozen=True, eq=False)
class Potential:
    """Static potential sampled on a grid."""

    grid: Grid
    values: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,) or not np.all(np.isfinite(v)):
            raise ValueError("potential must be finite and match the grid")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def free(cls, grid: Grid) -> "Potential":
        return cls(grid, np.zeros(grid.n), "free")

    @classmethod
    def well(cls, grid: Grid) -> "Potential":
        # the walls are the grid ends; pair with Dirichlet boundaries
        return cls(grid, np.zeros(grid.n), "well")

    @classmethod
    def harmonic(cls, grid: Grid, omega: float = 1.0, mass: float = 1.0) -> "Potential":
        return cls(grid, 0.5 * mass * omega**2 * grid.x**2, "harmonic")

    @classmethod
    def from_file(cls, grid: Grid, path) -> "Potential":
        """Read a two-column CSV (x, value) and interpolate it onto ``grid``."""
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
        if rows and not _is_number(rows[0][0]):
            rows = rows[1:]
        data = np.array(rows, dtype=float)
        xs, vs = data[:, 0], data[:, 1]
        if xs[0] > grid.x_min or xs[-1] < grid.x_max:
            raise DomainError(f"{path} does not cover the grid [{grid.x_min}, {grid.x_max}]")
        return cls(grid, np.interp(grid.x, xs, vs), "custom-file")


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def _laplacian(n: int, dx: float, bc: Boundary) -> sp.csc_matrix:
    """Three-point Laplacian on the unknowns: interior nodes (Dirichlet) or the
    n-1 distinct nodes of a periodic grid."""
    m = n - 2 if bc == "dirichlet" else n - 1
    main = np.full(m, -2.0)
    off = np.ones(m - 1)
    L = sp.diags([off, main, off], [-1, 0, 1], shape=(m, m), format="lil")
    if bc == "periodic":
        L[0, m - 1] = 1.0
        L[m - 1, 0] = 1.0
    return (L / dx**2).tocsc()


def _unknowns(values: np.ndarray, bc: Boundary) -> np.ndarray:
    return values[1:-1] if bc == "dirichlet" else values[:-1]


def _embed(u: np.ndarray, n: int, bc: Boundary) -> np.ndarray:
    out = np.zeros(n, dtype=u.dtype)
    if bc == "dirichlet":
        out[1:-1] = u
    else:
        out[:-1] = u
        out[-1] = u[0]
    return out


class SchrodingerPropagator:
    """Factorised Crank-Nicolson step for i psi_t = -(1/2m) psi'' + V psi.

    (1 + i dt H / 2) psi_new = (1 - i dt H / 2) psi, with H the three-point
    discrete Hamiltonian; the LU factors are computed once and reused.
    """

    def __init__(self, V: Potential, dt: float, bc: Boundary = "dirichlet", mass: float = 1.0):
        if not dt > 0:
            raise PreconditionError(f"dt must be positive, got {dt}")
        if bc not in ("dirichlet", "periodic"):
            raise ValueError(f"unknown boundary condition {bc!r}")
        self.grid, self.V, self.dt, self.bc, self.mass = V.grid, V, dt, bc, mass
        n = self.grid.n
        Vu = _unknowns(V.values, bc)
        self.H = (-0.5 / mass) * _laplacian(n, self.grid.dx, bc) + sp.diags(Vu, format="csc")
        eye = sp.identity(self.H.shape[0], dtype=complex, format="csc")
        self.A = (eye + 0.5j * dt * self.H).tocsc()
        self.B = (eye - 0.5j * dt * self.H).tocsc()
        self._lu = splu(self.A)

    def apply(self, values: np.ndarray) -> np.ndarray:
        u = _unknowns(np.asarray(values, dtype=complex), self.bc)
        rhs = self.B @ u
        new = self._lu.solve(rhs)
        res = np.linalg.norm(self.A @ new - rhs)
        scale = max(np.linalg.norm(rhs), 1e-300)
        if not res <= SOLVE_RTOL * scale:
            raise SolverError("Crank-Nicolson solve did not reach tolerance", res / scale)
        return _embed(new, self.grid.n, self.bc)

    def step(self, f: ComplexField) -> ComplexField:
        return ComplexField(self.grid, self.apply(f.values))


def step_schrodinger(
    f: ComplexField, V: Potential, dt: float, bc: Boundary = "dirichlet", mass: float = 1.0
) -> ComplexField:
    if f.grid != V.grid:
        raise PreconditionError("field and potential live on different grids")
    return SchrodingerPropagator(V, dt, bc, mass).step(f)


@dataclass(frozen=True, eq=False)
class FieldHistory:
    """Frames of a field over a time window.

    ``frames[k]`` is the state after k steps of the history's own evolution.
    For a backward history that is the forward clock reading ``t0 - k dt``,
    so :meth:`frame_at` addresses both directions by the shared clock.
    """

    grid: Grid
    window: TimeWindow
    frames: np.ndarray
    direction: Direction = "forward"
    mass: float = 1.0

    def __post_init__(self):
        a = np.array(self.frames, dtype=np.complex128)
        if a.shape != (self.window.n_steps + 1, self.grid.n):
            raise ValueError(
                f"history shape {a.shape} != ({self.window.n_steps + 1}, {self.grid.n})"
            )
        if self.direction not in ("forward", "backward"):
            raise ValueError(f"unknown direction {self.direction!r}")
        a.setflags(write=False)
        object.__setattr__(self, "frames", a)

    def __len__(self) -> int:
        return self.frames.shape[0]

    @property
    def clock(self) -> np.ndarray:
        """Shared-clock reading of each frame."""
        t = self.window.times
        return t if self.direction == "forward" else self.window.t0 - t

    def index_at(self, t: float) -> int:
        k = self.window.step_of(t)
        return k if self.direction == "forward" else self.window.reversed_step(k)

    def frame(self, k: int) -> ComplexField:
        return ComplexField(self.grid, self.frames[k])

    def frame_at(self, t: float) -> ComplexField:
        return self.frame(self.index_at(t))

    @property
    def last(self) -> ComplexField:
        return self.frame(len(self) - 1)

    @property
    def first(self) -> ComplexField:
        return self.frame(0)

    def norms(self) -> np.ndarray:
        w = trapezoid_weights(self.grid.n, self.grid.dx)
        return (np.abs(self.frames) ** 2) @ w

    def to_csv(self, path, stride: int = 1) -> None:
        """Single CSV with columns t, x, re, im (t is the shared clock)."""
        x, clock = self.grid.x, self.clock
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "x", "re", "im"])
            for k in range(0, len(self), stride):
                tk = repr(float(clock[k]))
                for xi, z in zip(x, self.frames[k]):
                    w.writerow([tk, repr(float(xi)), repr(float(z.real)), repr(float(z.imag))])

    def to_csv_frames(self, directory, stride: int = 1) -> list:
        """One x, re, im CSV per frame; returns the written paths."""
        from pathlib import Path

        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        paths = []
        for k in range(0, len(self), stride):
            p = d / f"frame_{k:06d}.csv"
            self.frame(k).to_csv(p)
            paths.append(p)
        return paths


def _check_normalized(f: ComplexField, allow_unnormalized: bool) -> None:
    if allow_unnormalized:
        return
    nrm = l2_norm_sq(f)
    if abs(nrm - 1.0) > 1e-6:
        raise PreconditionError(f"initial state not normalised: |f|^2 = {nrm:.9f}")


def evolve_window(
    f0: ComplexField,
    V: Potential,
    w: TimeWindow,
    bc: Boundary = "dirichlet",
    mass: float = 1.0,
    allow_unnormalized: bool = False,
) -> FieldHistory:
    """Forward history with ``frames[k]`` the state at t = k dt."""
    if f0.grid != V.grid:
        raise PreconditionError("field and potential live on different grids")
    _check_normalized(f0, allow_unnormalized)
    frames = np.empty((w.n_steps + 1, f0.grid.n), dtype=complex)
    frames[0] = f0.values
    if w.n_steps:
        prop = SchrodingerPropagator(V, w.dt, bc, mass)
        for k in range(w.n_steps):
            frames[k + 1] = prop.apply(frames[k])
    return FieldHistory(f0.grid, w, frames, "forward", mass)


def evolve_to(
    f0: ComplexField, V: Potential, t: float, n_steps: int, bc: Boundary = "dirichlet", mass: float = 1.0
) -> ComplexField:
    """Final state only, for long runs where the history is not needed."""
    if n_steps == 0:
        return f0
    prop = SchrodingerPropagator(V, t / n_steps, bc, mass)
    v = f0.values
    for _ in range(n_steps):
        v = prop.apply(v)
    return ComplexField(f0.grid, v)


def time_reverse(h: FieldHistory) -> FieldHistory:
    """Reverse the frame order and conjugate every frame.

    Frame k of the result is conj of frame n_steps - k of ``h``; the
    conjugated, clock-reversed field solves the same equation, so no second
    integration is needed.
    """
    flipped = "backward" if h.direction == "forward" else "forward"
    return FieldHistory(h.grid, h.window, np.conj(h.frames[::-1]), flipped, h.mass)


def integrate_backward(
    h: FieldHistory, V: Potential, bc: Boundary = "dirichlet"
) -> FieldHistory:
    """Independent integration of the backward equation from conj of the last
    frame; cross-checks :func:`time_reverse`."""
    start = h.last.conj()
    fwd = evolve_window(start, V, h.window, bc, h.mass, allow_unnormalized=True)
    flipped = "backward" if h.direction == "forward" else "forward"
    return FieldHistory(h.grid, h.window, fwd.frames, flipped, h.mass)


def energy(f: ComplexField, V: Potential, bc: Boundary = "dirichlet", mass: float = 1.0) -> float:
    """<f|H|f> dx with the same discrete Hamiltonian the propagator uses."""
    n = f.grid.n
    H = (-0.5 / mass) * _laplacian(n, f.grid.dx, bc) + sp.diags(_unknowns(V.values, bc))
    u = _unknowns(f.values, bc)
    return float(np.real(np.vdot(u, H @ u)) * f.grid.dx)


def stationary_state(V: Potential, level: int = 0, mass: float = 1.0) -> ComplexField:
    """Eigenvector of the discrete Dirichlet Hamiltonian, normalised, real and
    positive at its largest-magnitude node."""
    from scipy.linalg import eigh_tridiagonal

    g = V.grid
    dx = g.dx
    d = 1.0 / (mass * dx**2) + V.values[1:-1]
    e = np.full(g.n - 3, -0.5 / (mass * dx**2))
    _, vec = eigh_tridiagonal(d, e, select="i", select_range=(level, level))
    v = np.zeros(g.n)
    v[1:-1] = vec[:, 0]
    v *= np.sign(v[np.argmax(np.abs(v))])
    return ComplexField(g, v).normalized()


class HeatPropagator:
    """Implicit-Euler step (1 - D dt L) rho_new = rho with reflecting
    (zero-flux) ends.

    ``demo=True`` admits D < 0, the clock-reversed heat equation: each cosine
    mode is multiplied by 1 / (1 + D k_eff^2 dt), which exceeds one for D < 0
    and diverges where D k_eff^2 dt = -1.
    """

    def __init__(self, grid: Grid, D: float, dt: float, demo: bool = False):
        if D < 0 and not demo:
            raise PreconditionError("negative diffusion coefficient only allowed in demo mode")
        if not dt > 0:
            raise PreconditionError(f"dt must be positive, got {dt}")
        n, dx = grid.n, grid.dx
        main = np.full(n, -2.0)
        upper = np.ones(n - 1)
        lower = np.ones(n - 1)
        upper[0] = 2.0  # ghost node rho[-1] = rho[1]
        lower[-1] = 2.0
        L = sp.diags([lower, main, upper], [-1, 0, 1], format="csc") / dx**2
        self.grid, self.D, self.dt = grid, D, dt
        self.A = (sp.identity(n, format="csc") - D * dt * L).tocsc()
        self._lu = splu(self.A)

    def apply(self, values: np.ndarray) -> np.ndarray:
        rhs = np.asarray(values, dtype=float)
        new = self._lu.solve(rhs)
        res = np.linalg.norm(self.A @ new - rhs)
        scale = max(np.linalg.norm(rhs), 1e-300)
        if not res <= 1e-8 * scale * max(1.0, np.linalg.norm(new) / scale):
            raise SolverError("implicit heat solve did not reach tolerance", res / scale)
        return new

    def amplification(self, k: float) -> float:
        """Per-step factor for the cosine mode cos(k (x - x_min))."""
        k_eff2 = 4.0 / self.grid.dx**2 * math.sin(0.5 * k * self.grid.dx) ** 2
        return 1.0 / (1.0 + self.D * k_eff2 * self.dt)


def step_heat(rho: RealField, D: float, dt: float, demo: bool = False) -> RealField:
    return RealField(rho.grid, HeatPropagator(rho.grid, D, dt, demo).apply(rho.values))


def evolve_heat(rho: RealField, D: float, w: TimeWindow, demo: bool = False) -> np.ndarray:
    """All frames of an implicit-Euler heat run, shape (n_steps + 1, n)."""
    out = np.empty((w.n_steps + 1, rho.grid.n))
    out[0] = rho.values
    if w.n_steps:
        prop = HeatPropagator(rho.grid, D, w.dt, demo)
        for k in range(w.n_steps):
            out[k + 1] = prop.apply(out[k])
    return out

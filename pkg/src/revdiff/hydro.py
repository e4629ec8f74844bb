"""Hydrodynamic decomposition of a complex field: density, current and
osmotic velocities, phase, quantum potential and force, plus the dynamical
identities they satisfy along a history.

Units are hbar = 1, so the diffusion coefficient is 1 / (2 mass).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateInputError, PreconditionError
from .evolve import FieldHistory, Potential, time_reverse
from .lattice import ComplexField, RealField, derivative, l2_norm_sq, trapezoid_weights

__all__ = [
    "RHO_FLOOR",
    "HydroFields",
    "hydro_decompose",
    "kinetic_energy",
    "continuity_residual",
    "velocity_reversal_check",
    "NewtonResidual",
    "newton_residual",
    "diffusion_coefficient",
]

# relative density below which velocities and Q are undefined
RHO_FLOOR = 1e-12


def diffusion_coefficient(mass: float = 1.0) -> float:
    return 0.5 / mass


@dataclass(frozen=True, eq=False)
class HydroFields:
    """Madelung fields of one frame; masked nodes hold NaN."""

    rho: RealField
    eta: RealField
    u: RealField
    S: RealField
    Q: RealField
    F_Q: RealField
    valid: np.ndarray
    boundary: np.ndarray
    mass: float = 1.0

    @property
    def grid(self):
        return self.rho.grid

    def to_csv(self, path) -> None:
        cols = [self.rho, self.eta, self.u, self.Q, self.F_Q]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "rho", "eta", "u", "Q", "F_Q", "valid"])
            for i, x in enumerate(self.grid.x):
                w.writerow([repr(float(x))] + [repr(float(c.values[i])) for c in cols] + [int(self.valid[i])])


def _ratio(num: np.ndarray, den: np.ndarray, valid: np.ndarray) -> np.ndarray:
    out = np.full(num.shape, np.nan, dtype=np.result_type(num, den))
    np.divide(num, den, out=out, where=valid)
    return out


def _unwrap_from(phase: np.ndarray, i0: int) -> np.ndarray:
    S = np.empty_like(phase)
    S[i0:] = np.unwrap(phase[i0:])
    S[: i0 + 1] = np.unwrap(phase[: i0 + 1][::-1])[::-1]
    return S


def hydro_decompose(f: ComplexField, mass: float = 1.0, order: int = 4) -> HydroFields:
    """Density, velocities, phase and quantum potential by finite differences.

    The current velocity is Im(f'/f) / mass, taken directly from the field so
    no phase unwrapping enters it. Fourth-order stencils are the default
    since second order leaves a k^2 dx^2 / 4 relative error in kinetic terms.
    """
    psi = f.values
    rho = np.abs(psi) ** 2
    rmax = rho.max()
    if rmax == 0.0:
        raise DegenerateInputError("hydro_decompose on an all-zero field")
    dx = f.grid.dx
    valid = rho >= RHO_FLOOR * rmax
    half = order // 2
    boundary = np.zeros(f.grid.n, dtype=bool)
    boundary[: half + 1] = boundary[-half - 1 :] = True

    dpsi = derivative(psi, dx, 1, order)
    eta = _ratio(dpsi, psi, valid).imag / mass
    u = diffusion_coefficient(mass) * _ratio(derivative(rho, dx, 1, order), rho, valid)
    amp = np.sqrt(rho)
    Q = (-0.5 / mass) * _ratio(derivative(amp, dx, 2, order), amp, valid)
    F_Q = -derivative(np.where(valid, Q, 0.0), dx, 1, order)
    # the force needs a full stencil of valid neighbours
    near_mask = np.convolve(~valid, np.ones(2 * half + 1), mode="same") > 0
    F_Q[near_mask] = np.nan
    S = _unwrap_from(np.angle(psi), int(np.argmax(rho)))
    S[~valid] = np.nan

    g = f.grid
    return HydroFields(
        rho=RealField(g, rho),
        eta=RealField(g, eta),
        u=RealField(g, u),
        S=RealField(g, S),
        Q=RealField(g, Q),
        F_Q=RealField(g, F_Q),
        valid=valid,
        boundary=boundary,
        mass=mass,
    )


def _fill_masked(values: np.ndarray, valid: np.ndarray) -> np.ndarray:
    """Replace masked entries by linear interpolation over valid ones."""
    if valid.all():
        return values
    idx = np.arange(len(values))
    return np.interp(idx, idx[valid], values[valid])


def kinetic_energy(f: ComplexField, mass: float = 1.0, order: int = 4) -> tuple[float, float]:
    """Mean kinetic energy two ways: from the Laplacian of the field and from
    the density-weighted squared velocities.

    Isolated masked nodes (walls, single zeros) carry a finite limit of the
    velocity integrand; it is filled from the neighbouring valid nodes.
    """
    nrm = l2_norm_sq(f)
    if abs(nrm - 1.0) > 1e-6:
        raise PreconditionError(f"kinetic_energy needs a normalised field, |f|^2 = {nrm:.9f}")
    w = trapezoid_weights(f.grid.n, f.grid.dx)
    d2 = derivative(f.values, f.grid.dx, 2, order)
    lhs = float(np.real(np.dot(w, np.conj(f.values) * d2)) * (-0.5 / mass))
    h = hydro_decompose(f, mass, order)
    integrand = h.rho.values * (h.eta.values**2 + h.u.values**2)
    integrand = _fill_masked(integrand, h.valid)
    rhs = float(0.5 * mass * np.dot(w, integrand))
    return lhs, rhs


def _current(frames: np.ndarray, dx: float, mass: float, order: int) -> np.ndarray:
    return np.imag(np.conj(frames) * derivative(frames, dx, 1, order)) / mass


def continuity_residual(h: FieldHistory, order: int = 2) -> RealField:
    """max over interior frames of |d rho/dt + d j/dx| with j = rho * eta.

    The flux is formed as Im(conj(f) f') / mass, which equals rho * eta but
    stays finite at nodes.
    """
    if len(h) < 3:
        raise PreconditionError("continuity residual needs at least 3 frames")
    dt, dx = h.window.dt, h.grid.dx
    fr = h.frames
    rho = np.abs(fr) ** 2
    drho = (rho[2:] - rho[:-2]) / (2.0 * dt)
    if h.direction == "backward":
        drho = -drho
    dj = derivative(_current(fr[1:-1], dx, h.mass, order), dx, 1, order)
    return RealField(h.grid, np.max(np.abs(drho + dj), axis=0))


def velocity_reversal_check(h: FieldHistory, times=None, n_samples: int = 5) -> float:
    """max |eta_rev(t' = t_c) + eta_fwd(t = t_c)| over valid nodes and sampled
    clock readings (default: n_samples evenly spaced steps)."""
    if h.direction != "forward":
        raise PreconditionError("velocity_reversal_check expects a forward history")
    r = time_reverse(h)
    if times is None:
        ks = np.unique(np.linspace(0, h.window.n_steps, n_samples).round().astype(int))
        times = ks * h.window.dt
    worst = 0.0
    for t in times:
        a = hydro_decompose(h.frame_at(t), h.mass)
        b = hydro_decompose(r.frame_at(t), h.mass)
        both = a.valid & b.valid
        if both.any():
            worst = max(worst, float(np.max(np.abs(a.eta.values[both] + b.eta.values[both]))))
    return worst


class NewtonResidual(NamedTuple):
    as_printed: float  # d eta/dt + (V + Q)'/mass
    material: float  # with the convective term eta * eta' added


def newton_residual(
    h: FieldHistory, V: Potential, rho_min: float = 1e-4, order: int = 4
) -> NewtonResidual:
    """Residuals of the quantum Newton equation over interior frames and
    nodes whose density exceeds ``rho_min`` times the frame maximum.

    Both the partial-derivative form and the material-derivative form are
    returned; the first vanishes only when the convective term does.
    """
    if len(h) < 3:
        raise PreconditionError("newton residual needs at least 3 frames")
    dt = h.window.dt
    sign = 1.0 if h.direction == "forward" else -1.0
    fields = [hydro_decompose(h.frame(k), h.mass, order) for k in range(len(h))]
    dV = derivative(V.values, h.grid.dx, 1, order)
    worst_p = worst_m = 0.0
    for k in range(1, len(h) - 1):
        c = fields[k]
        deta = sign * (fields[k + 1].eta.values - fields[k - 1].eta.values) / (2.0 * dt)
        rho = c.rho.values
        keep = (
            (rho > rho_min * rho.max())
            & fields[k + 1].valid
            & fields[k - 1].valid
            & ~c.boundary
            & np.isfinite(c.F_Q.values)
        )
        if not keep.any():
            continue
        force = (dV - c.F_Q.values) / h.mass
        conv = c.eta.values * derivative(np.where(c.valid, c.eta.values, 0.0), h.grid.dx, 1, order)
        worst_p = max(worst_p, float(np.max(np.abs(deta + force)[keep])))
        worst_m = max(worst_m, float(np.max(np.abs(deta + conv + force)[keep])))
    return NewtonResidual(worst_p, worst_m)

"""Position and eigenbasis probabilities recovered from intersections of a
forward field with a backward (conjugated) field.

The intersection over a window of half-width eps averages the forward field
over |x1 - x2| <= eps around each backward point x2; its ratio to the
whole-line value tends to the Born probability as eps -> 0. Two band shapes
are offered:

* ``open``: x2 ranges over F, x1 is unrestricted. Corrections are even in
  eps for smooth fields (odd terms appear only where the field has a kink,
  e.g. at hard walls).
* ``symmetric``: the mean of the open band with x2 in F and the open band
  with x1 in F. The kernel is symmetric under x1 <-> x2, so swapping the
  roles of the two fields conjugates the result exactly.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import DegenerateInputError, PreconditionError
from .lattice import ComplexField, Grid, Interval, derivative, interval_weights, l2_norm_sq, trapezoid_weights

__all__ = [
    "EpsSchedule",
    "EigenExpansion",
    "BornLimit",
    "ConvergenceWarning",
    "richardson",
    "band_integral",
    "intersection_probability_eps",
    "born_limit",
    "band_limit",
    "expand_in_basis",
    "state_probabilities",
    "pair_term",
    "cross_term",
    "OPEN_EXPONENTS",
    "SYMMETRIC_EXPONENTS",
]

Band = Literal["open", "symmetric"]

# error exponents eliminated by Richardson extrapolation for each band shape
OPEN_EXPONENTS = (2, 3, 4)
SYMMETRIC_EXPONENTS = OPEN_EXPONENTS


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class EpsSchedule:
    values: tuple

    def __post_init__(self):
        v = tuple(float(e) for e in self.values)
        if not v:
            raise ValueError("empty eps schedule")
        if any(e <= 0 for e in v) or any(a <= b for a, b in zip(v, v[1:])):
            raise ValueError(f"eps schedule must be positive and strictly decreasing: {v}")
        object.__setattr__(self, "values", v)

    @classmethod
    def geometric(cls, grid: Grid, start_cells: int = 16, levels: int = 4) -> "EpsSchedule":
        """eps_k = start_cells * dx / 2**k."""
        return cls(tuple(start_cells * grid.dx / 2**k for k in range(levels)))

    def check(self, grid: Grid) -> None:
        if self.values[-1] < 2.0 * grid.dx * (1 - 1e-9):
            raise PreconditionError(
                f"smallest eps {self.values[-1]:.3g} below two cells ({2 * grid.dx:.3g})"
            )

    @property
    def ratios(self) -> np.ndarray:
        v = np.asarray(self.values)
        return v[:-1] / v[1:]


def _eliminate(values, eps, exponents) -> complex:
    """Limit of the model v_i = L + sum_j c_j eps_i**p_j through all points."""
    v = np.asarray(values, dtype=complex)
    e = np.asarray(eps, dtype=float)
    k = len(v)
    if k == 1:
        return complex(v[0])
    scale = e / e[0]  # keeps the system well conditioned
    A = np.column_stack([np.ones(k)] + [scale**p for p in exponents[: k - 1]])
    return complex(np.linalg.solve(A, v)[0])


def richardson(values: Sequence[complex], eps: Sequence[float], exponents: Sequence[int]):
    """Eliminate eps**p error terms, one exponent per extra level.

    Returns (best, running, error_estimate): ``running[k]`` extrapolates the
    first k + 1 levels, and the error estimate is the gap between the last
    two running values.
    """
    if len(values) != len(eps):
        raise ValueError("values and eps differ in length")
    running = np.array(
        [_eliminate(values[: k + 1], eps[: k + 1], exponents) for k in range(len(values))], dtype=complex
    )
    err = float(abs(running[-1] - running[-2])) if len(running) > 1 else math.inf
    return complex(running[-1]), running, err


def _cumulative(values: np.ndarray, dx: float) -> np.ndarray:
    """Running integral from the left end, trapezoid plus the end-point
    derivative correction (fourth order for smooth integrands)."""
    d = derivative(values, dx, 1, 4)
    inc = 0.5 * dx * (values[1:] + values[:-1]) - dx**2 / 12.0 * (d[1:] - d[:-1])
    return np.concatenate([[0.0], np.cumsum(inc)])


def _open_inner(fwd: np.ndarray, grid: Grid, eps: float) -> np.ndarray:
    """Integral of fwd over [x - eps, x + eps] at every node, fwd = 0 off-grid."""
    G = _cumulative(fwd, grid.dx)
    m = eps / grid.dx
    mi = int(round(m))
    n = grid.n
    if abs(m - mi) < 1e-9:
        idx = np.arange(n)
        return G[np.minimum(idx + mi, n - 1)] - G[np.maximum(idx - mi, 0)]
    spline = CubicHermiteSpline(grid.x, G, fwd)
    x = grid.x
    return spline(np.clip(x + eps, grid.x_min, grid.x_max)) - spline(np.clip(x - eps, grid.x_min, grid.x_max))


def band_integral(
    fwd: ComplexField, bwd: ComplexField, F: Interval, eps: float, band: Band = "open"
) -> complex:
    """(1 / 2 eps) * integral over the band of fwd(x1) conj(bwd(x2)).

    ``bwd`` is the field whose conjugate is the backward description; pass
    the same field twice for a single state.
    """
    g = fwd.grid
    if bwd.grid != g:
        raise PreconditionError("fields live on different grids")
    if eps < 2.0 * g.dx * (1 - 1e-9):
        raise PreconditionError(f"eps = {eps:.3g} below two cells ({2 * g.dx:.3g})")
    w = interval_weights(g, F)
    if band == "open":
        return _open_band(fwd.values, bwd.values, g, w, eps)
    if band == "symmetric":
        a = _open_band(fwd.values, bwd.values, g, w, eps)
        b = _open_band(bwd.values, fwd.values, g, w, eps).conjugate()
        return 0.5 * (a + b)
    raise ValueError(f"unknown band {band!r}")


def _open_band(fwd: np.ndarray, bwd: np.ndarray, g: Grid, w: np.ndarray, eps: float) -> complex:
    inner = _open_inner(fwd, g, eps)
    return complex(np.dot(w, np.conj(bwd) * inner) / (2.0 * eps))


def intersection_probability_eps(
    psi: ComplexField, F: Interval, eps: float, band: Band = "open"
) -> complex:
    """Finite-eps intersection ratio over F against the whole line."""
    num = band_integral(psi, psi, F, eps, band)
    den = band_integral(psi, psi, Interval.whole(), eps, band)
    if abs(den) < 1e-14:
        raise DegenerateInputError(f"whole-line intersection vanishes ({abs(den):.3g})")
    return num / den


@dataclass(frozen=True)
class BornLimit:
    value: float
    imag: float
    error_estimate: float
    table: tuple  # rows (eps, value_re, value_im, extrapolated)
    snap_distance: float = 0.0

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["eps", "value_re", "value_im", "extrapolated"])
            for row in self.table:
                w.writerow([repr(float(c)) for c in row])


def _limit(raw: list, sched: EpsSchedule, exponents, what: str) -> tuple[complex, np.ndarray, float]:
    best, running, err = richardson(raw, sched.values, exponents)
    im = np.abs(np.imag(raw))
    if len(raw) > 2:
        dre = np.abs(np.diff(np.real(raw)))
        if np.any(dre[1:] > 1.1 * dre[:-1] + 1e-15) or np.any(im[1:] > 1.1 * im[:-1] + 1e-15):
            warnings.warn(f"{what}: non-monotone convergence along the eps schedule", ConvergenceWarning, stacklevel=3)
    return best, running, err


def band_limit(
    fwd: ComplexField,
    bwd: ComplexField,
    F: Interval,
    sched: EpsSchedule,
    band: Band = "open",
    exponents=None,
) -> tuple[complex, np.ndarray, np.ndarray, float]:
    """Extrapolated eps -> 0 limit of :func:`band_integral`.

    Returns (limit, raw values, running extrapolations, error estimate).
    """
    sched.check(fwd.grid)
    if exponents is None:
        exponents = OPEN_EXPONENTS if band == "open" else SYMMETRIC_EXPONENTS
    raw = np.array([band_integral(fwd, bwd, F, e, band) for e in sched.values])
    best, running, err = richardson(raw, sched.values, exponents)
    return best, raw, running, err


def born_limit(
    psi: ComplexField, F: Interval, sched: EpsSchedule | None = None, band: Band = "open", exponents=None
) -> BornLimit:
    """eps -> 0 limit of the intersection ratio over F.

    Each level's ratio is extrapolated in eps; the imaginary part of the
    limit is reported alongside the real value. A warning (not an error) is
    issued when the raw values do not converge monotonically.
    """
    g = psi.grid
    sched = sched or EpsSchedule.geometric(g)
    sched.check(g)
    if exponents is None:
        exponents = OPEN_EXPONENTS if band == "open" else SYMMETRIC_EXPONENTS
    raw = [intersection_probability_eps(psi, F, e, band) for e in sched.values]
    best, running, err = _limit(raw, sched, exponents, "born_limit")
    table = tuple(
        (e, float(np.real(r)), float(np.imag(r)), float(np.real(x)))
        for e, r, x in zip(sched.values, raw, running)
    )
    return BornLimit(float(best.real), float(best.imag), err, table, F.snap(g)[2])


@dataclass(frozen=True, eq=False)
class EigenExpansion:
    basis: tuple
    coeffs: np.ndarray
    residual: float

    @property
    def n_max(self) -> int:
        return len(self.basis)

    @property
    def grid(self) -> Grid:
        return self.basis[0].grid

    def component(self, n: int) -> ComplexField:
        """c_n psi_n, with n counted from 1."""
        return self.basis[n - 1].scaled(self.coeffs[n - 1])

    def field(self) -> ComplexField:
        return ComplexField(self.grid, self.coeffs @ np.array([b.values for b in self.basis]))


def gram_matrix(basis: Sequence[ComplexField]) -> np.ndarray:
    B = np.array([b.values for b in basis])
    w = trapezoid_weights(B.shape[1], basis[0].grid.dx)
    return np.conj(B) @ (B * w).T


def expand_in_basis(psi: ComplexField, basis: Sequence[ComplexField], gram_tol: float = 1e-6) -> EigenExpansion:
    """Overlap coefficients c_n = <psi_n | psi> and the L2 residual."""
    if not basis:
        raise PreconditionError("empty basis")
    G = gram_matrix(basis)
    dev = float(np.max(np.abs(G - np.eye(len(basis)))))
    if dev > gram_tol:
        raise PreconditionError(f"basis not orthonormal: Gram deviation {dev:.3g}")
    B = np.array([b.values for b in basis])
    w = trapezoid_weights(psi.grid.n, psi.grid.dx)
    c = np.conj(B) @ (w * psi.values)
    rest = ComplexField(psi.grid, psi.values - c @ B)
    return EigenExpansion(tuple(basis), c, math.sqrt(l2_norm_sq(rest)))


def state_probabilities(exp: EigenExpansion) -> tuple[np.ndarray, float]:
    """p_n = |c_n|^2 and their sum."""
    p = np.abs(exp.coeffs) ** 2
    return p, float(p.sum())


def pair_term(
    exp: EigenExpansion, n: int, m: int, F: Interval, sched: EpsSchedule | None = None, band: Band = "open"
) -> complex:
    """Intersection of forward component c_n psi_n with backward component
    (c_m psi_m)* over F, in the eps limit, relative to the whole-line
    intersection of the full field."""
    g = exp.grid
    sched = sched or EpsSchedule.geometric(g)
    if exp.coeffs[n - 1] == 0 or exp.coeffs[m - 1] == 0:
        return 0j
    num, *_ = band_limit(exp.component(n), exp.component(m), F, sched, band)
    full = exp.field()
    den, *_ = band_limit(full, full, Interval.whole(), sched, band)
    if abs(den) < 1e-14:
        raise DegenerateInputError("whole-line intersection of the expansion vanishes")
    return num / den.real


def cross_term(
    exp: EigenExpansion, n: int, m: int, F: Interval, sched: EpsSchedule | None = None, band: Band = "open"
) -> complex:
    """Mixed (n != m) intersection; vanishes over the whole line."""
    if n == m:
        raise PreconditionError("cross_term needs distinct indices")
    return pair_term(exp, n, m, F, sched, band)

"""Uniform 1-D grid, field containers, quadrature and finite differences.

All containers are frozen dataclasses holding read-only numpy arrays, so they
can be shared between threads without copying.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, NumericError

__all__ = [
    "DomainError",
    "NumericError",
    "Grid",
    "ComplexField",
    "RealField",
    "Interval",
    "integrate",
    "interval_weights",
    "l2_norm_sq",
    "trapezoid_weights",
    "derivative",
    "fd_weights",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8:
            raise ValueError(f"grid needs n >= 8 points, got {self.n}")
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ValueError("grid bounds must be finite")
        if not self.x_max > self.x_min:
            raise ValueError(f"x_max ({self.x_max}) must exceed x_min ({self.x_min})")
        object.__setattr__(self, "n", int(self.n))

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return _grid_nodes(self.x_min, self.x_max, self.n)

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    def nearest(self, x: float) -> int:
        """Index of the node closest to ``x`` (clamped to the grid)."""
        i = int(round((x - self.x_min) / self.dx))
        return min(max(i, 0), self.n - 1)


@lru_cache(maxsize=64)
def _grid_nodes(x_min: float, x_max: float, n: int) -> np.ndarray:
    return _frozen(np.linspace(x_min, x_max, n))


@dataclass(frozen=True, eq=False)
class ComplexField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128)
        if v.shape != (self.grid.n,):
            raise ValueError(f"field has shape {v.shape}, grid has {self.grid.n} nodes")
        if not np.all(np.isfinite(v)):
            raise NumericError("complex field contains non-finite values")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def conj(self) -> "ComplexField":
        return ComplexField(self.grid, np.conj(self.values))

    def density(self) -> "RealField":
        return RealField(self.grid, np.abs(self.values) ** 2)

    def scaled(self, c: complex) -> "ComplexField":
        return ComplexField(self.grid, c * self.values)

    def normalized(self) -> "ComplexField":
        return self.scaled(1.0 / math.sqrt(l2_norm_sq(self)))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "re", "im"])
            for x, z in zip(self.x, self.values):
                w.writerow([repr(float(x)), repr(float(z.real)), repr(float(z.imag))])

    @classmethod
    def from_csv(cls, path) -> "ComplexField":
        x, cols = _read_csv(path, ("re", "im"))
        return cls(_grid_from_nodes(x, path), cols[0] + 1j * cols[1])


@dataclass(frozen=True, eq=False)
class RealField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.shape != (self.grid.n,):
            raise ValueError(f"field has shape {v.shape}, grid has {self.grid.n} nodes")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "value"])
            for x, v in zip(self.x, self.values):
                w.writerow([repr(float(x)), repr(float(v))])

    @classmethod
    def from_csv(cls, path) -> "RealField":
        x, cols = _read_csv(path, ("value",))
        return cls(_grid_from_nodes(x, path), cols[0])


def _read_csv(path, names):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header[0] != "x" or tuple(header[1:]) != names:
        raise ValueError(f"{path}: expected header x,{','.join(names)}, got {','.join(header)}")
    data = np.array(body, dtype=float)
    return data[:, 0], [data[:, j + 1] for j in range(len(names))]


def _grid_from_nodes(x: np.ndarray, path) -> Grid:
    g = Grid(float(x[0]), float(x[-1]), len(x))
    if not np.allclose(x, g.x, rtol=0, atol=1e-9 * max(1.0, g.length)):
        raise ValueError(f"{path}: abscissae are not uniformly spaced")
    return g


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi]; ``Interval.whole()`` stands for the full grid."""

    lo: float = -math.inf
    hi: float = math.inf
    whole_line: bool = False

    def __post_init__(self):
        if self.whole_line:
            return
        if math.isnan(self.lo) or math.isnan(self.hi) or self.lo > self.hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    @classmethod
    def whole(cls) -> "Interval":
        return cls(whole_line=True)

    def snap(self, grid: Grid) -> tuple[int, int, float]:
        """Node indices (i_lo, i_hi) of the snapped endpoints and the largest
        distance an endpoint moved.

        Endpoints may overshoot the grid by at most half a cell.
        """
        if self.whole_line:
            return 0, grid.n - 1, 0.0
        half = 0.5 * grid.dx
        if self.lo < grid.x_min - half or self.hi > grid.x_max + half:
            raise DomainError(
                f"interval [{self.lo}, {self.hi}] outside grid [{grid.x_min}, {grid.x_max}]"
            )
        i0, i1 = grid.nearest(self.lo), grid.nearest(self.hi)
        x = grid.x
        return i0, i1, max(abs(x[i0] - self.lo), abs(x[i1] - self.hi))

    def complement_parts(self, grid: Grid) -> list["Interval"]:
        """Pieces of the grid outside this interval, sharing its snapped endpoints."""
        if self.whole_line:
            return []
        i0, i1, _ = self.snap(grid)
        x = grid.x
        parts = []
        if i0 > 0:
            parts.append(Interval(grid.x_min, float(x[i0])))
        if i1 < grid.n - 1:
            parts.append(Interval(float(x[i1]), grid.x_max))
        return parts


def trapezoid_weights(n: int, dx: float) -> np.ndarray:
    w = np.full(n, dx)
    if n > 0:
        w[0] = w[-1] = 0.5 * dx
    if n == 1:
        w[0] = 0.0
    return w


def interval_weights(grid: Grid, F: Interval, snap: bool = False) -> np.ndarray:
    """Quadrature weights w (one per node) with w @ f the integral over F.

    By default the piecewise-linear interpolant of f is integrated exactly,
    including the partial cells at the two ends. ``snap=True`` moves each
    endpoint to its nearest node and uses the plain trapezoid rule there.
    """
    w = np.zeros(grid.n)
    if F.whole_line:
        return trapezoid_weights(grid.n, grid.dx)
    i0, i1, _ = F.snap(grid)  # also validates the domain
    if snap:
        w[i0 : i1 + 1] = trapezoid_weights(i1 - i0 + 1, grid.dx)
        return w
    dx = grid.dx
    a = (min(max(F.lo, grid.x_min), grid.x_max) - grid.x_min) / dx
    b = (min(max(F.hi, grid.x_min), grid.x_max) - grid.x_min) / dx
    if b <= a:
        return w
    cells = np.arange(min(int(math.floor(a)), grid.n - 2), min(int(math.ceil(b)), grid.n - 1))
    s0 = np.clip(a - cells, 0.0, 1.0)
    s1 = np.clip(b - cells, 0.0, 1.0)
    right = 0.5 * (s1**2 - s0**2) * dx
    np.add.at(w, cells, (s1 - s0) * dx - right)
    np.add.at(w, cells + 1, right)
    return w


def integrate(f: ComplexField | RealField, F: Interval, snap: bool = False) -> complex:
    """Integral of ``f`` over ``F`` by the trapezoid rule.

    Partial end cells are integrated with the linear interpolant, which makes
    the rule exact for piecewise-linear integrands; ``snap=True`` rounds the
    endpoints to the nearest nodes instead.
    """
    w = interval_weights(f.grid, F, snap)
    return complex(np.dot(w, np.asarray(f.values, dtype=np.complex128)))


def l2_norm_sq(f: ComplexField) -> float:
    v = f.values
    if not np.all(np.isfinite(v)):
        raise NumericError("l2_norm_sq on non-finite field")
    return float(np.dot(trapezoid_weights(len(v), f.grid.dx), np.abs(v) ** 2))


@lru_cache(maxsize=128)
def fd_weights(offsets: tuple[int, ...], deriv: int) -> np.ndarray:
    """Weights w with sum_j w_j f(x + o_j h) ~ h**deriv * f^(deriv)(x).

    Solves the Taylor moment conditions for the given integer offsets.
    """
    o = np.asarray(offsets, dtype=float)
    m = len(o)
    A = np.vander(o, m, increasing=True).T
    b = np.zeros(m)
    b[deriv] = math.factorial(deriv)
    return _frozen(np.linalg.solve(A, b))


def derivative(values: np.ndarray, dx: float, deriv: int = 1, order: int = 2) -> np.ndarray:
    """Finite-difference derivative along the last axis.

    Centred stencils in the interior; the stencil slides inward near the
    ends so boundary nodes get one-sided formulas of the same width.
    """
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    if deriv not in (1, 2):
        raise ValueError("deriv must be 1 or 2")
    v = np.asarray(values)
    n = v.shape[-1]
    # centred width for d1: order+1, for d2: order+1; one-sided needs one more for d2
    half = order // 2
    width = 2 * half + 1
    if n < width + 1:
        raise ValueError("too few points for the requested stencil")
    out = np.empty(v.shape, dtype=np.result_type(v.dtype, np.float64))
    wc = fd_weights(tuple(range(-half, half + 1)), deriv)
    interior = np.zeros(v.shape[:-1] + (n - 2 * half,), dtype=out.dtype)
    for j, w in enumerate(wc):
        interior += w * v[..., j : n - 2 * half + j]
    out[..., half : n - half] = interior
    side = width if deriv == 1 else width + 1
    for i in range(half):
        lo = tuple(range(-i, side - i))
        out[..., i] = np.tensordot(v[..., :side], fd_weights(lo, deriv), axes=([-1], [0]))
        hi = tuple(range(-(side - 1 - i), i + 1))
        out[..., n - 1 - i] = np.tensordot(v[..., n - side :], fd_weights(hi, deriv), axes=([-1], [0]))
    return out / dx**deriv

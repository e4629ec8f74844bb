"""Forward and backward stochastic walker ensembles driven by the drift of a
field history.

A walker moves by Euler-Maruyama, x <- x + b dt + sqrt(dt / mass) xi, with
b = eta + u evaluated on the history it is propagated through. For the
reversed history the current velocity flips sign while the osmotic one does
not, so the same update realises the backward process.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numba as nb
import numpy as np
from scipy import stats

from .errors import DomainError, PreconditionError
from .evolve import FieldHistory, TimeWindow
from .hydro import hydro_decompose
from .lattice import Grid, RealField, trapezoid_weights
from .rng import STREAM_BACKWARD, STREAM_FORWARD, STREAM_INIT, normal4, uniforms

__all__ = [
    "WalkerEnsemble",
    "TrajectorySet",
    "EnsembleStats",
    "ReversalReport",
    "StepSizeError",
    "sample_initial",
    "drift_table",
    "propagate",
    "stats_steps",
    "ensemble_stats",
    "reversal_compare",
    "ks_against_density",
    "path_roughness",
]


class StepSizeError(PreconditionError):
    """A walker left the box even after one reflection; dt is too large."""


@dataclass(frozen=True, eq=False)
class WalkerEnsemble:
    positions: np.ndarray
    seed: int
    grid: Grid

    def __post_init__(self):
        p = np.array(self.positions, dtype=float)
        if p.ndim != 1:
            raise ValueError("positions must be one-dimensional")
        if p.size and (p.min() < self.grid.x_min or p.max() > self.grid.x_max):
            raise DomainError("walker outside the grid box")
        p.setflags(write=False)
        object.__setattr__(self, "positions", p)

    @property
    def n(self) -> int:
        return self.positions.size

    @property
    def stream_offsets(self) -> np.ndarray:
        """Counter word identifying each walker's stream (its index)."""
        return np.arange(self.n, dtype=np.uint64)


@dataclass(frozen=True, eq=False)
class TrajectorySet:
    """Walker positions recorded at ``steps`` (indices into the window).

    ``paths[i, j]`` is walker i after ``steps[j]`` steps of its own clock.
    """

    window: TimeWindow
    paths: np.ndarray
    steps: np.ndarray
    direction: Literal["forward", "backward"]
    grid: Grid
    seed: int
    mass: float = 1.0

    @property
    def n(self) -> int:
        return self.paths.shape[0]

    def column(self, step: int) -> np.ndarray:
        j = np.searchsorted(self.steps, step)
        if j >= len(self.steps) or self.steps[j] != step:
            raise DomainError(f"step {step} was not recorded")
        return self.paths[:, j]

    def own_step(self, t: float) -> int:
        """Step index in this set's own clock for shared clock reading t."""
        k = self.window.step_of(t)
        return k if self.direction == "forward" else self.window.reversed_step(k)

    def to_csv(self, path, stride: int = 1, walker_stride: int = 1) -> None:
        """Columns walker_id, t (shared clock), x."""
        w = self.window
        clock = self.steps * w.dt
        if self.direction == "backward":
            clock = w.t0 - clock
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["walker_id", "t", "x"])
            for i in range(0, self.n, walker_stride):
                for j in range(0, len(self.steps), stride):
                    out.writerow([i, repr(float(clock[j])), repr(float(self.paths[i, j]))])


def _cdf(rho: RealField) -> np.ndarray:
    v = rho.values
    c = np.concatenate([[0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * rho.grid.dx)])
    return c


def sample_initial(rho: RealField, n: int, seed: int) -> WalkerEnsemble:
    """Inverse-CDF draw from a normalised density, linear between nodes."""
    c = _cdf(rho)
    if abs(c[-1] - 1.0) > 1e-6:
        raise PreconditionError(f"density not normalised: integral = {c[-1]:.9f}")
    if np.any(rho.values < 0):
        raise PreconditionError("density has negative values")
    if n == 0:
        return WalkerEnsemble(np.empty(0), seed, rho.grid)
    u = uniforms(n, seed, STREAM_INIT) * c[-1]
    # drop flat stretches so the inverse is single-valued
    keep = np.concatenate([[True], np.diff(c) > 0])
    x = np.interp(u, c[keep], rho.grid.x[keep])
    return WalkerEnsemble(np.clip(x, rho.grid.x_min, rho.grid.x_max), seed, rho.grid)


def drift_table(h: FieldHistory, bohmian: bool = False) -> np.ndarray:
    """Per-frame drift eta + u (eta alone if ``bohmian``), zero where masked."""
    out = np.empty((len(h), h.grid.n))
    for k in range(len(h)):
        f = hydro_decompose(h.frame(k), h.mass)
        b = f.eta.values if bohmian else f.eta.values + f.u.values
        out[k] = np.where(f.valid & np.isfinite(b), b, 0.0)
    return out


@nb.njit(nogil=True, cache=True)
def _walk(x0, lo, hi, drift, x_min, dx, dt, sigma, seed, stream, record, out, status):
    # step-major order keeps one drift row in cache for the whole chunk
    n_frames, n_nodes = drift.shape
    x_max = x_min + dx * (n_nodes - 1)
    n_steps = n_frames - 1
    x = x0[lo:hi].copy()
    z = np.zeros((hi - lo, 4))
    j = 0
    if record[0] == 0:
        out[lo:hi, 0] = x
        j = 1
    for k in range(n_steps):
        q = k & 3
        row = drift[k]
        for i in range(hi - lo):
            if status[lo + i] != 0:
                continue
            if q == 0 and sigma > 0.0:
                z[i, 0], z[i, 1], z[i, 2], z[i, 3] = normal4(k >> 2, lo + i, stream, seed)
            xi = x[i]
            s = (xi - x_min) / dx
            m = int(s)
            if m >= n_nodes - 1:
                m = n_nodes - 2
            a = s - m
            xi = xi + ((1.0 - a) * row[m] + a * row[m + 1]) * dt
            if sigma > 0.0:
                xi = xi + sigma * z[i, q]
            if xi < x_min:
                xi = 2.0 * x_min - xi
            elif xi > x_max:
                xi = 2.0 * x_max - xi
            if xi < x_min or xi > x_max:
                status[lo + i] = k + 1
            x[i] = xi
        if j < record.size and record[j] == k + 1:
            out[lo:hi, j] = x
            j += 1


def _split(n: int, parts: int) -> list[tuple[int, int]]:
    edges = np.linspace(0, n, parts + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def propagate(
    e: WalkerEnsemble,
    h: FieldHistory,
    kind: Literal["forward", "backward"],
    record_steps=None,
    threads: int = 0,
    bohmian: bool = False,
    drift: np.ndarray | None = None,
) -> TrajectorySet:
    """Euler-Maruyama walk through every frame interval of ``h``.

    ``kind`` must match the history's direction; the backward walk runs on
    the reversed history from its first frame. ``record_steps`` selects which
    step indices are stored (all by default). ``threads`` only splits the
    walker range; results never depend on it. ``bohmian`` drops the noise and
    the osmotic drift (debug mode).
    """
    if kind not in ("forward", "backward"):
        raise ValueError(f"unknown walk direction {kind!r}")
    if h.direction != kind:
        raise PreconditionError(f"{kind} walk needs a {kind} history, got {h.direction}")
    if e.grid != h.grid:
        raise PreconditionError("ensemble and history live on different grids")
    w = h.window
    if w.n_steps == 0:
        raise PreconditionError("cannot propagate through an empty window")
    rec = np.arange(w.n_steps + 1) if record_steps is None else np.unique(np.asarray(record_steps, dtype=np.int64))
    if rec.size == 0 or rec[0] < 0 or rec[-1] > w.n_steps:
        raise DomainError("record steps outside the window")
    D = drift_table(h, bohmian) if drift is None else drift
    sigma = 0.0 if bohmian else math.sqrt(w.dt / h.mass)
    stream = STREAM_FORWARD if kind == "forward" else STREAM_BACKWARD
    n = e.n
    out = np.full((n, rec.size), np.nan)
    status = np.zeros(n, dtype=np.int64)
    x0 = np.ascontiguousarray(e.positions)
    args = (D, h.grid.x_min, h.grid.dx, w.dt, sigma, np.uint64(e.seed & 0xFFFFFFFFFFFFFFFF), np.uint64(stream), rec, out, status)
    nthreads = threads if threads > 0 else (os.cpu_count() or 1)
    chunks = _split(n, max(1, min(nthreads, n)))
    if len(chunks) <= 1:
        for lo, hi in chunks:
            _walk(x0, lo, hi, *args)
    else:
        with ThreadPoolExecutor(len(chunks)) as pool:
            list(pool.map(lambda c: _walk(x0, c[0], c[1], *args), chunks))
    bad = np.flatnonzero(status)
    if bad.size:
        raise StepSizeError(
            f"{bad.size} walkers escaped the box (first: walker {bad[0]} at step {status[bad[0]]}); reduce dt"
        )
    return TrajectorySet(w, out, rec, kind, h.grid, e.seed, h.mass)


def stats_steps(window: TimeWindow, times, direction: str = "forward") -> np.ndarray:
    """Steps to record so :func:`ensemble_stats` can run at each clock time."""
    ks = []
    for t in times:
        k = window.step_of(t)
        if direction == "backward":
            k = window.reversed_step(k)
        ks += [k - 1, k, k + 1]
    ks = np.array(ks)
    return np.unique(ks[(ks >= 0) & (ks <= window.n_steps)])


@dataclass(frozen=True, eq=False)
class EnsembleStats:
    density: RealField
    mean_velocity: RealField
    counts: np.ndarray
    sem: np.ndarray


def _bin_index(x: np.ndarray, g: Grid) -> np.ndarray:
    return np.clip(np.rint((x - g.x_min) / g.dx).astype(np.int64), 0, g.n - 1)


def ensemble_stats(ts: TrajectorySet, t_c: float, bins: Grid | None = None) -> EnsembleStats:
    """Histogram density and per-bin mean velocity at clock time ``t_c``.

    Bins are node-centred cells of ``bins`` (default: the history grid), the
    two end cells being half width, so the trapezoid integral of the density
    is one. The velocity estimate is the centred difference
    (x[k+1] - x[k-1]) / (2 dt), binned by x[k]; its conditional mean is the
    current velocity, whereas a one-sided difference would pick up the
    osmotic drift as well. Empty bins hold NaN.
    """
    g = bins or ts.grid
    try:
        k = ts.own_step(t_c)
    except DomainError as exc:
        raise DomainError(f"t_c = {t_c} outside the window: {exc}") from None
    x = ts.column(k)
    n = x.size
    if n == 0:
        raise PreconditionError("empty trajectory set")
    idx = _bin_index(x, g)
    counts = np.bincount(idx, minlength=g.n)
    width = trapezoid_weights(g.n, g.dx)
    density = counts / (n * width)

    dt = ts.window.dt
    if 0 < k < ts.window.n_steps:
        v = (ts.column(k + 1) - ts.column(k - 1)) / (2.0 * dt)
    elif k == 0:
        v = (ts.column(1) - x) / dt
    else:
        v = (x - ts.column(k - 1)) / dt
    s1 = np.bincount(idx, weights=v, minlength=g.n)
    s2 = np.bincount(idx, weights=v * v, minlength=g.n)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = s1 / counts
        var = (s2 - counts * mean**2) / np.maximum(counts - 1, 1)
        sem = np.sqrt(np.maximum(var, 0.0) / counts)
    sem[counts < 2] = np.nan
    return EnsembleStats(RealField(g, density), RealField(g, mean), counts, sem)


@dataclass(frozen=True)
class ReversalReport:
    ks: float
    velocity_l2: float
    within_3se_fraction: float
    occupied_bins: int
    t_c: float


def reversal_compare(
    fwd: TrajectorySet, bwd: TrajectorySet, t_c: float, bins: Grid | None = None, min_count: int = 10
) -> ReversalReport:
    """Compare the two ensembles at the same clock reading.

    ``ks`` is the two-sample KS distance of positions; ``velocity_l2`` the L2
    norm of v_a + v_b over bins both occupy; ``within_3se_fraction`` the
    share of bins with at least ``min_count`` walkers in each set where
    |v_a + v_b| is within three combined standard errors. Symmetric in its
    arguments.
    """
    if fwd.window != bwd.window or fwd.grid != bwd.grid:
        raise PreconditionError("trajectory sets come from different windows or grids")
    a = ensemble_stats(fwd, t_c, bins)
    b = ensemble_stats(bwd, t_c, bins)
    xa = fwd.column(fwd.own_step(t_c))
    xb = bwd.column(bwd.own_step(t_c))
    ks = float(stats.ks_2samp(xa, xb).statistic)
    occ = (a.counts >= min_count) & (b.counts >= min_count)
    s = a.mean_velocity.values[occ] + b.mean_velocity.values[occ]
    se = np.sqrt(a.sem[occ] ** 2 + b.sem[occ] ** 2)
    g = a.density.grid
    l2 = float(math.sqrt(np.sum(s**2 * trapezoid_weights(g.n, g.dx)[occ]))) if occ.any() else 0.0
    frac = float(np.mean(np.abs(s) <= 3.0 * se)) if occ.any() else 1.0
    return ReversalReport(ks, l2, frac, int(occ.sum()), t_c)


def ks_against_density(samples: np.ndarray, rho: RealField) -> float:
    """One-sample KS distance between walker positions and a grid density."""
    c = _cdf(rho)
    c = c / c[-1]
    x = rho.grid.x
    return float(stats.kstest(samples, lambda s: np.interp(s, x, c)).statistic)


def path_roughness(ts: TrajectorySet, h: FieldHistory, drift: np.ndarray | None = None) -> float:
    """Mean of (dx - b dt)^2 / dt over consecutive recorded steps; equals
    twice the diffusion coefficient, 1 / mass, for a well-resolved walk."""
    D = drift_table(h) if drift is None else drift
    dt = ts.window.dt
    x = h.grid.x
    acc, cnt = 0.0, 0
    for j in range(len(ts.steps) - 1):
        k = int(ts.steps[j])
        if ts.steps[j + 1] != k + 1:
            continue
        xk = ts.paths[:, j]
        b = np.interp(xk, x, D[k])
        r = ts.paths[:, j + 1] - xk - b * dt
        acc += float(np.sum(r * r))
        cnt += r.size
    if cnt == 0:
        raise PreconditionError("no consecutive recorded steps")
    return acc / (cnt * dt)

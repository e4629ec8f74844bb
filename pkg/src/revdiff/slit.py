"""Two-slit transverse model: two Gaussian components evolved freely to a
screen time, with the four forward/backward intersection terms per screen
region.

P_jm pairs forward component j with backward (conjugated) component m. The
diagonal terms are real; the off-diagonal pair is complex conjugate, and
their sum carries the interference.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .borncalc import EpsSchedule, band_limit
from .errors import DegenerateInputError, PreconditionError
from .evolve import Potential, evolve_to
from .lattice import ComplexField, Grid, Interval, RealField, interval_weights, trapezoid_weights
from .states import gaussian, gaussian_evolved

__all__ = [
    "SlitConfig",
    "SlitRun",
    "FourTerms",
    "slit_state",
    "run_slit",
    "four_terms",
    "screen_profile",
    "analytic_profile",
    "dark_fringe",
    "fringe_peaks",
    "dark_fringes",
    "fringe_spacing",
    "write_fringe_csv",
    "screen_bins",
    "visibility",
    "overlap",
]


@dataclass(frozen=True)
class SlitConfig:
    d: float = 4.0
    sigma: float = 0.5
    k: float = 0.0
    t_screen: float = 5.0
    bins: int = 180

    def __post_init__(self):
        if not self.d >= 0:
            raise ValueError(f"slit separation must be non-negative, got {self.d}")
        if not self.sigma > 0:
            raise ValueError(f"slit width must be positive, got {self.sigma}")
        if not self.t_screen >= 0:
            raise ValueError(f"screen time must be non-negative, got {self.t_screen}")

    @property
    def far_field_spacing(self) -> float:
        """Two-source fringe spacing 2 pi t / d."""
        return 2.0 * math.pi * self.t_screen / self.d

    def check(self, g: Grid, tail: float = 1e-10) -> None:
        """Both packets, at the start and at the screen, must be negligible at the walls."""
        for t in (0.0, self.t_screen):
            for c in (-0.5 * self.d, 0.5 * self.d):
                ends = np.array([g.x_min, g.x_max])
                dens = np.abs(gaussian_evolved(ends, t, self.sigma, c, self.k)) ** 2
                if np.any(dens > tail):
                    raise PreconditionError(
                        f"slit packet at {c:+g} reaches the walls (density {dens.max():.2g} at t={t})"
                    )


def overlap(a: ComplexField, b: ComplexField) -> complex:
    """<a|b> by the trapezoid rule."""
    w = trapezoid_weights(a.grid.n, a.grid.dx)
    return complex(np.dot(w, np.conj(a.values) * b.values))


def _normaliser(psi1: ComplexField, psi2: ComplexField) -> float:
    z = 2.0 + 2.0 * overlap(psi1, psi2).real
    if z < 1e-10:
        raise DegenerateInputError(f"two-slit normalisation vanishes ({z:.3g})")
    return z


def slit_state(cfg: SlitConfig, g: Grid) -> tuple[ComplexField, ComplexField, ComplexField]:
    """Components at -d/2 and +d/2 and their normalised sum."""
    psi1 = gaussian(g, cfg.sigma, -0.5 * cfg.d, cfg.k)
    psi2 = gaussian(g, cfg.sigma, 0.5 * cfg.d, cfg.k)
    z = _normaliser(psi1, psi2)
    return psi1, psi2, ComplexField(g, (psi1.values + psi2.values) / math.sqrt(z))


@dataclass(frozen=True, eq=False)
class SlitRun:
    cfg: SlitConfig
    psi1: ComplexField
    psi2: ComplexField
    psi: ComplexField

    @property
    def normaliser(self) -> float:
        return _normaliser(self.psi1, self.psi2)


def run_slit(cfg: SlitConfig, g: Grid, n_steps: int, V: Potential | None = None) -> SlitRun:
    """Evolve both components (and, by linearity, their sum) to the screen."""
    cfg.check(g)
    V = V or Potential.free(g)
    p1, p2, _ = slit_state(cfg, g)
    q1 = evolve_to(p1, V, cfg.t_screen, n_steps)
    q2 = evolve_to(p2, V, cfg.t_screen, n_steps)
    z = _normaliser(q1, q2)
    return SlitRun(cfg, q1, q2, ComplexField(g, (q1.values + q2.values) / math.sqrt(z)))


@dataclass(frozen=True)
class FourTerms:
    P11: complex
    P22: complex
    P12: complex
    P21: complex
    normaliser: float

    @property
    def raw_total(self) -> complex:
        return self.P11 + self.P22 + self.P12 + self.P21

    @property
    def total(self) -> complex:
        """Probability for the normalised two-slit state."""
        return self.raw_total / self.normaliser

    @property
    def diagonal(self) -> float:
        """Mean of the two real terms, (P11 + P22) / 2."""
        return 0.5 * (self.P11 + self.P22).real


def four_terms(
    psi1: ComplexField,
    psi2: ComplexField,
    F: Interval,
    t_s: float = 0.0,
    V: Potential | None = None,
    n_steps: int = 0,
    sched: EpsSchedule | None = None,
) -> FourTerms:
    """eps-limit intersections of forward component j with backward
    component m over F.

    Components are taken as already at the screen unless ``t_s`` > 0, in
    which case both are first evolved for ``n_steps`` steps under ``V``.
    The symmetric band keeps P21 the exact conjugate of P12.
    """
    if t_s > 0:
        if n_steps < 1:
            raise PreconditionError("evolving to the screen needs n_steps >= 1")
        V = V or Potential.free(psi1.grid)
        psi1 = evolve_to(psi1, V, t_s, n_steps)
        psi2 = evolve_to(psi2, V, t_s, n_steps)
    sched = sched or EpsSchedule.geometric(psi1.grid)
    comps = (psi1, psi2)
    P = {}
    for j in (1, 2):
        for m in (1, 2):
            P[j, m], *_ = band_limit(comps[j - 1], comps[m - 1], F, sched, band="symmetric")
    return FourTerms(P[1, 1], P[2, 2], P[1, 2], P[2, 1], _normaliser(psi1, psi2))


def screen_bins(g: Grid, bins: int) -> list[Interval]:
    edges = np.linspace(g.x_min, g.x_max, bins + 1)
    return [Interval(float(a), float(b)) for a, b in zip(edges[:-1], edges[1:])]


def screen_profile(
    psi: ComplexField, t_s: float = 0.0, V: Potential | None = None, bins: int = 180, n_steps: int = 0
) -> RealField:
    """Probability per equal-width screen bin (sums to one), on the grid of
    bin centres. ``psi`` is evolved first when ``t_s`` > 0."""
    g = psi.grid
    if bins > g.n:
        raise PreconditionError(f"more bins ({bins}) than grid nodes ({g.n})")
    if t_s > 0:
        psi = evolve_to(psi, V or Potential.free(g), t_s, n_steps)
    rho = np.abs(psi.values) ** 2
    p = np.array([np.dot(interval_weights(g, F), rho) for F in screen_bins(g, bins)])
    p /= p.sum()
    h = (g.x_max - g.x_min) / bins
    return RealField(Grid(g.x_min + 0.5 * h, g.x_max - 0.5 * h, bins), p)


def analytic_profile(cfg: SlitConfig, x: np.ndarray) -> np.ndarray:
    """|psi(x, t_screen)|^2 of the free two-Gaussian state, in closed form."""
    a = gaussian_evolved(x, cfg.t_screen, cfg.sigma, -0.5 * cfg.d, cfg.k)
    b = gaussian_evolved(x, cfg.t_screen, cfg.sigma, 0.5 * cfg.d, cfg.k)
    z = 2.0 + 2.0 * math.exp(-(cfg.d**2) / (8.0 * cfg.sigma**2))
    return np.abs(a + b) ** 2 / z


def dark_fringe(cfg: SlitConfig, order: int = 1) -> float:
    """Location of the ``order``-th intensity minimum right of the centre
    drift line, by minimising the closed-form profile."""
    c = cfg.k * cfg.t_screen
    s = cfg.far_field_spacing
    guess = c + (order - 0.5) * s
    res = minimize_scalar(
        lambda x: float(analytic_profile(cfg, np.array([x]))[0]),
        bounds=(guess - 0.4 * s, guess + 0.4 * s),
        method="bounded",
        options={"xatol": 1e-10},
    )
    return float(res.x)


def _local_extrema(y: np.ndarray, kind: str) -> np.ndarray:
    i = np.arange(1, len(y) - 1)
    if kind == "max":
        sel = (y[i] > y[i - 1]) & (y[i] >= y[i + 1])
    else:
        sel = (y[i] < y[i - 1]) & (y[i] <= y[i + 1])
    return i[sel]


def fringe_peaks(profile: RealField, rel_height: float = 0.05) -> np.ndarray:
    """Sub-bin positions of local maxima above ``rel_height`` of the largest,
    refined by a parabola through each peak and its neighbours."""
    y = profile.values
    x = profile.grid.x
    idx = _local_extrema(y, "max")
    idx = idx[y[idx] >= rel_height * y.max()]
    out = []
    for i in idx:
        a, b, c = y[i - 1], y[i], y[i + 1]
        den = a - 2 * b + c
        shift = 0.5 * (a - c) / den if den != 0 else 0.0
        out.append(x[i] + shift * profile.grid.dx)
    return np.array(out)


def dark_fringes(profile: RealField, rel_height: float = 0.05) -> np.ndarray:
    """Sub-bin positions of the intensity minima lying between significant
    maxima, refined by a parabola through each minimum and its neighbours."""
    y = profile.values
    x = profile.grid.x
    peaks = _local_extrema(y, "max")
    peaks = peaks[y[peaks] >= rel_height * y.max()]
    if len(peaks) < 2:
        return np.array([])
    idx = _local_extrema(y, "min")
    idx = idx[(idx > peaks.min()) & (idx < peaks.max())]
    out = []
    for i in idx:
        a, b, c = y[i - 1], y[i], y[i + 1]
        den = a - 2 * b + c
        shift = 0.5 * (a - c) / den if den != 0 else 0.0
        out.append(x[i] + shift * profile.grid.dx)
    return np.array(out)


def fringe_spacing(profile: RealField, rel_height: float = 0.05) -> float:
    """Median gap between adjacent dark fringes; NaN with fewer than two.

    Minima are used rather than maxima because the envelope pulls the outer
    maxima towards the centre while barely moving the near-zero minima.
    """
    p = dark_fringes(profile, rel_height)
    if len(p) < 2:
        return math.nan
    return float(np.median(np.diff(p)))


def visibility(profile: RealField, rel_height: float = 0.05) -> float:
    """(I_max - I_min) / (I_max + I_min) for the central maximum and its
    adjacent minimum; zero when the profile has no interior minimum."""
    y = profile.values
    top = y.max()
    mins = _local_extrema(y, "min")
    mins = mins[y[mins] < top]
    # only minima between significant maxima count as fringes
    peaks = _local_extrema(y, "max")
    peaks = peaks[y[peaks] >= rel_height * top]
    if len(peaks) < 2:
        return 0.0
    mins = mins[(mins > peaks.min()) & (mins < peaks.max())]
    if len(mins) == 0:
        return 0.0
    centre = peaks[np.argmax(y[peaks])]
    m = mins[np.argmin(np.abs(mins - centre))]
    return float((y[centre] - y[m]) / (y[centre] + y[m]))


def write_fringe_csv(path, profile: RealField, terms: list[FourTerms]) -> None:
    """Columns x, intensity, P11_re, P22_re, P12_re, P12_im per screen bin."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "intensity", "P11_re", "P22_re", "P12_re", "P12_im"])
        for x, inten, t in zip(profile.grid.x, profile.values, terms):
            w.writerow([repr(float(v)) for v in (x, inten, t.P11.real, t.P22.real, t.P12.real, t.P12.imag)])

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from revdiff.errors import DomainError, PreconditionError
from revdiff.evolve import (
    HeatPropagator,
    Potential,
    TimeWindow,
    energy,
    evolve_heat,
    evolve_to,
    evolve_window,
    integrate_backward,
    stationary_state,
    step_schrodinger,
    time_reverse,
)
from revdiff.lattice import ComplexField, Grid, RealField, trapezoid_weights
from revdiff.states import gaussian, gaussian_evolved, well_eigenstate, well_energy


def _moments(f: ComplexField):
    w = trapezoid_weights(f.grid.n, f.grid.dx)
    rho = np.abs(f.values) ** 2
    mean = np.dot(w, rho * f.x)
    return mean, np.dot(w, rho * (f.x - mean) ** 2)


def test_window_steps_and_reverse():
    w = TimeWindow(1.0, 1000)
    assert w.dt == pytest.approx(1e-3)
    assert w.step_of(0.5) == 500
    assert w.reversed_step(200) == 800
    with pytest.raises(DomainError):
        w.step_of(0.50049)
    assert TimeWindow(1.0, 0).dt == 0.0


def test_norm_preserved_free_and_well(desk, well):
    w = TimeWindow(1.0, 1000)
    h = evolve_window(gaussian(desk), Potential.free(desk), w)
    assert np.max(np.abs(h.norms() - 1)) < 1e-10
    hw = evolve_window(well_eigenstate(well, 1), Potential.well(well), w)
    assert np.max(np.abs(hw.norms() - 1)) < 1e-10


def test_free_gaussian_matches_closed_form(desk):
    # variance 1 + t^2/4 for unit width, unit mass
    f = evolve_to(gaussian(desk), Potential.free(desk), 1.0, 1000)
    _, var = _moments(f)
    assert var == pytest.approx(1.25, abs=1e-4)
    exact = gaussian_evolved(desk.x, 1.0)
    assert np.max(np.abs(f.values - exact)) < 1e-4


def test_plane_wave_centroid_advances_with_group_velocity():
    g = Grid(-30.0, 30.0, 4097)
    f0 = gaussian(g, 2.0, 0.0, 1.5)
    f = evolve_to(f0, Potential.free(g), 0.5, 500, bc="periodic")
    mean, _ = _moments(f)
    assert mean == pytest.approx(0.75, abs=1e-4)


def test_well_ground_state_gets_phase(well):
    psi = well_eigenstate(well, 1)
    dt = 1e-3
    one = step_schrodinger(psi, Potential.well(well), dt)
    expected = psi.values * np.exp(-1j * well_energy(1) * dt)
    assert np.max(np.abs(one.values - expected)) < 1e-6


def test_discrete_stationary_state_keeps_density(desk):
    V = Potential.harmonic(desk)
    s = stationary_state(V)
    h = evolve_window(s, V, TimeWindow(1.0, 200))
    assert np.max(np.abs(np.abs(h.frames) - np.abs(s.values))) < 1e-6


def test_round_trip_by_conjugation(desk):
    V = Potential.harmonic(desk)
    f0 = gaussian(desk, 1.0, 1.0, 0.5)
    w = TimeWindow(1.0, 400)
    out = evolve_window(f0, V, w).last
    back = evolve_window(out.conj(), V, w).last.conj()
    assert np.sqrt(np.dot(trapezoid_weights(desk.n, desk.dx), np.abs(back.values - f0.values) ** 2)) < 1e-8


def test_time_reverse_involution_and_agrees_with_backward_solve(desk):
    V = Potential.free(desk)
    h = evolve_window(gaussian(desk, 1.0, 0.0, 1.0), V, TimeWindow(0.5, 100))
    r = time_reverse(h)
    assert r.direction == "backward"
    assert np.array_equal(time_reverse(r).frames, h.frames)
    assert np.array_equal(r.frame_at(0.2).values, h.frame_at(0.2).conj().values)
    ind = integrate_backward(h, V)
    assert np.max(np.abs(ind.frames - r.frames)) < 1e-10


def test_energy_is_conserved(desk):
    V = Potential.harmonic(desk)
    f0 = gaussian(desk, 0.7, 1.0, 1.0)
    h = evolve_window(f0, V, TimeWindow(1.0, 300))
    assert abs(energy(h.last, V) - energy(f0, V)) < 1e-10


def test_unnormalized_initial_state_rejected(desk):
    f = gaussian(desk).scaled(2.0)
    with pytest.raises(PreconditionError):
        evolve_window(f, Potential.free(desk), TimeWindow(1.0, 10))
    evolve_window(f, Potential.free(desk), TimeWindow(1.0, 2), allow_unnormalized=True)


def test_zero_step_window_returns_initial_frame(desk):
    h = evolve_window(gaussian(desk), Potential.free(desk), TimeWindow(1.0, 0))
    assert len(h) == 1


def test_history_csv_has_shared_clock(desk, tmp_path):
    h = evolve_window(gaussian(Grid(-5.0, 5.0, 16)), Potential.free(Grid(-5.0, 5.0, 16)), TimeWindow(1.0, 4), allow_unnormalized=True)
    r = time_reverse(h)
    p = tmp_path / "h.csv"
    r.to_csv(p, stride=4)
    rows = p.read_text().splitlines()
    assert rows[0] == "t,x,re,im"
    assert rows[1].startswith("1.0,")


# heat equation


def test_heat_conserves_mass_and_spreads(desk):
    rho = RealField(desk, gaussian(desk).density().values)
    frames = evolve_heat(rho, 0.5, TimeWindow(1.0, 100))
    w = trapezoid_weights(desk.n, desk.dx)
    assert np.dot(w, frames[-1]) == pytest.approx(1.0, abs=1e-10)
    var = lambda r: np.dot(w, r * desk.x**2)
    assert var(frames[-1]) - var(frames[0]) == pytest.approx(2 * 0.5 * 1.0, rel=1e-6)


@given(D=st.floats(0.01, 2.0), mode=st.integers(1, 100))
def test_heat_amplification_matches_discrete_symbol(D, mode):
    g = Grid(0.0, 10.0, 201)
    dt = 1e-3
    k = mode * math.pi / g.length
    c = np.cos(k * (g.x - g.x_min))
    prop = HeatPropagator(g, D, dt)
    assert np.allclose(prop.apply(c), prop.amplification(k) * c, atol=1e-10)
    assert 0 < prop.amplification(k) <= 1


def test_negative_diffusion_needs_demo_and_amplifies():
    g = Grid(0.0, 10.0, 201)
    with pytest.raises(PreconditionError):
        HeatPropagator(g, -0.5, 1e-3)
    demo = HeatPropagator(g, -0.5, 1e-3, demo=True)
    assert demo.amplification(5 * math.pi / g.length) > 1

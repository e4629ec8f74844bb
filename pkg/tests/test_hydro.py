import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from revdiff.errors import DegenerateInputError, PreconditionError
from revdiff.evolve import Potential, TimeWindow, evolve_window
from revdiff.hydro import (
    continuity_residual,
    hydro_decompose,
    kinetic_energy,
    newton_residual,
    velocity_reversal_check,
)
from revdiff.lattice import ComplexField, Grid
from revdiff.states import gaussian, harmonic_ground, well_eigenstate


def test_plane_wave_has_uniform_current_velocity(desk):
    h = hydro_decompose(ComplexField(desk, np.exp(3j * desk.x)))
    inner = ~h.boundary
    assert np.max(np.abs(h.eta.values[inner] - 3.0)) < 1e-5
    assert np.max(np.abs(h.u.values)) < 1e-12


def test_real_gaussian_fields(desk):
    # oracle: u = -x and Q = (1 - x^2) / 2 for exp(-x^2/2) / pi^(1/4)
    h = hydro_decompose(harmonic_ground(desk))
    core = h.valid & (np.abs(desk.x) < 3)
    assert np.max(np.abs(h.eta.values[core])) < 1e-12
    assert np.max(np.abs(h.u.values[core] + desk.x[core])) < 5e-5
    assert np.max(np.abs(h.Q.values[core] - (1 - desk.x[core] ** 2) / 2)) < 1e-6


def test_masking_below_density_floor(desk):
    h = hydro_decompose(harmonic_ground(desk))
    assert not h.valid[0] and h.valid[desk.n // 2]
    assert np.isnan(h.u.values[0])


def test_zero_field_is_degenerate(desk):
    with pytest.raises(DegenerateInputError):
        hydro_decompose(ComplexField(desk, np.zeros(desk.n)))


@pytest.mark.parametrize(
    "make, oracle",
    [
        (lambda g, w: harmonic_ground(g), 0.25),
        (lambda g, w: gaussian(g, 2.0, 0.0, 3.0), 4.5 + 1 / 32),  # k0^2/2 + 1/(8 sigma^2)
        (lambda g, w: well_eigenstate(w, 1), math.pi**2 / 2),
    ],
)
def test_kinetic_energy_two_ways(desk, well, make, oracle):
    lhs, rhs = kinetic_energy(make(desk, well))
    assert lhs == pytest.approx(oracle, rel=1e-4)
    assert rhs == pytest.approx(lhs, rel=1e-4)


@given(mass=st.sampled_from([1.0, 3.0, 10.0, 100.0]), k=st.floats(-2.0, 2.0))
def test_velocities_scale_inversely_with_mass(mass, k):
    g = Grid(-15.0, 15.0, 1024)
    f = gaussian(g, 1.0, 0.0, k)
    a, b = hydro_decompose(f, 1.0), hydro_decompose(f, mass)
    v = a.valid
    scale = np.max(np.abs(a.u.values[v]))
    assert np.max(np.abs(b.u.values[v] * mass - a.u.values[v])) <= 1e-12 * scale
    assert np.allclose(b.eta.values[v] * mass, a.eta.values[v], atol=1e-12)


def test_reversed_history_negates_current_velocity(desk):
    h = evolve_window(gaussian(desk, 1.0, 0.0, 2.0), Potential.free(desk), TimeWindow(0.5, 200))
    assert velocity_reversal_check(h, n_samples=5) < 1e-10


def test_continuity_residual_is_second_order(desk):
    w = TimeWindow(0.5, 250)
    r1 = continuity_residual(evolve_window(gaussian(desk, 1.0, 0.0, 2.0), Potential.free(desk), w))
    g2 = Grid(desk.x_min, desk.x_max, 2 * desk.n - 1)
    r2 = continuity_residual(evolve_window(gaussian(g2, 1.0, 0.0, 2.0), Potential.free(g2), TimeWindow(0.5, 500)))
    assert np.max(r1.values) < 5e-3
    assert np.max(r1.values) / np.max(r2.values) == pytest.approx(4.0, rel=0.15)


def test_continuity_needs_three_frames(desk):
    h = evolve_window(gaussian(desk), Potential.free(desk), TimeWindow(1.0, 1))
    with pytest.raises(PreconditionError):
        continuity_residual(h)


def test_material_form_of_newton_equation_holds_for_free_packet(desk):
    V = Potential.free(desk)
    h = evolve_window(gaussian(desk), V, TimeWindow(0.2, 200))
    res = newton_residual(h, V)
    # the partial-derivative form misses the convective term
    assert res.material < 1e-3
    assert res.as_printed > 10 * res.material

import math
import warnings

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from revdiff.borncalc import (
    ConvergenceWarning,
    EpsSchedule,
    band_integral,
    born_limit,
    cross_term,
    expand_in_basis,
    intersection_probability_eps,
    richardson,
    state_probabilities,
)
from revdiff.errors import PreconditionError
from revdiff.lattice import ComplexField, Grid, Interval, integrate
from revdiff.states import gaussian_bump, well_basis, well_eigenstate

X = sp.symbols("x", real=True)


def _well_mass(n: int, m: int, a, b):
    """Exact integral of psi_n psi_m over [a, b] in the unit well."""
    return sp.integrate(2 * sp.sin(n * sp.pi * X) * sp.sin(m * sp.pi * X), (X, a, b))


@pytest.fixture(scope="module")
def sched(well):
    return EpsSchedule.geometric(well)


@pytest.fixture(scope="module")
def superposition(well):
    a, b = well_eigenstate(well, 1), well_eigenstate(well, 2)
    return ComplexField(well, (a.values + 1j * b.values) / math.sqrt(2))


def test_schedule_validation(well):
    with pytest.raises(ValueError):
        EpsSchedule((0.1, 0.2))
    with pytest.raises(PreconditionError):
        EpsSchedule((well.dx,)).check(well)


@given(coeffs=st.lists(st.floats(-3, 3), min_size=3, max_size=3), limit=st.floats(-2, 2))
def test_richardson_removes_listed_powers(coeffs, limit):
    eps = np.array([0.4, 0.2, 0.1, 0.05])
    vals = limit + coeffs[0] * eps**2 + coeffs[1] * eps**3 + coeffs[2] * eps**4
    best, running, _ = richardson(vals, eps, (2, 3, 4))
    assert best.real == pytest.approx(limit, abs=1e-10)
    assert len(running) == 4


def test_ground_state_half_and_quarter(well, sched):
    psi = well_eigenstate(well, 1)
    exact_quarter = float(_well_mass(1, 1, 0, sp.Rational(1, 4)))
    assert exact_quarter == pytest.approx(0.25 - 1 / (2 * math.pi), abs=1e-15)
    assert born_limit(psi, Interval(0.0, 0.5), sched).value == pytest.approx(0.5, abs=1e-4)
    assert born_limit(psi, Interval(0.0, 0.25), sched).value == pytest.approx(exact_quarter, abs=1e-3)


def test_whole_line_is_one_despite_cross_terms(superposition, sched):
    assert born_limit(superposition, Interval.whole(), sched).value == pytest.approx(1.0, abs=1e-6)


@given(a=st.floats(0.0, 0.9), w=st.floats(0.05, 0.5))
def test_limit_agrees_with_direct_quadrature(superposition, sched, a, w):
    F = Interval(a, min(a + w, 1.0))
    direct = integrate(superposition.density(), F).real
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        b = born_limit(superposition, F, sched)
    assert b.value == pytest.approx(direct, abs=2e-4)
    assert abs(b.imag) < 1e-6


def test_imaginary_part_shrinks_along_schedule(superposition, sched):
    F = Interval(0.0, 0.5)
    ims = [abs(intersection_probability_eps(superposition, F, e).imag) for e in sched.values]
    assert ims[0] > 1e-5
    assert all(b <= 1.1 * a for a, b in zip(ims, ims[1:]))


def test_symmetric_band_gives_conjugate_orientation(well):
    f = well_eigenstate(well, 1)
    g = ComplexField(well, 1j * well_eigenstate(well, 3).values)
    F = Interval(0.1, 0.45)
    e = 8 * well.dx
    a = band_integral(f, g, F, e, "symmetric")
    b = band_integral(g, f, F, e, "symmetric")
    assert a == b.conjugate()


def test_eps_below_two_cells_rejected(well):
    f = well_eigenstate(well, 1)
    with pytest.raises(PreconditionError):
        band_integral(f, f, Interval.whole(), well.dx)


def test_eigen_probabilities_and_cross_terms(superposition, well, sched):
    ex = expand_in_basis(superposition, well_basis(well, 2))
    p, total = state_probabilities(ex)
    assert np.allclose(p, 0.5, atol=1e-8)
    assert abs(cross_term(ex, 1, 2, Interval.whole(), sched)) < 1e-8
    # c1 conj(c2) times the exact mixed overlap on [0, 1/2]
    overlap = float(_well_mass(1, 2, 0, sp.Rational(1, 2)))
    assert overlap == pytest.approx(4 / (3 * math.pi), abs=1e-15)
    expected = ex.coeffs[0] * np.conj(ex.coeffs[1]) * overlap
    assert cross_term(ex, 1, 2, Interval(0.0, 0.5), sched) == pytest.approx(expected, abs=1e-4)
    with pytest.raises(PreconditionError):
        cross_term(ex, 1, 1, Interval.whole(), sched)


def test_bump_expansion_is_complete(well):
    ex = expand_in_basis(gaussian_bump(well), well_basis(well, 64))
    _, total = state_probabilities(ex)
    assert ex.residual < 1e-6
    assert total == pytest.approx(1.0, abs=1e-8)


def test_non_orthonormal_basis_rejected(well):
    f = well_eigenstate(well, 1)
    with pytest.raises(PreconditionError):
        expand_in_basis(f, [f, f])


def test_convergence_table_csv(well, sched, tmp_path):
    b = born_limit(well_eigenstate(well, 1), Interval(0.0, 0.5), sched)
    b.to_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "eps,value_re,value_im,extrapolated"
    assert len(lines) == 1 + len(sched.values)

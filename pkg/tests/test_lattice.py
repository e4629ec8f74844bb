import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from revdiff.errors import DomainError, NumericError
from revdiff.lattice import (
    ComplexField,
    Grid,
    Interval,
    RealField,
    derivative,
    fd_weights,
    integrate,
    interval_weights,
    l2_norm_sq,
    trapezoid_weights,
)


def test_grid_rejects_tiny_and_inverted():
    with pytest.raises(ValueError):
        Grid(0.0, 1.0, 4)
    with pytest.raises(ValueError):
        Grid(1.0, 0.0, 16)
    assert Grid(-1.0, 1.0, 21).dx == pytest.approx(0.1)


def test_nonfinite_field_rejected():
    g = Grid(0.0, 1.0, 8)
    with pytest.raises(NumericError):
        ComplexField(g, [np.nan] + [0.0] * 7)


def test_trapezoid_integrates_constant_exactly():
    g = Grid(-3.0, 5.0, 101)
    assert integrate(RealField(g, np.ones(g.n)), Interval.whole()).real == pytest.approx(8.0, abs=1e-13)


@given(
    a=st.floats(-2.0, 2.0),
    width=st.floats(0.0, 2.0),
    slope=st.floats(-5.0, 5.0),
    offset=st.floats(-5.0, 5.0),
)
def test_partial_cells_exact_for_linear(a, width, slope, offset):
    g = Grid(-2.0, 2.0, 41)
    b = min(a + width, 2.0)
    f = RealField(g, slope * g.x + offset)
    exact = 0.5 * slope * (b * b - a * a) + offset * (b - a)
    assert integrate(f, Interval(a, b)).real == pytest.approx(exact, abs=1e-12)


@given(cut=st.floats(-1.9, 1.9))
def test_interval_additivity(cut):
    g = Grid(-2.0, 2.0, 57)
    w = interval_weights(g, Interval(-2.0, cut)) + interval_weights(g, Interval(cut, 2.0))
    assert np.allclose(w, trapezoid_weights(g.n, g.dx), atol=1e-15)


def test_interval_outside_grid_raises():
    with pytest.raises(DomainError):
        interval_weights(Grid(0.0, 1.0, 11), Interval(-1.0, 0.5))


def test_snap_uses_nearest_nodes():
    g = Grid(0.0, 1.0, 11)
    i0, i1, moved = Interval(0.26, 0.74).snap(g)
    assert (i0, i1) == (3, 7)
    assert moved == pytest.approx(0.04)


def test_fd_weights_classic_stencils():
    assert np.allclose(fd_weights((-1, 0, 1), 1), [-0.5, 0.0, 0.5])
    assert np.allclose(fd_weights((-1, 0, 1), 2), [1.0, -2.0, 1.0])
    assert np.allclose(fd_weights((-2, -1, 0, 1, 2), 1), np.array([1, -8, 0, 8, -1]) / 12)


@pytest.mark.parametrize("order", [2, 4])
def test_derivative_convergence_order(order):
    errs = []
    for n in (101, 201):
        g = Grid(0.0, 2.0, n)
        d = derivative(np.sin(3 * g.x), g.dx, 1, order)
        errs.append(np.max(np.abs(d - 3 * np.cos(3 * g.x))))
    assert math.log2(errs[0] / errs[1]) == pytest.approx(order, abs=0.3)


def test_csv_round_trip(tmp_path):
    g = Grid(-1.0, 1.0, 9)
    f = ComplexField(g, np.exp(1j * g.x) * (1 + g.x**2))
    f.to_csv(tmp_path / "f.csv")
    back = ComplexField.from_csv(tmp_path / "f.csv")
    assert back.grid == g
    assert np.array_equal(back.values, f.values)


def test_norm_of_normalized_field():
    g = Grid(-10.0, 10.0, 401)
    f = ComplexField(g, np.exp(-g.x**2) + 0j).normalized()
    assert l2_norm_sq(f) == pytest.approx(1.0, abs=1e-14)

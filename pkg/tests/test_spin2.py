import cmath
import math

import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from revdiff.errors import DegenerateInputError
from revdiff.spin2 import (
    DOWN,
    UP,
    SpinState,
    UndefinedPairingError,
    basis_bra,
    basis_ket,
    exclusivity_sum_check,
    make_spin_state,
    orthonormality_table,
    spin_probability,
    star,
)

amp = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)


@st.composite
def states(draw):
    a, b = draw(amp), draw(amp)
    if abs(a) + abs(b) < 1e-3:
        a = 1.0
    return make_spin_state(a, b, normalize=True)


def test_exact_three_four_five():
    s = make_spin_state(sp.Rational(3, 5), sp.Rational(4, 5) * sp.I)
    assert spin_probability(s, UP) == sp.Rational(9, 25)
    assert spin_probability(s, DOWN) == sp.Rational(16, 25)
    assert star(s.bra(), s.ket()) == 1


def test_equal_weight_state_with_imaginary_phase():
    r = 1 / sp.sqrt(2)
    s = make_spin_state(r, sp.I * r)
    assert sp.simplify(spin_probability(s, UP)) == sp.Rational(1, 2)


def test_orthonormality_table():
    assert orthonormality_table() == {("up", "up"): 1, ("up", "down"): 0, ("down", "up"): 0, ("down", "down"): 1}


def test_same_side_pairing_undefined():
    with pytest.raises(UndefinedPairingError):
        star(basis_ket(UP), basis_ket(UP))
    with pytest.raises(UndefinedPairingError):
        star(basis_bra(UP), basis_bra(DOWN))


def test_zero_and_unnormalized_states():
    with pytest.raises(DegenerateInputError):
        make_spin_state(0, 0)
    with pytest.raises(ValueError):
        make_spin_state(1, 1)


@given(states())
def test_up_amplitude_and_duality(s):
    assert star(basis_bra(UP), s.ket()) == s.c1
    assert s.bra().components == (s.c1.conjugate(), s.c2.conjugate())


@given(states(), states())
def test_pairing_is_hermitian(a, b):
    assert star(a.bra(), b.ket()) == pytest.approx(star(b.bra(), a.ket()).conjugate(), abs=1e-15)


@given(states(), st.floats(0, 2 * math.pi))
def test_global_phase_invariance(s, theta):
    t = s.phased(cmath.exp(1j * theta))
    for o in (UP, DOWN):
        assert abs(spin_probability(t, o) - spin_probability(s, o)) <= 1e-15


@given(states())
def test_completeness(s):
    assert spin_probability(s, UP) + spin_probability(s, DOWN) == pytest.approx(1.0, abs=1e-15)


def test_exclusivity_with_exact_probes():
    r = 1 / sp.sqrt(2)
    probes = {"real_probe": SpinState(r, r), "imag_probe": SpinState(r, sp.I * r)}
    rep = exclusivity_sum_check(make_spin_state(sp.Rational(3, 5), sp.Rational(4, 5)), probes=probes)
    assert rep.state.S3 == 0 and rep.state.S4 == 0
    assert sp.simplify(rep.state.total) == 1
    assert sp.simplify(rep.offdiag_re) == 0 and sp.simplify(rep.offdiag_im) == 0


def test_probes_detect_a_nonzero_mixed_pairing():
    # a hypothetical mixed pairing g shows up as Re g and Im g in the two probes
    g = 0.25 + 0.5j
    rep = exclusivity_sum_check(make_spin_state(0.6, 0.8), offdiag=g)
    assert rep.offdiag_re == pytest.approx(0.25)
    assert rep.offdiag_im == pytest.approx(0.5)
    assert not rep.ok

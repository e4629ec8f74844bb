import pytest
from hypothesis import given
from hypothesis import strategies as st

from revdiff.errors import UndefinedByTheoryError
from revdiff.eventcalc import (
    EventMeasure,
    HyperSampleSpace,
    decompose_event,
    entangled_pair_solve,
    hyper_measure_check,
)

finite = st.floats(-10, 10, allow_nan=False)


@given(re=finite, im=finite)
def test_entangled_pair_identities(re, im):
    pair = entangled_pair_solve(complex(re, im))
    assert pair.s.imag == 0.0
    assert pair.z2 == pair.z1.conjugate()
    assert pair.d2 == pair.d1.conjugate()
    r = pair.residuals()
    scale = max(1.0, abs(pair.z1) ** 2)
    assert max(r.values()) <= 1e-15 * scale


def test_worked_pair():
    pair = entangled_pair_solve(0.6 + 0.3j)
    assert pair.s.real == pytest.approx(0.45)
    assert pair.d1 == pytest.approx(0.15 + 0.3j)


def test_nonfinite_pair_rejected():
    with pytest.raises(ValueError):
        entangled_pair_solve(complex("nan"))


@given(re=finite, im=finite, s=st.floats(0, 1))
def test_decomposition_of_conjugate_pair(re, im, s):
    z = complex(re, im)
    d = decompose_event(z, z.conjugate(), s)
    assert d.consistent
    assert d.d1 == d.d2.conjugate()


def test_decomposition_cases():
    assert decompose_event(0.3, 0.3, 0.3).case == "degenerate"
    assert decompose_event(0.5, 0.5, 0.3).case == "real"
    assert decompose_event(0.5 + 0.1j, 0.5 - 0.1j, 0.3).case == "complex"
    assert not decompose_event(0.5 + 0.1j, 0.5 + 0.1j, 0.3).consistent


@pytest.mark.parametrize(
    "args, ok",
    [
        ((1, 0.2 + 0.1j, -0.2 - 0.1j), True),
        ((1, 0.3, -0.3), False),
        ((0.9, 0.2 + 0.1j, -0.2 - 0.1j), False),
        ((1, 0.2 + 0.1j, 0.2 + 0.1j), False),
        ((1, 0, 0), True),
    ],
)
def test_hyper_truth_table(args, ok):
    assert hyper_measure_check(*args).ok is ok


def test_real_valued_hyper_parts_flagged():
    c = hyper_measure_check(1, 0.3, -0.3)
    assert c.sum_ok and c.real_valued_J and not c.ok


def test_real_event_cannot_carry_complex_measure():
    with pytest.raises(ValueError):
        EventMeasure("E", 0.5 + 0.1j, "real")


def test_sample_space_combinations():
    sp = HyperSampleSpace.from_split(0.5 + 0.2j, 0.5 - 0.2j, 0.4)
    assert sp.intersection("T", "S") == 0.4
    # union by inclusion-exclusion through the registered intersection
    assert sp.union("T", "S") == pytest.approx(0.5 + 0.2j)
    with pytest.raises(UndefinedByTheoryError):
        sp.union("T", "A")
    with pytest.raises(UndefinedByTheoryError):
        sp.define_intersection("T-S", "A-S", 0.0)

"""Two-level quasi-probability algebra with forward (ket) and backward (bra)
sides and the pairing between them.

Arithmetic is generic: components may be Python numbers or exact numbers
(anything with ``conjugate()``, e.g. sympy), so identities can be checked
exactly when the inputs are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Literal

from .errors import DegenerateInputError, UndefinedByTheoryError

__all__ = [
    "UP",
    "DOWN",
    "PAIRING",
    "UndefinedPairingError",
    "SpinSide",
    "SpinState",
    "make_spin_state",
    "basis_ket",
    "basis_bra",
    "star",
    "spin_probability",
    "StateSums",
    "ExclusivityReport",
    "exclusivity_sum_check",
    "PROBES",
    "orthonormality_table",
]

UP, DOWN = 0, 1
LABELS = {UP: "up", DOWN: "down"}

# value of the pairing between basis labels (bra label, ket label)
PAIRING = {(UP, UP): 1, (DOWN, DOWN): 1, (UP, DOWN): 0, (DOWN, UP): 0}


class UndefinedPairingError(UndefinedByTheoryError):
    """Pairing of two kets or two bras."""


def _conj(z):
    return z.conjugate()


def _abs2(z):
    p = z * _conj(z)
    return p.real if isinstance(p, complex) else p


@dataclass(frozen=True)
class SpinSide:
    side: Literal["ket", "bra"]
    components: tuple

    def __post_init__(self):
        if self.side not in ("ket", "bra"):
            raise ValueError(f"side must be 'ket' or 'bra', got {self.side!r}")
        if len(self.components) != 2:
            raise ValueError("a two-level side has exactly two components")

    def scaled(self, c) -> "SpinSide":
        return SpinSide(self.side, tuple(c * a for a in self.components))

    def __add__(self, other: "SpinSide") -> "SpinSide":
        if other.side != self.side:
            raise UndefinedPairingError("cannot add a bra to a ket")
        return SpinSide(self.side, tuple(a + b for a, b in zip(self.components, other.components)))

    def dual(self) -> "SpinSide":
        """The partner side: conjugated components on the other side."""
        return SpinSide("bra" if self.side == "ket" else "ket", tuple(_conj(a) for a in self.components))


def basis_ket(label: int) -> SpinSide:
    return SpinSide("ket", (1, 0) if label == UP else (0, 1))


def basis_bra(label: int) -> SpinSide:
    return SpinSide("bra", (1, 0) if label == UP else (0, 1))


@dataclass(frozen=True)
class SpinState:
    c1: Any
    c2: Any

    def ket(self) -> SpinSide:
        return SpinSide("ket", (self.c1, self.c2))

    def bra(self) -> SpinSide:
        return self.ket().dual()

    def norm_sq(self):
        return _abs2(self.c1) + _abs2(self.c2)

    def phased(self, phase) -> "SpinState":
        return SpinState(phase * self.c1, phase * self.c2)

    def amplitude(self, label: int):
        return self.c1 if label == UP else self.c2


def make_spin_state(c1, c2, normalize: bool = False, tol: float = 1e-9) -> SpinState:
    """Validated state c1 |up> + c2 |down>.

    With ``normalize`` the amplitudes are rescaled to unit norm; otherwise
    the norm must already be one within ``tol``.
    """
    s = SpinState(c1, c2)
    n2 = s.norm_sq()
    if n2 == 0:
        raise DegenerateInputError("zero spin vector")
    if normalize:
        r = n2 ** 0.5
        return SpinState(c1 / r, c2 / r)
    if abs(complex(n2) - 1.0) > tol:
        raise ValueError(f"|c1|^2 + |c2|^2 = {complex(n2).real:.12g}, not 1")
    return s


def star(bra: SpinSide, ket: SpinSide):
    """Pairing of a backward side with a forward side, bilinear in the
    components, with the basis values fixed by :data:`PAIRING`."""
    if bra.side != "bra" or ket.side != "ket":
        raise UndefinedPairingError(f"pairing needs (bra, ket), got ({bra.side}, {ket.side})")
    total = 0
    for i, b in enumerate(bra.components):
        for j, k in enumerate(ket.components):
            v = PAIRING[i, j]
            if v:
                total = total + b * v * k
    return total


def _project(side: SpinSide, label: int) -> SpinSide:
    comps = [0, 0]
    comps[label] = side.components[label]
    return SpinSide(side.side, tuple(comps))


def spin_probability(state: SpinState, outcome: int):
    """P(outcome) as the pairing of the state's bra and ket restricted to that
    label: c c* times the basis pairing, i.e. |c|^2."""
    p = star(_project(state.bra(), outcome), _project(state.ket(), outcome))
    return p.real if isinstance(p, complex) else p


@dataclass(frozen=True)
class StateSums:
    """The four disjoint pieces of 'up or down' for one state.

    S1, S2: both sides agree (up/up, down/down); S3: forward up with
    backward down; S4: forward down with backward up.
    """

    S1: Any
    S2: Any
    S3: Any
    S4: Any

    @property
    def total(self):
        return self.S1 + self.S2 + self.S3 + self.S4


def _sums(state: SpinState, offdiag) -> StateSums:
    c1, c2 = state.c1, state.c2
    up_up, down_down = PAIRING[UP, UP], PAIRING[DOWN, DOWN]
    return StateSums(
        c1 * _conj(c1) * up_up,
        c2 * _conj(c2) * down_down,
        c1 * _conj(c2) * offdiag,
        c2 * _conj(c1) * _conj(offdiag),
    )


_R = 2 ** -0.5
PROBES = {"real_probe": SpinState(_R, _R), "imag_probe": SpinState(_R, 1j * _R)}


@dataclass(frozen=True)
class ExclusivityReport:
    state: StateSums
    probes: dict
    offdiag_re: Any  # recovered from the real probe: total - 1
    offdiag_im: Any  # recovered from the imaginary probe: total - 1

    @property
    def ok(self) -> bool:
        vals = [self.state.S3, self.state.S4, self.offdiag_re, self.offdiag_im]
        return all(v == 0 for v in vals) and self.state.total == 1


def exclusivity_sum_check(state: SpinState, offdiag=None, probes: dict | None = None) -> ExclusivityReport:
    """Split P(up or down) into four pieces and recover the off-diagonal
    pairing from two probe states.

    With mixed pairing value g (up ket with down bra), the total is
    1 + 2 Re(c1 c2* g). The probe (1, 1)/sqrt 2 makes the excess Re g and
    the probe (1, i)/sqrt 2 makes it Im g. ``offdiag`` defaults to the fixed
    pairing value; pass another value to see the probes detect it.
    ``probes`` may supply exact versions of the two probe states.
    """
    g = PAIRING[UP, DOWN] if offdiag is None else offdiag
    probes = probes or PROBES
    sums = {name: _sums(s, g) for name, s in probes.items()}
    re = sums["real_probe"].total - 1
    im = sums["imag_probe"].total - 1
    return ExclusivityReport(_sums(state, g), sums, re, im)


def orthonormality_table() -> dict:
    """star(<a|, |b>) for every pair of basis labels."""
    return {
        (LABELS[a], LABELS[b]): star(basis_bra(a), basis_ket(b)) for a in (UP, DOWN) for b in (UP, DOWN)
    }

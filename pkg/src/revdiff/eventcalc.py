"""Measure-level calculus of real and non-real events with complex measures.

Events are labels carrying a measure value. Real events (inside the sample
space of physical outcomes) must carry real measures; forward-only and
backward-only pieces may carry complex ones. The only combinations defined
are those between a non-real event and a real one, or between two real
events; anything else raises :class:`UndefinedByTheoryError`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

from .errors import UndefinedByTheoryError

__all__ = [
    "EventMeasure",
    "EntangledPair",
    "entangled_pair_solve",
    "EventDecomposition",
    "decompose_event",
    "HyperCheck",
    "hyper_measure_check",
    "HyperSampleSpace",
    "UndefinedByTheoryError",
]

Kind = Literal["real", "forward", "backward", "hyper"]


@dataclass(frozen=True)
class EventMeasure:
    label: str
    value: complex
    kind: Kind = "real"

    def __post_init__(self):
        v = complex(self.value)
        if self.kind == "real" and v.imag != 0.0:
            raise ValueError(f"real event {self.label!r} cannot carry complex measure {v}")
        object.__setattr__(self, "value", v)

    @property
    def is_real(self) -> bool:
        return self.kind == "real"


@dataclass(frozen=True)
class EntangledPair:
    """Two always-co-occurring events extended to artificially independent
    ones: z1 = s + d1, z2 = s + d2 with s = z1 z2 real."""

    z1: complex
    z2: complex
    s: complex
    d1: complex
    d2: complex

    def residuals(self) -> dict:
        return {
            "z2_is_conj_z1": abs(self.z2 - self.z1.conjugate()),
            "d2_is_conj_d1": abs(self.d2 - self.d1.conjugate()),
            "imag_s": abs(self.s.imag),
            "product": abs(self.z1 * self.z2 - self.s),
            "z1_split": abs(self.s + self.d1 - self.z1),
            "z2_split": abs(self.s + self.d2 - self.z2),
            "abs_d": abs(abs(self.d1) - abs(self.d2)),
        }


def entangled_pair_solve(z: complex) -> EntangledPair:
    """Solve z1 = z1 z2 + d1, z2 = z1 z2 + d2 with z1 = z and z2 = conj(z).

    ``z * conj(z)`` is formed from the components so that its imaginary part
    is exactly zero.
    """
    z = complex(z)
    if z != z or abs(z) == float("inf"):
        raise ValueError(f"z must be finite, got {z}")
    s = complex(z.real * z.real + z.imag * z.imag, 0.0)
    d1 = z - s
    return EntangledPair(z, z.conjugate(), s, d1, d1.conjugate())


@dataclass(frozen=True)
class EventDecomposition:
    d1: complex
    d2: complex
    consistent: bool
    case: str


def decompose_event(P_T: complex, P_A: complex, s: float, tol: float = 1e-12) -> EventDecomposition:
    """Split forward and backward probabilities into the shared real part s
    and their non-real remainders d1 = P_T - s, d2 = P_A - s.

    ``consistent`` holds when P_A is the conjugate of P_T (then d1 = conj d2).
    ``case`` is "degenerate" when both remainders vanish (forward, backward
    and intersection events coincide), "real" when both are real, and
    "complex" otherwise.
    """
    P_T, P_A = complex(P_T), complex(P_A)
    d1, d2 = P_T - s, P_A - s
    consistent = abs(P_A - P_T.conjugate()) <= tol * max(1.0, abs(P_T))
    if abs(d1) <= tol and abs(d2) <= tol:
        case = "degenerate"
    elif d1.imag == 0.0 and d2.imag == 0.0:
        case = "real"
    else:
        case = "complex"
    return EventDecomposition(d1, d2, consistent, case)


@dataclass(frozen=True)
class HyperCheck:
    ok: bool
    total_ok: bool
    sum_ok: bool
    real_valued_J: bool


def hyper_measure_check(mu_Omega: complex, mu_J1: complex, mu_J2: complex, tol: float = 1e-15) -> HyperCheck:
    """Consistency of a hyper-sample-space measure.

    ``ok`` requires mu(Omega) = 1, mu(J1) + mu(J2) = 0, and, when both parts
    are nonzero, at least one of them non-real. ``real_valued_J`` flags the
    case where the sum condition holds with purely real, nonzero parts.
    """
    mu_Omega, mu_J1, mu_J2 = complex(mu_Omega), complex(mu_J1), complex(mu_J2)
    total_ok = abs(mu_Omega - 1.0) <= tol
    sum_ok = abs(mu_J1 + mu_J2) <= tol
    both_nonzero = mu_J1 != 0 and mu_J2 != 0
    real_J = both_nonzero and mu_J1.imag == 0.0 and mu_J2.imag == 0.0
    return HyperCheck(total_ok and sum_ok and not real_J, total_ok, sum_ok, real_J)


@dataclass
class HyperSampleSpace:
    """Registry of events with a table of the defined intersections/unions.

    Only combinations in which at least one operand is a real event are
    meaningful; their measures must be registered explicitly.
    """

    events: dict = field(default_factory=dict)
    _meets: dict = field(default_factory=dict)
    _joins: dict = field(default_factory=dict)

    def add(self, e: EventMeasure) -> EventMeasure:
        self.events[e.label] = e
        return e

    def _key(self, a: str, b: str) -> frozenset:
        for lab in (a, b):
            if lab not in self.events:
                raise KeyError(f"unknown event {lab!r}")
        ea, eb = self.events[a], self.events[b]
        if not (ea.is_real or eb.is_real):
            raise UndefinedByTheoryError(
                f"combination of two non-real events {a!r} and {b!r} is undefined"
            )
        return frozenset((a, b))

    def define_intersection(self, a: str, b: str, value: complex) -> None:
        k = self._key(a, b)
        if self.events[a].is_real and self.events[b].is_real and complex(value).imag != 0:
            raise ValueError("intersection of real events must have a real measure")
        self._meets[k] = complex(value)

    def define_union(self, a: str, b: str, value: complex) -> None:
        self._joins[self._key(a, b)] = complex(value)

    def intersection(self, a: str, b: str) -> complex:
        k = self._key(a, b)
        if k not in self._meets:
            raise KeyError(f"intersection of {a!r} and {b!r} not registered")
        return self._meets[k]

    def union(self, a: str, b: str) -> complex:
        k = self._key(a, b)
        if k in self._joins:
            return self._joins[k]
        # inclusion-exclusion when the intersection is known
        return self.events[a].value + self.events[b].value - self.intersection(a, b)

    @classmethod
    def from_split(cls, P_T: complex, P_A: complex, s: float, omega: float = 1.0) -> "HyperSampleSpace":
        """Forward event T, backward event A and their real intersection S,
        with the remainders T - S and A - S registered as non-real pieces."""
        sp = cls()
        sp.add(EventMeasure("Omega", omega, "real"))
        sp.add(EventMeasure("S", s, "real"))
        sp.add(EventMeasure("T", P_T, "forward"))
        sp.add(EventMeasure("A", P_A, "backward"))
        sp.add(EventMeasure("T-S", complex(P_T) - s, "forward"))
        sp.add(EventMeasure("A-S", complex(P_A) - s, "backward"))
        sp.define_intersection("T", "S", s)
        sp.define_intersection("A", "S", s)
        sp.define_intersection("S", "Omega", s)
        sp.define_intersection("T-S", "S", 0.0)
        sp.define_intersection("A-S", "S", 0.0)
        return sp

"""Core value types: wire kinds, wire types and phase vectors.

A classical wire of base dimension d carries a single index of size d.
A quantum wire of the same base dimension carries a doubled index of size
d*d; the composite index is laid out as ket*d + bra throughout the package.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

from .errors import DimMismatch

UNIT_TOL = 1e-12


class Kind(Enum):
    CLASSICAL = "classical"
    QUANTUM = "quantum"

    def __repr__(self) -> str:
        return f"Kind.{self.name}"


@dataclass(frozen=True)
class WireType:
    kind: Kind
    base_dim: int

    def __post_init__(self):
        if self.base_dim < 1:
            raise DimMismatch(f"base_dim must be >= 1, got {self.base_dim}")

    @property
    def index_size(self) -> int:
        """Size of the flat index this wire carries in a tensor."""
        if self.kind is Kind.QUANTUM:
            return self.base_dim * self.base_dim
        return self.base_dim

    @property
    def is_quantum(self) -> bool:
        return self.kind is Kind.QUANTUM

    @property
    def is_classical(self) -> bool:
        return self.kind is Kind.CLASSICAL

    def doubled(self) -> "WireType":
        """The quantum wire over the same base dimension."""
        return WireType(Kind.QUANTUM, self.base_dim)

    def __str__(self) -> str:
        tag = "q" if self.is_quantum else "c"
        return f"{tag}{self.base_dim}"


def classical(d: int) -> WireType:
    return WireType(Kind.CLASSICAL, d)


def quantum(d: int) -> WireType:
    return WireType(Kind.QUANTUM, d)


@dataclass(frozen=True)
class PhaseVector:
    """A tuple of d unit-modulus weights with the first component pinned to 1.

    Phase vectors decorate spiders and form a group under componentwise
    multiplication (a (d-1)-torus).
    """

    components: tuple[complex, ...]

    def __post_init__(self):
        comps = tuple(complex(c) for c in self.components)
        object.__setattr__(self, "components", comps)
        if len(comps) == 0:
            raise DimMismatch("phase vector needs at least one component")
        if abs(comps[0] - 1.0) > UNIT_TOL:
            raise DimMismatch(f"first phase component must be 1, got {comps[0]}")
        for c in comps:
            if abs(abs(c) - 1.0) > UNIT_TOL:
                raise DimMismatch(f"phase component {c} is not unit modulus")

    @classmethod
    def from_angles(cls, angles: "list[float] | tuple[float, ...]") -> "PhaseVector":
        """Build from d-1 angles (radians); component 0 is fixed at 1."""
        comps = (1.0 + 0.0j,) + tuple(cmath.exp(1j * a) for a in angles)
        return cls(comps)

    @classmethod
    def unit(cls, d: int) -> "PhaseVector":
        """The group unit: all components 1."""
        return cls((1.0 + 0.0j,) * d)

    @property
    def dim(self) -> int:
        return len(self.components)

    @property
    def angles(self) -> tuple[float, ...]:
        """The d-1 free angles, in (-pi, pi]."""
        return tuple(cmath.phase(c) for c in self.components[1:])

    def __add__(self, other: "PhaseVector") -> "PhaseVector":
        """Group sum: componentwise product."""
        if self.dim != other.dim:
            raise DimMismatch("phase vectors of different dimension")
        return PhaseVector(tuple(a * b for a, b in zip(self.components, other.components)))

    def __neg__(self) -> "PhaseVector":
        """Group inverse: componentwise conjugate."""
        return PhaseVector(tuple(c.conjugate() for c in self.components))

    def __sub__(self, other: "PhaseVector") -> "PhaseVector":
        return self + (-other)

    def is_unit(self, tol: float = UNIT_TOL) -> bool:
        return all(abs(c - 1.0) <= tol for c in self.components)

    def approx_equal(self, other: "PhaseVector", tol: float = 1e-9) -> bool:
        if self.dim != other.dim:
            return False
        return all(abs(a - b) <= tol for a, b in zip(self.components, other.components))

    def __str__(self) -> str:
        return "phase(" + ", ".join(repr(a) for a in self.angles) + ")"


def phase_sum(a: PhaseVector, b: PhaseVector) -> PhaseVector:
    return a + b


def phase_inverse(a: PhaseVector) -> PhaseVector:
    return -a


def phase_unit(d: int) -> PhaseVector:
    return PhaseVector.unit(d)


def angles_close(a: float, b: float, tol: float = 1e-9) -> bool:
    """Compare two angles modulo 2*pi."""
    diff = (a - b) % (2 * math.pi)
    return min(diff, 2 * math.pi - diff) <= tol

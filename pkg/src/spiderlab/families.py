"""Spider families: the built-in orthonormal-basis family plus registrations.

A spider family is a commutative Frobenius algebra presented by four
matrices (multiplication, unit, comultiplication, counit). The n-to-m
spider of the family is the comultiplication tree after the multiplication
tree. The built-in "onb" family is special (multiplication after
comultiplication is the identity), so its spiders fuse along any number of
connecting wires. Registered families may instead be anti-special, in
which case that loop separates into a state-effect pair, up to a scalar.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AxiomFailure, DimMismatch, ShapeMismatch
from .diagram import ONB_FAMILY

REG_TOL = 1e-9


def _kron(*mats: np.ndarray) -> np.ndarray:
    out = np.eye(1)
    for m in mats:
        out = np.kron(out, m)
    return out


def _swap_matrix(d: int) -> np.ndarray:
    s = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1.0
    return s


@dataclass(frozen=True, eq=False)
class SpiderFamily:
    """A registered Frobenius family over one base dimension."""

    family_id: str
    base_dim: int
    mult: np.ndarray     # (d, d*d)
    unit: np.ndarray     # (d, 1)
    comult: np.ndarray   # (d*d, d)
    counit: np.ndarray   # (1, d)
    kind: str = "special"          # "special" | "anti-special"
    loop_scalar: complex = 1.0     # mult @ comult == loop_scalar * (counit† @ unit†)
    _cache: dict = field(default_factory=dict)

    def mult_tree(self, n: int) -> np.ndarray:
        """The n-to-1 multiplication tree as a (d, d**n) matrix."""
        d = self.base_dim
        if n == 0:
            return self.unit
        m = np.eye(d)
        for _ in range(n - 1):
            m = self.mult @ np.kron(m, np.eye(d))
        return m

    def comult_tree(self, m: int) -> np.ndarray:
        d = self.base_dim
        if m == 0:
            return self.counit
        c = np.eye(d)
        for _ in range(m - 1):
            c = np.kron(c, np.eye(d)) @ self.comult
        return c

    def spider_matrix(self, n_in: int, n_out: int, adjoint: bool = False) -> np.ndarray:
        """(d**n_out, d**n_in) matrix of the n-to-m spider."""
        key = (n_in, n_out, adjoint)
        if key not in self._cache:
            m = self.comult_tree(n_out) @ self.mult_tree(n_in)
            if adjoint:
                m = self.comult_tree(n_in) @ self.mult_tree(n_out)
                m = m.conj().T
            self._cache[key] = m
        return self._cache[key]


def validate_family(fam: SpiderFamily, tol: float = REG_TOL) -> None:
    """Check the Frobenius and symmetry laws; raise AxiomFailure on the
    first law that fails."""
    d = fam.base_dim
    mult, unit, comult, counit = fam.mult, fam.unit, fam.comult, fam.counit
    eye = np.eye(d)
    shapes = {
        "multiplication": (mult, (d, d * d)),
        "unit": (unit, (d, 1)),
        "comultiplication": (comult, (d * d, d)),
        "counit": (counit, (1, d)),
    }
    for name, (m, want) in shapes.items():
        if m.shape != want:
            raise ShapeMismatch(f"{name} has shape {m.shape}, expected {want}")

    def check(law: str, lhs: np.ndarray, rhs: np.ndarray):
        dev = np.max(np.abs(lhs - rhs)) if lhs.size else 0.0
        if dev > tol:
            raise AxiomFailure(law, f"deviation {dev:.3g}")

    for name, (m, _) in shapes.items():
        if np.max(np.abs(m.imag)) > tol:
            raise AxiomFailure("self-conjugacy", f"{name} has complex entries")

    swap = _swap_matrix(d)
    check("unit law (left)", mult @ np.kron(unit, eye), eye)
    check("unit law (right)", mult @ np.kron(eye, unit), eye)
    check("associativity", mult @ np.kron(mult, eye), mult @ np.kron(eye, mult))
    check("commutativity", mult @ swap, mult)
    check("counit law (left)", np.kron(counit, eye) @ comult, eye)
    check("counit law (right)", np.kron(eye, counit) @ comult, eye)
    check("coassociativity", np.kron(comult, eye) @ comult, np.kron(eye, comult) @ comult)
    check("cocommutativity", swap @ comult, comult)
    check(
        "frobenius law",
        np.kron(eye, mult) @ np.kron(comult, eye),
        comult @ mult,
    )
    check(
        "frobenius law (mirror)",
        np.kron(mult, eye) @ np.kron(eye, comult),
        comult @ mult,
    )
    # One-wire fusion beyond the tree shape used in the definition.
    s12 = fam.spider_matrix(1, 2)
    s21 = fam.spider_matrix(2, 1)
    check(
        "one-wire fusion",
        np.kron(eye, s21) @ np.kron(s12, eye),
        fam.spider_matrix(2, 2),
    )
    # Leg symmetry of the three-legged state.
    state = fam.spider_matrix(0, 3).reshape(d, d, d)
    for perm in ((0, 2, 1), (1, 0, 2), (2, 1, 0)):
        check("leg symmetry", state.transpose(perm), state)


def classify_loop(fam: SpiderFamily, tol: float = REG_TOL) -> tuple[str, complex]:
    """Decide whether mult-after-comult is the identity wire (special) or a
    separated state-effect pair (anti-special). Returns (kind, loop_scalar)."""
    loop = fam.mult @ fam.comult
    d = fam.base_dim
    if np.max(np.abs(loop - np.eye(d))) <= tol:
        return "special", 1.0
    sep = fam.counit.conj().T @ fam.unit.conj().T  # (d,1) @ (1,d)
    idx = np.unravel_index(np.argmax(np.abs(sep)), sep.shape)
    if abs(sep[idx]) <= tol:
        raise AxiomFailure("loop separation", "state-effect pair is zero")
    lam = loop[idx] / sep[idx]
    if abs(lam) <= tol:
        raise AxiomFailure("loop separation", "loop is not proportional to the pair")
    if np.max(np.abs(loop - lam * sep)) > tol:
        raise AxiomFailure(
            "loop separation",
            "mult after comult neither the identity nor a separated pair",
        )
    return "anti-special", complex(lam)


_FAMILIES: dict[str, SpiderFamily] = {}


def register_family(
    family_id: str,
    base_dim: int,
    mult: np.ndarray,
    unit: np.ndarray,
    comult: np.ndarray,
    counit: np.ndarray,
) -> SpiderFamily:
    """Validate the four generators, classify the loop, and register the
    family. Registration is append-only and should happen at startup,
    before any concurrent use."""
    if family_id == ONB_FAMILY:
        raise ValueError(f"family id {ONB_FAMILY!r} is reserved")
    fam = SpiderFamily(
        family_id,
        base_dim,
        np.asarray(mult, dtype=complex),
        np.asarray(unit, dtype=complex),
        np.asarray(comult, dtype=complex),
        np.asarray(counit, dtype=complex),
    )
    validate_family(fam)
    kind, lam = classify_loop(fam)
    fam = SpiderFamily(
        fam.family_id, fam.base_dim, fam.mult, fam.unit, fam.comult, fam.counit, kind, lam
    )
    existing = _FAMILIES.get(fam.family_id)
    if existing is not None:
        same = (
            existing.base_dim == fam.base_dim
            and np.allclose(existing.mult, fam.mult)
            and np.allclose(existing.unit, fam.unit)
            and np.allclose(existing.comult, fam.comult)
            and np.allclose(existing.counit, fam.counit)
        )
        if not same:
            raise DimMismatch(f"family {fam.family_id!r} already registered differently")
        return existing
    _FAMILIES[fam.family_id] = fam
    return fam


def get_family(family_id: str) -> SpiderFamily:
    if family_id not in _FAMILIES:
        raise DimMismatch(f"unknown spider family {family_id!r}")
    return _FAMILIES[family_id]


def has_family(family_id: str) -> bool:
    return family_id in _FAMILIES


def w_generators() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Generators of the anti-special family on a 2-dimensional wire,
    the algebra of polynomials modulo x squared: multiplication sends
    |00> to |0>, |01> and |10> to |1>, |11> to zero, with unit |0>;
    comultiplication sends |0> to |01> + |10> and |1> to |11>, with
    counit <1|. Its three-legged state is |011> + |101> + |110>, and the
    loop map separates as twice |1><0|."""
    mult = np.zeros((2, 4))
    mult[0, 0] = 1.0
    mult[1, 1] = 1.0
    mult[1, 2] = 1.0
    unit = np.array([[1.0], [0.0]])
    comult = np.zeros((4, 2))
    comult[1, 0] = 1.0
    comult[2, 0] = 1.0
    comult[3, 1] = 1.0
    counit = np.array([[0.0, 1.0]])
    return mult, unit, comult, counit


def onb_family(d: int) -> SpiderFamily:
    """The orthonormal-basis family at dimension d, in matrix form."""
    mult = np.zeros((d, d * d))
    for i in range(d):
        mult[i, i * d + i] = 1.0
    unit = np.ones((d, 1))
    return SpiderFamily(ONB_FAMILY, d, mult, unit, mult.T.copy(), unit.T.copy(), "special", 1.0)

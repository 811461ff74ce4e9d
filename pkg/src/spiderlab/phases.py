"""Phase states, phase gates, and the phase-group structure.

A phase state is a pure quantum state with no bias towards any
measurement outcome: measuring it yields the uniform distribution.
Such states are parametrized by a PhaseVector (first component pinned
to one, all components unit modulus) and form a commutative group
under componentwise multiplication.  Phase gates are the 1-to-1
spiders decorated with these vectors.
"""

from __future__ import annotations

from itertools import permutations

import numpy as np

from .cq import CqProcess, ProcessLike, as_process, is_pure
from .diagram import Diagram, ghz, measure, scalar, spider
from .errors import DimMismatch, WrongSignature
from .reports import Claim, Report, max_deviation
from .tensor import arrays_equal, evaluate, numeric_equal
from .wires import PhaseVector, phase_inverse, phase_sum, phase_unit, quantum

PHASE_TOL = 1e-9

__all__ = [
    "PHASE_TOL",
    "PhaseVector",
    "check_phase_group",
    "ghz_phase_fusion_demo",
    "is_phase_state",
    "phase_gate",
    "phase_inverse",
    "phase_state",
    "phase_sum",
    "phase_unit",
]


def phase_state(a: PhaseVector, causal: bool = False) -> Diagram:
    """The quantum state with components a_i, as a 0-to-1 phased spider.

    The bare state is not causal (it discards to the dimension, not to
    one); pass causal=True to adjoin the 1/d scalar that fixes this.
    """
    state = spider(0, 1, quantum(a.dim), phase=a)
    if causal:
        state = scalar(1.0 / a.dim) @ state
    return state


def is_phase_state(psi: ProcessLike, tol: float = PHASE_TOL) -> PhaseVector | None:
    """Extract the phase vector of a state, or None if it has none.

    A state qualifies when it is pure and unbiased: measuring it gives
    the uniform distribution up to a scalar.  The vector is read off
    the first column of the density matrix, normalized to its first
    entry.
    """
    proc = as_process(psi)
    if proc.diagram.n_inputs or len(proc.output_types) != 1:
        raise WrongSignature("phase extraction expects a state on one wire")
    wtype = proc.output_types[0]
    if not wtype.is_quantum:
        raise WrongSignature("phase extraction expects a quantum state")
    d = wtype.base_dim
    if not is_pure(proc, tol):
        return None
    outcome = evaluate(proc.diagram >> measure(d)).vector
    if not arrays_equal(outcome, np.full(d, 1.0 / d, dtype=complex), tol, "up_to_scalar"):
        return None
    rho = proc.tensor.vector.reshape(d, d)
    column = rho[:, 0]
    if np.min(np.abs(column)) <= tol:
        return None
    return PhaseVector(tuple(column / np.abs(column) / (column[0] / abs(column[0]))))


def phase_gate(a: PhaseVector) -> CqProcess:
    """The 1-to-1 quantum spider decorated with the given phase vector."""
    return CqProcess(spider(1, 1, quantum(a.dim), phase=a))


def _merge_states(a: PhaseVector, b: PhaseVector) -> Diagram:
    merge = spider(2, 1, quantum(a.dim))
    return (phase_state(a) @ phase_state(b)) >> merge


def check_phase_group(
    samples: int = 100,
    dims: tuple[int, ...] = (2, 3, 4),
    rng: np.random.Generator | None = None,
    tol: float = PHASE_TOL,
) -> Report:
    """Verify the group axioms on random phase vectors.

    Associativity, commutativity, unit and inverse are checked exactly
    on the components; the sum is also cross-checked diagrammatically
    by merging two phase states through a spider and extracting.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    report = Report("phase-group")
    for d in dims:
        worst = {"assoc": 0.0, "comm": 0.0, "unit": 0.0, "inverse": 0.0, "merge": 0.0}
        unit = PhaseVector.unit(d)
        for _ in range(samples):
            a, b, c = (
                PhaseVector.from_angles(rng.uniform(-np.pi, np.pi, d - 1))
                for _ in range(3)
            )

            def gap(x: PhaseVector, y: PhaseVector) -> float:
                return max(abs(p - q) for p, q in zip(x.components, y.components))

            worst["assoc"] = max(worst["assoc"], gap((a + b) + c, a + (b + c)))
            worst["comm"] = max(worst["comm"], gap(a + b, b + a))
            worst["unit"] = max(worst["unit"], gap(a + unit, a))
            worst["inverse"] = max(worst["inverse"], gap(a + (-a), unit))
            merged = is_phase_state(_merge_states(a, b), tol)
            if merged is None:
                worst["merge"] = float("inf")
            else:
                worst["merge"] = max(worst["merge"], gap(merged, a + b))
        for law, dev in worst.items():
            report.add(
                Claim(
                    name=f"d={d} {law}",
                    passed=dev <= tol,
                    deviation=dev,
                    tolerance=tol,
                )
            )
    return report


def ghz_phase_fusion_demo(
    a: PhaseVector,
    b: PhaseVector,
    c: PhaseVector,
    tol: float = PHASE_TOL,
) -> Report:
    """Phases applied to the three legs of a GHZ state only matter in sum.

    Verifies that decorating the legs with a, b, c yields the GHZ state
    phased by a+b+c, that any permutation of the three vectors gives
    the same state, and that measuring all legs erases the phases.
    """
    if not (a.dim == b.dim == c.dim):
        raise DimMismatch("phase vectors must share one dimension")
    d = a.dim

    def decorated(x: PhaseVector, y: PhaseVector, z: PhaseVector) -> Diagram:
        gates = phase_gate(x).diagram @ phase_gate(y).diagram @ phase_gate(z).diagram
        return ghz(d) >> gates

    report = Report("ghz-phase-fusion")
    state = decorated(a, b, c)
    fused = ghz(d, phase=a + b + c)
    dev = max_deviation(state, fused)
    report.add(Claim("fuses-to-summed-phase", dev <= tol, dev, tol))

    dev = max(
        max_deviation(state, decorated(x, y, z))
        for x, y, z in permutations((a, b, c))
    )
    report.add(Claim("permutation-invariant", dev <= tol, dev, tol))

    meters = measure(d) @ measure(d) @ measure(d)
    dev = max_deviation(state >> meters, ghz(d) >> meters)
    report.add(Claim("measurement-erases-phases", dev <= tol, dev, tol))
    return report

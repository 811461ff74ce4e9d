"""Entanglement tests, SLOCC classification, spiders vs anti-spiders.

Bipartite entanglement of possibly impure states is decided with the
partial-transpose criterion, which is exact at the 2x2 and 2x3 sizes
this module accepts.  Pure three-qubit states are classified into the
six stochastic-LOCC classes via local ranks and the three-tangle.
Anti-spider families (the W-state counterpart of spiders) register
through the same Frobenius validator as ordinary families, plus the
anti-special loop law and a SLOCC cross-check of their 3-leg state.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

import numpy as np

from .cq import CqProcess, ProcessLike, as_process, is_causal
from .diagram import Diagram, Spider, box, cup, decoherence, scalar, spider
from .errors import (
    AxiomFailure,
    DimMismatch,
    NotCausal,
    NotNormalized,
    ShapeMismatch,
    WrongSignature,
)
from .families import SpiderFamily, register_family
from .reports import Claim, Report
from .tensor import Tensor, arrays_equal, evaluate
from .wires import classical, quantum

ENT_TOL = 1e-9


class SloccClass(Enum):
    """The six stochastic-LOCC classes of pure three-qubit states."""

    SEPARABLE = "Separable-ABC"
    BISEP_A = "Biseparable-A|BC"
    BISEP_B = "Biseparable-B|AC"
    BISEP_C = "Biseparable-C|AB"
    W = "W"
    GHZ = "GHZ"

    @property
    def label(self) -> str:
        return self.value

    def __str__(self) -> str:
        return self.value


def make_disentangled(phi1: ProcessLike, phi2: ProcessLike) -> CqProcess:
    """Feed perfect classical correlations into two local channels.

    The result is disentangled by construction: the two quantum systems
    only share the classical cup, weighted by 1/d so the whole state is
    causal whenever the two channels are.
    """
    p1, p2 = as_process(phi1), as_process(phi2)
    for p in (p1, p2):
        ins, outs = p.input_types, p.output_types
        if len(ins) != 1 or not ins[0].is_classical or any(t.is_classical for t in outs):
            raise WrongSignature(
                "expected channels with one classical input and quantum outputs"
            )
        if not is_causal(p):
            raise NotCausal("disentangled states are built from causal channels")
    d = p1.input_types[0].base_dim
    if p2.input_types[0].base_dim != d:
        raise DimMismatch("the two channels must share the classical dimension")
    correlate = scalar(1.0 / d) @ cup(classical(d))
    return CqProcess(correlate >> (p1.diagram @ p2.diagram))


def _density_matrix(proc: CqProcess) -> np.ndarray:
    dims = [t.base_dim for t in proc.output_types]
    split = [d for d in dims for _ in range(2)]
    data = proc.tensor.data.reshape(split)
    kets = list(range(0, 2 * len(dims), 2))
    bras = list(range(1, 2 * len(dims), 2))
    side = int(np.prod(dims))
    return data.transpose(kets + bras).reshape(side, side)


def pt_min_eigenvalue(state: ProcessLike, tol: float = ENT_TOL) -> float:
    """Smallest eigenvalue of the partially transposed, trace-normalized
    density matrix. Negative values witness entanglement."""
    proc = as_process(state)
    if proc.diagram.n_inputs or len(proc.output_types) != 2:
        raise WrongSignature("expected a bipartite state")
    if any(t.is_classical for t in proc.output_types):
        raise WrongSignature("expected quantum outputs")
    da, db = (t.base_dim for t in proc.output_types)
    if da * db > 6:
        raise WrongSignature(
            f"partial transpose is only conclusive up to 2x3; got {da}x{db}"
        )
    rho = _density_matrix(proc)
    trace = np.trace(rho)
    if abs(trace) <= tol:
        raise WrongSignature("state has vanishing trace")
    rho = rho / trace
    swapped = rho.reshape(da, db, da, db).transpose(0, 3, 2, 1).reshape(da * db, da * db)
    eigenvalues = np.linalg.eigvalsh((swapped + swapped.conj().T) / 2.0)
    return float(eigenvalues.min())


def is_entangled_2q(state: ProcessLike, tol: float = ENT_TOL) -> bool:
    """Partial-transpose test for small bipartite states.

    Exact for 2x2 and 2x3 systems; anything larger is refused rather
    than given an unreliable verdict.
    """
    return pt_min_eigenvalue(state, tol) < -tol


def _random_pure_2q(rng: np.random.Generator) -> Diagram:
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi /= np.linalg.norm(psi)
    plain = box("psi", (), (classical(2), classical(2)), psi.reshape(-1, 1))
    return Diagram.from_generator(plain.nodes[0].doubled())


def decoherence_report(
    samples: int = 100,
    rng: np.random.Generator | None = None,
    tol: float = ENT_TOL,
) -> Report:
    """Decohering one side of a two-qubit state destroys entanglement.

    Samples random pure states, applies measure-then-encode to the first
    wire, and checks the partial transpose of the result stays positive.
    One claim per sample; deviation is how far the smallest eigenvalue
    dips below zero. A final claim records that the sample set did
    contain entangled inputs, so the test has teeth.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    report = Report("decoherence destroys entanglement")
    kill_left = decoherence(2) @ Diagram.identity(quantum(2))
    entangled_before = 0
    for k in range(samples):
        state = _random_pure_2q(rng)
        if is_entangled_2q(state, tol):
            entangled_before += 1
        low = pt_min_eigenvalue(state >> kill_left, tol)
        report.add(
            Claim(
                name=f"separable after decoherence [{k}]",
                passed=low >= -tol,
                deviation=max(0.0, -low),
                tolerance=tol,
            )
        )
    report.add(
        Claim(
            name="sample set contains entangled inputs",
            passed=entangled_before > 0,
            deviation=0.0 if entangled_before else 1.0,
            tolerance=tol,
            method="exact",
            detail=f"{entangled_before} of {samples} inputs entangled",
        )
    )
    return report


def pure_state_vector(state: ProcessLike, tol: float = ENT_TOL) -> np.ndarray:
    """Recover the underlying ket of a pure multi-wire quantum state.

    The density matrix must be rank one up to `tol`; mixed states are
    refused since no single ket describes them.
    """
    proc = as_process(state)
    if proc.diagram.n_inputs or any(t.is_classical for t in proc.output_types):
        raise WrongSignature("expected an all-quantum state")
    rho = _density_matrix(proc)
    trace = np.trace(rho)
    if abs(trace) <= tol:
        raise WrongSignature("state has vanishing trace")
    rho = rho / trace
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2.0)
    if np.any(w[:-1] > tol):
        raise NotNormalized(f"state is not pure; second eigenvalue {w[-2]:.3e}")
    return v[:, -1]


def _as_state_vector(psi: Union[np.ndarray, Tensor, Sequence[complex]]) -> np.ndarray:
    if isinstance(psi, Tensor):
        psi = psi.data
    return np.asarray(psi, dtype=complex).ravel()


def _local_rank(vec: np.ndarray, party: int, tol: float) -> int:
    flat = np.moveaxis(vec.reshape(2, 2, 2), party, 0).reshape(2, 4)
    s = np.linalg.svd(flat, compute_uv=False)
    return int(np.sum(s > tol * s[0]))


def three_tangle(psi: Union[np.ndarray, Tensor, Sequence[complex]]) -> float:
    """Cayley's hyperdeterminant invariant, 1 on GHZ and 0 on W."""
    a = _as_state_vector(psi).reshape(2, 2, 2)
    d1 = (
        a[0, 0, 0] ** 2 * a[1, 1, 1] ** 2
        + a[0, 0, 1] ** 2 * a[1, 1, 0] ** 2
        + a[0, 1, 0] ** 2 * a[1, 0, 1] ** 2
        + a[1, 0, 0] ** 2 * a[0, 1, 1] ** 2
    )
    d2 = (
        a[0, 0, 0] * a[1, 1, 1] * a[0, 1, 1] * a[1, 0, 0]
        + a[0, 0, 0] * a[1, 1, 1] * a[1, 0, 1] * a[0, 1, 0]
        + a[0, 0, 0] * a[1, 1, 1] * a[1, 1, 0] * a[0, 0, 1]
        + a[0, 1, 1] * a[1, 0, 0] * a[1, 0, 1] * a[0, 1, 0]
        + a[0, 1, 1] * a[1, 0, 0] * a[1, 1, 0] * a[0, 0, 1]
        + a[1, 0, 1] * a[0, 1, 0] * a[1, 1, 0] * a[0, 0, 1]
    )
    d3 = (
        a[0, 0, 0] * a[1, 1, 0] * a[1, 0, 1] * a[0, 1, 1]
        + a[1, 1, 1] * a[0, 0, 1] * a[0, 1, 0] * a[1, 0, 0]
    )
    return float(4.0 * abs(d1 - 2.0 * d2 + 4.0 * d3))


def slocc_classify_3q(
    psi: Union[np.ndarray, Tensor, Sequence[complex]],
    tol: float = ENT_TOL,
) -> SloccClass:
    """Classify a pure three-qubit state vector up to SLOCC.

    Single-party reduced ranks separate the product and biseparable
    cases; among genuinely tripartite states the three-tangle is zero
    exactly on the W class.
    """
    vec = _as_state_vector(psi)
    if vec.shape != (8,):
        raise ShapeMismatch(f"expected 8 amplitudes, got {vec.shape}")
    norm = np.linalg.norm(vec)
    if abs(norm - 1.0) > 1e-9:
        raise NotNormalized(f"state norm is {norm!r}")
    ranks = [_local_rank(vec, party, tol) for party in range(3)]
    if ranks == [1, 1, 1]:
        return SloccClass.SEPARABLE
    if ranks.count(1) == 1:
        return (SloccClass.BISEP_A, SloccClass.BISEP_B, SloccClass.BISEP_C)[
            ranks.index(1)
        ]
    if three_tangle(vec) <= tol:
        return SloccClass.W
    return SloccClass.GHZ


def apply_locals(
    psi: Union[np.ndarray, Tensor, Sequence[complex]],
    locals_: Sequence[np.ndarray],
) -> np.ndarray:
    """Apply one operator per party to a multipartite state vector."""
    mats = [np.asarray(m, dtype=complex) for m in locals_]
    vec = _as_state_vector(psi)
    in_dims = [m.shape[1] for m in mats]
    if int(np.prod(in_dims)) != vec.size:
        raise ShapeMismatch(
            f"{vec.size} amplitudes cannot split into party dimensions {in_dims}"
        )
    t = vec.reshape(in_dims)
    for k, m in enumerate(mats):
        t = np.moveaxis(np.tensordot(m, t, axes=(1, k)), 0, k)
    return t.ravel()


def slocc_convert_check(
    psi: Union[np.ndarray, Tensor, Sequence[complex]],
    psi_target: Union[np.ndarray, Tensor, Sequence[complex]],
    locals_: Sequence[np.ndarray],
    tol: float = ENT_TOL,
) -> bool:
    """Certificate check: do the local operators map psi onto the target
    up to a non-zero scalar?"""
    target = _as_state_vector(psi_target)
    moved = apply_locals(psi, locals_)
    if moved.size != target.size:
        raise ShapeMismatch("source and target live on different systems")
    return arrays_equal(moved, target, tol, "up_to_scalar")


def random_invertible(rng: np.random.Generator, d: int = 2) -> np.ndarray:
    """A complex matrix kept away from singularity, for SLOCC sampling."""
    while True:
        m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        if np.min(np.linalg.svd(m, compute_uv=False)) > 0.2:
            return m


def slocc_convert_search(
    psi: Union[np.ndarray, Tensor, Sequence[complex]],
    psi_target: Union[np.ndarray, Tensor, Sequence[complex]],
    parties: int = 3,
    rng: np.random.Generator | None = None,
    restarts: int = 20,
    sweeps: int = 60,
    tol: float = ENT_TOL,
) -> list[np.ndarray] | None:
    """Demo-quality search for local operators converting psi to target.

    Alternating least squares on one party at a time; one-sided: a
    returned certificate always verifies, but None does not prove
    inconvertibility.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    source = _as_state_vector(psi)
    target = _as_state_vector(psi_target)
    d = int(round(source.size ** (1.0 / parties)))
    if d**parties != source.size or target.size != source.size:
        raise ShapeMismatch("search assumes equal party dimensions")
    for _ in range(restarts):
        mats = [random_invertible(rng, d) for _ in range(parties)]
        for _ in range(sweeps):
            for k in range(parties):
                rest = list(mats)
                rest[k] = np.eye(d)
                partial = apply_locals(source, rest).reshape([d] * parties)
                coeff = np.moveaxis(partial, k, 0).reshape(d, -1)
                goal = np.moveaxis(target.reshape([d] * parties), k, 0).reshape(d, -1)
                solved, *_ = np.linalg.lstsq(coeff.T, goal.T, rcond=None)
                mats[k] = solved.T
            if slocc_convert_check(source, target, mats, tol):
                return mats
    return None


@dataclass(frozen=True)
class AntiSpiderFamily:
    """An accepted anti-spider registration and its SLOCC witnesses."""

    family: SpiderFamily
    loop_scalar: complex
    w_state: np.ndarray

    @property
    def family_id(self) -> str:
        return self.family.family_id


def family_state_3(family_id: str, d: int = 2) -> Diagram:
    """The 0-to-3 single-wire-world state of a registered family."""
    legs = (classical(d),) * 3
    return Diagram.from_generator(Spider((), legs, family=family_id))


def register_anti_spider(
    family_id: str,
    mult: np.ndarray,
    unit: np.ndarray,
    comult: np.ndarray,
    counit: np.ndarray,
    tol: float = ENT_TOL,
) -> AntiSpiderFamily:
    """Validate and register an anti-spider family on qubits.

    The Frobenius and symmetry laws are enforced strictly; the loop law
    must separate into a state-effect pair (anti-special) rather than
    reduce to the identity.  The family's 3-leg state must then land in
    the W class, mirroring how the ordinary spider state lands in GHZ.
    """
    mult = np.asarray(mult, dtype=complex)
    if mult.shape != (2, 4):
        raise DimMismatch("anti-spiders are defined on qubits (base dimension 2)")
    fam = register_family(family_id, 2, mult, unit, comult, counit)
    if fam.kind != "anti-special":
        raise AxiomFailure(
            "anti-special loop",
            "multiplication after comultiplication is the identity, not a pair",
        )
    w_vec = evaluate(family_state_3(family_id)).vector
    w_vec = w_vec / np.linalg.norm(w_vec)
    got = slocc_classify_3q(w_vec, tol)
    if got is not SloccClass.W:
        raise AxiomFailure(
            "w-class state", f"3-leg state classifies as {got.label}"
        )
    ghz_vec = evaluate(spider(0, 3, classical(2))).vector
    ghz_vec = ghz_vec / np.linalg.norm(ghz_vec)
    if slocc_classify_3q(ghz_vec, tol) is not SloccClass.GHZ:
        raise AxiomFailure("ghz-class state", "the spider state left the GHZ class")
    return AntiSpiderFamily(fam, fam.loop_scalar, w_vec)

"""Analyzers and constructors for classical-quantum processes.

Everything here works on the doubled picture: quantum wires carry a
ket/bra index pair, classical wires a single index.  The analyzers
answer the structural questions that matter for such processes: is it
causal, is it pure, does a classical map describe a stochastic matrix
or a function, is a measurement repeatable, and how does a POVM dilate
to an isometry followed by an ordinary basis measurement.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Iterable, Sequence, Union

import numpy as np

from .diagram import (
    Diagram,
    Spider,
    Box,
    box,
    classical_value,
    copy,
    decoherence,
    delete,
    discard,
    encode,
    measure,
)
from .errors import (
    DimMismatch,
    NoFullSupport,
    NotCausal,
    WrongKind,
    WrongSignature,
)
from .reports import Claim, Report, max_deviation
from .tensor import Tensor, evaluate, numeric_equal
from .wires import WireType, classical, quantum

CQ_TOL = 1e-9
SUPPORT_TOL = 1e-12


@dataclass(frozen=True)
class ProbDist:
    """A probability distribution over d classical values.

    Weights must be (numerically) real, non-negative and sum to one.
    Full support means every weight is strictly positive, which is what
    makes the entrywise reciprocal well defined.
    """

    weights: tuple[float, ...]

    def __post_init__(self):
        cleaned = []
        for w in self.weights:
            w = complex(w)
            if abs(w.imag) > SUPPORT_TOL:
                raise ValueError(f"weight {w} is not real")
            if w.real < -SUPPORT_TOL:
                raise ValueError(f"weight {w.real} is negative")
            cleaned.append(max(w.real, 0.0))
        if not cleaned:
            raise ValueError("a distribution needs at least one weight")
        if abs(sum(cleaned) - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {sum(cleaned)!r}, not 1")
        object.__setattr__(self, "weights", tuple(cleaned))

    @property
    def dim(self) -> int:
        return len(self.weights)

    @property
    def full_support(self) -> bool:
        return min(self.weights) > SUPPORT_TOL

    def inverse(self) -> np.ndarray:
        """Entrywise reciprocal; the (non-causal) state undoing this one."""
        if not self.full_support:
            raise NoFullSupport(f"distribution {self.weights} has a zero weight")
        return np.array([1.0 / w for w in self.weights])

    def as_state(self) -> Diagram:
        col = np.array(self.weights, dtype=complex).reshape(-1, 1)
        return box("dist", (), (classical(self.dim),), col, flavor="cq")

    @classmethod
    def uniform(cls, d: int) -> "ProbDist":
        return cls((1.0 / d,) * d)

    @classmethod
    def from_weights(cls, weights: Iterable[float]) -> "ProbDist":
        return cls(tuple(float(np.real(w)) for w in weights))

    def __len__(self) -> int:
        return len(self.weights)

    def __iter__(self):
        return iter(self.weights)

    def __getitem__(self, i: int) -> float:
        return self.weights[i]


@dataclass(frozen=True)
class CqProcess:
    """A diagram viewed as a classical-quantum process, with its tensor cached."""

    diagram: Diagram

    @cached_property
    def tensor(self) -> Tensor:
        return evaluate(self.diagram)

    @property
    def matrix(self) -> np.ndarray:
        return self.tensor.matrix

    @property
    def input_types(self) -> tuple[WireType, ...]:
        return self.diagram.input_types

    @property
    def output_types(self) -> tuple[WireType, ...]:
        return self.diagram.output_types


ProcessLike = Union[CqProcess, Diagram]


def as_process(p: ProcessLike) -> CqProcess:
    if isinstance(p, CqProcess):
        return p
    return CqProcess(p)


def ground(types: Iterable[WireType]) -> Diagram:
    """Discard every quantum wire and delete every classical one."""
    parts = [
        discard(t.base_dim) if t.is_quantum else delete(t.base_dim)
        for t in types
    ]
    return reduce(lambda a, b: a @ b, parts, Diagram.identity_on(()))


def is_causal(p: ProcessLike, tol: float = CQ_TOL) -> bool:
    """Grounding all outputs must equal grounding the inputs directly."""
    d = as_process(p).diagram
    return numeric_equal(d >> ground(d.output_types), ground(d.input_types), tol)


def _bent_matrix(t: Tensor, types: Sequence[WireType]) -> np.ndarray:
    """Reshape an all-quantum tensor into its (kets, bras) matrix."""
    dims = [w.base_dim for w in types]
    split = [d for d in dims for _ in range(2)]
    data = t.data.reshape(split) if dims else t.data.reshape(1, 1)
    if dims:
        kets = list(range(0, 2 * len(dims), 2))
        bras = list(range(1, 2 * len(dims), 2))
        data = data.transpose(kets + bras)
        side = int(np.prod(dims))
        data = data.reshape(side, side)
    return data


def is_pure(p: ProcessLike, tol: float = CQ_TOL) -> bool:
    """True iff the process is a doubled map, detected by a rank test.

    Bending every boundary wire turns the process into a bipartite
    ket/bra tensor; doubled maps are exactly those whose matrix has
    rank one.  The test compares the second singular value against the
    first with a relative threshold.
    """
    proc = as_process(p)
    wires = proc.input_types + proc.output_types
    if any(t.is_classical for t in wires):
        raise WrongSignature("purity is only defined for all-quantum boundaries")
    m = _bent_matrix(proc.tensor, wires)
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] == 0.0:
        return True
    return len(s) < 2 or s[1] <= tol * s[0]


def is_stochastic(p: ProcessLike, tol: float = CQ_TOL) -> bool:
    """Entrywise non-negative with unit column sums, on classical wires."""
    proc = as_process(p)
    wires = proc.input_types + proc.output_types
    if any(t.is_quantum for t in wires):
        raise WrongSignature("stochasticity is only defined for all-classical boundaries")
    m = proc.matrix
    if np.max(np.abs(m.imag)) > tol:
        return False
    if np.min(m.real) < -SUPPORT_TOL:
        return False
    return bool(np.max(np.abs(m.real.sum(axis=0) - 1.0)) <= tol)


def _fanout(types: Sequence[WireType]) -> Diagram:
    """Copy every classical wire, grouping first copies before second ones."""
    parts = [copy(t.base_dim) for t in types]
    copies = reduce(lambda a, b: a @ b, parts, Diagram.identity_on(()))
    n = len(types)
    doubled = tuple(t for t in types for _ in range(2))
    source = [2 * j for j in range(n)] + [2 * j + 1 for j in range(n)]
    return copies >> Diagram.permutation(doubled, source)


def is_deterministic(p: ProcessLike, tol: float = CQ_TOL) -> bool:
    """A stochastic map that commutes with copying, i.e. a function."""
    proc = as_process(p)
    if not is_stochastic(proc, tol):
        return False
    d = proc.diagram
    lhs = d >> _fanout(d.output_types)
    rhs = _fanout(d.input_types) >> (d @ d)
    return numeric_equal(lhs, rhs, tol)


def born(state: ProcessLike, tol: float = CQ_TOL) -> ProbDist:
    """Measure every output of a quantum state and read off the outcome law."""
    proc = as_process(state)
    if proc.diagram.n_inputs:
        raise WrongSignature("the Born distribution is defined for states")
    if any(t.is_classical for t in proc.output_types):
        raise WrongSignature("the Born distribution needs all-quantum outputs")
    meters = [measure(t.base_dim) for t in proc.output_types]
    readout = reduce(lambda a, b: a @ b, meters, Diagram.identity_on(()))
    vec = evaluate(proc.diagram >> readout).vector
    if np.max(np.abs(vec.imag)) > tol:
        raise NotCausal("outcome weights are not real; the state is not causal")
    return ProbDist.from_weights(vec.real)


def nondemolition_measurement(d: int, unitary: np.ndarray | None = None) -> CqProcess:
    """The measure-and-keep process for an orthonormal basis.

    With a unitary argument, measures in the rotated basis whose k-th
    element is the unitary applied to the k-th reference basis vector.
    """
    meter = Diagram.from_generator(
        Spider((quantum(d),), (classical(d), quantum(d)), diagonal=True)
    )
    if unitary is None:
        return CqProcess(meter)
    u = np.asarray(unitary, dtype=complex)
    if u.shape != (d, d):
        raise DimMismatch(f"expected a {d}x{d} unitary, got {u.shape}")
    c = classical(d)
    rotate = Diagram.from_generator(Box("basis", (c,), (c,), u).doubled())
    return CqProcess(rotate.dagger() >> meter >> (Diagram.identity(classical(d)) @ rotate))


def is_vn_measurement(p: ProcessLike, tol: float = CQ_TOL) -> bool:
    """Check the projection postulate: measuring twice copies the outcome.

    The process must be a causal non-demolition measurement, one quantum
    wire in, one classical and one quantum wire out, and repeating it on
    the quantum output must agree with copying the classical output.
    """
    proc = as_process(p)
    ins, outs = proc.input_types, proc.output_types
    if len(ins) != 1 or not ins[0].is_quantum:
        raise WrongSignature("a measurement takes a single quantum input")
    if len(outs) != 2 or sum(t.is_classical for t in outs) != 1:
        raise WrongSignature("a non-demolition measurement emits one outcome and one system")
    d = proc.diagram
    if outs[0].is_quantum:
        d = d >> Diagram.permutation(outs, (1, 0))
    n = d.output_types[0].base_dim
    q = d.output_types[1]
    if q != ins[0]:
        raise WrongSignature("the quantum output must match the input system")
    again = d >> (Diagram.identity(classical(n)) @ d)
    copied = d >> (copy(n) @ Diagram.identity(q))
    return numeric_equal(again, copied, tol) and is_causal(d, tol)


def _effects_of(proc: CqProcess) -> list[np.ndarray]:
    """Read the effect matrices out of a demolition measurement's tensor."""
    ins, outs = proc.input_types, proc.output_types
    if len(ins) != 1 or not ins[0].is_quantum:
        raise WrongSignature("a demolition measurement takes a single quantum input")
    if len(outs) != 1 or not outs[0].is_classical:
        raise WrongSignature("a demolition measurement emits a single classical outcome")
    d = ins[0].base_dim
    m = proc.matrix
    return [m[i].reshape(d, d).T for i in range(m.shape[0])]


def _effects_diagram(effects: Sequence[np.ndarray]) -> Diagram:
    d = effects[0].shape[0]
    payload = np.stack([e.T.ravel() for e in effects])
    return box("povm", (quantum(d),), (classical(len(effects)),), payload, flavor="cq")


def _psd_root(e: np.ndarray, tol: float) -> np.ndarray:
    vals, vecs = np.linalg.eigh(e)
    if vals.min() < -tol:
        raise WrongKind(f"effect has a negative eigenvalue {vals.min():.3e}")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


@dataclass(frozen=True)
class NaimarkDilation:
    """An isometry plus a basis measurement reproducing a POVM.

    The isometry maps the measured system into ancilla-and-system;
    measuring the ancilla in its basis and discarding the system gives
    back the original demolition measurement.
    """

    isometry: Diagram
    measurement: CqProcess
    ancilla_dim: int
    system_dim: int
    kraus: tuple[np.ndarray, ...]

    def composite(self) -> Diagram:
        keep = discard(self.system_dim)
        return self.isometry >> (self.measurement.diagram @ keep)

    def __iter__(self):
        return iter((self.isometry, self.measurement))


def naimark_dilate(
    povm: Union[ProcessLike, Sequence[np.ndarray]],
    tol: float = CQ_TOL,
) -> NaimarkDilation:
    """Dilate a demolition POVM to an isometry and a basis measurement.

    Accepts either the measurement as a diagram (one quantum input, one
    classical output) or the list of its effect matrices.  The square
    root of each effect becomes a Kraus block; stacking the blocks gives
    an isometry into ancilla-tensor-system, and measuring the ancilla
    reproduces the POVM.
    """
    if isinstance(povm, (CqProcess, Diagram)):
        proc = as_process(povm)
        effects = _effects_of(proc)
        source = proc.diagram
    else:
        effects = [np.asarray(e, dtype=complex) for e in povm]
        if not effects:
            raise WrongSignature("a POVM needs at least one effect")
        shape = effects[0].shape
        if any(e.shape != shape or e.ndim != 2 or e.shape[0] != e.shape[1] for e in effects):
            raise DimMismatch("effects must be square matrices of equal size")
        source = _effects_diagram(effects)
    d = effects[0].shape[0]
    n = len(effects)
    for e in effects:
        if np.max(np.abs(e - e.conj().T)) > tol:
            raise WrongKind("effects must be Hermitian")
    total = sum(effects)
    if np.max(np.abs(total - np.eye(d))) > tol:
        raise NotCausal(f"effects sum to {np.max(np.abs(total - np.eye(d))):.3e} away from identity")
    kraus = [_psd_root(e, tol) for e in effects]
    v = np.concatenate(kraus, axis=0)
    gram = v.conj().T @ v
    if np.max(np.abs(gram - np.eye(d))) > tol:
        raise NotCausal("the stacked Kraus blocks do not form an isometry")
    c_anc, c_sys = classical(n), classical(d)
    iso = Diagram.from_generator(Box("dilation", (c_sys,), (c_anc, c_sys), v).doubled())
    dilation = NaimarkDilation(iso, CqProcess(measure(n)), n, d, tuple(kraus))
    if not numeric_equal(dilation.composite(), source, tol):
        raise NotCausal("dilation failed to reproduce the measurement")
    return dilation


def vn_report(
    samples: int = 50,
    dims: Sequence[int] = (2, 3),
    rng: np.random.Generator | None = None,
    tol: float = CQ_TOL,
) -> Report:
    """Projection postulate for basis and rotated-basis measurements.

    The plain ONB meter is checked once per dimension; the remaining
    claims rotate the basis by random unitaries and re-run the
    repeatability test.
    """
    from .protocols import random_unitary

    if rng is None:
        rng = np.random.default_rng(0)
    report = Report("von Neumann measurements")

    def check(name: str, proc: CqProcess) -> None:
        ok = is_vn_measurement(proc, tol)
        report.add(
            Claim(
                name=name,
                passed=ok,
                deviation=0.0 if ok else 1.0,
                tolerance=tol,
                method="exact",
            )
        )

    for d in dims:
        check(f"basis meter is repeatable [d={d}]", nondemolition_measurement(d))
    for k in range(samples):
        d = int(dims[k % len(dims)])
        check(
            f"rotated meter is repeatable [{k}] [d={d}]",
            nondemolition_measurement(d, random_unitary(rng, d)),
        )
    return report


def random_povm(rng: np.random.Generator, dim: int, outcomes: int) -> list[np.ndarray]:
    """Random positive effects normalized to resolve the identity."""
    raw = [rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)) for _ in range(outcomes)]
    pieces = [g @ g.conj().T for g in raw]
    w, vecs = np.linalg.eigh(sum(pieces))
    root_inv = (vecs / np.sqrt(w)) @ vecs.conj().T
    return [root_inv @ a @ root_inv for a in pieces]


def naimark_report(
    samples: int = 20,
    dim: int = 2,
    outcomes: int = 3,
    rng: np.random.Generator | None = None,
    tol: float = CQ_TOL,
    include_trine: bool = True,
) -> Report:
    """Dilate the trine POVM and a batch of random POVMs, checking that
    the stacked Kraus maps form an isometry and that composing the
    dilation with a basis measurement reconstructs the effects."""
    if rng is None:
        rng = np.random.default_rng(0)
    report = Report("Naimark dilation")
    batch: list[tuple[str, list[np.ndarray]]] = []
    if include_trine:
        batch.append(("trine", trine_povm()))
    batch.extend(
        (f"random [{k}]", random_povm(rng, dim, outcomes)) for k in range(samples)
    )
    for label, effects in batch:
        dil = naimark_dilate(effects, tol)
        v = np.concatenate(dil.kraus, axis=0)
        d = v.shape[1]
        defect = float(np.max(np.abs(v.conj().T @ v - np.eye(d))))
        report.add(
            Claim(
                name=f"{label}: stacked Kraus maps are an isometry",
                passed=defect <= tol,
                deviation=defect,
                tolerance=tol,
            )
        )
        got = evaluate(dil.composite()).matrix
        want = np.stack([e.T.ravel() for e in effects])
        drift = float(np.max(np.abs(got - want)))
        report.add(
            Claim(
                name=f"{label}: dilation reconstructs the effects",
                passed=drift <= tol,
                deviation=drift,
                tolerance=tol,
                detail=f"ancilla dimension {dil.ancilla_dim}",
            )
        )
    return report


def trine_povm() -> list[np.ndarray]:
    """The qubit trine: three effects from equally spread real unit vectors."""
    effects = []
    for k in range(3):
        angle = k * np.pi / 3.0
        v = np.array([np.cos(angle), np.sin(angle)], dtype=complex)
        effects.append((2.0 / 3.0) * np.outer(v, v.conj()))
    return effects


def controlled_branches(p: ProcessLike) -> list[Diagram]:
    """Plug each classical value into the control input of a process."""
    proc = as_process(p)
    ins = proc.input_types
    if not ins or not ins[0].is_classical:
        raise WrongSignature("a controlled process takes its classical control first")
    n = ins[0].base_dim
    rest = Diagram.identity_on(ins[1:])
    return [(classical_value(n, i) @ rest) >> proc.diagram for i in range(n)]


def mix(p: ProcessLike, dist: ProbDist) -> CqProcess:
    """Average a controlled process over a full-support distribution."""
    proc = as_process(p)
    ins = proc.input_types
    if not ins or not ins[0].is_classical:
        raise WrongSignature("a controlled process takes its classical control first")
    if ins[0].base_dim != dist.dim:
        raise DimMismatch(
            f"control has {ins[0].base_dim} values, distribution has {dist.dim}"
        )
    if not dist.full_support:
        raise NoFullSupport("mixtures require a full-support distribution")
    rest = Diagram.identity_on(ins[1:])
    return CqProcess((dist.as_state() @ rest) >> proc.diagram)


def controlled_channel(name: str, mats: Sequence[np.ndarray]) -> CqProcess:
    """Bundle doubled maps into one process with a classical control input."""
    mats = [np.asarray(m, dtype=complex) for m in mats]
    d_out, d_in = mats[0].shape
    if any(m.shape != (d_out, d_in) for m in mats):
        raise DimMismatch("all branches must share one shape")
    blocks = [
        np.asarray(
            Box(name, (classical(d_in),), (classical(d_out),), m).doubled().payload
        )
        for m in mats
    ]
    payload = np.concatenate(blocks, axis=1)
    return CqProcess(
        box(
            name,
            (classical(len(mats)), quantum(d_in)),
            (quantum(d_out),),
            payload,
            flavor="cq",
        )
    )


def check_purity_extremal(
    samples: int = 20,
    dim: int = 2,
    branches: int = 3,
    rng: np.random.Generator | None = None,
    tol: float = CQ_TOL,
) -> Report:
    """Probe the fact that pure processes are extremal among mixtures.

    Half the instances mix identical doubled unitaries (the mixture is
    then pure and must equal every branch); the other half mix
    independent random unitaries (the mixture must fail the purity
    test).  Each instance contributes one claim.
    """
    from .protocols import random_unitary

    if rng is None:
        rng = np.random.default_rng(0)
    report = Report("purity-extremality")
    for k in range(samples):
        degenerate = k % 2 == 0
        if degenerate:
            mats = [random_unitary(rng, dim)] * branches
        else:
            mats = [random_unitary(rng, dim) for _ in range(branches)]
        weights = rng.uniform(0.2, 1.0, branches)
        dist = ProbDist.from_weights(weights / weights.sum())
        controlled = controlled_channel(f"mix{k}", mats)
        mixture = mix(controlled, dist)
        pure = is_pure(mixture, tol)
        if pure:
            devs = [
                np.max(np.abs(evaluate(b).data - mixture.tensor.data))
                for b in controlled_branches(controlled)
            ]
            deviation = float(max(devs))
            ok = degenerate and deviation <= tol
        else:
            deviation = 0.0
            ok = not degenerate
        label = "pure" if degenerate else "mixed"
        report.add(
            Claim(
                name=f"instance-{k:02d}-{label}",
                passed=ok,
                deviation=deviation,
                tolerance=tol,
                detail="pure mixtures must equal every branch" if pure else "",
            )
        )
    return report


def classicality_report(
    dims: Sequence[int] = (2, 3, 5),
    rng: np.random.Generator | None = None,
    tol: float = CQ_TOL,
) -> Report:
    """The laws that make classical wires classical, checked per dimension.

    Covers the decomposition of discarding through measurement, measure
    after encode being the classical identity, Born probabilities read
    off a random state, and decoherence being impure but idempotent.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    report = Report("classicality")

    def numeric(name: str, left: Diagram, right: Diagram) -> None:
        dev = max_deviation(left, right)
        report.add(Claim(name=name, passed=dev <= tol, deviation=dev, tolerance=tol))

    for d in dims:
        numeric(f"discard = measure then delete [d={d}]", discard(d), measure(d) >> delete(d))
        numeric(
            f"measure after encode = identity [d={d}]",
            encode(d) >> measure(d),
            Diagram.identity(classical(d)),
        )
        psi = rng.normal(size=d) + 1j * rng.normal(size=d)
        psi /= np.linalg.norm(psi)
        state = Diagram.from_generator(
            box("psi", (), (classical(d),), psi.reshape(-1, 1)).nodes[0].doubled()
        )
        got = np.array(born(state).weights)
        dev = float(np.max(np.abs(got - np.abs(psi) ** 2)))
        report.add(
            Claim(
                name=f"Born weights match squared amplitudes [d={d}]",
                passed=dev <= tol,
                deviation=dev,
                tolerance=tol,
            )
        )
        dec = decoherence(d)
        report.add(
            Claim(
                name=f"decoherence is not pure [d={d}]",
                passed=not is_pure(dec, tol),
                deviation=0.0 if not is_pure(dec, tol) else 1.0,
                tolerance=tol,
                method="exact",
            )
        )
        numeric(f"decoherence is idempotent [d={d}]", dec >> dec, dec)
    return report

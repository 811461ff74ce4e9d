"""Dense tensor semantics for diagrams.

Index conventions, used everywhere:

* a tensor's axes are the diagram's boundary ports, inputs left to right
  followed by outputs left to right;
* a classical wire of base dimension d contributes an index of size d, a
  quantum wire one of size d*d laid out as ket*d + bra;
* the matrix view reshapes to (product of output sizes, product of input
  sizes), so sequential composition is ordinary matrix product and parallel
  composition is the Kronecker product.

Contraction works on one wire label per wire, pairwise, following either a
greedy plan or a caller-supplied one. Intermediate tensors are capped at
2**20 entries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import families
from .diagram import (
    IN,
    OUT,
    ONB_FAMILY,
    Box,
    Cap,
    Cup,
    Diagram,
    Scalar,
    Spider,
    Swap,
    double_payload,
)
from .errors import TensorTooLarge, WrongSignature

MAX_ENTRIES = 1 << 20


@dataclass(frozen=True)
class Tensor:
    """Evaluation result: data axes are inputs then outputs."""

    data: np.ndarray
    n_inputs: int

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def in_sizes(self) -> tuple[int, ...]:
        return self.data.shape[: self.n_inputs]

    @property
    def out_sizes(self) -> tuple[int, ...]:
        return self.data.shape[self.n_inputs:]

    @property
    def matrix(self) -> np.ndarray:
        """(product of outputs, product of inputs) matrix view."""
        n_in = self.n_inputs
        n_out = self.data.ndim - n_in
        perm = list(range(n_in, n_in + n_out)) + list(range(n_in))
        rows = int(np.prod(self.out_sizes)) if n_out else 1
        cols = int(np.prod(self.in_sizes)) if n_in else 1
        return self.data.transpose(perm).reshape(rows, cols)

    @property
    def vector(self) -> np.ndarray:
        return self.data.ravel()

    @property
    def scalar(self) -> complex:
        if self.data.size != 1:
            raise WrongSignature("tensor is not a scalar")
        return complex(self.data.ravel()[0])


@dataclass(frozen=True)
class NumericTolerance:
    atol: float = 1e-9
    mode: str = "strict"  # "strict" | "up_to_scalar"


def _check_size(shape) -> None:
    size = 1
    for s in shape:
        size *= s
    if size > MAX_ENTRIES:
        raise TensorTooLarge(
            f"tensor of shape {tuple(shape)} has {size} entries "
            f"(cap is {MAX_ENTRIES}); split the diagram or lower the dimension"
        )


def spider_tensor(gen: Spider) -> np.ndarray:
    """Per-leg tensor of a spider, axes inputs then outputs."""
    legs = gen.in_legs + gen.out_legs
    d = gen.base_dim
    weights = gen.phase.components if gen.phase is not None else (1.0,) * d

    if gen.family != ONB_FAMILY:
        fam = families.get_family(gen.family)
        mat = fam.spider_matrix(len(gen.in_legs), len(gen.out_legs), gen.adjoint)
        if legs and legs[0].is_quantum:
            mat = double_payload(
                mat, [d] * len(gen.in_legs), [d] * len(gen.out_legs)
            )
        return _matrix_to_tensor(mat, gen.in_legs, gen.out_legs)

    if not legs:
        if gen.diagonal:
            return np.array(sum(weights), dtype=complex)
        tot = sum(weights)
        return np.array(tot * np.conj(tot), dtype=complex)

    shape = tuple(t.index_size for t in legs)
    _check_size(shape)
    out = np.zeros(shape, dtype=complex)
    if gen.diagonal:
        for i in range(d):
            idx = tuple(i if t.is_classical else i * d + i for t in legs)
            out[idx] = weights[i]
    else:
        for k in range(d):
            for b in range(d):
                idx = (k * d + b,) * len(legs)
                out[idx] = weights[k] * np.conj(weights[b])
    return out


def _matrix_to_tensor(mat: np.ndarray, in_legs, out_legs) -> np.ndarray:
    out_sizes = [t.index_size for t in out_legs]
    in_sizes = [t.index_size for t in in_legs]
    _check_size(out_sizes + in_sizes)
    t = np.asarray(mat, dtype=complex).reshape(out_sizes + in_sizes)
    m = len(out_sizes)
    perm = list(range(m, m + len(in_sizes))) + list(range(m))
    return t.transpose(perm)


def node_tensor(gen) -> np.ndarray:
    """Tensor of a single generator, axes input ports then output ports."""
    if isinstance(gen, Spider):
        return spider_tensor(gen)
    if isinstance(gen, Box):
        return _matrix_to_tensor(gen.payload, gen.in_legs, gen.out_legs)
    if isinstance(gen, Cup):
        return np.eye(gen.wire.index_size, dtype=complex)
    if isinstance(gen, Cap):
        return np.eye(gen.wire.index_size, dtype=complex)
    if isinstance(gen, Swap):
        sa, sb = gen.a.index_size, gen.b.index_size
        t = np.tensordot(np.eye(sa, dtype=complex), np.eye(sb, dtype=complex), 0)
        return t.transpose(0, 2, 3, 1)  # [in_a, in_b, out_b, out_a]
    if isinstance(gen, Scalar):
        return np.array(gen.value, dtype=complex)
    raise WrongSignature(f"cannot evaluate generator {gen!r}")


@dataclass
class ContractionPlan:
    """A pairwise merge schedule. Entry (i, j) merges the tensors at slots
    i and j (slots are initial node order, then results in append order)."""

    steps: list[tuple[int, int]] = field(default_factory=list)


def _initial_tensors(d: Diagram):
    """Returns (tensors, labels, in_labels, out_labels). One slot per node,
    plus an identity slot per boundary-to-boundary wire."""
    label_of = {w: i for i, w in enumerate(d.wires)}
    fresh = len(d.wires)
    tensors: list[np.ndarray] = []
    labels: list[list[int]] = []
    in_labels = [None] * d.n_inputs
    out_labels = [None] * d.n_outputs
    for w in d.wires:
        if w.src.node == IN:
            in_labels[w.src.port] = label_of[w]
        if w.dst.node == OUT:
            out_labels[w.dst.port] = label_of[w]
    for nid, gen in d.nodes.items():
        arr = node_tensor(gen)
        _check_size(arr.shape)
        labs = [label_of[d.wire_into(nid, p)] for p in range(len(gen.in_types))]
        labs += [label_of[d.wire_from(nid, p)] for p in range(len(gen.out_types))]
        tensors.append(arr)
        labels.append(labs)
    # A wire straight from the input to the output boundary needs an
    # explicit identity tensor so both boundary axes stay free.
    for w in d.wires:
        if w.src.node == IN and w.dst.node == OUT:
            la, lb = fresh, fresh + 1
            fresh += 2
            tensors.append(np.eye(w.wtype.index_size, dtype=complex))
            labels.append([la, lb])
            in_labels[w.src.port] = la
            out_labels[w.dst.port] = lb
    # Collapse self-contractions (a wire with both ends on one node).
    for i, labs in enumerate(labels):
        if len(set(labs)) != len(labs):
            keep = [l for l in labs if labs.count(l) == 1]
            tensors[i] = np.einsum(tensors[i], labs, keep)
            labels[i] = keep
    return tensors, labels, in_labels, out_labels


def _greedy_plan(tensors, labels) -> ContractionPlan:
    plan = ContractionPlan()
    slots = list(range(len(tensors)))
    sizes = {i: tensors[i].size for i in slots}
    labs = {i: list(labels[i]) for i in slots}
    shapes = {i: {l: s for l, s in zip(labels[i], tensors[i].shape)} for i in slots}
    nxt = len(tensors)
    while len(slots) > 1:
        best = None
        for ai in range(len(slots)):
            for bi in range(ai + 1, len(slots)):
                a, b = slots[ai], slots[bi]
                shared = set(labs[a]) & set(labs[b])
                size = 1
                for l in labs[a] + labs[b]:
                    if l not in shared:
                        size *= shapes[a].get(l) or shapes[b].get(l)
                # Prefer connected merges; among those the smallest result.
                key = (0 if shared else 1, size, a, b)
                if best is None or key < best[0]:
                    best = (key, a, b)
        _, a, b = best
        plan.steps.append((a, b))
        merged = [l for l in labs[a] + labs[b] if (labs[a] + labs[b]).count(l) == 1]
        labs[nxt] = merged
        shapes[nxt] = {**shapes[a], **shapes[b]}
        sizes[nxt] = 1
        for l in merged:
            sizes[nxt] *= shapes[nxt][l]
        slots.remove(a)
        slots.remove(b)
        slots.append(nxt)
        nxt += 1
    return plan


def random_plan(d: Diagram, rng: np.random.Generator) -> ContractionPlan:
    """A uniformly random valid pairwise schedule (for cross-checking)."""
    tensors, labels, _, _ = _initial_tensors(d)
    plan = ContractionPlan()
    slots = list(range(len(tensors)))
    nxt = len(tensors)
    while len(slots) > 1:
        ai, bi = sorted(rng.choice(len(slots), size=2, replace=False))
        a, b = slots[ai], slots[bi]
        plan.steps.append((a, b))
        slots.remove(a)
        slots.remove(b)
        slots.append(nxt)
        nxt += 1
    return plan


def contract_order(d: Diagram) -> ContractionPlan:
    """The plan evaluate() would follow for this diagram."""
    tensors, labels, _, _ = _initial_tensors(d)
    return _greedy_plan(tensors, labels)


def evaluate(d: Diagram, plan: ContractionPlan | None = None) -> Tensor:
    """Contract the diagram to its tensor."""
    tensors, labels, in_labels, out_labels = _initial_tensors(d)
    slots: dict[int, tuple[np.ndarray, list[int]]] = {
        i: (tensors[i], labels[i]) for i in range(len(tensors))
    }
    if plan is None:
        plan = _greedy_plan(tensors, labels)
    nxt = len(tensors)
    for a, b in plan.steps:
        if a not in slots or b not in slots:
            raise WrongSignature(f"contraction plan reuses slot {a} or {b}")
        ta, la = slots.pop(a)
        tb, lb = slots.pop(b)
        shared = set(la) & set(lb)
        out = [l for l in la + lb if l not in shared]
        _check_size(
            [s for l, s in zip(la, ta.shape) if l in out]
            + [s for l, s in zip(lb, tb.shape) if l in out]
        )
        arr = _pair_einsum(ta, la, tb, lb, out)
        slots[nxt] = (arr, out)
        nxt += 1
    if not slots:
        arr, labs = np.array(1.0 + 0j), []
    else:
        remaining = [slots[k] for k in sorted(slots)]
        arr, labs = remaining[0]
        for t2, l2 in remaining[1:]:
            _check_size(list(arr.shape) + list(t2.shape))
            arr = _pair_einsum(arr, labs, t2, l2, labs + l2)
            labs = labs + l2
    want = [l for l in in_labels + out_labels]
    if sorted(want) != sorted(labs):
        raise WrongSignature("contraction lost track of boundary axes")
    if want:
        arr = np.einsum(arr, _compact(labs), _compact(labs, want))
    else:
        arr = arr.reshape(())
    return Tensor(np.ascontiguousarray(arr), d.n_inputs)


def _compact(labels, order=None):
    table = {l: i for i, l in enumerate(sorted(set(labels)))}
    return [table[l] for l in (order if order is not None else labels)]


def _pair_einsum(ta, la, tb, lb, out):
    names = {l: i for i, l in enumerate(dict.fromkeys(la + lb))}
    return np.einsum(ta, [names[l] for l in la], tb, [names[l] for l in lb],
                     [names[l] for l in out])


def evaluate_matrix(d: Diagram) -> np.ndarray:
    return evaluate(d).matrix


def numeric_equal(
    d1: Diagram,
    d2: Diagram,
    tol: "NumericTolerance | float" = None,
    mode: str | None = None,
) -> bool:
    """Compare two diagrams' tensors, strictly or up to a nonzero scalar."""
    if isinstance(tol, NumericTolerance):
        atol, m = tol.atol, tol.mode
    else:
        atol = 1e-9 if tol is None else float(tol)
        m = "strict"
    if mode is not None:
        m = mode
    if d1.input_types != d2.input_types or d1.output_types != d2.output_types:
        raise WrongSignature(
            f"cannot compare {d1.n_inputs}->{d1.n_outputs} "
            f"({list(map(str, d1.input_types))} -> {list(map(str, d1.output_types))}) with "
            f"{d2.n_inputs}->{d2.n_outputs} "
            f"({list(map(str, d2.input_types))} -> {list(map(str, d2.output_types))})"
        )
    t1 = evaluate(d1).data
    t2 = evaluate(d2).data
    return arrays_equal(t1, t2, atol, m)


def arrays_equal(t1: np.ndarray, t2: np.ndarray, atol: float, mode: str) -> bool:
    if t1.shape != t2.shape:
        return False
    if mode == "strict":
        return bool(np.max(np.abs(t1 - t2)) <= atol) if t1.size else True
    if mode != "up_to_scalar":
        raise WrongSignature(f"unknown comparison mode {mode!r}")
    if t1.size == 0:
        return True
    idx = np.unravel_index(np.argmax(np.abs(t1)), t1.shape)
    if abs(t1[idx]) <= atol:
        return bool(np.max(np.abs(t2)) <= atol)
    lam = t2[idx] / t1[idx]
    if abs(lam) <= atol:
        return False
    return bool(np.max(np.abs(t2 - lam * t1)) <= atol)


def format_tensor(t: Tensor) -> str:
    """Columnar text format: a shape header, the input count, then one
    `re im` row per entry in C order. Floats use repr, so the text is
    bit-stable and round-trips exactly."""
    lines = ["shape " + " ".join(str(s) for s in t.shape), f"inputs {t.n_inputs}"]
    for entry in t.data.ravel(order="C"):
        lines.append(f"{float(entry.real)!r} {float(entry.imag)!r}")
    return "\n".join(lines) + "\n"


def parse_tensor(text: str) -> Tensor:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("shape"):
        raise WrongSignature("tensor text must start with a shape header")
    shape = tuple(int(x) for x in lines[0].split()[1:])
    n_inputs = int(lines[1].split()[1])
    vals = []
    for ln in lines[2:]:
        re_s, im_s = ln.split()
        vals.append(complex(float(re_s), float(im_s)))
    size = 1
    for s in shape:
        size *= s
    if len(vals) != size:
        raise WrongSignature(f"expected {size} entries, got {len(vals)}")
    return Tensor(np.array(vals, dtype=complex).reshape(shape), n_inputs)

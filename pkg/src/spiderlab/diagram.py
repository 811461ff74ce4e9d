"""Open-graph diagrams over classical and quantum wires.

A diagram is a set of generator nodes plus a set of directed wires. Each
wire runs from an output port of one node to an input port of another (or
to/from the diagram boundary), carries a WireType, and every port is used
exactly once. Only connectivity matters: diagrams related by planar isotopy
are represented by the same graph.

Boundary convention: pseudo-node IN (-1) sources the diagram inputs and
pseudo-node OUT (-2) sinks the outputs, both position-indexed. A bare wire
from IN to OUT is the identity diagram.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple, Union

import numpy as np

from .errors import BoundaryMismatch, DimMismatch, NotPlain, ShapeMismatch, WrongKind
from .wires import Kind, PhaseVector, WireType, classical, quantum

IN = -1
OUT = -2

ONB_FAMILY = "onb"


class Port(NamedTuple):
    node: int
    port: int


# ---------------------------------------------------------------------------
# Generators


@dataclass(frozen=True)
class Spider:
    """A spider node: the n-to-m generator of a commutative Frobenius family.

    For the built-in "onb" family at base dimension d:

    * diagonal spiders sum over a single index i, placing i on classical
      legs and the pair (i, i) on quantum legs, weighted by phase[i];
    * non-diagonal spiders must have all-quantum legs and sum over ket/bra
      pairs (k, b) weighted by phase[k] * conj(phase[b]) (the doubling of a
      plain spider).

    Registered families (see families.py) evaluate through their
    multiplication/comultiplication trees; `adjoint` marks the daggered
    member for families that are not self-adjoint.
    """

    in_legs: tuple[WireType, ...]
    out_legs: tuple[WireType, ...]
    phase: PhaseVector | None = None
    diagonal: bool = True
    family: str = ONB_FAMILY
    adjoint: bool = False

    def __post_init__(self):
        legs = self.in_legs + self.out_legs
        dims = {t.base_dim for t in legs}
        if len(dims) > 1:
            raise DimMismatch(f"spider legs mix base dimensions {sorted(dims)}")
        if not legs and self.phase is None:
            raise DimMismatch("a spider with no legs needs a phase to fix its dimension")
        if self.phase is not None and legs and self.phase.dim != legs[0].base_dim:
            raise DimMismatch(
                f"phase vector of dim {self.phase.dim} on a spider of base dim {legs[0].base_dim}"
            )
        if any(t.is_classical for t in legs) and not self.diagonal:
            raise WrongKind("a spider with classical legs must be diagonal")
        if self.family != ONB_FAMILY and self.phase is not None:
            raise WrongKind("phases are only defined for the onb family")
        if self.family != ONB_FAMILY and len({t.kind for t in legs}) > 1:
            raise WrongKind("family spiders cannot mix classical and quantum legs")
        if self.family != ONB_FAMILY and legs and legs[0].is_quantum and self.diagonal:
            raise WrongKind("a quantum family spider is a doubling; set diagonal=False")
        if self.family == ONB_FAMILY and self.adjoint:
            raise WrongKind("the onb family is self-adjoint; adjoint flag is reserved")

    @property
    def in_types(self) -> tuple[WireType, ...]:
        return self.in_legs

    @property
    def out_types(self) -> tuple[WireType, ...]:
        return self.out_legs

    @property
    def base_dim(self) -> int:
        legs = self.in_legs + self.out_legs
        if legs:
            return legs[0].base_dim
        return self.phase.dim

    @property
    def all_quantum(self) -> bool:
        return all(t.is_quantum for t in self.in_legs + self.out_legs)

    def dagger(self) -> "Spider":
        phase = -self.phase if self.phase is not None else None
        adjoint = self.adjoint if self.family == ONB_FAMILY else not self.adjoint
        return Spider(self.out_legs, self.in_legs, phase, self.diagonal, self.family, adjoint)

    def transpose(self) -> "Spider":
        # Spider tensors are invariant under conjugation, so transpose and
        # dagger only differ in what happens to the phase.
        adjoint = self.adjoint if self.family == ONB_FAMILY else not self.adjoint
        return Spider(
            tuple(reversed(self.out_legs)),
            tuple(reversed(self.in_legs)),
            self.phase,
            self.diagonal,
            self.family,
            adjoint,
        )

    def describe(self) -> str:
        parts = [f"spider {len(self.in_legs)}->{len(self.out_legs)}"]
        legs = self.in_legs + self.out_legs
        if legs:
            parts.append(str(legs[0]) if all(t == legs[0] for t in legs) else "mixed")
        if self.phase is not None:
            parts.append(str(self.phase))
        if self.family != ONB_FAMILY:
            parts.append(f"family={self.family}" + ("†" if self.adjoint else ""))
        return " ".join(parts)


@dataclass(frozen=True, eq=False)
class Box:
    """An opaque process with an explicit payload matrix.

    The payload has shape (product of output index sizes, product of input
    index sizes), row-major over legs left to right. Flavors:

    * "plain": a single-wire-world map; all legs classical.
    * "doubled": the image of a plain box under doubling; all legs quantum
      and the payload is already the doubled matrix.
    * "cq": a general classical-quantum tensor (controlled processes,
      channels, POVMs); legs may mix kinds.
    """

    name: str
    in_legs: tuple[WireType, ...]
    out_legs: tuple[WireType, ...]
    payload: np.ndarray
    flavor: str = "plain"

    def __post_init__(self):
        payload = np.asarray(self.payload, dtype=complex)
        object.__setattr__(self, "payload", payload)
        if self.flavor not in ("plain", "doubled", "cq"):
            raise WrongKind(f"unknown box flavor {self.flavor!r}")
        if self.flavor == "plain" and any(t.is_quantum for t in self.in_legs + self.out_legs):
            raise WrongKind(f"plain box {self.name!r} cannot have quantum legs")
        if self.flavor == "doubled" and any(t.is_classical for t in self.in_legs + self.out_legs):
            raise WrongKind(f"doubled box {self.name!r} cannot have classical legs")
        want = (_index_prod(self.out_legs), _index_prod(self.in_legs))
        if payload.shape != want:
            raise ShapeMismatch(
                f"box {self.name!r}: payload shape {payload.shape}, legs require {want}"
            )

    @property
    def in_types(self) -> tuple[WireType, ...]:
        return self.in_legs

    @property
    def out_types(self) -> tuple[WireType, ...]:
        return self.out_legs

    def dagger(self) -> "Box":
        return Box(self.name, self.out_legs, self.in_legs, self.payload.conj().T, self.flavor)

    def transpose(self) -> "Box":
        out_sizes = [t.index_size for t in self.out_legs]
        in_sizes = [t.index_size for t in self.in_legs]
        t = self.payload.reshape(out_sizes + in_sizes)
        m, n = len(out_sizes), len(in_sizes)
        axes = list(reversed(range(m, m + n))) + list(reversed(range(m)))
        t = t.transpose(axes)
        new_in = tuple(reversed(self.out_legs))
        new_out = tuple(reversed(self.in_legs))
        payload = t.reshape(_index_prod(new_out), _index_prod(new_in))
        return Box(self.name, new_in, new_out, payload, self.flavor)

    def doubled(self) -> "Box":
        if self.flavor != "plain":
            raise NotPlain(f"box {self.name!r} has flavor {self.flavor!r}")
        payload = double_payload(
            self.payload,
            [t.base_dim for t in self.in_legs],
            [t.base_dim for t in self.out_legs],
        )
        return Box(
            self.name,
            tuple(t.doubled() for t in self.in_legs),
            tuple(t.doubled() for t in self.out_legs),
            payload,
            "doubled",
        )

    def describe(self) -> str:
        return f"box {self.name}"


@dataclass(frozen=True)
class Cup:
    """The 0-to-2 perfect-correlation state on a wire (a spider in disguise)."""

    wire: WireType

    @property
    def in_types(self) -> tuple[WireType, ...]:
        return ()

    @property
    def out_types(self) -> tuple[WireType, ...]:
        return (self.wire, self.wire)

    def dagger(self) -> "Cap":
        return Cap(self.wire)

    def transpose(self) -> "Cap":
        return Cap(self.wire)

    def describe(self) -> str:
        return f"cup {self.wire}"


@dataclass(frozen=True)
class Cap:
    """The 2-to-0 partner of Cup."""

    wire: WireType

    @property
    def in_types(self) -> tuple[WireType, ...]:
        return (self.wire, self.wire)

    @property
    def out_types(self) -> tuple[WireType, ...]:
        return ()

    def dagger(self) -> "Cup":
        return Cup(self.wire)

    def transpose(self) -> "Cup":
        return Cup(self.wire)

    def describe(self) -> str:
        return f"cap {self.wire}"


@dataclass(frozen=True)
class Swap:
    """Wire crossing: inputs (a, b), outputs (b, a)."""

    a: WireType
    b: WireType

    @property
    def in_types(self) -> tuple[WireType, ...]:
        return (self.a, self.b)

    @property
    def out_types(self) -> tuple[WireType, ...]:
        return (self.b, self.a)

    def dagger(self) -> "Swap":
        return Swap(self.b, self.a)

    def transpose(self) -> "Swap":
        return Swap(self.a, self.b)

    def describe(self) -> str:
        return f"swap {self.a} {self.b}"


@dataclass(frozen=True)
class Scalar:
    """A 0-ary node multiplying the diagram's value by a complex number."""

    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))

    @property
    def in_types(self) -> tuple[WireType, ...]:
        return ()

    @property
    def out_types(self) -> tuple[WireType, ...]:
        return ()

    def dagger(self) -> "Scalar":
        return Scalar(self.value.conjugate())

    def transpose(self) -> "Scalar":
        return Scalar(self.value)

    def describe(self) -> str:
        return f"scalar {self.value}"


Generator = Union[Spider, Box, Cup, Cap, Swap, Scalar]


def _index_prod(legs: Iterable[WireType]) -> int:
    p = 1
    for t in legs:
        p *= t.index_size
    return p


def double_payload(payload: np.ndarray, in_dims: list[int], out_dims: list[int]) -> np.ndarray:
    """payload (x) conj(payload) with ket/bra pairs merged per leg (ket*d + bra)."""
    t = np.asarray(payload, dtype=complex).reshape(out_dims + in_dims)
    nleg = len(out_dims) + len(in_dims)
    d = np.multiply.outer(t, t.conj())
    perm = []
    for a in range(nleg):
        perm += [a, a + nleg]
    d = d.transpose(perm) if nleg else d
    d = d.reshape([s * s for s in out_dims + in_dims] or [1])
    rows = int(np.prod([s * s for s in out_dims], dtype=object)) if out_dims else 1
    cols = int(np.prod([s * s for s in in_dims], dtype=object)) if in_dims else 1
    return d.reshape(rows, cols)


# ---------------------------------------------------------------------------
# Wires and diagrams


@dataclass(frozen=True)
class Wire:
    src: Port
    dst: Port
    wtype: WireType

    def key(self):
        return (self.src.node, self.src.port, self.dst.node, self.dst.port)


class Diagram:
    """An immutable open graph of generators.

    Use the module-level constructors plus `>>` (sequential, left runs
    first) and `@` (parallel) to build diagrams, or `Diagram.build` for raw
    graph wiring when cycles or ad-hoc boundary orders are needed.
    """

    __slots__ = ("nodes", "wires", "n_inputs", "n_outputs", "_src_map", "_dst_map")

    def __init__(
        self,
        nodes: dict[int, Generator],
        wires: Iterable[Wire],
        n_inputs: int,
        n_outputs: int,
    ):
        object.__setattr__(self, "nodes", dict(sorted(nodes.items())))
        object.__setattr__(self, "wires", tuple(sorted(wires, key=Wire.key)))
        object.__setattr__(self, "n_inputs", n_inputs)
        object.__setattr__(self, "n_outputs", n_outputs)
        src_map: dict[Port, Wire] = {}
        dst_map: dict[Port, Wire] = {}
        for w in self.wires:
            if w.src in src_map:
                raise BoundaryMismatch(f"port {w.src} used twice as a source")
            if w.dst in dst_map:
                raise BoundaryMismatch(f"port {w.dst} used twice as a target")
            src_map[w.src] = w
            dst_map[w.dst] = w
        object.__setattr__(self, "_src_map", src_map)
        object.__setattr__(self, "_dst_map", dst_map)
        self._validate()

    def __setattr__(self, *a):
        raise AttributeError("diagrams are immutable")

    def _validate(self):
        for w in self.wires:
            for end, role in ((w.src, "source"), (w.dst, "target")):
                if end.node == IN:
                    if role != "source":
                        raise BoundaryMismatch("diagram input used as a wire target")
                    if not 0 <= end.port < self.n_inputs:
                        raise BoundaryMismatch(f"input position {end.port} out of range")
                elif end.node == OUT:
                    if role != "target":
                        raise BoundaryMismatch("diagram output used as a wire source")
                    if not 0 <= end.port < self.n_outputs:
                        raise BoundaryMismatch(f"output position {end.port} out of range")
                else:
                    if end.node not in self.nodes:
                        raise BoundaryMismatch(f"wire touches unknown node {end.node}")
                    gen = self.nodes[end.node]
                    legs = gen.out_types if role == "source" else gen.in_types
                    if not 0 <= end.port < len(legs):
                        raise BoundaryMismatch(
                            f"node {end.node} ({gen.describe()}) has no port {end.port}"
                        )
                    if legs[end.port] != w.wtype:
                        raise WrongKind(
                            f"wire {w.wtype} plugged into {legs[end.port]} port of node {end.node}"
                        )
        for k in range(self.n_inputs):
            if Port(IN, k) not in self._src_map:
                raise BoundaryMismatch(f"input position {k} is not wired")
        for k in range(self.n_outputs):
            if Port(OUT, k) not in self._dst_map:
                raise BoundaryMismatch(f"output position {k} is not wired")
        for nid, gen in self.nodes.items():
            for p in range(len(gen.in_types)):
                if Port(nid, p) not in self._dst_map:
                    raise BoundaryMismatch(f"input port {p} of node {nid} is not wired")
            for p in range(len(gen.out_types)):
                if Port(nid, p) not in self._src_map:
                    raise BoundaryMismatch(f"output port {p} of node {nid} is not wired")

    # -- basic queries ----------------------------------------------------

    @property
    def input_types(self) -> tuple[WireType, ...]:
        return tuple(self._src_map[Port(IN, k)].wtype for k in range(self.n_inputs))

    @property
    def output_types(self) -> tuple[WireType, ...]:
        return tuple(self._dst_map[Port(OUT, k)].wtype for k in range(self.n_outputs))

    def wire_from(self, node: int, port: int) -> Wire:
        return self._src_map[Port(node, port)]

    def wire_into(self, node: int, port: int) -> Wire:
        return self._dst_map[Port(node, port)]

    def wires_of(self, node: int) -> list[Wire]:
        gen = self.nodes[node]
        ws = [self._dst_map[Port(node, p)] for p in range(len(gen.in_types))]
        ws += [self._src_map[Port(node, p)] for p in range(len(gen.out_types))]
        return ws

    def next_id(self) -> int:
        return max(self.nodes, default=-1) + 1

    def __repr__(self) -> str:
        return (
            f"<Diagram {self.n_inputs}->{self.n_outputs}, "
            f"{len(self.nodes)} nodes, {len(self.wires)} wires>"
        )

    # -- construction ------------------------------------------------------

    @classmethod
    def empty(cls) -> "Diagram":
        return cls({}, (), 0, 0)

    @classmethod
    def identity(cls, wtype: WireType) -> "Diagram":
        return cls({}, (Wire(Port(IN, 0), Port(OUT, 0), wtype),), 1, 1)

    @classmethod
    def identity_on(cls, types: Iterable[WireType]) -> "Diagram":
        types = tuple(types)
        wires = tuple(Wire(Port(IN, k), Port(OUT, k), t) for k, t in enumerate(types))
        return cls({}, wires, len(types), len(types))

    @classmethod
    def permutation(cls, types: Iterable[WireType], source_of: Iterable[int]) -> "Diagram":
        """Outputs are a reordering of the inputs: output j comes from
        input source_of[j]. `types` lists the input types."""
        types = tuple(types)
        source_of = tuple(source_of)
        if sorted(source_of) != list(range(len(types))):
            raise BoundaryMismatch("source_of must be a permutation of the inputs")
        wires = tuple(
            Wire(Port(IN, i), Port(OUT, j), types[i]) for j, i in enumerate(source_of)
        )
        return cls({}, wires, len(types), len(types))

    @classmethod
    def from_generator(cls, gen: Generator) -> "Diagram":
        wires = [
            Wire(Port(IN, p), Port(0, p), t) for p, t in enumerate(gen.in_types)
        ] + [
            Wire(Port(0, p), Port(OUT, p), t) for p, t in enumerate(gen.out_types)
        ]
        return cls({0: gen}, wires, len(gen.in_types), len(gen.out_types))

    @classmethod
    def build(
        cls,
        nodes: dict[int, Generator],
        wires: Iterable[Wire],
        n_inputs: int,
        n_outputs: int,
    ) -> "Diagram":
        return cls(nodes, wires, n_inputs, n_outputs)

    # -- composition --------------------------------------------------------

    def compose_seq(self, other: "Diagram") -> "Diagram":
        """self followed by other (other after self)."""
        if self.output_types != other.input_types:
            raise BoundaryMismatch(
                f"cannot plug {list(map(str, self.output_types))} into "
                f"{list(map(str, other.input_types))}"
            )
        offset = self.next_id()
        nodes = dict(self.nodes)
        for nid, gen in other.nodes.items():
            nodes[nid + offset] = gen

        def shift(p: Port) -> Port:
            return p if p.node in (IN, OUT) else Port(p.node + offset, p.port)

        wires: list[Wire] = []
        for w in self.wires:
            if w.dst.node != OUT:
                wires.append(w)
        pending = {w.dst.port: w.src for w in self.wires if w.dst.node == OUT}
        for w in other.wires:
            src, dst = shift(w.src), shift(w.dst)
            if w.src.node == IN:
                src = pending[w.src.port]
            wires.append(Wire(src, dst, w.wtype))
        return Diagram(nodes, wires, self.n_inputs, other.n_outputs)

    def compose_par(self, other: "Diagram") -> "Diagram":
        """self beside other (self's legs come first)."""
        offset = self.next_id()

        def shift(p: Port, is_src: bool) -> Port:
            if p.node == IN:
                return Port(IN, p.port + self.n_inputs)
            if p.node == OUT:
                return Port(OUT, p.port + self.n_outputs)
            return Port(p.node + offset, p.port)

        nodes = dict(self.nodes)
        for nid, gen in other.nodes.items():
            nodes[nid + offset] = gen
        wires = list(self.wires)
        for w in other.wires:
            wires.append(Wire(shift(w.src, True), shift(w.dst, False), w.wtype))
        return Diagram(
            nodes, wires, self.n_inputs + other.n_inputs, self.n_outputs + other.n_outputs
        )

    def __rshift__(self, other: "Diagram") -> "Diagram":
        return self.compose_seq(other)

    def __matmul__(self, other: "Diagram") -> "Diagram":
        return self.compose_par(other)

    # -- involutions ---------------------------------------------------------

    def dagger(self) -> "Diagram":
        nodes = {nid: gen.dagger() for nid, gen in self.nodes.items()}

        def flip(p: Port) -> Port:
            if p.node == IN:
                return Port(OUT, p.port)
            if p.node == OUT:
                return Port(IN, p.port)
            return p

        wires = [Wire(flip(w.dst), flip(w.src), w.wtype) for w in self.wires]
        return Diagram(nodes, wires, self.n_outputs, self.n_inputs)

    def transpose(self) -> "Diagram":
        """Rotate the diagram half a turn: equivalent to bending every
        boundary wire with cups and caps, without inserting the nodes."""
        nodes = {nid: gen.transpose() for nid, gen in self.nodes.items()}

        def flip(p: Port, gen_of: dict[int, Generator]) -> Port:
            if p.node == IN:
                return Port(OUT, self.n_inputs - 1 - p.port)
            if p.node == OUT:
                return Port(IN, self.n_outputs - 1 - p.port)
            return p

        wires = []
        for w in self.wires:
            # A node's leg at position p sits at position (count-1-p) after
            # rotation because transpose() reverses each generator's legs.
            src, dst = w.dst, w.src
            if src.node not in (IN, OUT):
                n_out_old = len(self.nodes[src.node].in_types)
                src = Port(src.node, n_out_old - 1 - src.port)
            if dst.node not in (IN, OUT):
                n_in_old = len(self.nodes[dst.node].out_types)
                dst = Port(dst.node, n_in_old - 1 - dst.port)
            wires.append(Wire(flip(src, nodes), flip(dst, nodes), w.wtype))
        return Diagram(nodes, wires, self.n_outputs, self.n_inputs)

    def conjugate(self) -> "Diagram":
        return self.dagger().transpose()

    def double(self) -> "Diagram":
        """Apply the doubling construction to a plain diagram."""
        for w in self.wires:
            if w.wtype.is_quantum:
                raise NotPlain("double() needs a single-wire diagram; found a quantum wire")
        nodes: dict[int, Generator] = {}
        for nid, gen in self.nodes.items():
            if isinstance(gen, Box):
                nodes[nid] = gen.doubled()
            elif isinstance(gen, Spider):
                phase = gen.phase
                nodes[nid] = Spider(
                    tuple(t.doubled() for t in gen.in_legs),
                    tuple(t.doubled() for t in gen.out_legs),
                    phase,
                    diagonal=False,
                    family=gen.family,
                    adjoint=gen.adjoint,
                )
            elif isinstance(gen, Cup):
                nodes[nid] = Cup(gen.wire.doubled())
            elif isinstance(gen, Cap):
                nodes[nid] = Cap(gen.wire.doubled())
            elif isinstance(gen, Swap):
                nodes[nid] = Swap(gen.a.doubled(), gen.b.doubled())
            elif isinstance(gen, Scalar):
                nodes[nid] = Scalar(gen.value * gen.value.conjugate())
            else:
                raise NotPlain(f"cannot double {gen.describe()}")
        wires = [Wire(w.src, w.dst, w.wtype.doubled()) for w in self.wires]
        return Diagram(nodes, wires, self.n_inputs, self.n_outputs)

    # -- identity -------------------------------------------------------------

    def structural_key(self):
        def genkey(g: Generator):
            if isinstance(g, Box):
                return ("box", g.name, g.in_legs, g.out_legs, g.flavor, g.payload.tobytes())
            if isinstance(g, Spider):
                return ("spider", g.in_legs, g.out_legs, g.phase, g.diagonal, g.family, g.adjoint)
            return repr(g)

        return (
            tuple((nid, genkey(g)) for nid, g in self.nodes.items()),
            tuple((w.key(), w.wtype) for w in self.wires),
            self.n_inputs,
            self.n_outputs,
        )

    def structural_equal(self, other: "Diagram") -> bool:
        return self.structural_key() == other.structural_key()

    def hash(self) -> str:
        return hashlib.sha256(repr(self.structural_key()).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Generator-level and diagram-level constructors


def spider_gen(
    n_in: int,
    n_out: int,
    wtype: WireType,
    phase: PhaseVector | None = None,
    diagonal: bool | None = None,
    family: str = ONB_FAMILY,
    adjoint: bool = False,
) -> Spider:
    if diagonal is None:
        diagonal = wtype.is_classical
    return Spider((wtype,) * n_in, (wtype,) * n_out, phase, diagonal, family, adjoint)


def spider(
    n_in: int,
    n_out: int,
    wtype: WireType,
    phase: PhaseVector | None = None,
    diagonal: bool | None = None,
    family: str = ONB_FAMILY,
    adjoint: bool = False,
) -> Diagram:
    return Diagram.from_generator(spider_gen(n_in, n_out, wtype, phase, diagonal, family, adjoint))


def measure(d: int) -> Diagram:
    """Quantum in, classical out: read off the ONB outcome."""
    return Diagram.from_generator(Spider((quantum(d),), (classical(d),), diagonal=True))


def encode(d: int) -> Diagram:
    """Classical in, quantum out: prepare the ONB state."""
    return Diagram.from_generator(Spider((classical(d),), (quantum(d),), diagonal=True))


def delete(d: int) -> Diagram:
    """Drop a classical value."""
    return Diagram.from_generator(Spider((classical(d),), (), diagonal=True))


def discard(d: int) -> Diagram:
    """Trace out a quantum system."""
    return Diagram.from_generator(Spider((quantum(d),), (), diagonal=True))


def copy(d: int, n: int = 2) -> Diagram:
    """Broadcast a classical value to n wires."""
    return Diagram.from_generator(Spider((classical(d),), (classical(d),) * n, diagonal=True))


def compare(d: int) -> Diagram:
    """The 2-to-1 classical spider: passes equal values, kills the rest."""
    return Diagram.from_generator(Spider((classical(d),) * 2, (classical(d),), diagonal=True))


def decoherence(d: int) -> Diagram:
    return measure(d) >> encode(d)


def cup(wtype: WireType) -> Diagram:
    return Diagram.from_generator(Cup(wtype))


def cap(wtype: WireType) -> Diagram:
    return Diagram.from_generator(Cap(wtype))


def swap(a: WireType, b: WireType) -> Diagram:
    return Diagram.from_generator(Swap(a, b))


def scalar(value: complex) -> Diagram:
    return Diagram.from_generator(Scalar(value))


def box(
    name: str,
    in_legs: Iterable[WireType],
    out_legs: Iterable[WireType],
    payload: np.ndarray,
    flavor: str = "plain",
) -> Diagram:
    return Diagram.from_generator(Box(name, tuple(in_legs), tuple(out_legs), payload, flavor))


def classical_value(d: int, i: int) -> Diagram:
    """The classical point state |i> as a plain box."""
    if not 0 <= i < d:
        raise DimMismatch(f"value {i} out of range for dimension {d}")
    v = np.zeros((d, 1), dtype=complex)
    v[i, 0] = 1.0
    return box(f"val{i}", (), (classical(d),), v)


def uniform(d: int) -> Diagram:
    """The uniform probability distribution as a classical state."""
    v = np.full((d, 1), 1.0 / d, dtype=complex)
    return box("uniform", (), (classical(d),), v, flavor="cq")


def ghz(d: int, legs: int = 3, phase: PhaseVector | None = None) -> Diagram:
    """The n-legged quantum spider state (GHZ for 3 legs at d=2)."""
    return spider(0, legs, quantum(d), phase=phase, diagonal=False)


def is_value_box(gen: Generator, tol: float = 1e-12) -> int | None:
    """If gen is a plain classical point state, return its value, else None."""
    if not isinstance(gen, Box) or gen.flavor != "plain":
        return None
    if gen.in_legs or len(gen.out_legs) != 1 or gen.out_legs[0].is_quantum:
        return None
    col = gen.payload[:, 0]
    hits = [i for i, x in enumerate(col) if abs(x - 1.0) <= tol]
    if len(hits) != 1:
        return None
    if any(abs(x) > tol for i, x in enumerate(col) if i != hits[0]):
        return None
    return hits[0]

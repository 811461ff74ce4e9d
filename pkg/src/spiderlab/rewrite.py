"""Rewriting on diagrams: local rules, normalization, traced derivations.

Every rule here is sound for the tensor semantics (each application leaves
the evaluated tensor unchanged exactly) and strictly decreases the measure

    (#spiders + 2 * #(cups, caps, swaps),  #wires,  #nodes)

in lexicographic order, so normalization terminates. Frobenius laws and
the loop classification of registered families are checked once at
registration time; they are lemmas behind the fusion rule, not rewrite
steps of their own.

Rules carry a deterministic matcher (matches come out sorted by node id),
an applier that is a pure function of diagram and match, and a sampler
that builds random concrete instances for the soundness suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import families
from .diagram import (
    IN,
    ONB_FAMILY,
    OUT,
    Box,
    Cap,
    Cup,
    Diagram,
    Port,
    Scalar,
    Spider,
    Swap,
    Wire,
    box,
    cap,
    classical_value,
    cup,
    double_payload,
    is_value_box,
    scalar,
    spider,
    spider_gen,
    swap,
)
from .errors import InvalidMatch, NotNormalized, WrongSignature
from .isomorphism import diagrams_isomorphic
from .reports import Claim, Report, max_deviation
from .tensor import NumericTolerance, numeric_equal
from .wires import UNIT_TOL, PhaseVector, WireType, classical, quantum

REWRITE_TOL = 1e-9


def measure_of(diagram: Diagram) -> tuple[int, int, int]:
    """Termination measure, compared lexicographically."""
    spiders = sum(isinstance(g, Spider) for g in diagram.nodes.values())
    heavy = sum(isinstance(g, (Cup, Cap, Swap)) for g in diagram.nodes.values())
    return (spiders + 2 * heavy, len(diagram.wires), len(diagram.nodes))


@dataclass(frozen=True)
class Match:
    rule: str
    nodes: tuple[int, ...]
    data: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RewriteRule:
    name: str
    law: str

    def find(self, diagram: Diagram) -> list[Match]:
        raise NotImplementedError

    def apply(self, diagram: Diagram, match: Match) -> Diagram:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, d: int) -> Diagram:
        """A random diagram guaranteed to contain at least one match."""
        raise NotImplementedError


# ---------------------------------------------------------------------------
# Graph-surgery helpers. Rewriters copy the node dict and wire list, edit
# them, and rebuild; diagrams themselves stay immutable.


def _parts(diagram: Diagram):
    return dict(diagram.nodes), list(diagram.wires)


def _rebuild(diagram: Diagram, nodes, wires) -> Diagram:
    return Diagram(nodes, wires, diagram.n_inputs, diagram.n_outputs)


def _splice_node(nodes, wires, nid: int, through: dict[int, int]):
    """Remove node nid, reconnecting each input port to the output port
    given by `through`. Chains that pass through the node repeatedly are
    followed; each closed cycle contributes a trace factor equal to its
    index size, returned as a list of scalars."""
    gen = nodes.pop(nid)
    into: dict[int, Wire] = {}
    outof: dict[int, Wire] = {}
    kept = []
    for w in wires:
        touches = False
        if w.dst.node == nid:
            into[w.dst.port] = w
            touches = True
        if w.src.node == nid:
            outof[w.src.port] = w
            touches = True
        if not touches:
            kept.append(w)

    scalars: list[complex] = []
    done: set[int] = set()
    for start in sorted(into):
        if start in done or into[start].src.node == nid:
            continue
        src = into[start].src
        wtype = into[start].wtype
        p = start
        while True:
            done.add(p)
            out_w = outof[through[p]]
            if out_w.dst.node != nid:
                kept.append(Wire(src, out_w.dst, wtype))
                break
            p = out_w.dst.port
    for start in sorted(into):
        if start in done:
            continue
        # A cycle entirely through this node: trace of the identity.
        p = start
        size = into[start].wtype.index_size
        while p not in done:
            done.add(p)
            p = outof[through[p]].dst.port
        scalars.append(complex(size))
    wires[:] = kept
    return scalars


def _drop_spider_legs(nodes, wires, nid: int, in_drop: set[int], out_drop: set[int]):
    """Rebuild spider nid without the given legs, shifting the ports of the
    surviving wires down. The caller removes the dropped legs' wires."""
    sp: Spider = nodes[nid]
    new_in = tuple(t for p, t in enumerate(sp.in_legs) if p not in in_drop)
    new_out = tuple(t for p, t in enumerate(sp.out_legs) if p not in out_drop)

    def shift(port: int, dropped: set[int]) -> int:
        return port - sum(1 for q in dropped if q < port)

    for i, w in enumerate(wires):
        src, dst = w.src, w.dst
        if dst.node == nid and dst.port not in in_drop:
            dst = Port(nid, shift(dst.port, in_drop))
        if src.node == nid and src.port not in out_drop:
            src = Port(nid, shift(src.port, out_drop))
        if (src, dst) != (w.src, w.dst):
            wires[i] = Wire(src, dst, w.wtype)

    if new_in or new_out:
        nodes[nid] = Spider(new_in, new_out, sp.phase, sp.diagonal, sp.family, sp.adjoint)
        return None
    del nodes[nid]
    return _spider_scalar(sp)


def _spider_scalar(sp: Spider) -> complex:
    """The number a fully contracted spider collapses to."""
    d = sp.base_dim
    if sp.family != ONB_FAMILY:
        fam = families.get_family(sp.family)
        v = complex(fam.spider_matrix(0, 0, sp.adjoint)[0, 0])
        legs = sp.in_legs + sp.out_legs
        if legs and legs[0].is_quantum:
            v = v * np.conj(v)
        return v
    weights = sp.phase.components if sp.phase is not None else (1.0,) * d
    tot = sum(weights)
    if sp.diagonal:
        return complex(tot)
    return complex(tot * np.conj(tot))


def _rand_state(rng, name, wtype: WireType) -> Diagram:
    v = rng.normal(size=(wtype.index_size, 1)) + 1j * rng.normal(size=(wtype.index_size, 1))
    flavor = "plain" if wtype.is_classical else "cq"
    return box(name, (), (wtype,), v, flavor=flavor)


def _rand_effect(rng, name, wtype: WireType) -> Diagram:
    v = rng.normal(size=(1, wtype.index_size)) + 1j * rng.normal(size=(1, wtype.index_size))
    flavor = "plain" if wtype.is_classical else "cq"
    return box(name, (wtype,), (), v, flavor=flavor)


def _rand_phase(rng, d: int) -> PhaseVector:
    return PhaseVector.from_angles(rng.uniform(-np.pi, np.pi, size=d - 1))


def _rand_wtype(rng, d: int) -> WireType:
    return classical(d) if rng.integers(2) else quantum(d)


def _close_off(rng, middle: Diagram) -> Diagram:
    """Plug every boundary leg of `middle` with a random state or effect,
    keeping the evaluation a scalar (cheap to compare)."""
    states = Diagram.empty()
    for k, t in enumerate(middle.input_types):
        states = states @ _rand_state(rng, f"in{k}", t)
    effects = Diagram.empty()
    for k, t in enumerate(middle.output_types):
        effects = effects @ _rand_effect(rng, f"out{k}", t)
    return states >> middle >> effects


# ---------------------------------------------------------------------------
# Rules


class SwapElim(RewriteRule):
    def find(self, diagram):
        return [
            Match(self.name, (nid,))
            for nid in sorted(diagram.nodes)
            if isinstance(diagram.nodes[nid], Swap)
        ]

    def apply(self, diagram, match):
        nodes, wires = _parts(diagram)
        extra = _splice_node(nodes, wires, match.nodes[0], {0: 1, 1: 0})
        nid = max(nodes, default=-1) + 1
        for v in extra:
            nodes[nid] = Scalar(v)
            nid += 1
        return _rebuild(diagram, nodes, wires)

    def sample(self, rng, d):
        a, b = _rand_wtype(rng, d), _rand_wtype(rng, d)
        if rng.integers(3) == 0:
            return cup(a) >> swap(a, a) >> cap(a)
        return _close_off(rng, swap(a, b))


class CupCapToSpider(RewriteRule):
    def find(self, diagram):
        return [
            Match(self.name, (nid,))
            for nid in sorted(diagram.nodes)
            if isinstance(diagram.nodes[nid], (Cup, Cap))
        ]

    def apply(self, diagram, match):
        nodes, wires = _parts(diagram)
        gen = nodes[match.nodes[0]]
        w = gen.wire
        legs = (w, w)
        if isinstance(gen, Cup):
            sp = Spider((), legs, diagonal=w.is_classical)
        else:
            sp = Spider(legs, (), diagonal=w.is_classical)
        nodes[match.nodes[0]] = sp
        return _rebuild(diagram, nodes, wires)

    def sample(self, rng, d):
        w = _rand_wtype(rng, d)
        if rng.integers(2):
            return cup(w) >> cap(w)
        return _close_off(rng, cup(w))


class SelfLoopDrop(RewriteRule):
    """An output leg of an onb spider wired back into one of its own
    inputs: special Frobenius structure makes the loop disappear."""

    def find(self, diagram):
        out = []
        for nid in sorted(diagram.nodes):
            gen = diagram.nodes[nid]
            if not isinstance(gen, Spider) or gen.family != ONB_FAMILY:
                continue
            for q in range(len(gen.out_legs)):
                w = diagram.wire_from(nid, q)
                if w.dst.node == nid:
                    out.append(
                        Match(self.name, (nid,), {"out": q, "in": w.dst.port})
                    )
        return out

    def apply(self, diagram, match):
        nodes, wires = _parts(diagram)
        nid = match.nodes[0]
        p_in, p_out = match.data["in"], match.data["out"]
        wires[:] = [
            w for w in wires if not (w.src == Port(nid, p_out) and w.dst == Port(nid, p_in))
        ]
        left = _drop_spider_legs(nodes, wires, nid, {p_in}, {p_out})
        if left is not None:
            nodes[max(nodes, default=-1) + 1] = Scalar(left)
        return _rebuild(diagram, nodes, wires)

    def sample(self, rng, d):
        w = _rand_wtype(rng, d)
        diagonal = True if w.is_classical else bool(rng.integers(2))
        phase = _rand_phase(rng, d) if rng.integers(2) else None
        sp = Spider((w, w), (w, w), phase, diagonal)
        middle = Diagram(
            {0: sp},
            [
                Wire(Port(IN, 0), Port(0, 0), w),
                Wire(Port(0, 0), Port(0, 1), w),
                Wire(Port(0, 1), Port(OUT, 0), w),
            ],
            1,
            1,
        )
        return _close_off(rng, middle)


def _fusable(g1: Spider, g2: Spider, n_links: int) -> bool:
    if g1.family != g2.family:
        return False
    if g1.family == ONB_FAMILY:
        return True
    return g1.adjoint == g2.adjoint and n_links == 1


def _fused_phase(g1: Spider, g2: Spider):
    """Weights and head shape of the fused spider: diagonal wins, doubled
    operands contribute unit weight to a diagonal result."""
    diagonal = g1.diagonal or g2.diagonal
    if g1.diagonal == g2.diagonal:
        if g1.phase is None:
            ph = g2.phase
        elif g2.phase is None:
            ph = g1.phase
        else:
            ph = g1.phase + g2.phase
    else:
        ph = g1.phase if g1.diagonal else g2.phase
    return ph, diagonal


class SpiderFuse(RewriteRule):
    def find(self, diagram):
        seen = set()
        out = []
        for w in diagram.wires:
            a, b = w.src.node, w.dst.node
            if a in (IN, OUT) or b in (IN, OUT) or a == b:
                continue
            g1, g2 = diagram.nodes[a], diagram.nodes[b]
            if not (isinstance(g1, Spider) and isinstance(g2, Spider)):
                continue
            pair = (min(a, b), max(a, b))
            if pair in seen:
                continue
            seen.add(pair)
            links = [
                v
                for v in diagram.wires
                if {v.src.node, v.dst.node} == {a, b}
            ]
            if _fusable(g1, g2, len(links)):
                out.append(Match(self.name, (a, b)))
        return sorted(out, key=lambda m: m.nodes)

    def apply(self, diagram, match):
        a, b = match.nodes
        nodes, wires = _parts(diagram)
        g1: Spider = nodes.pop(a)
        g2: Spider = nodes.pop(b)
        links = [w for w in wires if {w.src.node, w.dst.node} == {a, b}]
        wires[:] = [w for w in wires if w not in links]

        used_in = {(w.dst.node, w.dst.port) for w in links}
        used_out = {(w.src.node, w.src.port) for w in links}
        new_in, new_out = [], []
        in_map: dict[Port, Port] = {}
        out_map: dict[Port, Port] = {}
        nid = max(nodes, default=-1) + 1
        for node, gen in ((a, g1), (b, g2)):
            for p, t in enumerate(gen.in_legs):
                if (node, p) not in used_in:
                    in_map[Port(node, p)] = Port(nid, len(new_in))
                    new_in.append(t)
            for p, t in enumerate(gen.out_legs):
                if (node, p) not in used_out:
                    out_map[Port(node, p)] = Port(nid, len(new_out))
                    new_out.append(t)

        if g1.family != ONB_FAMILY:
            phase, diagonal = None, g1.diagonal
        else:
            phase, diagonal = _fused_phase(g1, g2)

        if new_in or new_out:
            nodes[nid] = Spider(
                tuple(new_in), tuple(new_out), phase, diagonal, g1.family, g1.adjoint
            )
            for i, w in enumerate(wires):
                src = out_map.get(w.src, w.src)
                dst = in_map.get(w.dst, w.dst)
                if (src, dst) != (w.src, w.dst):
                    wires[i] = Wire(src, dst, w.wtype)
        else:
            merged = Spider(
                g1.in_legs + g2.in_legs,
                g1.out_legs + g2.out_legs,
                phase,
                diagonal,
                g1.family,
                g1.adjoint,
            )
            nodes[nid] = Scalar(_spider_scalar(merged))
        return _rebuild(diagram, nodes, wires)

    def sample(self, rng, d):
        if rng.integers(4) == 0:
            return self._sample_family(rng)
        w = _rand_wtype(rng, d)
        legs = [int(rng.integers(0, 2)) for _ in range(4)]
        n_links = int(rng.integers(1, 3))

        def head(wt):
            if wt.is_classical:
                return True
            return bool(rng.integers(2))

        d1, d2 = head(w), head(w)
        ph1 = _rand_phase(rng, d) if rng.integers(2) else None
        ph2 = _rand_phase(rng, d) if rng.integers(2) else None
        s1 = Spider((w,) * legs[0], (w,) * (legs[1] + n_links), ph1, d1)
        s2 = Spider((w,) * (legs[2] + n_links), (w,) * legs[3], ph2, d2)
        nodes = {0: s1, 1: s2}
        wires = []
        for k in range(n_links):
            wires.append(Wire(Port(0, legs[1] + k), Port(1, legs[2] + k), w))
        n_in = legs[0] + legs[2]
        n_out = legs[1] + legs[3]
        pos = 0
        for p in range(legs[0]):
            wires.append(Wire(Port(IN, pos), Port(0, p), w))
            pos += 1
        for p in range(legs[2]):
            wires.append(Wire(Port(IN, pos), Port(1, p), w))
            pos += 1
        pos = 0
        for p in range(legs[1]):
            wires.append(Wire(Port(0, p), Port(OUT, pos), w))
            pos += 1
        for p in range(legs[3]):
            wires.append(Wire(Port(1, p), Port(OUT, pos), w))
            pos += 1
        return _close_off(rng, Diagram(nodes, wires, n_in, n_out))

    def _sample_family(self, rng):
        if not families.has_family("w"):
            families.register_family("w", 2, *families.w_generators())
        w = classical(2) if rng.integers(2) else quantum(2)
        adjoint = bool(rng.integers(2))
        diag = w.is_classical
        n1 = int(rng.integers(0, 3))
        m2 = int(rng.integers(0, 3))
        s1 = Spider((w,) * n1, (w,), None, diag, "w", adjoint)
        s2 = Spider((w,), (w,) * m2, None, diag, "w", adjoint)
        middle = Diagram.from_generator(s1) >> Diagram.from_generator(s2)
        return _close_off(rng, middle)


class IdSpiderElim(RewriteRule):
    def find(self, diagram):
        out = []
        for nid in sorted(diagram.nodes):
            gen = diagram.nodes[nid]
            if not isinstance(gen, Spider):
                continue
            if len(gen.in_legs) != 1 or len(gen.out_legs) != 1:
                continue
            if gen.phase is not None and not gen.phase.is_unit(UNIT_TOL):
                continue
            t = gen.in_legs[0]
            if gen.family == ONB_FAMILY:
                if t.is_classical and not gen.diagonal:
                    continue
                if t.is_quantum and gen.diagonal:
                    continue  # decoherence, not the identity
            if diagram.wire_into(nid, 0).src.node == nid:
                continue  # a circle; the self-loop rule owns it
            out.append(Match(self.name, (nid,)))
        return out

    def apply(self, diagram, match):
        nodes, wires = _parts(diagram)
        _splice_node(nodes, wires, match.nodes[0], {0: 0})
        return _rebuild(diagram, nodes, wires)

    def sample(self, rng, d):
        w = _rand_wtype(rng, d)
        diagonal = w.is_classical
        middle = spider(1, 1, w, diagonal=diagonal)
        return _close_off(rng, middle)


class CopyValue(RewriteRule):
    """A classical point pushed through a diagonal spider lands on every
    leg, leaving the matching weight behind as a scalar."""

    def find(self, diagram):
        out = []
        for nid in sorted(diagram.nodes):
            gen = diagram.nodes[nid]
            val = is_value_box(gen)
            if val is None:
                continue
            w = diagram.wire_from(nid, 0)
            tgt = w.dst.node
            if tgt in (IN, OUT):
                continue
            sp = diagram.nodes[tgt]
            if (
                isinstance(sp, Spider)
                and sp.family == ONB_FAMILY
                and sp.diagonal
            ):
                out.append(
                    Match(self.name, (nid, tgt), {"value": val, "port": w.dst.port})
                )
        return out

    def apply(self, diagram, match):
        vbox, snode = match.nodes
        i = match.data["value"]
        port = match.data["port"]
        nodes, wires = _parts(diagram)
        sp: Spider = nodes.pop(snode)
        nodes.pop(vbox)
        d = sp.base_dim
        wires[:] = [w for w in wires if w.dst != Port(snode, port)]

        col = np.zeros((d, 1), dtype=complex)
        col[i, 0] = 1.0

        def state_gen(t: WireType) -> Box:
            if t.is_classical:
                return Box(f"val{i}", (), (t,), col)
            return Box(f"val{i}", (), (t,), double_payload(col, [], [d]), flavor="doubled")

        nid = max(nodes, default=-1) + 1
        new_wires = []
        for w in wires:
            src, dst = w.src, w.dst
            if dst.node == snode:  # another input leg: postselect on i
                nodes[nid] = state_gen(w.wtype).dagger()
                dst = Port(nid, 0)
                nid += 1
            if src.node == snode:  # an output leg: emit the point
                nodes[nid] = state_gen(w.wtype)
                src = Port(nid, 0)
                nid += 1
            new_wires.append(Wire(src, dst, w.wtype))
        wires[:] = new_wires
        if sp.phase is not None:
            nodes[nid] = Scalar(sp.phase.components[i])
        return _rebuild(diagram, nodes, wires)

    def sample(self, rng, d):
        i = int(rng.integers(d))
        n_in = int(rng.integers(0, 2))
        n_out = int(rng.integers(0, 3))
        legs = [classical(d)] * (n_in + 1) + [
            _rand_wtype(rng, d) for _ in range(n_out)
        ]
        phase = _rand_phase(rng, d) if rng.integers(2) else None
        sp = Spider(tuple(legs[: n_in + 1]), tuple(legs[n_in + 1 :]), phase, True)
        middle = (classical_value(d, i) @ Diagram.identity_on(sp.in_legs[1:])) >> (
            Diagram({0: sp}, [
                Wire(Port(IN, k), Port(0, k), t) for k, t in enumerate(sp.in_legs)
            ] + [
                Wire(Port(0, k), Port(OUT, k), t) for k, t in enumerate(sp.out_legs)
            ], n_in + 1, n_out)
        )
        return _close_off(rng, middle)


def _controlled_branches(gen) -> list[np.ndarray] | None:
    """Branch matrices of a controlled box: classical control first, one
    quantum system through."""
    if not isinstance(gen, Box) or gen.flavor != "cq":
        return None
    if len(gen.in_legs) != 2 or len(gen.out_legs) != 1:
        return None
    c, q = gen.in_legs
    if not (c.is_classical and q.is_quantum and gen.out_legs[0] == q):
        return None
    n, s = c.base_dim, q.index_size
    return [gen.payload[:, i * s : (i + 1) * s] for i in range(n)]


class ControlledCancel(RewriteRule):
    """Two controlled boxes driven by the same classical spider cancel when
    their branches compose to the identity, value by value."""

    def find(self, diagram):
        out = []
        for w in diagram.wires:
            if w.src.node in (IN, OUT) or w.dst.node in (IN, OUT):
                continue
            u_id, v_id = w.src.node, w.dst.node
            if u_id == v_id or w.dst.port != 1:
                continue
            ub = _controlled_branches(diagram.nodes[u_id])
            vb = _controlled_branches(diagram.nodes[v_id])
            if ub is None or vb is None or w.src.port != 0:
                continue
            cu = diagram.wire_into(u_id, 0)
            cv = diagram.wire_into(v_id, 0)
            if cu.src.node in (IN, OUT) or cu.src.node != cv.src.node:
                continue
            snode = cu.src.node
            sp = diagram.nodes[snode]
            if not (
                isinstance(sp, Spider)
                and sp.family == ONB_FAMILY
                and sp.diagonal
                and snode not in (u_id, v_id)
            ):
                continue
            if len(ub) != len(vb):
                continue
            s = diagram.nodes[u_id].out_legs[0].index_size
            if not all(
                np.allclose(b @ a, np.eye(s), rtol=0.0, atol=REWRITE_TOL)
                for a, b in zip(ub, vb)
            ):
                continue
            out.append(
                Match(
                    self.name,
                    (snode, u_id, v_id),
                    {"legs": (cu.src.port, cv.src.port)},
                )
            )
        return sorted(out, key=lambda m: m.nodes)

    def apply(self, diagram, match):
        snode, u_id, v_id = match.nodes
        qa, qb = match.data["legs"]
        nodes, wires = _parts(diagram)
        q_in = diagram.wire_into(u_id, 1)
        q_out = diagram.wire_from(v_id, 0)
        drop_keys = {
            q_in.key(),
            q_out.key(),
            diagram.wire_into(u_id, 0).key(),
            diagram.wire_into(v_id, 0).key(),
            diagram.wire_from(u_id, 0).key(),
        }
        wires[:] = [w for w in wires if w.key() not in drop_keys]
        nodes.pop(u_id)
        nodes.pop(v_id)
        extra = None
        if q_in.src == Port(v_id, 0):
            extra = complex(q_in.wtype.index_size)
        else:
            wires.append(Wire(q_in.src, q_out.dst, q_in.wtype))
        left = _drop_spider_legs(nodes, wires, snode, set(), {qa, qb})
        nid = max(nodes, default=-1) + 1
        if left is not None:
            nodes[nid] = Scalar(left)
            nid += 1
        if extra is not None:
            nodes[nid] = Scalar(extra)
        return _rebuild(diagram, nodes, wires)

    def sample(self, rng, d):
        from .protocols import controlled_unitaries, random_unitary

        n = int(rng.integers(2, 4))
        us = [random_unitary(rng, d) for _ in range(n)]
        fwd = controlled_unitaries("u", us)
        bwd = controlled_unitaries("u_inv", [u.conj().T for u in us])
        c, q = classical(n), quantum(d)
        if rng.integers(2):
            sp = spider(0, 2, c)  # both controls share a perfectly correlated pair
        else:
            sp = spider(1, 2, c)
        return _close_off(rng, self._wire_sample(sp, fwd, bwd, c, q))

    @staticmethod
    def _wire_sample(sp: Diagram, fwd: Diagram, bwd: Diagram, c, q) -> Diagram:
        spg = next(iter(sp.nodes.values()))
        fg = next(iter(fwd.nodes.values()))
        bg = next(iter(bwd.nodes.values()))
        nodes = {0: spg, 1: fg, 2: bg}
        wires = [
            Wire(Port(0, 0), Port(1, 0), c),
            Wire(Port(0, 1), Port(2, 0), c),
            Wire(Port(IN, 0), Port(1, 1), q),
            Wire(Port(1, 0), Port(2, 1), q),
            Wire(Port(2, 0), Port(OUT, 0), q),
        ]
        n_in = 1
        if spg.in_legs:
            wires.append(Wire(Port(IN, 1), Port(0, 0), c))
            n_in = 2
        return Diagram(nodes, wires, n_in, 1)


class ScalarFold(RewriteRule):
    def find(self, diagram):
        ids = [
            nid for nid in sorted(diagram.nodes)
            if isinstance(diagram.nodes[nid], Scalar)
        ]
        if len(ids) < 2:
            return []
        return [Match(self.name, (ids[0], ids[1]))]

    def apply(self, diagram, match):
        a, b = match.nodes
        nodes, wires = _parts(diagram)
        va = nodes.pop(a).value
        vb = nodes.pop(b).value
        nodes[max(nodes, default=-1) + 1] = Scalar(va * vb)
        return _rebuild(diagram, nodes, wires)

    def sample(self, rng, d):
        va = complex(rng.normal(), rng.normal())
        vb = complex(rng.normal(), rng.normal())
        return scalar(va) @ scalar(vb) @ _close_off(rng, Diagram.identity(classical(d)))


class UnitScalarDrop(RewriteRule):
    def find(self, diagram):
        return [
            Match(self.name, (nid,))
            for nid in sorted(diagram.nodes)
            if isinstance(diagram.nodes[nid], Scalar)
            and abs(diagram.nodes[nid].value - 1.0) <= UNIT_TOL
        ]

    def apply(self, diagram, match):
        nodes, wires = _parts(diagram)
        nodes.pop(match.nodes[0])
        return _rebuild(diagram, nodes, wires)

    def sample(self, rng, d):
        return scalar(1.0) @ _close_off(rng, Diagram.identity(quantum(d)))


RULES: tuple[RewriteRule, ...] = (
    SwapElim("swap-elim", "a crossing is only a relabeling of wires"),
    CupCapToSpider("cupcap-spider", "bent wires are two-legged spiders"),
    SelfLoopDrop("self-loop", "a spider leg fed back into the same spider vanishes"),
    SpiderFuse("fuse", "connected spiders of one family merge; phases add"),
    IdSpiderElim("id-spider", "an unphased one-in one-out spider is a plain wire"),
    CopyValue("copy-value", "a point state copies through a diagonal spider"),
    ControlledCancel(
        "controlled-cancel",
        "branchwise inverse controlled boxes under one classical spider cancel",
    ),
    ScalarFold("scalar-fold", "loose numbers multiply together"),
    UnitScalarDrop("unit-scalar", "the number one is the empty diagram"),
)

_RULES_BY_NAME = {r.name: r for r in RULES}


def get_rule(name: str) -> RewriteRule:
    if name not in _RULES_BY_NAME:
        raise InvalidMatch(f"unknown rule {name!r}")
    return _RULES_BY_NAME[name]


def rules_catalog() -> list[tuple[str, str]]:
    return [(r.name, r.law) for r in RULES]


# ---------------------------------------------------------------------------
# Normalization


@dataclass(frozen=True)
class RewriteStep:
    rule: str
    match: Match
    measure_before: tuple[int, int, int]
    measure_after: tuple[int, int, int]


@dataclass(frozen=True)
class RewriteTrace:
    initial: Diagram
    final: Diagram
    steps: tuple[RewriteStep, ...]

    def replay(self, start: Diagram | None = None) -> Diagram:
        """Re-run the recorded derivation step by step, checking that each
        recorded match is still found by its rule, and return the result."""
        current = self.initial if start is None else start
        for step in self.steps:
            rule = get_rule(step.rule)
            found = [m for m in rule.find(current) if m.nodes == step.match.nodes]
            if not found:
                raise InvalidMatch(
                    f"recorded {step.rule} match on nodes {step.match.nodes} "
                    "is absent during replay"
                )
            current = rule.apply(current, found[0])
        return current

    def __len__(self) -> int:
        return len(self.steps)


def normalize(
    diagram: Diagram,
    *,
    check: bool = False,
    max_steps: int = 100_000,
) -> tuple[Diagram, RewriteTrace]:
    """Apply rules to exhaustion, deterministically: rules are tried in
    catalog order and the lowest-node-id match wins. With check=True every
    step is verified numerically (slow; meant for tests)."""
    current = diagram
    steps: list[RewriteStep] = []
    for _ in range(max_steps):
        hit = None
        for rule in RULES:
            found = rule.find(current)
            if found:
                hit = (rule, found[0])
                break
        if hit is None:
            trace = RewriteTrace(diagram, current, tuple(steps))
            return current, trace
        rule, match = hit
        before = measure_of(current)
        new = rule.apply(current, match)
        after = measure_of(new)
        if not after < before:
            raise NotNormalized(
                f"rule {rule.name} did not decrease the measure: {before} -> {after}"
            )
        if check and not numeric_equal(current, new, NumericTolerance(REWRITE_TOL)):
            raise NotNormalized(f"rule {rule.name} changed the tensor")
        steps.append(RewriteStep(rule.name, match, before, after))
        current = new
    raise NotNormalized(f"no normal form after {max_steps} steps")


def is_normal(diagram: Diagram) -> bool:
    return all(not rule.find(diagram) for rule in RULES)


# ---------------------------------------------------------------------------
# Equality


@dataclass(frozen=True)
class EqualityResult:
    equal: bool
    method: str  # "rewrite" | "numeric"
    normal_left: Diagram
    normal_right: Diagram

    def __bool__(self) -> bool:
        return self.equal


def _scalar_product(diagram: Diagram) -> complex:
    out = 1.0 + 0j
    for gen in diagram.nodes.values():
        if isinstance(gen, Scalar):
            out *= gen.value
    return out


def _strip_scalars(diagram: Diagram) -> Diagram:
    nodes = {
        nid: gen for nid, gen in diagram.nodes.items() if not isinstance(gen, Scalar)
    }
    return Diagram(nodes, diagram.wires, diagram.n_inputs, diagram.n_outputs)


def rewrite_equal(
    d1: Diagram,
    d2: Diagram,
    tol: float | NumericTolerance | None = None,
    mode: str | None = None,
) -> EqualityResult:
    """Decide equality by normalizing both sides and comparing graphs; when
    the normal forms differ structurally, fall back to numeric evaluation
    of the normal forms and report which method decided."""
    if isinstance(tol, NumericTolerance):
        nt = tol if mode is None else NumericTolerance(tol.atol, mode)
    else:
        nt = NumericTolerance(1e-9 if tol is None else tol, mode or "strict")
    if d1.input_types != d2.input_types or d1.output_types != d2.output_types:
        raise WrongSignature(
            f"cannot compare {d1!r} with {d2!r}: boundaries differ"
        )
    n1, _ = normalize(d1)
    n2, _ = normalize(d2)
    if nt.mode == "strict":
        if diagrams_isomorphic(n1, n2, nt.atol):
            return EqualityResult(True, "rewrite", n1, n2)
    else:
        s1, s2 = _scalar_product(n1), _scalar_product(n2)
        if abs(s1) > nt.atol and abs(s2) > nt.atol:
            if diagrams_isomorphic(_strip_scalars(n1), _strip_scalars(n2), nt.atol):
                return EqualityResult(True, "rewrite", n1, n2)
    verdict = numeric_equal(n1, n2, nt)
    return EqualityResult(bool(verdict), "numeric", n1, n2)


# ---------------------------------------------------------------------------
# Soundness harness


def check_rule_soundness(
    rule: RewriteRule,
    rng: np.random.Generator,
    dims: tuple[int, ...] = (2, 3),
    samples: int = 25,
    tol: float = 1e-9,
) -> int:
    """Sample instances, apply the rule, and verify the tensor does not
    move and the measure strictly drops. Returns the number of checks."""
    ran = 0
    for d in dims:
        for _ in range(samples):
            diag = rule.sample(rng, d)
            found = rule.find(diag)
            if not found:
                raise InvalidMatch(f"{rule.name} sampler produced no match at d={d}")
            new = rule.apply(diag, found[0])
            if not measure_of(new) < measure_of(diag):
                raise NotNormalized(f"{rule.name} failed to decrease the measure")
            if not numeric_equal(diag, new, NumericTolerance(tol)):
                raise NotNormalized(f"{rule.name} changed the tensor on a sample")
            ran += 1
    return ran


def soundness_report(
    rng: np.random.Generator | None = None,
    dims: tuple[int, ...] = (2, 3),
    samples: int = 25,
    tol: float = REWRITE_TOL,
) -> Report:
    """One claim per rule and dimension: the rule's sampler runs, each
    application keeps the tensor fixed to within `tol`, and the
    termination measure strictly drops. Deviation is the worst tensor
    drift seen over the samples."""
    if rng is None:
        rng = np.random.default_rng(0)
    report = Report("rewrite rule soundness")
    for rule in RULES:
        for d in dims:
            worst = 0.0
            ok = True
            detail = rule.law
            for _ in range(samples):
                diag = rule.sample(rng, d)
                found = rule.find(diag)
                if not found:
                    ok, detail = False, f"sampler produced no match at d={d}"
                    break
                new = rule.apply(diag, found[0])
                if not measure_of(new) < measure_of(diag):
                    ok, detail = False, "termination measure did not drop"
                    break
                worst = max(worst, max_deviation(diag, new))
            report.add(
                Claim(
                    name=f"{rule.name} sound on {samples} samples [d={d}]",
                    passed=ok and worst <= tol,
                    deviation=worst,
                    tolerance=tol,
                    detail=detail,
                )
            )
    return report

"""Boundary-respecting isomorphism between diagrams.

Two diagrams match when there is a bijection of node ids that preserves
generator kind and parameters, maps wires to wires, and keeps every
boundary position fixed. Spider legs and cup/cap ports are unordered
within each side (their tensors are symmetric per side), while box and
swap ports keep their order. Box names are ignored: boxes with equal
payloads are the same morphism.
"""

from __future__ import annotations

from collections import Counter

import numpy as np

from .diagram import IN, OUT, Box, Cap, Cup, Diagram, Scalar, Spider, Swap, Wire


def _type_multiset(types):
    return tuple(sorted(str(t) for t in types))


def _bucket_key(gen):
    """Hashable coarse key; float payloads are compared later with a
    tolerance, so they stay out of the key."""
    if isinstance(gen, Spider):
        return (
            "spider",
            _type_multiset(gen.in_legs),
            _type_multiset(gen.out_legs),
            gen.phase is None,
            gen.diagonal,
            gen.family,
            gen.adjoint,
        )
    if isinstance(gen, Box):
        return (
            "box",
            gen.flavor,
            tuple(str(t) for t in gen.in_legs),
            tuple(str(t) for t in gen.out_legs),
        )
    if isinstance(gen, Cup):
        return ("cup", str(gen.wire))
    if isinstance(gen, Cap):
        return ("cap", str(gen.wire))
    if isinstance(gen, Swap):
        return ("swap", str(gen.a), str(gen.b))
    if isinstance(gen, Scalar):
        return ("scalar",)
    raise TypeError(f"unknown generator {gen!r}")


def _compatible(g1, g2, tol: float) -> bool:
    if _bucket_key(g1) != _bucket_key(g2):
        return False
    if isinstance(g1, Spider):
        if g1.phase is None:
            return True
        return g1.phase.approx_equal(g2.phase, tol)
    if isinstance(g1, Box):
        return bool(np.allclose(g1.payload, g2.payload, rtol=0.0, atol=tol))
    if isinstance(g1, Scalar):
        return abs(g1.value - g2.value) <= tol
    return True


def _port_class(gen, side: str, port: int):
    """Ports with symmetric tensors collapse into one class per side."""
    if isinstance(gen, (Box, Swap)):
        return (side, port)
    return (side, -1)


def _endpoint(diagram: Diagram, node: int, port: int, side: str):
    if node in (IN, OUT):
        return (node, port)
    return (node, _port_class(diagram.nodes[node], side, port))


def _reduced(diagram: Diagram, w: Wire, image=None):
    """A wire collapsed to unordered-port classes, optionally translating
    node ids through a partial mapping."""

    def res(node, port, side):
        if node in (IN, OUT):
            return (node, port)
        mapped = image[node] if image is not None else node
        return (mapped, _port_class(diagram.nodes[node], side, port))

    return (res(w.src.node, w.src.port, "o"), res(w.dst.node, w.dst.port, "i"), w.wtype)


def find_isomorphism(d1: Diagram, d2: Diagram, tol: float = 1e-9):
    """A node-id mapping from d1 onto d2, or None. Boundary positions map
    to themselves; wire multiplicities between port classes must agree."""
    if d1.n_inputs != d2.n_inputs or d1.n_outputs != d2.n_outputs:
        return None
    if len(d1.nodes) != len(d2.nodes) or len(d1.wires) != len(d2.wires):
        return None
    if d1.input_types != d2.input_types or d1.output_types != d2.output_types:
        return None

    boundary1 = [w for w in d1.wires if w.src.node == IN and w.dst.node == OUT]
    boundary2 = [w for w in d2.wires if w.src.node == IN and w.dst.node == OUT]
    if Counter(w.key() for w in boundary1) != Counter(w.key() for w in boundary2):
        return None

    buckets: dict = {}
    for nid, gen in d2.nodes.items():
        buckets.setdefault(_bucket_key(gen), []).append(nid)
    candidates: dict[int, list[int]] = {}
    for nid, gen in d1.nodes.items():
        cands = [
            other
            for other in buckets.get(_bucket_key(gen), [])
            if _compatible(gen, d2.nodes[other], tol)
        ]
        if not cands:
            return None
        candidates[nid] = cands

    available = Counter(_reduced(d2, w) for w in d2.wires)

    # Order nodes so each one touches an earlier node when the graph allows,
    # which lets the wire checks prune early.
    order: list[int] = []
    seen: set[int] = set()
    neighbours: dict[int, set[int]] = {nid: set() for nid in d1.nodes}
    for w in d1.wires:
        if w.src.node not in (IN, OUT) and w.dst.node not in (IN, OUT):
            neighbours[w.src.node].add(w.dst.node)
            neighbours[w.dst.node].add(w.src.node)
    frontier = sorted(
        d1.nodes,
        key=lambda n: (0 if any(w.src.node in (IN, OUT) or w.dst.node in (IN, OUT)
                                for w in d1.wires_of(n)) else 1, n),
    )
    for start in frontier:
        if start in seen:
            continue
        stack = [start]
        seen.add(start)
        while stack:
            n = stack.pop()
            order.append(n)
            for nb in sorted(neighbours[n]):
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)

    mapping: dict[int, int] = {}
    used: set[int] = set()

    def wires_to_check(nid: int) -> list[Wire]:
        out = {}
        for w in d1.wires_of(nid):
            ends = {w.src.node, w.dst.node}
            ends.discard(IN)
            ends.discard(OUT)
            if all(e == nid or e in mapping for e in ends):
                out[w.key()] = w
        return list(out.values())

    def assign(pos: int) -> bool:
        if pos == len(order):
            return True
        nid = order[pos]
        for cand in candidates[nid]:
            if cand in used:
                continue
            mapping[nid] = cand
            used.add(cand)
            taken: list = []
            ok = True
            for w in wires_to_check(nid):
                key = _reduced(d1, w, mapping)
                if available[key] <= 0:
                    ok = False
                    break
                available[key] -= 1
                taken.append(key)
            if ok and assign(pos + 1):
                return True
            for key in taken:
                available[key] += 1
            used.discard(cand)
            del mapping[nid]
        return False

    if assign(0):
        return dict(mapping)
    return None


def diagrams_isomorphic(d1: Diagram, d2: Diagram, tol: float = 1e-9) -> bool:
    return find_isomorphism(d1, d2, tol) is not None

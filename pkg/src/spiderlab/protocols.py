"""Communication protocols as diagrams, with verified correctness claims.

Teleportation, dense coding and entanglement swapping are built over one
ingredient: a family of unitaries U_i on dimension D, pairwise orthogonal
under the trace inner product (tr(U_i' U_j) = D when i = j, else 0). Such
a family makes V, the matrix whose i-th column is U_i flattened over
root D, a unitary on dimension D squared; measuring in V's basis is the
generalized Bell measurement. The default family is built from clock and
shift matrices and exists for every D.

Diagrams here live in the doubled picture: quantum wires carry density
operators, classical wires carry distributions, and the protocols come
out exactly correct (scalars included), not just up to normalization.
"""

from __future__ import annotations

import numpy as np

from .diagram import (
    Box,
    Diagram,
    Spider,
    box,
    cap,
    classical_value,
    copy,
    cup,
    delete,
    discard,
    double_payload,
    encode,
    measure,
    scalar,
    spider,
    uniform,
)
from .diagram import IN, OUT, Port, Wire
from .errors import AxiomFailure, DimMismatch
from .rewrite import normalize, rewrite_equal
from .reports import Claim, Report, max_deviation, scaled_deviation
from .tensor import NumericTolerance, evaluate_matrix, numeric_equal
from .wires import classical, quantum

PROTOCOL_TOL = 1e-9


# ---------------------------------------------------------------------------
# Unitary families and controlled boxes


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    """Haar-distributed unitary via QR with the standard phase fix."""
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def clock_shift_family(d: int) -> list[np.ndarray]:
    """The d*d unitaries X^a Z^b: shift by a, then phase by b. For d = 2
    these are the identity, Z, X and XZ."""
    if d < 2:
        raise DimMismatch("need dimension at least 2")
    omega = np.exp(2j * np.pi / d)
    z = np.diag([omega**k for k in range(d)])
    x = np.zeros((d, d), dtype=complex)
    for j in range(d):
        x[(j + 1) % d, j] = 1.0
    out = []
    for a in range(d):
        for b in range(d):
            out.append(np.linalg.matrix_power(x, a) @ np.linalg.matrix_power(z, b))
    return out


def pauli_family(d: int) -> list[np.ndarray]:
    """The correction family used by the protocols at dimension d."""
    return clock_shift_family(d)


def check_trace_orthogonal(us: list[np.ndarray], tol: float = PROTOCOL_TOL) -> float:
    """Largest deviation of tr(U_i' U_j) from D * delta_ij; raises when the
    family is unusable."""
    d = us[0].shape[0]
    worst = 0.0
    for i, u in enumerate(us):
        for j, v in enumerate(us):
            got = np.trace(u.conj().T @ v)
            want = d if i == j else 0.0
            worst = max(worst, abs(got - want))
    if worst > tol:
        raise AxiomFailure(
            "trace orthogonality",
            f"family deviates from D*delta by {worst:.3e}",
        )
    return worst


def measurement_unitary(us: list[np.ndarray]) -> np.ndarray:
    """V with columns U_i flattened over root D: the change of basis of the
    generalized Bell measurement."""
    d = us[0].shape[0]
    cols = [u.reshape(d * d) / np.sqrt(d) for u in us]
    return np.stack(cols, axis=1)


def controlled_unitaries(name: str, us: list[np.ndarray]) -> Diagram:
    """A box applying U_i (conjugation, in the doubled picture) to its
    quantum input when the classical control reads i."""
    n = len(us)
    d = us[0].shape[0]
    s = d * d
    payload = np.zeros((s, n * s), dtype=complex)
    for i, u in enumerate(us):
        if u.shape != (d, d):
            raise DimMismatch("controlled family mixes dimensions")
        payload[:, i * s : (i + 1) * s] = np.kron(u, u.conj())
    return box(name, (classical(n), quantum(d)), (quantum(d),), payload, flavor="cq")


# ---------------------------------------------------------------------------
# Small reusable pieces


def bell_pair(d: int) -> Diagram:
    """The maximally entangled pair as a unit-trace state on two wires."""
    return scalar(1.0 / d) @ cup(quantum(d))


def maximally_mixed(d: int) -> Diagram:
    return scalar(1.0 / d) @ discard(d).dagger()


def merge_pair(d: int) -> Diagram:
    """Relabel two quantum wires of dimension d as one of dimension d*d."""
    payload = double_payload(np.eye(d * d), [d, d], [d * d])
    return box("pair", (quantum(d), quantum(d)), (quantum(d * d),), payload, flavor="doubled")


def split_pair(d: int) -> Diagram:
    return merge_pair(d).dagger()


def doubled_box(name: str, mat: np.ndarray, d: int) -> Diagram:
    """A unitary (or any map) on dimension d lifted to the doubled world."""
    return box(name, (quantum(d),), (quantum(d),), np.kron(mat, mat.conj()), flavor="doubled")


def bell_measurement(d: int, us: list[np.ndarray] | None = None) -> Diagram:
    """Demolition measurement of two d-wires in the basis V: outcome i has
    effect <i| V-dagger on the merged pair."""
    us = pauli_family(d) if us is None else us
    v = measurement_unitary(us)
    return (
        merge_pair(d)
        >> doubled_box("v_adj", v.conj().T, d * d)
        >> measure(d * d)
    )


def vn_bell_measurement(d: int, us: list[np.ndarray] | None = None) -> Diagram:
    """Non-demolition version: the pair survives, re-prepared in the
    measured basis state, alongside the classical outcome. Outputs are
    (classical outcome, first wire, second wire)."""
    us = pauli_family(d) if us is None else us
    v = measurement_unitary(us)
    s = d * d
    return (
        merge_pair(d)
        >> doubled_box("v_adj", v.conj().T, s)
        >> measure(s)
        >> copy(s)
        >> (Diagram.identity(classical(s)) @ (encode(s) >> doubled_box("v", v, s) >> split_pair(d)))
    )


# ---------------------------------------------------------------------------
# Teleportation


def build_teleportation(d: int, us: list[np.ndarray] | None = None, form: str = "fused") -> Diagram:
    """Teleport one d-dimensional system using a Bell pair and a classical
    message of dimension d*d.

    * "fused": the summed-over-outcomes graph, one classical spider feeding
      the measurement branch and the correction branch; normalizes to a
      bare wire by rewriting alone.
    * "operational": Bell measurement box chain followed by the controlled
      correction.
    * "uncorrected": measurement happens but the outcome is deleted and no
      correction is applied.
    """
    us = pauli_family(d) if us is None else us
    check_trace_orthogonal(us)
    q = quantum(d)
    s = d * d

    if form == "operational":
        return (
            (Diagram.identity(q) @ bell_pair(d))
            >> (bell_measurement(d, us) @ Diagram.identity(q))
            >> controlled_unitaries("correct", us)
        )
    if form == "uncorrected":
        return (
            (Diagram.identity(q) @ bell_pair(d))
            >> (bell_measurement(d, us) @ Diagram.identity(q))
            >> (delete(s) @ Diagram.identity(q))
        )
    if form != "fused":
        raise DimMismatch(f"unknown teleportation form {form!r}")

    c = classical(s)
    cu_adj = controlled_unitaries("u_adj", [u.conj().T for u in us]).nodes[0]
    cu = controlled_unitaries("u", us).nodes[0]
    nodes = {
        0: Spider((), (c, c)),          # the sum over outcomes
        1: cu_adj,                      # measurement branch
        2: cap(q).nodes[0],
        3: cup(q).nodes[0],
        4: cu,                          # correction branch
        5: scalar(1.0 / s).nodes[0],
    }
    wires = [
        Wire(Port(IN, 0), Port(1, 1), q),
        Wire(Port(0, 0), Port(1, 0), c),
        Wire(Port(1, 0), Port(2, 0), q),
        Wire(Port(3, 0), Port(2, 1), q),
        Wire(Port(3, 1), Port(4, 1), q),
        Wire(Port(0, 1), Port(4, 0), c),
        Wire(Port(4, 0), Port(OUT, 0), q),
    ]
    return Diagram(nodes, wires, 1, 1)


def verify_teleportation(d: int, us: list[np.ndarray] | None = None) -> Report:
    us = pauli_family(d) if us is None else us
    report = Report(f"teleportation d={d}")
    q = quantum(d)
    ident = Diagram.identity(q)

    fused = build_teleportation(d, us, "fused")
    res = rewrite_equal(fused, ident)
    report.add(
        Claim(
            "fused-form-is-identity",
            bool(res),
            max_deviation(fused, ident),
            PROTOCOL_TOL,
            method=res.method,
        )
    )

    op = build_teleportation(d, us, "operational")
    dev = max_deviation(op, ident)
    report.add(Claim("operational-form-is-identity", dev <= PROTOCOL_TOL, dev, PROTOCOL_TOL))

    v = measurement_unitary(us)
    s = d * d
    dev_v = max(
        float(np.max(np.abs(v.conj().T @ v - np.eye(s)))),
        float(np.max(np.abs(v @ v.conj().T - np.eye(s)))),
    )
    report.add(Claim("measurement-basis-unitary", dev_v <= PROTOCOL_TOL, dev_v, PROTOCOL_TOL))

    dv = np.kron(v, v.conj())
    dev_dv = float(np.max(np.abs(dv.conj().T @ dv - np.eye(s * s))))
    report.add(Claim("doubled-measurement-unitary", dev_dv <= PROTOCOL_TOL, dev_dv, PROTOCOL_TOL))

    uncor = build_teleportation(d, us, "uncorrected")
    target = discard(d) >> maximally_mixed(d)
    dev_mix = max_deviation(uncor, target)
    report.add(
        Claim("deleted-outcome-maximally-mixes", dev_mix <= PROTOCOL_TOL, dev_mix, PROTOCOL_TOL)
    )

    _, trace = normalize(fused, check=True)
    replayed = trace.replay()
    ok = replayed.structural_equal(ident) and trace.final.structural_equal(ident)
    report.add(
        Claim(
            "rewrite-trace-replays-to-wire",
            ok,
            0.0 if ok else float("inf"),
            0.0,
            method="rewrite",
            detail=f"{len(trace)} steps",
        )
    )
    return report


# ---------------------------------------------------------------------------
# Dense coding


def build_dense_coding(d: int, us: list[np.ndarray] | None = None, source: str = "bell") -> Diagram:
    """Send a classical message of dimension d*d through one quantum wire
    plus shared entanglement ("bell") or a useless shared state ("mixed")."""
    us = pauli_family(d) if us is None else us
    check_trace_orthogonal(us)
    q = quantum(d)
    if source == "bell":
        shared = bell_pair(d)
    elif source == "mixed":
        shared = maximally_mixed(d) @ maximally_mixed(d)
    else:
        raise DimMismatch(f"unknown source {source!r}")
    return (
        (Diagram.identity(classical(d * d)) @ shared)
        >> (controlled_unitaries("encode_msg", us) @ Diagram.identity(q))
        >> bell_measurement(d, us)
    )


def verify_dense_coding(d: int, us: list[np.ndarray] | None = None) -> Report:
    us = pauli_family(d) if us is None else us
    report = Report(f"dense-coding d={d}")
    s = d * d

    coding = build_dense_coding(d, us, "bell")
    ident = Diagram.identity(classical(s))
    dev = max_deviation(coding, ident)
    report.add(Claim("transmits-classical-identity", dev <= PROTOCOL_TOL, dev, PROTOCOL_TOL))

    res = rewrite_equal(coding, ident)
    report.add(
        Claim("equality-decided", bool(res), dev, PROTOCOL_TOL, method=res.method)
    )

    broken = build_dense_coding(d, us, "mixed")
    noise = delete(s) >> uniform(s)
    dev_u = max_deviation(broken, noise)
    report.add(
        Claim("mixed-source-gives-uniform-noise", dev_u <= PROTOCOL_TOL, dev_u, PROTOCOL_TOL)
    )
    return report


# ---------------------------------------------------------------------------
# Entanglement swapping


def build_entanglement_swap(
    d: int,
    us: list[np.ndarray] | None = None,
    corrections: bool = True,
    outcome: str = "delete",
) -> Diagram:
    """Two Bell pairs (1a, 1b) and (2a, 2b); a non-demolition Bell
    measurement on (1b, 2a) swaps the entanglement onto (1a, 2b).

    Outputs are ordered (1a, 2b, 1b', 2a') where the primed wires are the
    re-prepared post-measurement pair. The classical outcome is deleted,
    kept as a fifth output ("keep"), or postselected on zero ("zero")."""
    us = pauli_family(d) if us is None else us
    check_trace_orthogonal(us)
    q = quantum(d)
    s = d * d
    c = classical(s)
    idq = Diagram.identity(q)
    idc = Diagram.identity(c)

    # (1a, 1b), (2a, 2b) -> 1a, [outcome, 1b', 2a'], 2b
    pairs = bell_pair(d) @ bell_pair(d)
    measured = pairs >> (idq @ vn_bell_measurement(d, us) @ idq)

    if corrections:
        fan = measured >> (idq @ copy(s) @ idq @ idq @ idq)
        # order now: 1a, c, c, 1b', 2a', 2b
        fix_b = fan >> (
            idq @ idc @ controlled_unitaries("fix1b", [u.conj().T for u in us]) @ idq @ idq
        )
        # order: 1a, c, 1b', 2a', 2b; bring 2b next to its control
        moved = fix_b >> Diagram.permutation((q, c, q, q, q), (0, 1, 4, 2, 3))
        # order: 1a, c, 2b, 1b', 2a'. Outcome i leaves (1a, 2b) holding
        # the pair state bent through U_i-adjoint, so U_i on 2b repairs it.
        fixed = moved >> (
            idq @ controlled_unitaries("fix2b", us) @ idq @ idq
        )
        # order: 1a, 2b, 1b', 2a'
        return fixed
    if outcome == "delete":
        dropped = measured >> (idq @ delete(s) @ idq @ idq @ idq)
    elif outcome == "zero":
        dropped = measured >> (idq @ classical_value(s, 0).dagger() @ idq @ idq @ idq)
    elif outcome == "keep":
        return measured >> Diagram.permutation((q, c, q, q, q), (1, 0, 4, 2, 3))
    else:
        raise DimMismatch(f"unknown outcome handling {outcome!r}")
    # order: 1a, 1b', 2a', 2b -> 1a, 2b, 1b', 2a'
    return dropped >> Diagram.permutation((q, q, q, q), (0, 3, 1, 2))


def verify_entanglement_swap(d: int, us: list[np.ndarray] | None = None) -> Report:
    us = pauli_family(d) if us is None else us
    report = Report(f"entanglement-swap d={d}")
    q = quantum(d)
    idq = Diagram.identity(q)
    crossed = bell_pair(d) @ bell_pair(d)  # target: (1a,2b) and (1b',2a')

    swapped = build_entanglement_swap(d, us, corrections=True)
    dev = max_deviation(swapped, crossed)
    report.add(Claim("corrections-give-crossed-pairs", dev <= PROTOCOL_TOL, dev, PROTOCOL_TOL))

    zero = build_entanglement_swap(d, us, corrections=False, outcome="zero")
    dev0 = scaled_deviation(zero, crossed)
    report.add(
        Claim(
            "outcome-zero-needs-no-correction",
            dev0 <= PROTOCOL_TOL,
            dev0,
            PROTOCOL_TOL,
            detail="up to the outcome probability",
        )
    )

    zero_pair = zero >> (idq @ idq @ discard(d) @ discard(d))
    dev0p = scaled_deviation(zero_pair, bell_pair(d))
    report.add(
        Claim("conditioned-pair-stays-entangled", dev0p <= PROTOCOL_TOL, dev0p, PROTOCOL_TOL)
    )

    blind = build_entanglement_swap(d, us, corrections=False, outcome="delete")
    blind_pair = blind >> (idq @ idq @ discard(d) @ discard(d))
    mm = maximally_mixed(d) @ maximally_mixed(d)
    devm = max_deviation(blind_pair, mm)
    report.add(
        Claim("deleted-outcome-maximally-mixes", devm <= PROTOCOL_TOL, devm, PROTOCOL_TOL)
    )
    return report


PROTOCOLS = {
    "teleportation": verify_teleportation,
    "dense-coding": verify_dense_coding,
    "entanglement-swap": verify_entanglement_swap,
}


def verify_protocol(name: str, d: int) -> Report:
    if name not in PROTOCOLS:
        raise DimMismatch(
            f"unknown protocol {name!r}; know " + ", ".join(sorted(PROTOCOLS))
        )
    return PROTOCOLS[name](d)

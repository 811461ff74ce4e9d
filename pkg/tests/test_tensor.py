"""Numeric semantics: spiders, boxes, contraction and comparison modes.

Expected values are computed by independent numpy constructions (kets,
Kronecker products, explicit doubling) and frozen here, then compared with
what the contraction engine produces.
"""

from __future__ import annotations

import numpy as np
import pytest

from spiderlab.diagram import (
    Diagram,
    box,
    cap,
    classical_value,
    copy,
    cup,
    delete,
    discard,
    encode,
    ghz,
    measure,
    scalar,
    spider,
    swap,
)
from spiderlab.errors import TensorTooLarge, WrongSignature
from spiderlab.tensor import (
    NumericTolerance,
    contract_order,
    evaluate,
    evaluate_matrix,
    format_tensor,
    numeric_equal,
    parse_tensor,
    random_plan,
)
from spiderlab.wires import PhaseVector, classical, quantum

C2 = classical(2)
Q2 = quantum(2)


def ket(d, i):
    v = np.zeros(d, dtype=complex)
    v[i] = 1.0
    return v


def kron_all(*vs):
    out = np.array([1.0 + 0j])
    for v in vs:
        out = np.kron(out, v)
    return out


def interleave_double(v, dims):
    """Oracle for doubling a state vector: v (x) conj(v) with ket/bra pairs
    merged per leg."""
    t = v.reshape(dims)
    d = np.multiply.outer(t, t.conj())
    n = len(dims)
    perm = []
    for a in range(n):
        perm += [a, a + n]
    return d.transpose(perm).reshape([s * s for s in dims]).ravel()


class TestSpiderTensors:
    def test_copy_spider_matrix(self):
        # Oracle: sum_i |ii><i| written out by hand.
        want = np.zeros((4, 2), dtype=complex)
        want[0, 0] = 1.0  # 00 <- 0
        want[3, 1] = 1.0  # 11 <- 1
        assert np.allclose(evaluate_matrix(copy(2)), want)

    def test_spider_matches_ket_sum(self):
        d, n, m = 3, 2, 2
        want = sum(
            np.outer(kron_all(*([ket(d, i)] * m)), kron_all(*([ket(d, i)] * n)).conj())
            for i in range(d)
        )
        got = evaluate_matrix(spider(n, m, classical(d)))
        assert np.allclose(got, want)

    def test_phased_spider(self):
        ph = PhaseVector.from_angles([0.7])
        got = evaluate_matrix(spider(1, 1, C2, phase=ph))
        want = np.diag([1.0, np.exp(0.7j)])
        assert np.allclose(got, want)

    def test_quantum_spider_is_doubled_classical(self):
        ph = PhaseVector.from_angles([0.3, -1.1])
        plain = spider(1, 2, classical(3), phase=ph)
        assert numeric_equal(plain.double(), spider(1, 2, quantum(3), phase=ph))

    def test_measure_tensor(self):
        # rho |i><j| goes to delta_ij |i>.
        want = np.zeros((2, 4), dtype=complex)
        want[0, 0] = 1.0  # ket 0 bra 0 -> 0
        want[1, 3] = 1.0  # ket 1 bra 1 -> 1
        assert np.allclose(evaluate_matrix(measure(2)), want)

    def test_discard_is_trace(self):
        got = evaluate_matrix(discard(2))
        want = np.array([[1.0, 0.0, 0.0, 1.0]])
        assert np.allclose(got, want)

    def test_cup_vector(self):
        got = evaluate(cup(classical(3)))
        assert got.shape == (3, 3)
        assert np.allclose(got.data, np.eye(3))

    def test_circle_scalars(self):
        d = 3
        circle = cup(classical(d)) >> cap(classical(d))
        assert evaluate(circle).scalar == pytest.approx(d)
        qcircle = cup(quantum(d)) >> cap(quantum(d))
        assert evaluate(qcircle).scalar == pytest.approx(d * d)

    def test_ghz_tensor(self):
        v = kron_all(ket(2, 0), ket(2, 0), ket(2, 0)) + kron_all(
            ket(2, 1), ket(2, 1), ket(2, 1)
        )
        want = interleave_double(v, [2, 2, 2])
        got = evaluate(ghz(2)).vector
        assert np.allclose(got, want)


class TestBoxesAndInvolutions:
    def test_transpose_of_box(self):
        m = np.array([[1.0, 2.0], [3.0, 4.0]])
        d = box("m", (C2,), (C2,), m)
        assert np.allclose(evaluate_matrix(d.transpose()), m.T)

    def test_dagger_of_box(self):
        m = np.array([[1.0, 2.0j], [3.0, 4.0]])
        d = box("m", (C2,), (C2,), m)
        assert np.allclose(evaluate_matrix(d.dagger()), m.conj().T)

    def test_double_of_value(self):
        got = evaluate(classical_value(2, 0).double()).vector
        want = interleave_double(ket(2, 0), [2])
        assert np.allclose(got, want)

    def test_double_of_box_payload(self):
        rng = np.random.default_rng(3)
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        d = box("u", (C2,), (C2,), m).double()
        got = evaluate_matrix(d)
        # Oracle: action rho -> m rho m^dagger, columns indexed ket*d+bra.
        want = np.zeros((4, 4), dtype=complex)
        for k in range(2):
            for b in range(2):
                rho = np.outer(ket(2, k), ket(2, b).conj())
                out = m @ rho @ m.conj().T
                want[:, k * 2 + b] = out.reshape(4)
        assert np.allclose(got, want)

    def test_dagger_matrix_is_adjoint(self):
        rng = np.random.default_rng(5)
        m = rng.normal(size=(4, 3)) + 1j * rng.normal(size=(4, 3))
        d = box("f", (classical(3),), (classical(4),), m)
        assert np.allclose(evaluate_matrix(d.dagger()), evaluate_matrix(d).conj().T)


class TestComposition:
    def test_seq_is_matrix_product(self):
        rng = np.random.default_rng(11)
        a = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
        b = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
        f = box("a", (C2,), (classical(3),), a)
        g = box("b", (classical(3),), (C2,), b)
        assert np.allclose(evaluate_matrix(f >> g), b @ a)

    def test_par_is_kron(self):
        rng = np.random.default_rng(12)
        a = rng.normal(size=(2, 2))
        b = rng.normal(size=(3, 3))
        f = box("a", (C2,), (C2,), a)
        g = box("b", (classical(3),), (classical(3),), b)
        assert np.allclose(evaluate_matrix(f @ g), np.kron(a, b))

    def test_swap_matrix(self):
        d = swap(C2, classical(3))
        got = evaluate_matrix(d)
        want = np.zeros((6, 6))
        for i in range(2):
            for j in range(3):
                want[j * 2 + i, i * 3 + j] = 1.0
        assert np.allclose(got, want)

    def test_zigzag_is_identity(self):
        zig = (cup(C2) @ Diagram.identity(C2)) >> (Diagram.identity(C2) @ cap(C2))
        assert np.allclose(evaluate_matrix(zig), np.eye(2))

    def test_trace_loop(self):
        rng = np.random.default_rng(13)
        m = rng.normal(size=(2, 2))
        f = box("m", (C2,), (C2,), m)
        tr = cup(C2) >> (f @ Diagram.identity(C2)) >> cap(C2)
        assert evaluate(tr).scalar == pytest.approx(np.trace(m))


class TestPlansAndLimits:
    def test_two_plans_agree(self):
        rng = np.random.default_rng(21)
        d = ghz(2) >> (measure(2) @ discard(2) @ Diagram.identity(Q2))
        t0 = evaluate(d).data
        for _ in range(4):
            t1 = evaluate(d, plan=random_plan(d, rng)).data
            assert np.max(np.abs(t0 - t1)) <= 1e-12

    def test_plan_is_exposed(self):
        d = copy(2) >> (delete(2) @ copy(2))
        plan = contract_order(d)
        assert plan.steps
        assert np.allclose(evaluate(d, plan=plan).data, evaluate(d).data)

    def test_size_cap(self):
        with pytest.raises(TensorTooLarge):
            evaluate(spider(0, 8, quantum(6), diagonal=False))


class TestComparison:
    def test_strict_vs_scalar(self):
        a = spider(0, 1, Q2, diagonal=False)
        b = scalar(2.0) @ spider(0, 1, Q2, diagonal=False)
        assert not numeric_equal(a, b)
        assert numeric_equal(a, b, NumericTolerance(mode="up_to_scalar"))

    def test_zero_only_equals_zero(self):
        z = scalar(0.0) @ spider(0, 1, Q2, diagonal=False)
        nz = spider(0, 1, Q2, diagonal=False)
        assert not numeric_equal(z, nz, NumericTolerance(mode="up_to_scalar"))
        assert numeric_equal(
            z, scalar(0) @ nz, NumericTolerance(mode="up_to_scalar")
        )

    def test_signature_mismatch_raises(self):
        with pytest.raises(WrongSignature):
            numeric_equal(measure(2), encode(2))


class TestTextFormat:
    def test_round_trip(self):
        t = evaluate(measure(2) >> copy(2))
        text = format_tensor(t)
        back = parse_tensor(text)
        assert back.n_inputs == t.n_inputs
        assert back.shape == t.shape
        assert np.array_equal(back.data, t.data)
        assert format_tensor(back) == text

"""Teleportation, dense coding and entanglement swapping."""

from __future__ import annotations

import numpy as np
import pytest

from spiderlab.diagram import Diagram, classical_value, encode
from spiderlab.errors import AxiomFailure, DimMismatch
from spiderlab.protocols import (
    bell_measurement,
    bell_pair,
    build_dense_coding,
    build_entanglement_swap,
    build_teleportation,
    check_trace_orthogonal,
    clock_shift_family,
    controlled_unitaries,
    maximally_mixed,
    measurement_unitary,
    merge_pair,
    pauli_family,
    random_unitary,
    verify_dense_coding,
    verify_entanglement_swap,
    verify_protocol,
    verify_teleportation,
)
from spiderlab.rewrite import normalize
from spiderlab.tensor import evaluate, evaluate_matrix
from spiderlab.wires import quantum


class TestFamily:
    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_clock_shift_orthogonality(self, d):
        us = clock_shift_family(d)
        assert len(us) == d * d
        assert check_trace_orthogonal(us) <= 1e-9

    def test_d2_matches_pauli_set(self):
        i2, z, x, xz = clock_shift_family(2)
        assert np.allclose(i2, np.eye(2))
        assert np.allclose(z, np.diag([1.0, -1.0]))
        assert np.allclose(x, np.array([[0, 1], [1, 0]]))
        assert np.allclose(xz, x @ z)

    def test_bad_family_rejected(self):
        with pytest.raises(AxiomFailure):
            check_trace_orthogonal([np.eye(2), np.eye(2)])

    def test_measurement_unitary_columns(self):
        us = pauli_family(3)
        v = measurement_unitary(us)
        assert np.allclose(v[:, 4], us[4].reshape(9) / np.sqrt(3))

    def test_random_unitary_is_unitary(self):
        rng = np.random.default_rng(7)
        u = random_unitary(rng, 5)
        assert np.allclose(u @ u.conj().T, np.eye(5), atol=1e-12)


class TestControlledBoxes:
    def test_branch_application(self):
        rng = np.random.default_rng(9)
        us = [random_unitary(rng, 2) for _ in range(3)]
        cu = controlled_unitaries("u", us)
        rho = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        state = np.kron(np.array([0.0, 1.0, 0.0]), rho.reshape(4))
        got = evaluate_matrix(cu) @ state
        want = (us[1] @ rho @ us[1].conj().T).reshape(4)
        assert np.allclose(got, want)

    def test_value_control_picks_branch(self):
        us = pauli_family(2)
        cu = controlled_unitaries("u", us)
        picked = (classical_value(4, 2) @ Diagram.identity(quantum(2))) >> cu
        want = np.kron(us[2], us[2].conj())
        assert np.allclose(evaluate_matrix(picked), want)


class TestStates:
    def test_bell_pair_is_normalized(self):
        from spiderlab.diagram import discard

        d = bell_pair(3) >> (discard(3) @ discard(3))
        assert evaluate(d).scalar == pytest.approx(1.0)

    def test_maximally_mixed_tensor(self):
        got = evaluate(maximally_mixed(2)).vector
        assert np.allclose(got, np.array([0.5, 0, 0, 0.5]))

    def test_merge_is_relabeling(self):
        m = evaluate_matrix(merge_pair(2))
        assert m.shape == (16, 16)
        assert np.allclose(m @ m.conj().T, np.eye(16))

    def test_bell_measurement_outcomes_sum_to_trace(self):
        m = evaluate_matrix(bell_measurement(2))
        assert m.shape == (4, 16)
        # Feeding the maximally mixed pair gives a normalized distribution.
        mixed_pair = np.kron(np.eye(2).reshape(4) / 2, np.eye(2).reshape(4) / 2)
        dist = m @ mixed_pair
        assert np.all(dist.real >= -1e-12)
        assert dist.sum() == pytest.approx(1.0)


class TestTeleportation:
    @pytest.mark.parametrize("d", [2, 3])
    def test_report_passes(self, d):
        report = verify_teleportation(d)
        assert report.passed, report.render_text()

    def test_fused_form_trace_steps(self):
        tele = build_teleportation(2, form="fused")
        nf, trace = normalize(tele, check=True)
        assert nf.structural_equal(Diagram.identity(quantum(2)))
        assert [s.rule for s in trace.steps] == [
            "cupcap-spider",
            "cupcap-spider",
            "fuse",
            "id-spider",
            "controlled-cancel",
            "scalar-fold",
            "unit-scalar",
        ]

    def test_unknown_form(self):
        with pytest.raises(DimMismatch):
            build_teleportation(2, form="sideways")

    def test_custom_family(self):
        rng = np.random.default_rng(31)
        w = random_unitary(rng, 4)
        us = [u @ w for u in pauli_family(4)]  # still trace-orthogonal
        tele = build_teleportation(4, us, form="fused")
        nf, _ = normalize(tele)
        assert nf.structural_equal(Diagram.identity(quantum(4)))


class TestDenseCoding:
    @pytest.mark.parametrize("d", [2, 3])
    def test_report_passes(self, d):
        report = verify_dense_coding(d)
        assert report.passed, report.render_text()

    def test_message_roundtrip(self):
        coding = build_dense_coding(2)
        m = evaluate_matrix(coding)
        assert np.allclose(m, np.eye(4), atol=1e-12)


class TestEntanglementSwap:
    @pytest.mark.parametrize("d", [2, 3])
    def test_report_passes(self, d):
        report = verify_entanglement_swap(d)
        assert report.passed, report.render_text()

    def test_kept_outcome_is_uniform(self):
        from spiderlab.diagram import discard
        from spiderlab.wires import classical

        d = 2
        kept = build_entanglement_swap(d, corrections=False, outcome="keep")
        idc = Diagram.identity(classical(d * d))
        dist = kept >> (idc @ discard(d) @ discard(d) @ discard(d) @ discard(d))
        got = evaluate(dist).vector
        assert np.allclose(got, np.full(d * d, 1.0 / (d * d)))


class TestRegistry:
    def test_verify_protocol_dispatch(self):
        assert verify_protocol("teleportation", 2).passed

    def test_unknown_protocol(self):
        with pytest.raises(DimMismatch):
            verify_protocol("smoke-signals", 2)

"""Phase extraction, phase gates, and the group structure."""

from __future__ import annotations

import numpy as np
import pytest

from spiderlab.cq import is_causal
from spiderlab.diagram import Diagram, box, ghz, measure, spider
from spiderlab.errors import DimMismatch, WrongSignature
from spiderlab.phases import (
    PhaseVector,
    check_phase_group,
    ghz_phase_fusion_demo,
    is_phase_state,
    phase_gate,
    phase_state,
    phase_sum,
    phase_unit,
)
from spiderlab.rewrite import normalize
from spiderlab.tensor import evaluate, evaluate_matrix, numeric_equal
from spiderlab.wires import classical, quantum


def doubled_ket(psi: np.ndarray) -> Diagram:
    """A (possibly unnormalized) ket as a doubled quantum state."""
    psi = np.asarray(psi, dtype=complex)
    d = psi.shape[0]
    col = np.outer(psi, psi.conj()).reshape(d * d, 1)
    return box("psi", (), (quantum(d),), col, flavor="cq")


class TestExtraction:
    def test_recovers_known_phase(self):
        got = is_phase_state(doubled_ket([1.0, np.exp(1j * np.pi / 3)]))
        assert got is not None
        assert abs(got.components[1] - np.exp(1j * np.pi / 3)) < 1e-12

    def test_classical_value_is_biased(self):
        assert is_phase_state(doubled_ket([1.0, 0.0])) is None

    def test_all_ones_gives_group_unit(self):
        got = is_phase_state(doubled_ket([1.0, 1.0]))
        assert got is not None
        assert got.approx_equal(phase_unit(2))

    def test_scaling_does_not_matter(self):
        got = is_phase_state(doubled_ket(7.3 * np.array([1.0, 1j])))
        assert got is not None
        assert abs(got.components[1] - 1j) < 1e-12

    def test_mixed_unbiased_state_rejected(self):
        from spiderlab.protocols import maximally_mixed

        assert is_phase_state(maximally_mixed(2)) is None

    def test_phase_state_roundtrip(self):
        a = PhaseVector.from_angles([0.4, -1.2])
        got = is_phase_state(phase_state(a))
        assert got is not None
        assert got.approx_equal(a)

    def test_non_state_rejected(self):
        with pytest.raises(WrongSignature):
            is_phase_state(measure(2))

    def test_classical_state_rejected(self):
        from spiderlab.cq import ProbDist

        with pytest.raises(WrongSignature):
            is_phase_state(ProbDist.uniform(2).as_state())


class TestGroup:
    def test_sum_of_angles(self):
        a = PhaseVector.from_angles([0.7])
        b = PhaseVector.from_angles([1.1])
        assert abs(phase_sum(a, b).components[1] - np.exp(1.8j)) < 1e-12

    def test_unit_and_inverse(self):
        a = PhaseVector.from_angles([0.3, 0.9])
        assert (a + phase_unit(3)).approx_equal(a)
        assert (a + (-a)).approx_equal(phase_unit(3))

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            phase_sum(PhaseVector.unit(2), PhaseVector.unit(3))

    def test_diagrammatic_sum(self):
        a = PhaseVector.from_angles([0.7])
        b = PhaseVector.from_angles([1.1])
        merged = (phase_state(a) @ phase_state(b)) >> spider(2, 1, quantum(2))
        got = is_phase_state(merged)
        assert got is not None
        assert got.approx_equal(a + b)

    def test_group_report(self):
        report = check_phase_group(samples=25, rng=np.random.default_rng(1))
        assert report.passed
        assert len(report.claims) == 15


class TestGates:
    def test_unit_gate_is_identity(self):
        g = phase_gate(phase_unit(3)).diagram
        assert numeric_equal(g, Diagram.identity(quantum(3)), 1e-12)

    def test_gate_times_inverse_is_identity(self):
        a = PhaseVector.from_angles([0.8, -0.2])
        composed = phase_gate(a).diagram >> phase_gate(-a).diagram
        assert numeric_equal(composed, Diagram.identity(quantum(3)), 1e-12)

    def test_gates_are_unitary(self):
        rng = np.random.default_rng(2)
        for d in (2, 3, 4):
            a = PhaseVector.from_angles(rng.uniform(-np.pi, np.pi, d - 1))
            m = evaluate_matrix(phase_gate(a).diagram)
            assert np.allclose(m @ m.conj().T, np.eye(d * d), atol=1e-12)

    def test_composition_matches_sum(self):
        a = PhaseVector.from_angles([0.5])
        b = PhaseVector.from_angles([-1.3])
        lhs = phase_gate(a).diagram >> phase_gate(b).diagram
        assert numeric_equal(lhs, phase_gate(a + b).diagram, 1e-12)

    def test_measurement_kills_phase(self):
        a = PhaseVector.from_angles([2.1])
        assert numeric_equal(phase_gate(a).diagram >> measure(2), measure(2), 1e-12)

    def test_gates_are_causal(self):
        assert is_causal(phase_gate(PhaseVector.from_angles([0.4])))

    def test_causal_phase_state(self):
        a = PhaseVector.from_angles([0.4])
        assert not is_causal(phase_state(a))
        assert is_causal(phase_state(a, causal=True))


class TestFusion:
    def test_chain_normalizes_to_summed_spider(self):
        a = PhaseVector.from_angles([0.3])
        b = PhaseVector.from_angles([0.5])
        c = PhaseVector.from_angles([0.9])
        chain = (
            phase_gate(a).diagram >> phase_gate(b).diagram >> phase_gate(c).diagram
        )
        result, _ = normalize(chain)
        spiders = [g for g in result.nodes.values()]
        assert len(spiders) == 1
        assert spiders[0].phase.approx_equal(a + b + c)

    def test_random_phased_trees(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            d = int(rng.integers(2, 4))
            phases = [
                PhaseVector.from_angles(rng.uniform(-np.pi, np.pi, d - 1))
                for _ in range(3)
            ]
            legs = spider(0, 2, quantum(d), phase=phases[0])
            joiner = spider(2, 1, quantum(d), phase=phases[1])
            lid = spider(1, 0, quantum(d), phase=phases[2])
            diagram = legs >> joiner >> lid
            result, _ = normalize(diagram, check=True)
            total = phases[0] + phases[1] + phases[2]
            expected = spider(0, 0, quantum(d), phase=total)
            assert numeric_equal(result, expected, 1e-9)


class TestGhzDemo:
    def test_fixed_triple(self):
        a, b, c = (PhaseVector.from_angles([x]) for x in (0.3, 0.5, 0.9))
        report = ghz_phase_fusion_demo(a, b, c)
        assert report.passed
        names = [claim.name for claim in report.claims]
        assert "fuses-to-summed-phase" in names
        assert "permutation-invariant" in names
        assert "measurement-erases-phases" in names

    def test_unit_phases_give_plain_ghz(self):
        unit = phase_unit(2)
        report = ghz_phase_fusion_demo(unit, unit, unit)
        assert report.passed
        gates = (
            phase_gate(unit).diagram
            @ phase_gate(unit).diagram
            @ phase_gate(unit).diagram
        )
        assert numeric_equal(ghz(2) >> gates, ghz(2), 1e-12)

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            ghz_phase_fusion_demo(phase_unit(2), phase_unit(2), phase_unit(3))

    def test_random_triples(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            a, b, c = (
                PhaseVector.from_angles(rng.uniform(-np.pi, np.pi, 1))
                for _ in range(3)
            )
            assert ghz_phase_fusion_demo(a, b, c).passed

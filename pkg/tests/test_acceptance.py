"""The acceptance gate: one test per advertised guarantee.

Each test prints a single pass/fail line naming its criterion, checks
the property at the stated tolerance and sample counts, and fails
loudly otherwise. Everything runs at desk scale; the whole module
should finish in well under a minute.
"""

from __future__ import annotations

import functools
import time

import numpy as np
import pytest

from spiderlab import dsl
from spiderlab.cli import main as cli_main
from spiderlab.cq import (
    check_purity_extremal,
    classicality_report,
    naimark_report,
    vn_report,
)
from spiderlab.diagram import Diagram, spider
from spiderlab.entanglement import (
    SloccClass,
    apply_locals,
    decoherence_report,
    random_invertible,
    slocc_classify_3q,
)
from spiderlab.phases import check_phase_group, ghz_phase_fusion_demo
from spiderlab.protocols import PROTOCOLS, verify_protocol
from spiderlab.rewrite import RULES, check_rule_soundness, rewrite_equal
from spiderlab.tensor import numeric_equal
from spiderlab.wires import PhaseVector, quantum

from test_dsl import FIXTURES as FIXTURE_DIR
from test_dsl import random_document

TOL = 1e-9
SEED = 20260814


def criterion(number: int, title: str):
    """Print the one-line verdict the suite promises per criterion."""

    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                result = fn(*args, **kwargs)
            except BaseException:
                print(f"criterion {number} ({title}): FAIL")
                raise
            print(f"criterion {number} ({title}): PASS")
            return result

        return wrapper

    return decorate


# ---------------------------------------------------------------------------
# 1. Every rewrite rule is sound on random instances.


@criterion(1, "rule soundness, 50 instantiations per rule at d=2,3")
def test_rule_soundness_suite():
    rng = np.random.default_rng(SEED)
    start = time.monotonic()
    for rule in RULES:
        ran = check_rule_soundness(rule, rng, dims=(2, 3), samples=25, tol=TOL)
        assert ran == 50, rule.name
    assert time.monotonic() - start < 30.0


# ---------------------------------------------------------------------------
# 2. Rewriting agrees with numeric evaluation on spider-only diagrams.


def _spider_layer(width: int, start: int, piece: Diagram) -> Diagram:
    q = piece.input_types[0] if piece.n_inputs else piece.output_types[0]
    left = Diagram.identity_on((q,) * start)
    right = Diagram.identity_on((q,) * (width - start - piece.n_inputs))
    return left @ piece @ right


def _random_ops(rng: np.random.Generator, d: int, k_in: int) -> list[tuple]:
    """Layer plans (start, n_in, n_out, phase) keeping the width small
    enough that contraction stays under the tensor size cap at d=3."""
    max_width = 3 if d == 3 else 5
    ops = []
    width = k_in
    for _ in range(int(rng.integers(2, 6))):
        if width == 0:
            m, start = 0, 0
        else:
            m = int(rng.integers(1, min(width, 3) + 1))
            start = int(rng.integers(0, width - m + 1))
        n = int(rng.integers(0, 4))
        n = min(n, max_width - (width - m))
        if m == 0 and n == 0:
            n = 1
        phase = None
        if rng.random() < 0.6:
            phase = PhaseVector.from_angles(rng.uniform(-np.pi, np.pi, d - 1))
        ops.append((start, m, n, phase))
        width = width - m + n
    return ops


def _capped_mask(rng: np.random.Generator, count: int, limit: int) -> list[bool]:
    mask, used = [], 0
    for _ in range(count):
        hit = rng.random() < 0.25 and used < limit
        mask.append(hit)
        used += hit
    return mask


def _build_spider_diagram(
    d: int, k_in: int, k_out: int, ops: list[tuple], split_mask: list[bool]
) -> Diagram:
    q = quantum(d)
    diagram = Diagram.identity_on((q,) * k_in)
    width = k_in
    for (start, m, n, phase), split in zip(ops, split_mask):
        if split:
            diagram = diagram >> _spider_layer(width, start, spider(m, 1, q, phase))
            width = width - m + 1
            diagram = diagram >> _spider_layer(width, start, spider(1, n, q))
            width = width - 1 + n
        else:
            diagram = diagram >> _spider_layer(width, start, spider(m, n, q, phase))
            width = width - m + n
    if width != k_out:
        diagram = diagram >> spider(width, k_out, q)
    return diagram


@criterion(2, "rewrite_equal agrees with numeric_equal on 200 spider-only pairs")
def test_spider_completeness_crosscheck():
    rng = np.random.default_rng(SEED + 1)
    agreements = 0
    equal_seen = unequal_seen = 0
    for k in range(200):
        d = int(rng.choice([2, 3]))
        k_in = int(rng.integers(0, 3))
        k_out = int(rng.integers(0, 3))
        ops = _random_ops(rng, d, k_in)
        budget = 8 - len(ops) - 1  # one node per layer plus the closing spider
        mask_a = _capped_mask(rng, len(ops), budget)
        if k % 2 == 0:
            # Same plan, different unfusion choices: equal by construction.
            mask_b = _capped_mask(rng, len(ops), budget)
            left = _build_spider_diagram(d, k_in, k_out, ops, mask_a)
            right = _build_spider_diagram(d, k_in, k_out, ops, mask_b)
        else:
            other = _random_ops(rng, d, k_in)
            left = _build_spider_diagram(d, k_in, k_out, ops, mask_a)
            right = _build_spider_diagram(d, k_in, k_out, other, [False] * len(other))
        assert max(len(left.nodes), len(right.nodes)) <= 8
        verdict = numeric_equal(left, right, TOL)
        result = rewrite_equal(left, right, TOL)
        assert bool(result) == verdict, f"pair {k}: rewrite says {bool(result)}, tensor says {verdict}"
        agreements += 1
        equal_seen += verdict
        unequal_seen += not verdict
    assert agreements == 200
    assert equal_seen >= 50 and unequal_seen >= 50


# ---------------------------------------------------------------------------
# 3. Classicality laws at d = 2, 3, 5.


@criterion(3, "classicality: ground decomposition, measure/encode, Born, decoherence")
def test_classicality_suite():
    report = classicality_report(dims=(2, 3, 5), rng=np.random.default_rng(SEED + 2), tol=TOL)
    assert report.passed, report.render_text()
    assert all(c.tolerance == TOL for c in report.claims)
    assert len(report.claims) == 15


# ---------------------------------------------------------------------------
# 4. Measurements: projection postulate and Naimark dilation.


@criterion(4, "projection postulate (ONB + 50 rotated) and Naimark dilations")
def test_measurement_suite():
    projection = vn_report(samples=50, dims=(2, 3), rng=np.random.default_rng(SEED + 3), tol=TOL)
    assert projection.passed, projection.render_text()
    assert sum("rotated" in c.name for c in projection.claims) == 50

    dilations = naimark_report(samples=20, rng=np.random.default_rng(SEED + 4), tol=TOL)
    assert dilations.passed, dilations.render_text()
    isometry_claims = [c for c in dilations.claims if "isometry" in c.name]
    assert len(isometry_claims) == 21  # the trine plus 20 random POVMs
    assert all(c.deviation <= TOL for c in isometry_claims)


# ---------------------------------------------------------------------------
# 5. The three protocols at D = 2 and 3.


@criterion(5, "teleportation, dense coding, entanglement swapping at D=2,3")
def test_protocol_suite():
    for name in sorted(PROTOCOLS):
        for d in (2, 3):
            report = verify_protocol(name, d)
            assert report.passed, f"{name} d={d}:\n{report.render_text()}"
    for d in (2, 3):
        tele = verify_protocol("teleportation", d)
        names = {c.name: c for c in tele.claims}
        assert names["rewrite-trace-replays-to-wire"].passed
        assert names["deleted-outcome-maximally-mixes"].deviation <= TOL


# ---------------------------------------------------------------------------
# 6. Pure mixtures are degenerate, impure mixtures are flagged.


@criterion(6, "mixing/extremality on 100 pure and 100 impure mixtures")
def test_mixing_suite():
    report = check_purity_extremal(samples=200, dim=2, rng=np.random.default_rng(SEED + 5), tol=TOL)
    assert report.passed, report.render_text()
    pure = [c for c in report.claims if c.name.endswith("-pure")]
    mixed = [c for c in report.claims if c.name.endswith("-mixed")]
    assert len(pure) == 100 and len(mixed) == 100
    assert all(c.deviation <= TOL for c in pure)


# ---------------------------------------------------------------------------
# 7. Entanglement: decoherence kills it; SLOCC classes are stable.


@criterion(7, "decoherence destroys entanglement; SLOCC labels are invariant")
def test_entanglement_suite():
    report = decoherence_report(samples=100, rng=np.random.default_rng(SEED + 6), tol=TOL)
    assert report.passed, report.render_text()
    per_sample = [c for c in report.claims if c.name.startswith("separable")]
    assert len(per_sample) == 100
    assert all(c.passed for c in per_sample)  # zero false positives

    bell = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    e0 = np.array([1, 0], dtype=complex)
    fixtures = {
        SloccClass.SEPARABLE: np.kron(e0, np.kron(e0, e0)),
        SloccClass.BISEP_A: np.kron(e0, bell),
        SloccClass.BISEP_B: np.kron(bell, e0).reshape(2, 2, 2).transpose(0, 2, 1).ravel(),
        SloccClass.BISEP_C: np.kron(bell, e0),
        SloccClass.W: np.array([0, 1, 1, 0, 1, 0, 0, 0], dtype=complex) / np.sqrt(3),
        SloccClass.GHZ: np.array([1, 0, 0, 0, 0, 0, 0, 1], dtype=complex) / np.sqrt(2),
    }
    rng = np.random.default_rng(SEED + 7)
    for cls, psi in fixtures.items():
        assert slocc_classify_3q(psi, TOL) == cls
        for _ in range(100):
            ops = [random_invertible(rng, 2) for _ in range(3)]
            moved = apply_locals(psi, ops)
            assert slocc_classify_3q(moved / np.linalg.norm(moved), TOL) == cls


# ---------------------------------------------------------------------------
# 8. Phase groups and GHZ phase fusion.


@criterion(8, "phase-group axioms, GHZ fusion invariance, measurement erasure")
def test_phase_suite():
    report = check_phase_group(samples=100, dims=(2, 3, 4), rng=np.random.default_rng(SEED + 8), tol=TOL)
    assert report.passed, report.render_text()
    axioms = [
        c for c in report.claims if any(k in c.name for k in ("assoc", "comm", "unit", "inverse"))
    ]
    # "Exact" for angle arithmetic: nothing beyond float rounding noise,
    # three orders tighter than the diagrammatic tolerance.
    assert all(c.deviation <= 1e-12 for c in axioms)

    rng = np.random.default_rng(SEED + 9)
    erased = 0
    for k in range(50):
        d = int(rng.choice([2, 3, 4]))
        a, b, c = (
            PhaseVector.from_angles(rng.uniform(-np.pi, np.pi, d - 1)) for _ in range(3)
        )
        demo = ghz_phase_fusion_demo(a, b, c, TOL)
        assert demo.passed, f"triple {k}:\n{demo.render_text()}"
        erased += next(c for c in demo.claims if c.name == "measurement-erases-phases").passed
    assert erased == 50


# ---------------------------------------------------------------------------
# 9. The textual language round-trips and the CLI is reproducible.


@criterion(9, "DSL round-trip on fixtures plus 500 random documents; CLI determinism")
def test_dsl_and_cli_suite(capsys):
    fixture_files = sorted(FIXTURE_DIR.glob("*.sdg"))
    assert len(fixture_files) >= 8
    for path in fixture_files:
        text = path.read_text(encoding="utf-8")
        doc = dsl.parse(text, str(path))
        assert dsl.doc_equal(doc, dsl.parse(dsl.print_doc(doc))), path.name

    rng = np.random.default_rng(SEED + 10)
    for k in range(500):
        doc = random_document(rng)
        printed = dsl.print_doc(doc)
        assert dsl.doc_equal(doc, dsl.parse(printed)), f"document {k}\n{printed}"

    runs = []
    for _ in range(2):
        code = cli_main(["verify-protocol", "mixing", "--samples", "6", "--seed", "11", "--json"])
        out = capsys.readouterr().out
        assert code == 0
        runs.append(out)
    assert runs[0] == runs[1]

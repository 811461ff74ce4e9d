"""End-to-end tests of the command-line interface.

All commands run in-process through main(argv), with stdout captured
by pytest. The fixture corpus under fixtures/ provides the input
files; temporary files cover the write paths.
"""

import json
from pathlib import Path

import numpy as np
import pytest

from spiderlab import dsl
from spiderlab.cli import main, parse_ket
from spiderlab.tensor import evaluate

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestDocumentedInvocations:
    def test_check_equal_up_to_scalar(self, capsys):
        code, out, _ = run(
            capsys,
            "check-equal",
            FIXTURES / "zigzag.sdg",
            FIXTURES / "zigzag.sdg",
            "--left",
            "zigzag",
            "--right",
            "straight",
            "--mode",
            "up-to-scalar",
        )
        assert code == 0
        assert "equal\ttrue" in out

    def test_verify_protocol_teleport(self, capsys):
        code, out, _ = run(capsys, "verify-protocol", "teleport", "--dim", "2")
        assert code == 0
        assert "# overall\tPASS" in out
        assert "rewrite-trace-replays-to-wire\tPASS" in out

    def test_classify_slocc_w_state(self, capsys):
        code, out, _ = run(capsys, "classify-slocc", "--state", "0.577|001>+|010>+|100>")
        assert code == 0
        assert out.strip() == "W"


class TestNormalize:
    def test_zigzag_straightens(self, capsys):
        code, out, _ = run(capsys, "normalize", FIXTURES / "zigzag.sdg", "--name", "zigzag")
        assert code == 0
        doc = dsl.parse(out)
        normal = doc.diagram("zigzag")
        assert normal.n_inputs == 1 and normal.n_outputs == 1
        assert not normal.nodes

    def test_trace_comments_keep_output_parseable(self, capsys):
        code, out, _ = run(
            capsys, "normalize", FIXTURES / "zigzag.sdg", "--name", "zigzag", "--trace"
        )
        assert code == 0
        assert "# trace:" in out
        assert "cupcap-spider" in out
        dsl.parse(out)

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "normal.sdg"
        code, out, _ = run(
            capsys, "normalize", FIXTURES / "ghz.sdg", "--name", "ghz3", "--out", target
        )
        assert code == 0
        assert out == ""
        assert "ghz3" in dsl.load(target).diagrams

    def test_json_payload(self, capsys):
        code, out, _ = run(
            capsys, "normalize", FIXTURES / "zigzag.sdg", "--name", "zigzag", "--json", "--trace"
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["name"] == "zigzag"
        assert [s["rule"] for s in payload["steps"]].count("cupcap-spider") == 2
        dsl.parse(payload["normal"])


class TestEval:
    def test_decoherence_matrix(self, capsys):
        code, out, _ = run(capsys, "eval", FIXTURES / "measure_encode.sdg", "--name", "dec")
        assert code == 0
        assert "inputs\tq2" in out
        assert "outputs\tq2" in out
        matrix = out.splitlines()[-1]
        assert matrix.startswith("[1.0 0.0 0.0 0.0;")

    def test_json_matrix(self, capsys):
        code, out, _ = run(
            capsys, "eval", FIXTURES / "bell.sdg", "--name", "bell", "--json"
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["inputs"] == []
        assert payload["outputs"] == ["q2", "q2"]
        col = np.array([[re + 1j * im for re, im in row] for row in payload["matrix"]])
        want = evaluate(dsl.load(FIXTURES / "bell.sdg").diagram("bell")).matrix
        assert col.shape == want.shape
        assert np.allclose(col, want)

    def test_defaults_to_last_diagram(self, capsys):
        code, out, _ = run(capsys, "eval", FIXTURES / "zigzag.sdg")
        assert code == 0
        assert "# eval straight" in out


class TestCheckEqual:
    def test_unequal_diagrams_exit_one(self, capsys):
        code, out, _ = run(
            capsys,
            "check-equal",
            FIXTURES / "zigzag.sdg",
            FIXTURES / "phased.sdg",
            "--left",
            "straight",
            "--right",
            "rot",
        )
        assert code == 1
        assert "equal\tfalse" in out

    def test_numeric_method(self, capsys):
        code, out, _ = run(
            capsys,
            "check-equal",
            FIXTURES / "copy_laws.sdg",
            FIXTURES / "copy_laws.sdg",
            "--left",
            "copy2",
            "--right",
            "copy_swapped",
            "--method",
            "numeric",
        )
        assert code == 0
        assert "method\tnumeric" in out

    def test_boundary_mismatch_is_usage_error(self, capsys):
        code, _, err = run(
            capsys,
            "check-equal",
            FIXTURES / "copy_laws.sdg",
            FIXTURES / "copy_laws.sdg",
            "--left",
            "copy2",
            "--right",
            "copy_del",
        )
        assert code == 2
        assert "boundaries differ" in err

    def test_json_verdict(self, capsys):
        code, out, _ = run(
            capsys,
            "check-equal",
            FIXTURES / "boxes.sdg",
            FIXTURES / "boxes.sdg",
            "--left",
            "hh",
            "--right",
            "unit",
            "--json",
        )
        assert code == 0
        assert json.loads(out)["equal"] is True


class TestCheckCausal:
    def test_decoherence_is_causal(self, capsys):
        code, out, _ = run(capsys, "check-causal", FIXTURES / "measure_encode.sdg", "--name", "dec")
        assert code == 0
        assert "causal\ttrue" in out

    def test_unnormalized_bell_is_not(self, capsys):
        code, out, _ = run(capsys, "check-causal", FIXTURES / "bell.sdg", "--name", "bell")
        assert code == 1
        assert "causal\tfalse" in out


class TestCheckVn:
    def test_suite_mode(self, capsys):
        code, out, _ = run(capsys, "check-vn", "--samples", "4")
        assert code == 0
        assert "rotated meter is repeatable [3]" in out
        assert "# overall\tPASS" in out

    def test_file_mode(self, capsys, tmp_path):
        path = tmp_path / "meter.sdg"
        path.write_text("m = spider q2 -> c2 q2\n", encoding="utf-8")
        code, out, _ = run(capsys, "check-vn", path)
        assert code == 0
        assert "von-neumann\ttrue" in out


class TestNaimark:
    def test_suite_mode(self, capsys):
        code, out, _ = run(capsys, "naimark", "--samples", "2")
        assert code == 0
        assert "trine: stacked Kraus maps are an isometry\tPASS" in out

    def test_trine_fixture_dilation(self, capsys, tmp_path):
        target = tmp_path / "dilation.sdg"
        code, out, _ = run(
            capsys, "naimark", FIXTURES / "povm.sdg", "--name", "trine", "--out", target
        )
        assert code == 0
        assert "ancilla dimension 3 reconstructs the process\tPASS" in out
        doc = dsl.load(target)
        assert set(doc.diagrams) == {"isometry", "measurement"}
        iso = evaluate(doc.diagram("isometry")).matrix
        assert iso.shape == (36, 4)

    def test_basis_measurement_fixture(self, capsys):
        code, out, _ = run(capsys, "naimark", FIXTURES / "povm.sdg", "--name", "onb")
        assert code == 0
        assert "ancilla dimension 2 reconstructs the process\tPASS" in out


class TestClassifySlocc:
    def test_ghz_fixture(self, capsys):
        code, out, _ = run(capsys, "classify-slocc", FIXTURES / "ghz.sdg", "--name", "ghz3")
        assert code == 0
        assert out.strip() == "GHZ"

    def test_json(self, capsys):
        code, out, _ = run(capsys, "classify-slocc", "--state", "|000>", "--json")
        assert code == 0
        assert json.loads(out)["class"] == "Separable-ABC"

    def test_spec_style_closer(self, capsys):
        code, out, _ = run(capsys, "classify-slocc", "--state", "0.577 |001> + |010> + |100|")
        assert code == 0
        assert out.strip() == "W"

    def test_rejects_both_sources(self, capsys):
        code, _, err = run(
            capsys, "classify-slocc", FIXTURES / "ghz.sdg", "--state", "|000>"
        )
        assert code == 2
        assert "exactly one" in err

    def test_rejects_neither_source(self, capsys):
        code, _, _ = run(capsys, "classify-slocc")
        assert code == 2

    def test_bad_ket(self, capsys):
        code, _, err = run(capsys, "classify-slocc", "--state", "0.5|00>")
        assert code == 2
        assert "bits" in err


class TestParseKet:
    def test_unnormalized_input_is_normalized(self):
        vec = parse_ket("0.577|001>+|010>+|100>")
        assert abs(np.linalg.norm(vec) - 1.0) < 1e-12

    def test_signs(self):
        vec = parse_ket("|000> - |111>")
        assert vec[0] == pytest.approx(1 / np.sqrt(2))
        assert vec[7] == pytest.approx(-1 / np.sqrt(2))

    def test_missing_sign_between_terms(self):
        with pytest.raises(Exception, match="missing sign"):
            parse_ket("|000> |111>")

    def test_cancellation_rejected(self):
        with pytest.raises(Exception, match="zero vector"):
            parse_ket("|010> - |010>")


class TestVerifyProtocol:
    @pytest.mark.parametrize("name", ["teleportation", "dense-coding", "entanglement-swap"])
    def test_protocols_pass(self, capsys, name):
        code, out, _ = run(capsys, "verify-protocol", name, "--dim", "2")
        assert code == 0
        assert "# overall\tPASS" in out

    @pytest.mark.parametrize(
        "suite,args",
        [
            ("soundness", ["--samples", "3"]),
            ("classicality", []),
            ("mixing", ["--samples", "4"]),
            ("decoherence", ["--samples", "5"]),
        ],
    )
    def test_suites_pass(self, capsys, suite, args):
        code, out, _ = run(capsys, "verify-protocol", suite, *args)
        assert code == 0
        assert "# overall\tPASS" in out

    def test_figure_written(self, capsys, tmp_path):
        target = tmp_path / "deviations.png"
        code, _, _ = run(
            capsys, "verify-protocol", "teleportation", "--figure", target
        )
        assert code == 0
        assert target.stat().st_size > 0

    def test_json_report(self, capsys):
        code, out, _ = run(capsys, "verify-protocol", "dense-coding", "--json")
        assert code == 0
        payload = json.loads(out)
        assert payload["passed"] is True


class TestPhaseDemo:
    def test_group_and_fusion_sections(self, capsys):
        code, out, _ = run(capsys, "phase-demo", "--samples", "5")
        assert code == 0
        assert "group: d=2 assoc" in out
        assert "fusion: measurement-erases-phases" in out

    def test_explicit_angles_qutrit(self, capsys):
        code, out, _ = run(
            capsys,
            "phase-demo",
            "--dim",
            "3",
            "--samples",
            "2",
            "--angles",
            "0.1 0.2, 0.3 -0.4, 1.0 2.0",
        )
        assert code == 0
        assert "# overall\tPASS" in out

    def test_wrong_angle_count(self, capsys):
        code, _, err = run(
            capsys, "phase-demo", "--dim", "3", "--samples", "2", "--angles", "0.1, 0.2, 0.3"
        )
        assert code == 2
        assert "2 angles" in err


class TestRender:
    def test_dot_to_stdout(self, capsys):
        code, out, _ = run(capsys, "render", FIXTURES / "bell.sdg", "--name", "bell")
        assert code == 0
        assert out.startswith("digraph diagram {")
        assert "black:invis:black" in out

    def test_files_written(self, capsys, tmp_path):
        dot, png = tmp_path / "g.dot", tmp_path / "g.png"
        code, out, _ = run(
            capsys,
            "render",
            FIXTURES / "ghz.sdg",
            "--name",
            "ghz3",
            "--out",
            dot,
            "--figure",
            png,
        )
        assert code == 0
        assert out == ""
        assert dot.read_text(encoding="utf-8").startswith("digraph")
        assert png.stat().st_size > 0


class TestDeterminism:
    @pytest.mark.parametrize(
        "argv",
        [
            ["phase-demo", "--samples", "5", "--seed", "42"],
            ["verify-protocol", "mixing", "--samples", "4", "--seed", "9", "--json"],
            ["verify-protocol", "decoherence", "--samples", "6", "--seed", "1"],
            ["naimark", "--samples", "2", "--seed", "3"],
            ["check-vn", "--samples", "3", "--seed", "17"],
        ],
    )
    def test_repeat_runs_are_identical(self, capsys, argv):
        first = run(capsys, *argv)
        second = run(capsys, *argv)
        assert first == second

    def test_figure_bytes_stable(self, capsys, tmp_path):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        run(capsys, "render", FIXTURES / "bell.sdg", "--name", "bell", "--figure", a)
        run(capsys, "render", FIXTURES / "bell.sdg", "--name", "bell", "--figure", b)
        assert a.read_bytes() == b.read_bytes()


class TestErrors:
    def test_unknown_command(self, capsys):
        assert run(capsys, "frobnicate")[0] == 2

    def test_missing_file(self, capsys):
        code, _, err = run(capsys, "eval", "no/such/file.sdg")
        assert code == 2
        assert "file.sdg" in err

    def test_parse_error_names_position(self, capsys, tmp_path):
        path = tmp_path / "broken.sdg"
        path.write_text("x = spider 2 ->", encoding="utf-8")
        code, _, err = run(capsys, "eval", path)
        assert code == 2
        assert f"{path}:1:16" in err

    def test_unknown_diagram_name(self, capsys):
        code, _, err = run(capsys, "eval", FIXTURES / "bell.sdg", "--name", "nope")
        assert code == 2
        assert "nope" in err

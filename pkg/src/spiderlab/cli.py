"""Command-line front end.

Every subcommand reads diagram files in the textual format, prints a
deterministic report to standard output, and signals its verdict
through the exit code: 0 for success or a true verdict, 1 for a false
verdict, 2 for usage and parse errors. Diagnostics go to stderr with
source positions where available, so stdout stays machine-readable.
Randomized checks draw from numpy's default generator seeded by
`--seed`, making output bit-identical across runs.
"""

from __future__ import annotations

import argparse
import json
import re
import sys

import numpy as np

from . import dsl
from .cq import (
    classicality_report,
    check_purity_extremal,
    is_causal,
    is_vn_measurement,
    naimark_dilate,
    naimark_report,
    vn_report,
)
from .diagram import Diagram
from .entanglement import decoherence_report, pure_state_vector, slocc_classify_3q
from .errors import ParseError, SpiderLabError, UnknownName
from .phases import check_phase_group, ghz_phase_fusion_demo
from .protocols import PROTOCOLS, verify_protocol
from .reports import Claim, Report
from .rewrite import normalize, rewrite_equal, soundness_report
from .tensor import NumericTolerance, evaluate, numeric_equal
from .wires import PhaseVector

PROTOCOL_ALIASES = {
    "teleport": "teleportation",
    "dense": "dense-coding",
    "swap": "entanglement-swap",
}
SUITES = ("soundness", "classicality", "mixing", "decoherence")


def _tolerance(args) -> NumericTolerance:
    return NumericTolerance(args.tol, args.mode.replace("-", "_"))


def _load_diagram(path: str, name: str | None) -> tuple[str, Diagram]:
    doc = dsl.load(path)
    if name is None:
        if not doc.diagrams:
            raise UnknownName(f"{path} declares no diagrams")
        name = list(doc.diagrams)[-1]
    return name, doc.diagram(name)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _report_out(report: Report, args) -> int:
    print(report.to_json() if args.json else report.render_text())
    if getattr(args, "figure", None):
        from .render import deviation_chart

        deviation_chart(report, args.figure)
    return 0 if report.passed else 1


def _kv_out(pairs: list[tuple[str, object]], args) -> None:
    if args.json:
        print(json.dumps(dict(pairs), indent=2, sort_keys=True))
    else:
        for key, value in pairs:
            text = "true" if value is True else "false" if value is False else str(value)
            print(f"{key}\t{text}")


def _trace_lines(trace) -> list[str]:
    lines = [f"# trace: {len(trace)} steps"]
    for i, step in enumerate(trace.steps):
        lines.append(
            f"# step {i}: {step.rule} nodes={list(step.match.nodes)}"
            f" measure {step.measure_before}->{step.measure_after}"
        )
    return lines


def _trace_json(trace) -> list[dict]:
    return [
        {
            "rule": step.rule,
            "nodes": list(step.match.nodes),
            "measure_before": list(step.measure_before),
            "measure_after": list(step.measure_after),
        }
        for step in trace.steps
    ]


# ---------------------------------------------------------------------------
# Subcommand handlers


def cmd_normalize(args, rng) -> int:
    name, diagram = _load_diagram(args.file, args.name)
    normal, trace = normalize(diagram)
    doc = dsl.DiagramDoc([])
    doc.add_diagram(name, normal)
    text = dsl.print_doc(doc)
    if args.json:
        payload = {"name": name, "normal": text}
        if args.trace:
            payload["steps"] = _trace_json(trace)
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    else:
        if args.trace:
            text = "\n".join(_trace_lines(trace)) + "\n" + text
        _emit(text, args.out)
    return 0


def cmd_eval(args, rng) -> int:
    name, diagram = _load_diagram(args.file, args.name)
    tensor = evaluate(diagram)
    ins = [str(t) for t in diagram.input_types]
    outs = [str(t) for t in diagram.output_types]
    if args.json:
        matrix = [[[z.real, z.imag] for z in row] for row in tensor.matrix.tolist()]
        print(
            json.dumps(
                {"name": name, "inputs": ins, "outputs": outs, "matrix": matrix},
                indent=2,
                sort_keys=True,
            )
        )
    else:
        print(f"# eval {name}")
        print("inputs\t" + (" ".join(ins) or "-"))
        print("outputs\t" + (" ".join(outs) or "-"))
        print(dsl._matrix_text(tensor.matrix))
    return 0


def cmd_check_equal(args, rng) -> int:
    lname, left = _load_diagram(args.left_file, args.left)
    rname, right = _load_diagram(args.right_file, args.right)
    tol = _tolerance(args)
    if args.method == "numeric":
        equal, method = numeric_equal(left, right, tol), "numeric"
    else:
        result = rewrite_equal(left, right, tol)
        equal, method = bool(result), result.method
    pairs = [
        ("left", f"{args.left_file}:{lname}"),
        ("right", f"{args.right_file}:{rname}"),
        ("mode", args.mode),
        ("method", method),
        ("equal", equal),
    ]
    if args.trace and not args.json:
        for label, diagram in (("left", left), ("right", right)):
            _, trace = normalize(diagram)
            print(f"# {label} normalization")
            print("\n".join(_trace_lines(trace)))
    _kv_out(pairs, args)
    return 0 if equal else 1


def cmd_check_causal(args, rng) -> int:
    name, diagram = _load_diagram(args.file, args.name)
    ok = is_causal(diagram, args.tol)
    _kv_out([("diagram", f"{args.file}:{name}"), ("causal", ok)], args)
    return 0 if ok else 1


def cmd_check_vn(args, rng) -> int:
    if args.file is None:
        return _report_out(vn_report(samples=args.samples, rng=rng, tol=args.tol), args)
    name, diagram = _load_diagram(args.file, args.name)
    ok = is_vn_measurement(diagram, args.tol)
    _kv_out([("diagram", f"{args.file}:{name}"), ("von-neumann", ok)], args)
    return 0 if ok else 1


def cmd_naimark(args, rng) -> int:
    if args.file is None:
        report = naimark_report(
            samples=args.samples,
            dim=args.dim,
            outcomes=args.outcomes,
            rng=rng,
            tol=args.tol,
        )
        return _report_out(report, args)
    name, diagram = _load_diagram(args.file, args.name)
    dilation = naimark_dilate(diagram, args.tol)
    stacked = np.concatenate(dilation.kraus, axis=0)
    defect = float(np.max(np.abs(stacked.conj().T @ stacked - np.eye(dilation.system_dim))))
    from .reports import max_deviation

    drift = max_deviation(dilation.composite(), diagram)
    report = Report(f"naimark {name}")
    report.add(Claim("stacked Kraus maps are an isometry", defect <= args.tol, defect, args.tol))
    report.add(
        Claim(
            f"ancilla dimension {dilation.ancilla_dim} reconstructs the process",
            drift <= args.tol,
            drift,
            args.tol,
        )
    )
    if args.out:
        doc = dsl.DiagramDoc([])
        doc.add_diagram("isometry", dilation.isometry)
        doc.add_diagram("measurement", dilation.measurement.diagram)
        dsl.save(doc, args.out)
    return _report_out(report, args)


_KET_TERM = re.compile(
    r"\s*([+-])?\s*((?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*\|([0-9]+)\s*(?:>|⟩|\|)"
)


def parse_ket(text: str, parties: int = 3) -> np.ndarray:
    """Read kets like "0.577|001>+|010>+|100>" into a normalized vector."""
    vec = np.zeros(2**parties, dtype=complex)
    pos, seen = 0, False
    stripped = text.rstrip()
    while pos < len(stripped):
        m = _KET_TERM.match(stripped, pos)
        if m is None:
            raise ParseError(f"cannot read a ket term at {stripped[pos:pos + 16]!r}")
        sign, coeff, bits = m.groups()
        if len(bits) != parties or any(b not in "01" for b in bits):
            raise ParseError(f"expected {parties} bits inside |...>, got {bits!r}")
        amp = float(coeff) if coeff else 1.0
        if sign == "-":
            amp = -amp
        if seen and sign is None:
            raise ParseError(f"missing sign before term at {stripped[pos:pos + 16]!r}")
        vec[int(bits, 2)] += amp
        pos, seen = m.end(), True
    if not seen:
        raise ParseError("the ket string contains no terms")
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        raise ParseError("the ket terms cancel to the zero vector")
    return vec / norm


def cmd_classify_slocc(args, rng) -> int:
    if (args.state is None) == (args.file is None):
        raise ParseError("give exactly one of FILE or --state")
    if args.state is not None:
        psi = parse_ket(args.state)
        origin = "--state"
    else:
        name, diagram = _load_diagram(args.file, args.name)
        psi = pure_state_vector(diagram, args.tol)
        origin = f"{args.file}:{name}"
    label = str(slocc_classify_3q(psi, args.tol))
    if args.json:
        print(json.dumps({"state": origin, "class": label}, indent=2, sort_keys=True))
    else:
        print(label)
    return 0


def cmd_verify_protocol(args, rng) -> int:
    name = PROTOCOL_ALIASES.get(args.protocol, args.protocol)
    if name in PROTOCOLS:
        report = verify_protocol(name, args.dim)
    elif name == "soundness":
        report = soundness_report(rng=rng, samples=args.samples or 25, tol=args.tol)
    elif name == "classicality":
        report = classicality_report(rng=rng, tol=args.tol)
    elif name == "mixing":
        report = check_purity_extremal(
            samples=args.samples or 40, dim=args.dim, rng=rng, tol=args.tol
        )
    else:
        report = decoherence_report(samples=args.samples or 100, rng=rng, tol=args.tol)
    return _report_out(report, args)


def _parse_angle_triple(text: str, dim: int) -> tuple[PhaseVector, ...]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ParseError("expected three comma-separated angle groups")
    vectors = []
    for part in parts:
        angles = [float(x) for x in part.split()]
        if len(angles) != dim - 1:
            raise ParseError(f"each group needs {dim - 1} angles for dimension {dim}")
        vectors.append(PhaseVector.from_angles(angles))
    return tuple(vectors)


def cmd_phase_demo(args, rng) -> int:
    report = Report("phase-demo")
    group = check_phase_group(samples=args.samples, rng=rng, tol=args.tol)
    for c in group.claims:
        report.add(Claim(f"group: {c.name}", c.passed, c.deviation, c.tolerance, c.method, c.detail))
    if args.angles:
        a, b, c3 = _parse_angle_triple(args.angles, args.dim)
    else:
        a, b, c3 = (
            PhaseVector.from_angles(rng.uniform(-np.pi, np.pi, args.dim - 1))
            for _ in range(3)
        )
    fusion = ghz_phase_fusion_demo(a, b, c3, args.tol)
    for c in fusion.claims:
        report.add(Claim(f"fusion: {c.name}", c.passed, c.deviation, c.tolerance, c.method, c.detail))
    return _report_out(report, args)


def cmd_render(args, rng) -> int:
    name, diagram = _load_diagram(args.file, args.name)
    _emit(dsl.export_dot(diagram), args.out)
    if args.figure:
        from .render import draw_diagram

        draw_diagram(diagram, args.figure, title=name)
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-9, help="numeric tolerance")
    common.add_argument(
        "--mode",
        choices=["strict", "up-to-scalar"],
        default="strict",
        help="equality notion for tensor comparisons",
    )
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--trace", action="store_true", help="print rewrite traces")

    parser = argparse.ArgumentParser(
        prog="spiderlab",
        description="normalize, evaluate and verify classical-quantum string diagrams",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normalize", parents=[common], help="rewrite a diagram to normal form")
    p.add_argument("file")
    p.add_argument("--name", help="diagram to use (default: last declared)")
    p.add_argument("--out", help="write the result here instead of stdout")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("eval", parents=[common], help="evaluate a diagram to its tensor")
    p.add_argument("file")
    p.add_argument("--name")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("check-equal", parents=[common], help="decide equality of two diagrams")
    p.add_argument("left_file")
    p.add_argument("right_file")
    p.add_argument("--left", help="diagram name in the left file")
    p.add_argument("--right", help="diagram name in the right file")
    p.add_argument(
        "--method",
        choices=["numeric", "rewrite"],
        default="rewrite",
        help="rewrite first with numeric fallback, or numeric only",
    )
    p.set_defaults(func=cmd_check_equal)

    p = sub.add_parser("check-causal", parents=[common], help="check discarding the outputs gives discarding the inputs")
    p.add_argument("file")
    p.add_argument("--name")
    p.set_defaults(func=cmd_check_causal)

    p = sub.add_parser(
        "check-vn",
        parents=[common],
        help="check the projection postulate on a measurement, or run the rotated-basis suite",
    )
    p.add_argument("file", nargs="?")
    p.add_argument("--name")
    p.add_argument("--samples", type=int, default=50, help="rotated bases in suite mode")
    p.set_defaults(func=cmd_check_vn)

    p = sub.add_parser(
        "naimark",
        parents=[common],
        help="dilate a POVM to an isometry plus basis measurement",
    )
    p.add_argument("file", nargs="?")
    p.add_argument("--name")
    p.add_argument("--samples", type=int, default=20, help="random POVMs in suite mode")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--outcomes", type=int, default=3)
    p.add_argument("--out", help="write the dilation as a diagram file")
    p.set_defaults(func=cmd_naimark)

    p = sub.add_parser(
        "classify-slocc", parents=[common], help="name the SLOCC class of a three-qubit state"
    )
    p.add_argument("file", nargs="?")
    p.add_argument("--name")
    p.add_argument("--state", help='ket string like "0.577|001>+|010>+|100>"')
    p.set_defaults(func=cmd_classify_slocc)

    p = sub.add_parser(
        "verify-protocol",
        parents=[common],
        help="verify a named protocol or property suite",
    )
    p.add_argument(
        "protocol",
        choices=sorted(PROTOCOLS) + sorted(PROTOCOL_ALIASES) + list(SUITES),
        metavar="NAME",
        help=f"one of {', '.join(sorted(PROTOCOLS) + list(SUITES))}",
    )
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--samples", type=int, help="sample count for the property suites")
    p.add_argument("--figure", help="also draw the deviations to this image file")
    p.set_defaults(func=cmd_verify_protocol)

    p = sub.add_parser(
        "phase-demo",
        parents=[common],
        help="phase-group axioms plus the GHZ phase-fusion demonstration",
    )
    p.add_argument("--dim", type=int, default=2, help="dimension of the GHZ triple")
    p.add_argument(
        "--angles",
        help='three comma-separated angle groups, e.g. "0.3, 0.4, -0.7"',
    )
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--figure", help="also draw the deviations to this image file")
    p.set_defaults(func=cmd_phase_demo)

    p = sub.add_parser("render", parents=[common], help="write graph layouts (DOT, optionally an image)")
    p.add_argument("file")
    p.add_argument("--name")
    p.add_argument("--out", help="write DOT here instead of stdout")
    p.add_argument("--figure", help="also draw the diagram to this image file")
    p.set_defaults(func=cmd_render)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    rng = np.random.default_rng(args.seed)
    try:
        return args.func(args, rng)
    except SpiderLabError as exc:
        print(f"spiderlab: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"spiderlab: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Rewriting engine and numeric verifier for classical-quantum string
diagrams.

Diagrams are open graphs of spiders, boxes and wiring generators over
classical and quantum (doubled) wire types. They can be normalized by
a sound, terminating rewrite system, evaluated to complex tensors,
written in a textual language, and checked against the standard
verification suites: protocols, causality, measurements, mixing,
entanglement classes and phase groups.

Rendering (matplotlib) and the command line live in spiderlab.render
and spiderlab.cli; import them directly when needed.
"""

from .diagram import (
    Box,
    Cap,
    Cup,
    Diagram,
    Scalar,
    Spider,
    Swap,
    box,
    cap,
    compare,
    copy,
    cup,
    decoherence,
    delete,
    discard,
    encode,
    ghz,
    measure,
    scalar,
    spider,
    swap,
)
from .dsl import (
    DiagramDoc,
    doc_equal,
    export_dot,
    load,
    parse,
    parse_expression,
    print_doc,
    save,
)
from .errors import SpiderLabError
from .reports import Claim, Report
from .rewrite import (
    RULES,
    is_normal,
    normalize,
    rewrite_equal,
    rules_catalog,
)
from .tensor import NumericTolerance, Tensor, evaluate, numeric_equal
from .wires import PhaseVector, WireType, classical, quantum

__version__ = "0.1.0"

__all__ = [
    "Box",
    "Cap",
    "Claim",
    "Cup",
    "Diagram",
    "DiagramDoc",
    "NumericTolerance",
    "PhaseVector",
    "RULES",
    "Report",
    "Scalar",
    "Spider",
    "SpiderLabError",
    "Swap",
    "Tensor",
    "WireType",
    "box",
    "cap",
    "classical",
    "compare",
    "copy",
    "cup",
    "decoherence",
    "delete",
    "discard",
    "doc_equal",
    "encode",
    "evaluate",
    "export_dot",
    "ghz",
    "is_normal",
    "load",
    "measure",
    "normalize",
    "numeric_equal",
    "parse",
    "parse_expression",
    "print_doc",
    "quantum",
    "rewrite_equal",
    "rules_catalog",
    "save",
    "scalar",
    "spider",
    "swap",
]

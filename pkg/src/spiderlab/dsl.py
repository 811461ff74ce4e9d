"""Textual documents for diagrams: parser, pretty-printer and DOT export.

A document is a sequence of line-oriented declarations sharing one
namespace:

    q2 = quantum 2
    tensor had = [1.0 1.0; 1.0 -1.0]
    h = box H had : c2 -> c2
    bell = spider -> q2 q2
    prog = double(h) ; measure 2

Expressions compose diagrams with ``;`` (sequential, left runs first) and
``|`` (parallel, binds tighter). Wire types are referenced by declared name
or by the builtin names ``q<d>`` and ``c<d>``. Open graphs that expressions
cannot reach, such as rewrite output with ad-hoc wiring, are written as
``graph name { node ... / wire ... }`` blocks. The grammar is documented in
docs/grammar.md; files use the ``.sdg`` extension and UTF-8.

Angles are radians, written as decimal literals or multiples of ``pi``
(``phase(pi/2, -0.25)``). The printer emits ``repr`` floats, so matrices,
scalars and angles survive a print/parse cycle exactly; phase components
additionally pass through exp/atan2 and may move by one floating-point
digit, which is why ``diagram_equal`` grants them a 1e-12 slack.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Union

import numpy as np

from .diagram import (
    IN,
    ONB_FAMILY,
    OUT,
    Box,
    Cap,
    Cup,
    Diagram,
    Generator,
    Port,
    Scalar,
    Spider,
    Swap,
    Wire,
    classical_value,
    spider_gen,
)
from .errors import ParseError, SpiderLabError, UnknownName
from .wires import PhaseVector, WireType, classical, quantum

PHASE_PRINT_TOL = 1e-12

RESERVED = frozenset(
    """quantum classical tensor graph node wire in out
    id spider box cup cap swap measure encode discard delete value scalar
    phase double dagger transpose family adjoint diag plain doubled cq pi
    """.split()
)

_SPIDER_OPTS = frozenset({"phase", "family", "adjoint", "diag"})
_FLAVORS = ("plain", "doubled", "cq")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER_RE = re.compile(r"(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?")
_STRING_RE = re.compile(r'"(?:[^"\\\n]|\\.)*"')
_AUTO_WIRE_RE = re.compile(r"([qc])(\d+)")
_OPS = "=;|()[]{}:@,*/+-"


@dataclass(frozen=True)
class SourceSpan:
    """A position in a source document: file, 1-based line and column."""

    file: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    col: int
    start: int
    end: int


def _tokenize(src: str, file: str) -> list[Token]:
    """Lex a document. NEWLINE tokens are suppressed inside () and [] so
    matrices and parenthesized expressions may span lines; graph blocks
    stay line-oriented because {} does not suppress them."""
    toks: list[Token] = []
    i, line, col, depth = 0, 1, 1, 0
    n = len(src)
    while i < n:
        c = src[i]
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "\n":
            if depth == 0:
                toks.append(Token("NEWLINE", "\n", line, col, i, i + 1))
            i += 1
            line += 1
            col = 1
            continue
        if c == "#":
            j = src.find("\n", i)
            i = n if j < 0 else j
            continue
        if c == "-" and src[i + 1 : i + 2] == ">":
            toks.append(Token("ARROW", "->", line, col, i, i + 2))
            i += 2
            col += 2
            continue
        if c == '"':
            m = _STRING_RE.match(src, i)
            if not m:
                raise ParseError("unterminated string", SourceSpan(file, line, col))
            text = m.group()
            toks.append(Token("STRING", text, line, col, i, m.end()))
            i = m.end()
            col += len(text)
            continue
        if c.isdigit() or (c == "." and src[i + 1 : i + 2].isdigit()):
            m = _NUMBER_RE.match(src, i)
            text = m.group()
            j = m.end()
            nxt = src[j + 1 : j + 2]
            if src[j : j + 1] == "i" and not (nxt.isalnum() or nxt == "_"):
                toks.append(Token("IMAG", text + "i", line, col, i, j + 1))
                i = j + 1
                col += len(text) + 1
            else:
                toks.append(Token("NUMBER", text, line, col, i, j))
                i = j
                col += len(text)
            continue
        if c.isalpha() or c == "_":
            m = _IDENT_RE.match(src, i)
            text = m.group()
            toks.append(Token("NAME", text, line, col, i, m.end()))
            i = m.end()
            col += len(text)
            continue
        if c in _OPS:
            if c in "([":
                depth += 1
            elif c in ")]":
                depth = max(0, depth - 1)
            toks.append(Token("OP", c, line, col, i, i + 1))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {c!r}", SourceSpan(file, line, col))
    toks.append(Token("EOF", "", line, col, n, n))
    return toks


def _unquote(text: str) -> str:
    out = []
    i = 1
    while i < len(text) - 1:
        c = text[i]
        if c == "\\":
            i += 1
            c = text[i]
        out.append(c)
        i += 1
    return "".join(out)


def _quote(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


# ---------------------------------------------------------------------------
# Documents


@dataclass(frozen=True, eq=False)
class WireDecl:
    name: str
    wtype: WireType


@dataclass(frozen=True, eq=False)
class TensorDecl:
    name: str
    array: np.ndarray


@dataclass(frozen=True, eq=False)
class ExprDecl:
    name: str
    text: str
    diagram: Diagram


@dataclass(frozen=True, eq=False)
class GraphDecl:
    name: str
    diagram: Diagram


Decl = Union[WireDecl, TensorDecl, ExprDecl, GraphDecl]


@dataclass
class DiagramDoc:
    """An ordered collection of named declarations.

    Names must be declared before use and live in one namespace. Documents
    parsed from text keep the original expression slices, so printing a
    parsed document echoes the expressions verbatim; diagrams added
    programmatically are printed as raw graph blocks.
    """

    declarations: list[Decl] = field(default_factory=list)

    @property
    def wire_types(self) -> dict[str, WireType]:
        return {d.name: d.wtype for d in self.declarations if isinstance(d, WireDecl)}

    @property
    def tensors(self) -> dict[str, np.ndarray]:
        return {d.name: d.array for d in self.declarations if isinstance(d, TensorDecl)}

    @property
    def diagrams(self) -> dict[str, Diagram]:
        return {
            d.name: d.diagram
            for d in self.declarations
            if isinstance(d, (ExprDecl, GraphDecl))
        }

    def names(self) -> list[str]:
        return [d.name for d in self.declarations]

    def diagram(self, name: str) -> Diagram:
        got = self.diagrams.get(name)
        if got is None:
            raise UnknownName(f"diagram {name!r} is not declared")
        return got

    def _check_name(self, name: str):
        if not _IDENT_RE.fullmatch(name):
            raise ParseError(f"{name!r} is not a valid identifier")
        if name in RESERVED:
            raise ParseError(f"{name!r} is a reserved word")
        if name in self.names():
            raise ParseError(f"{name!r} is already declared")

    def add_wire_type(self, name: str, wtype: WireType) -> WireDecl:
        self._check_name(name)
        decl = WireDecl(name, wtype)
        self.declarations.append(decl)
        return decl

    def add_tensor(self, name: str, array: np.ndarray) -> TensorDecl:
        self._check_name(name)
        decl = TensorDecl(name, np.asarray(array, dtype=complex))
        self.declarations.append(decl)
        return decl

    def add_diagram(self, name: str, diagram: Diagram) -> GraphDecl:
        self._check_name(name)
        decl = GraphDecl(name, diagram)
        self.declarations.append(decl)
        return decl

    def add_expression(self, name: str, text: str) -> ExprDecl:
        """Parse an expression in the context of this document's names and
        append it as a declaration."""
        self._check_name(name)
        diagram = parse_expression(text, file=f"<{name}>", doc=self)
        decl = ExprDecl(name, text.strip(), diagram)
        self.declarations.append(decl)
        return decl


# ---------------------------------------------------------------------------
# Parser


def _respan(err: SpiderLabError, span: SourceSpan) -> SpiderLabError:
    """Attach a span to an error raised while materializing a diagram."""
    if isinstance(err, ParseError):
        if err.span is None:
            return type(err)(str(err), span)
        return err
    new = type(err)(f"{span}: {err}")
    new.span = span
    return new


class _Parser:
    def __init__(self, src: str, file: str):
        self.src = src
        self.file = file
        self.toks = _tokenize(src, file)
        self.i = 0
        self.decls: list[Decl] = []
        self.wires: dict[str, WireType] = {}
        self.tensors: dict[str, np.ndarray] = {}
        self.diagrams: dict[str, Diagram] = {}

    def load_doc(self, doc: DiagramDoc):
        self.wires = dict(doc.wire_types)
        self.tensors = dict(doc.tensors)
        self.diagrams = dict(doc.diagrams)

    # -- token plumbing -----------------------------------------------------

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "EOF":
            self.i += 1
        return t

    def span(self, tok: Token) -> SourceSpan:
        return SourceSpan(self.file, tok.line, tok.col)

    def fail(self, message: str, tok: Token):
        raise ParseError(message, self.span(tok))

    def expect_op(self, ch: str) -> Token:
        t = self.advance()
        if t.kind != "OP" or t.text != ch:
            self.fail(f"expected {ch!r}, got {t.text or 'end of input'!r}", t)
        return t

    def expect_arrow(self) -> Token:
        t = self.advance()
        if t.kind != "ARROW":
            self.fail(f"expected '->', got {t.text or 'end of input'!r}", t)
        return t

    def expect_name(self, what: str) -> Token:
        t = self.advance()
        if t.kind != "NAME":
            self.fail(f"expected {what}, got {t.text or 'end of input'!r}", t)
        return t

    def at_op(self, ch: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind == "OP" and t.text == ch

    def at_name(self, text: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind == "NAME" and t.text == text

    def skip_newlines(self):
        while self.peek().kind == "NEWLINE":
            self.advance()

    def int_literal(self, what: str = "an integer") -> int:
        t = self.advance()
        if t.kind != "NUMBER" or not re.fullmatch(r"\d+", t.text):
            self.fail(f"expected {what}, got {t.text or 'end of input'!r}", t)
        return int(t.text)

    # -- documents ----------------------------------------------------------

    def document(self) -> DiagramDoc:
        while True:
            t = self.peek()
            if t.kind == "EOF":
                break
            if t.kind == "NEWLINE" or (t.kind == "OP" and t.text == ";"):
                self.advance()
                continue
            self.declaration()
            t = self.peek()
            if t.kind not in ("NEWLINE", "EOF") and not (t.kind == "OP" and t.text == ";"):
                self.fail(f"unexpected {t.text!r} after a declaration", t)
        return DiagramDoc(self.decls)

    def declaration(self):
        t = self.peek()
        if t.kind != "NAME":
            self.fail("expected a declaration", t)
        if t.text == "tensor":
            self.tensor_decl()
            return
        if t.text == "graph":
            self.graph_decl()
            return
        name = self.decl_name()
        self.expect_op("=")
        if self.at_name("quantum") or self.at_name("classical"):
            self.wire_decl(name)
        else:
            self.expr_decl(name)

    def decl_name(self) -> Token:
        t = self.expect_name("a name")
        if t.text in RESERVED:
            self.fail(f"{t.text!r} is a reserved word", t)
        if t.text in self.wires or t.text in self.tensors or t.text in self.diagrams:
            self.fail(f"{t.text!r} is already declared", t)
        return t

    def wire_decl(self, name: Token):
        kw = self.advance()
        dim = self.int_literal("a dimension")
        if dim < 1:
            self.fail("wire dimension must be at least 1", kw)
        wtype = quantum(dim) if kw.text == "quantum" else classical(dim)
        auto = _AUTO_WIRE_RE.fullmatch(name.text)
        if auto and _auto_wtype(name.text) != wtype:
            self.fail(
                f"{name.text!r} is a builtin wire name and cannot mean {wtype}", name
            )
        self.wires[name.text] = wtype
        self.decls.append(WireDecl(name.text, wtype))

    def tensor_decl(self):
        self.advance()
        name = self.decl_name()
        self.expect_op("=")
        array = self.matrix()
        self.tensors[name.text] = array
        self.decls.append(TensorDecl(name.text, array))

    def expr_decl(self, name: Token):
        first = self.peek()
        diagram = self.expr()
        last = self.toks[self.i - 1]
        text = self.src[first.start : last.end]
        self.diagrams[name.text] = diagram
        self.decls.append(ExprDecl(name.text, text, diagram))

    # -- expressions ----------------------------------------------------------

    def decl_ahead(self, k: int) -> bool:
        """True when the k-th token onward starts a new declaration, so a
        trailing ';' or '|' is a separator rather than composition."""
        j = self.i + k
        toks = []
        while len(toks) < 2:
            t = self.toks[min(j, len(self.toks) - 1)]
            if t.kind != "NEWLINE":
                toks.append(t)
                if t.kind == "EOF":
                    break
            j += 1
        first = toks[0]
        if first.kind != "NAME":
            return False
        if first.text in ("tensor", "graph"):
            return True
        second = toks[1] if len(toks) > 1 else first
        return second.kind == "OP" and second.text == "="

    def expr(self) -> Diagram:
        left = self.par()
        while self.at_op(";") and not self.decl_ahead(1):
            op = self.advance()
            self.skip_newlines()
            right = self.par()
            try:
                left = left >> right
            except SpiderLabError as e:
                raise _respan(e, self.span(op)) from e
        return left

    def par(self) -> Diagram:
        left = self.atom()
        while self.at_op("|") and not self.decl_ahead(1):
            op = self.advance()
            self.skip_newlines()
            right = self.atom()
            try:
                left = left @ right
            except SpiderLabError as e:
                raise _respan(e, self.span(op)) from e
        return left

    def atom(self) -> Diagram:
        t = self.peek()
        if t.kind == "OP" and t.text == "(":
            self.advance()
            inner = self.expr()
            self.expect_op(")")
            return inner
        if t.kind != "NAME":
            self.fail("expected a diagram expression", t)
        handler = {
            "id": self.atom_id,
            "spider": self.atom_spider,
            "box": self.atom_box,
            "cup": self.atom_cup,
            "cap": self.atom_cap,
            "swap": self.atom_swap,
            "measure": self.atom_measure,
            "encode": self.atom_encode,
            "discard": self.atom_discard,
            "delete": self.atom_delete,
            "value": self.atom_value,
            "scalar": self.atom_scalar,
            "phase": self.atom_phase,
            "double": self.atom_wrapped,
            "dagger": self.atom_wrapped,
            "transpose": self.atom_wrapped,
        }.get(t.text)
        if handler is not None:
            return handler()
        return self.atom_ref()

    def atom_ref(self) -> Diagram:
        t = self.advance()
        got = self.diagrams.get(t.text)
        if got is not None:
            return got
        if t.text in self.tensors:
            self.fail(f"{t.text!r} names a tensor, not a diagram", t)
        if t.text in self.wires or _AUTO_WIRE_RE.fullmatch(t.text):
            self.fail(f"{t.text!r} names a wire type, not a diagram", t)
        raise UnknownName(f"diagram {t.text!r} is not declared", self.span(t))

    def atom_id(self) -> Diagram:
        self.advance()
        return Diagram.identity(self.wtype())

    def atom_cup(self) -> Diagram:
        self.advance()
        return Diagram.from_generator(Cup(self.wtype()))

    def atom_cap(self) -> Diagram:
        self.advance()
        return Diagram.from_generator(Cap(self.wtype()))

    def atom_swap(self) -> Diagram:
        self.advance()
        return Diagram.from_generator(Swap(self.wtype(), self.wtype()))

    def _bastard(self, flip: bool, state: bool = False) -> Diagram:
        kw = self.advance()
        d = self.int_literal("a dimension")
        try:
            if state:
                legs_in = (quantum(d),) if flip else (classical(d),)
                return Diagram.from_generator(Spider(legs_in, (), diagonal=True))
            src = (quantum(d),) if flip else (classical(d),)
            dst = (classical(d),) if flip else (quantum(d),)
            return Diagram.from_generator(Spider(src, dst, diagonal=True))
        except SpiderLabError as e:
            raise _respan(e, self.span(kw)) from e

    def atom_measure(self) -> Diagram:
        return self._bastard(flip=True)

    def atom_encode(self) -> Diagram:
        return self._bastard(flip=False)

    def atom_discard(self) -> Diagram:
        return self._bastard(flip=True, state=True)

    def atom_delete(self) -> Diagram:
        return self._bastard(flip=False, state=True)

    def atom_value(self) -> Diagram:
        kw = self.advance()
        i = self.int_literal("an outcome index")
        self.expect_op("@")
        d = self.int_literal("a dimension")
        try:
            return classical_value(d, i)
        except SpiderLabError as e:
            raise _respan(e, self.span(kw)) from e

    def atom_scalar(self) -> Diagram:
        self.advance()
        return Diagram.from_generator(Scalar(self.complex_literal()))

    def atom_phase(self) -> Diagram:
        kw = self.advance()
        angles = self.phase_args()
        try:
            pv = PhaseVector.from_angles(angles)
            gen = spider_gen(1, 1, quantum(pv.dim), phase=pv, diagonal=False)
            return Diagram.from_generator(gen)
        except SpiderLabError as e:
            raise _respan(e, self.span(kw)) from e

    def atom_wrapped(self) -> Diagram:
        kw = self.advance()
        self.expect_op("(")
        inner = self.expr()
        self.expect_op(")")
        try:
            return getattr(inner, kw.text)()
        except SpiderLabError as e:
            raise _respan(e, self.span(kw)) from e

    def atom_spider(self) -> Diagram:
        kw = self.advance()
        if self.peek().kind == "NUMBER":
            n_in = self.int_literal("a leg count")
            self.expect_arrow()
            n_out = self.int_literal("a leg count")
            self.expect_op("@")
            wt = self.wtype()
            phase, family, adjoint, diag = self.spider_opts()
            try:
                gen = spider_gen(
                    n_in, n_out, wt, phase, True if diag else None, family, adjoint
                )
                return Diagram.from_generator(gen)
            except SpiderLabError as e:
                raise _respan(e, self.span(kw)) from e
        ins = self.leg_list()
        self.expect_arrow()
        outs = self.leg_list()
        phase, family, adjoint, diag = self.spider_opts()
        diagonal = diag or any(t.is_classical for t in ins + outs)
        try:
            gen = Spider(tuple(ins), tuple(outs), phase, diagonal, family, adjoint)
            return Diagram.from_generator(gen)
        except SpiderLabError as e:
            raise _respan(e, self.span(kw)) from e

    def spider_opts(self):
        phase = None
        family = ONB_FAMILY
        adjoint = False
        diag = False
        while True:
            if self.at_name("phase") and self.at_op("(", 1):
                self.advance()
                phase = PhaseVector.from_angles(self.phase_args())
            elif self.at_name("family"):
                self.advance()
                t = self.advance()
                if t.kind == "STRING":
                    family = _unquote(t.text)
                elif t.kind == "NAME":
                    family = t.text
                else:
                    self.fail("expected a family name", t)
            elif self.at_name("adjoint"):
                self.advance()
                adjoint = True
            elif self.at_name("diag"):
                self.advance()
                diag = True
            else:
                break
        return phase, family, adjoint, diag

    def atom_box(self) -> Diagram:
        kw = self.advance()
        t = self.advance()
        if t.kind == "STRING":
            name = _unquote(t.text)
        elif t.kind == "NAME":
            name = t.text
        else:
            self.fail("expected a box name", t)
        payload = self.box_payload()
        self.expect_op(":")
        ins = self.leg_list()
        self.expect_arrow()
        outs = self.leg_list()
        flavor = None
        if self.peek().kind == "NAME" and self.peek().text in _FLAVORS:
            flavor = self.advance().text
        if flavor is None:
            flavor = "cq" if any(t.is_quantum for t in ins + outs) else "plain"
        try:
            gen = Box(name, tuple(ins), tuple(outs), payload, flavor)
            return Diagram.from_generator(gen)
        except SpiderLabError as e:
            raise _respan(e, self.span(kw)) from e

    def box_payload(self) -> np.ndarray:
        t = self.peek()
        if t.kind == "OP" and t.text == "[":
            return self.matrix()
        if t.kind == "NAME":
            self.advance()
            got = self.tensors.get(t.text)
            if got is not None:
                return got
            if t.text in self.diagrams:
                self.fail(f"{t.text!r} names a diagram, not a tensor", t)
            if t.text in self.wires:
                self.fail(f"{t.text!r} names a wire type, not a tensor", t)
            raise UnknownName(f"tensor {t.text!r} is not declared", self.span(t))
        self.fail("expected a tensor name or a matrix", t)

    # -- leaf literals ------------------------------------------------------

    def wtype(self) -> WireType:
        t = self.advance()
        if t.kind != "NAME":
            self.fail(f"expected a wire type, got {t.text or 'end of input'!r}", t)
        wt = self.wires.get(t.text)
        if wt is not None:
            return wt
        auto = _auto_wtype(t.text)
        if auto is not None:
            return auto
        if t.text in self.diagrams:
            self.fail(f"{t.text!r} names a diagram, not a wire type", t)
        if t.text in self.tensors:
            self.fail(f"{t.text!r} names a tensor, not a wire type", t)
        raise UnknownName(f"wire type {t.text!r} is not declared", self.span(t))

    def _is_wtype_name(self, t: Token) -> bool:
        if t.kind != "NAME":
            return False
        return t.text in self.wires or _auto_wtype(t.text) is not None

    def leg_list(self) -> tuple[WireType, ...]:
        legs = []
        while self._is_wtype_name(self.peek()):
            legs.append(self.wtype())
        return tuple(legs)

    def phase_args(self) -> list[float]:
        self.expect_op("(")
        angles = []
        if not self.at_op(")"):
            angles.append(self.angle())
            while self.at_op(","):
                self.advance()
                angles.append(self.angle())
        self.expect_op(")")
        return angles

    def angle(self) -> float:
        sign = 1.0
        if self.at_op("-") or self.at_op("+"):
            sign = -1.0 if self.advance().text == "-" else 1.0
        t = self.advance()
        if t.kind == "NAME" and t.text == "pi":
            val = math.pi
        elif t.kind == "NUMBER":
            val = float(t.text)
            if self.at_op("*") and self.at_name("pi", 1):
                self.advance()
                self.advance()
                val *= math.pi
            else:
                return sign * val
        else:
            self.fail(f"expected an angle, got {t.text or 'end of input'!r}", t)
        if self.at_op("/"):
            self.advance()
            d = self.advance()
            if d.kind != "NUMBER":
                self.fail("expected a divisor", d)
            val /= float(d.text)
        return sign * val

    def _entry_ahead(self) -> bool:
        t = self.peek()
        if t.kind in ("NUMBER", "IMAG"):
            return True
        if t.kind == "OP" and t.text in "+-":
            return self.peek(1).kind in ("NUMBER", "IMAG")
        return False

    def complex_literal(self) -> complex:
        sign = 1.0
        if self.at_op("-") or self.at_op("+"):
            sign = -1.0 if self.advance().text == "-" else 1.0
        t = self.advance()
        if t.kind == "IMAG":
            return complex(0.0, sign * float(t.text[:-1]))
        if t.kind != "NUMBER":
            self.fail(f"expected a number, got {t.text or 'end of input'!r}", t)
        real = sign * float(t.text)
        op, im = self.peek(), self.peek(1)
        # 'a+bi' and 'a-bi' must be written without spaces, otherwise the
        # sign starts a new entry in a matrix row
        if (
            op.kind == "OP"
            and op.text in "+-"
            and im.kind == "IMAG"
            and op.start == t.end
            and im.start == op.end
        ):
            self.advance()
            self.advance()
            s2 = -1.0 if op.text == "-" else 1.0
            return complex(real, s2 * float(im.text[:-1]))
        return complex(real, 0.0)

    def matrix(self) -> np.ndarray:
        lb = self.expect_op("[")
        rows: list[list[complex]] = []
        while True:
            row: list[complex] = []
            while self._entry_ahead():
                row.append(self.complex_literal())
                if self.at_op(","):
                    self.advance()
            if not row:
                self.fail("expected a matrix entry", self.peek())
            rows.append(row)
            t = self.advance()
            if t.kind == "OP" and t.text == ";":
                continue
            if t.kind == "OP" and t.text == "]":
                break
            self.fail(f"expected ';' or ']' in a matrix, got {t.text!r}", t)
        if len({len(r) for r in rows}) != 1:
            self.fail("matrix rows have different lengths", lb)
        return np.array(rows, dtype=complex)

    # -- graph blocks ---------------------------------------------------------

    def graph_decl(self):
        self.advance()
        name = self.decl_name()
        self.expect_op("{")
        self.skip_newlines()
        nodes: dict[int, Generator] = {}
        wires: list[Wire] = []
        while not self.at_op("}"):
            t = self.peek()
            if self.at_name("node"):
                self.advance()
                id_tok = self.peek()
                nid = self.int_literal("a node id")
                if nid in nodes:
                    self.fail(f"node id {nid} is already used", id_tok)
                self.expect_op("=")
                start = self.peek()
                d = self.atom()
                if len(d.nodes) != 1:
                    self.fail("expected a single generator", start)
                nodes[nid] = next(iter(d.nodes.values()))
            elif self.at_name("wire"):
                self.advance()
                src = self.endpoint()
                self.expect_arrow()
                dst = self.endpoint()
                self.expect_op("@")
                wires.append(Wire(src, dst, self.wtype()))
            else:
                self.fail("expected 'node' or 'wire'", t)
            if self.peek().kind == "NEWLINE":
                self.skip_newlines()
            elif not self.at_op("}"):
                self.fail("expected end of line", self.peek())
        self.expect_op("}")
        ends = [w.src for w in wires] + [w.dst for w in wires]
        n_in = 1 + max((p.port for p in ends if p.node == IN), default=-1)
        n_out = 1 + max((p.port for p in ends if p.node == OUT), default=-1)
        try:
            diagram = Diagram.build(nodes, wires, n_in, n_out)
        except SpiderLabError as e:
            raise _respan(e, self.span(name)) from e
        self.diagrams[name.text] = diagram
        self.decls.append(GraphDecl(name.text, diagram))

    def endpoint(self) -> Port:
        t = self.advance()
        if t.kind == "NAME" and t.text == "in":
            return Port(IN, self.int_literal("a boundary position"))
        if t.kind == "NAME" and t.text == "out":
            return Port(OUT, self.int_literal("a boundary position"))
        if t.kind == "NUMBER" and re.fullmatch(r"\d+", t.text):
            return Port(int(t.text), self.int_literal("a port index"))
        self.fail("expected 'in', 'out' or a node id", t)


def _auto_wtype(name: str) -> WireType | None:
    m = _AUTO_WIRE_RE.fullmatch(name)
    if not m or int(m.group(2)) < 1:
        return None
    d = int(m.group(2))
    return quantum(d) if m.group(1) == "q" else classical(d)


def parse(text: str, file: str = "<string>") -> DiagramDoc:
    """Parse a document. Raises ParseError, UnknownName or a wiring error,
    each carrying a SourceSpan pointing into the offending token."""
    return _Parser(text, file).document()


def parse_expression(text: str, file: str = "<expr>", doc: DiagramDoc | None = None) -> Diagram:
    """Parse a single expression, resolving names against `doc` if given."""
    p = _Parser(text, file)
    if doc is not None:
        p.load_doc(doc)
    p.skip_newlines()
    d = p.expr()
    p.skip_newlines()
    t = p.peek()
    if t.kind != "EOF":
        p.fail(f"unexpected {t.text!r} after the expression", t)
    return d


def load(path) -> DiagramDoc:
    path = Path(path)
    return parse(path.read_text(encoding="utf-8"), file=str(path))


def save(doc: DiagramDoc, path):
    Path(path).write_text(print_doc(doc), encoding="utf-8")


# ---------------------------------------------------------------------------
# Printing


def _float_text(x: float) -> str:
    return repr(float(x))


def _complex_text(z: complex) -> str:
    z = complex(z)
    if z.imag == 0.0:
        return _float_text(z.real)
    if z.real == 0.0:
        return _float_text(z.imag) + "i"
    sign = "+" if z.imag > 0 else "-"
    return f"{_float_text(z.real)}{sign}{_float_text(abs(z.imag))}i"


def _matrix_text(arr: np.ndarray) -> str:
    arr = np.asarray(arr)
    rows = "; ".join(" ".join(_complex_text(v) for v in row) for row in arr)
    return f"[{rows}]"


def _name_text(name: str) -> str:
    if _IDENT_RE.fullmatch(name) and name not in RESERVED:
        return name
    return _quote(name)


def _gen_text(gen: Generator) -> str:
    if isinstance(gen, Spider):
        parts = ["spider"]
        parts += [str(t) for t in gen.in_legs]
        parts.append("->")
        parts += [str(t) for t in gen.out_legs]
        if gen.phase is not None:
            parts.append(str(gen.phase))
        if gen.family != ONB_FAMILY:
            parts += ["family", _name_text(gen.family)]
        if gen.adjoint:
            parts.append("adjoint")
        legs = gen.in_legs + gen.out_legs
        if gen.diagonal and legs and all(t.is_quantum for t in legs):
            parts.append("diag")
        return " ".join(parts)
    if isinstance(gen, Box):
        parts = ["box", _name_text(gen.name), _matrix_text(gen.payload), ":"]
        parts += [str(t) for t in gen.in_legs]
        parts.append("->")
        parts += [str(t) for t in gen.out_legs]
        parts.append(gen.flavor)
        return " ".join(parts)
    if isinstance(gen, Cup):
        return f"cup {gen.wire}"
    if isinstance(gen, Cap):
        return f"cap {gen.wire}"
    if isinstance(gen, Swap):
        return f"swap {gen.a} {gen.b}"
    if isinstance(gen, Scalar):
        return f"scalar {_complex_text(gen.value)}"
    raise TypeError(f"unknown generator {gen!r}")


def _endpoint_text(p: Port) -> str:
    if p.node == IN:
        return f"in {p.port}"
    if p.node == OUT:
        return f"out {p.port}"
    return f"{p.node} {p.port}"


def _graph_text(name: str, diagram: Diagram) -> str:
    lines = [f"graph {name} {{"]
    for nid, gen in diagram.nodes.items():
        lines.append(f"  node {nid} = {_gen_text(gen)}")
    for w in diagram.wires:
        lines.append(
            f"  wire {_endpoint_text(w.src)} -> {_endpoint_text(w.dst)} @ {w.wtype}"
        )
    lines.append("}")
    return "\n".join(lines)


def _decl_text(decl: Decl) -> str:
    if isinstance(decl, WireDecl):
        kind = "quantum" if decl.wtype.is_quantum else "classical"
        return f"{decl.name} = {kind} {decl.wtype.base_dim}"
    if isinstance(decl, TensorDecl):
        return f"tensor {decl.name} = {_matrix_text(decl.array)}"
    if isinstance(decl, ExprDecl):
        return f"{decl.name} = {decl.text}"
    if isinstance(decl, GraphDecl):
        return _graph_text(decl.name, decl.diagram)
    raise TypeError(f"unknown declaration {decl!r}")


def print_doc(doc: DiagramDoc) -> str:
    """Render a document back to source text. Parsing the result yields a
    structurally equal document (see doc_equal)."""
    chunks = [_decl_text(d) for d in doc.declarations]
    return "\n".join(chunks) + ("\n" if chunks else "")


# ---------------------------------------------------------------------------
# Structural equality


def generators_equal(a: Generator, b: Generator, phase_tol: float = PHASE_PRINT_TOL) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Spider):
        if (a.in_legs, a.out_legs, a.diagonal, a.family, a.adjoint) != (
            b.in_legs,
            b.out_legs,
            b.diagonal,
            b.family,
            b.adjoint,
        ):
            return False
        if (a.phase is None) != (b.phase is None):
            return False
        if a.phase is None:
            return True
        return a.phase.approx_equal(b.phase, tol=phase_tol)
    if isinstance(a, Box):
        return (
            a.name == b.name
            and a.in_legs == b.in_legs
            and a.out_legs == b.out_legs
            and a.flavor == b.flavor
            and np.array_equal(a.payload, b.payload)
        )
    return a == b


def diagram_equal(a: Diagram, b: Diagram, phase_tol: float = PHASE_PRINT_TOL) -> bool:
    """Graph identity: same node ids, equal generators, same wires. Spider
    phases compare within `phase_tol` since printing stores them as angles."""
    if (a.n_inputs, a.n_outputs) != (b.n_inputs, b.n_outputs):
        return False
    if a.nodes.keys() != b.nodes.keys():
        return False
    if any(not generators_equal(a.nodes[k], b.nodes[k], phase_tol) for k in a.nodes):
        return False
    return a.wires == b.wires


def doc_equal(a: DiagramDoc, b: DiagramDoc, phase_tol: float = PHASE_PRINT_TOL) -> bool:
    if len(a.declarations) != len(b.declarations):
        return False
    for da, db in zip(a.declarations, b.declarations):
        if type(da) is not type(db) or da.name != db.name:
            return False
        if isinstance(da, WireDecl):
            if da.wtype != db.wtype:
                return False
        elif isinstance(da, TensorDecl):
            if not np.array_equal(da.array, db.array):
                return False
        else:
            if not diagram_equal(da.diagram, db.diagram, phase_tol):
                return False
    return True


# ---------------------------------------------------------------------------
# DOT export


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _dot_node(nid: int, gen: Generator) -> str:
    label = _dot_escape(gen.describe())
    if isinstance(gen, Spider):
        attrs = f'shape=circle, style=filled, fillcolor="gray80", label="{label}"'
    elif isinstance(gen, Box):
        attrs = f'shape=box, label="{_dot_escape(gen.name)}"'
    elif isinstance(gen, (Cup, Cap)):
        attrs = (
            'shape=circle, style=filled, fillcolor="black", width=0.15, '
            f'fixedsize=true, label="", tooltip="{label}"'
        )
    elif isinstance(gen, Swap):
        attrs = f'shape=diamond, label="", tooltip="{label}"'
    else:
        attrs = f'shape=ellipse, style=dashed, label="{label}"'
    return f"  n{nid} [{attrs}];"


def _dot_name(p: Port) -> str:
    if p.node == IN:
        return f"in{p.port}"
    if p.node == OUT:
        return f"out{p.port}"
    return f"n{p.node}"


def export_dot(diagram: Diagram) -> str:
    """Emit the diagram as a Graphviz digraph: spiders are filled circles,
    boxes rectangles; quantum edges render doubled and bold, classical
    edges thin. The empty diagram gives an empty graph body."""
    lines = ["digraph diagram {"]
    if diagram.nodes or diagram.wires:
        lines.append("  rankdir=LR;")
        for k in range(diagram.n_inputs):
            lines.append(f'  in{k} [shape=plaintext, label="in {k}"];')
        for k in range(diagram.n_outputs):
            lines.append(f'  out{k} [shape=plaintext, label="out {k}"];')
        for nid, gen in diagram.nodes.items():
            lines.append(_dot_node(nid, gen))
        for w in diagram.wires:
            if w.wtype.is_quantum:
                attrs = 'style=bold, color="black:invis:black"'
            else:
                attrs = "penwidth=1"
            lines.append(f"  {_dot_name(w.src)} -> {_dot_name(w.dst)} [{attrs}];")
    lines.append("}")
    return "\n".join(lines) + "\n"

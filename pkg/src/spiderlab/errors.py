"""Exception types shared across the package."""

from __future__ import annotations


class SpiderLabError(Exception):
    """Base class for all errors raised by spiderlab."""


class DimMismatch(SpiderLabError):
    """Wire dimensions disagree where they must match."""


class WrongKind(SpiderLabError):
    """A classical wire appeared where a quantum one was needed, or vice versa."""


class BoundaryMismatch(SpiderLabError):
    """Composition attempted along incompatible boundaries."""


class WrongSignature(SpiderLabError):
    """A diagram does not have the boundary shape an operation requires."""


class NotPlain(SpiderLabError):
    """double() was applied to a diagram that is not built from plain generators."""


class NotCausal(SpiderLabError):
    """A process required to be causal (discard-preserving) is not."""


class NoFullSupport(SpiderLabError):
    """A probability distribution required to have full support has a zero entry."""


class AxiomFailure(SpiderLabError):
    """A candidate algebraic structure failed one of its defining laws."""

    def __init__(self, law: str, detail: str = ""):
        self.law = law
        msg = f"axiom failed: {law}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class ShapeMismatch(SpiderLabError):
    """A payload tensor does not match the shape its legs require."""


class NotNormalized(SpiderLabError):
    """An operation that needs a normal form got a diagram that is not one."""


class InvalidMatch(SpiderLabError):
    """A rewrite match does not apply to the given diagram."""


class TensorTooLarge(SpiderLabError):
    """Contraction would exceed the supported tensor size."""


class ParseError(SpiderLabError):
    """A source document failed to parse. Carries a source span."""

    def __init__(self, message: str, span: "object" = None):
        self.span = span
        if span is not None:
            super().__init__(f"{span}: {message}")
        else:
            super().__init__(message)


class UnknownName(ParseError):
    """A document referenced a name that was never declared."""

from __future__ import annotations


class PolycheckError(Exception):
    """A user-facing diagnostic.

    `category` is a stable machine-readable tag (e.g. ``Shadowing``);
    `stage` names the pipeline stage that produced it.
    """

    stage = "error"

    def __init__(self, category: str, message: str, span=None):
        self.category = category
        self.message = message
        self.span = span
        loc = f"{span}: " if span is not None else ""
        super().__init__(f"{loc}{category}: {message}")


class ParseError(PolycheckError):
    stage = "parse"

    def __init__(self, message: str, span=None, expected=()):
        self.expected = tuple(expected)
        if self.expected:
            message = f"{message} (expected {', '.join(self.expected)})"
        super().__init__("SyntaxError", message, span)


class TypeCheckError(PolycheckError):
    stage = "typecheck"


class RewriteError(PolycheckError):
    stage = "rewrite"


class BoundViolation(PolycheckError):
    """A constructed formula exceeded its proven size/rank bound (compiler bug)."""

    stage = "pullback"

    def __init__(self, message: str):
        super().__init__("BoundViolation", message)

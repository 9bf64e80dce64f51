"""Facet labels with nested subscripts, e.g. ``3_{6_5,4,4_5,2}``.

Grammar::

    label := INT subs?
    subs  := "_{" label ("," label)* "}" | "_" INT

The short form ``4_5`` is accepted on input and used on output whenever the
subscript list is a single bare integer.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property


class LabelSyntaxError(ValueError):
    pass


@dataclass(frozen=True)
class FacetLabel:
    base: int
    subs: tuple["FacetLabel", ...] = ()

    def __str__(self) -> str:
        if not self.subs:
            return str(self.base)
        if len(self.subs) == 1 and not self.subs[0].subs:
            return f"{self.base}_{self.subs[0].base}"
        return f"{self.base}_{{{','.join(str(s) for s in self.subs)}}}"

    def __repr__(self) -> str:
        return f"FacetLabel({str(self)!r})"

    @property
    def type(self) -> int:
        return self.base

    def prepend(self, f: "FacetLabel") -> "FacetLabel":
        """Name of the mirror image of this object under doubling along ``f``."""
        return FacetLabel(self.base, (f,) + self.subs)

    @cached_property
    def sort_key(self) -> tuple:
        return (len(self.subs), self.base, tuple(s.sort_key for s in self.subs))

    @classmethod
    def parse(cls, text: str) -> "FacetLabel":
        parser = _Parser(text.strip())
        label = parser.label()
        if parser.pos != len(parser.text):
            parser.fail("trailing characters")
        return label


def L(text: str) -> FacetLabel:
    """Shorthand for ``FacetLabel.parse``."""
    return FacetLabel.parse(text)


def word_key(word) -> tuple:
    return (len(word), tuple(w.sort_key for w in word))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, msg: str):
        raise LabelSyntaxError(f"{msg} at column {self.pos + 1} in {self.text!r}")

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def integer(self) -> int:
        start = self.pos
        while self.peek().isdigit():
            self.pos += 1
        if start == self.pos:
            self.fail("expected integer")
        return int(self.text[start:self.pos])

    def label(self) -> FacetLabel:
        base = self.integer()
        if self.peek() != "_":
            return FacetLabel(base)
        self.pos += 1
        if self.peek() != "{":
            return FacetLabel(base, (FacetLabel(self.integer()),))
        self.pos += 1
        subs = [self.label()]
        while self.peek() == ",":
            self.pos += 1
            subs.append(self.label())
        if self.peek() != "}":
            self.fail("expected '}'")
        self.pos += 1
        return FacetLabel(base, tuple(subs))

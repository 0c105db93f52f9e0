"""Tokenizer and recursive-descent parser for the property surface syntax.

Grammar, loosest to tightest binding::

    implies  := or ('->' implies)?                      right-associative
    or       := and ('|' and)*
    and      := temporal ('&' temporal)*
    temporal := ('F' | 'G') '[' int ',' int ']' temporal
              | spatial
    spatial  := unary ('reach' '[' int ']' unary)*      left-associative
    unary    := '!' unary
              | 'somewhere' '[' int ']' unary
              | 'escape' '[' int ',' int ']' unary
              | '(' implies ')'
              | 'y' ('>' | '<') number
              | 'label' '(' name ')'

Property scripts hold one named formula per line, ``name := <formula>``,
with ``#`` starting a comment.
"""

import re

from .errors import ParseError
from .formula import (Always, And, AtomicCompare, AtomicLabel, Escape,
                      Eventually, Implies, Not, Or, Reach, Somewhere)

__all__ = ["parse", "parse_script"]

_TOKEN_RE = re.compile(r"""
    (?P<number>-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>->|[!&|><\[\],()])
""", re.VERBOSE)

_KEYWORDS = {"F", "G", "reach", "escape", "somewhere", "y", "label"}


class _Token:
    __slots__ = ("kind", "text", "line", "column")

    def __init__(self, kind, text, line, column):
        self.kind = kind
        self.text = text
        self.line = line
        self.column = column


def _tokenize(text):
    tokens = []
    for lineno, line in enumerate(text.splitlines() or [""], start=1):
        pos = 0
        while pos < len(line):
            if line[pos].isspace():
                pos += 1
                continue
            if line[pos] == "#":
                break
            m = _TOKEN_RE.match(line, pos)
            if m is None:
                raise ParseError(f"unexpected character {line[pos]!r}",
                                 lineno, pos + 1)
            tokens.append(_Token(m.lastgroup, m.group(), lineno, pos + 1))
            pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens, known_labels=None):
        self.tokens = tokens
        self.pos = 0
        self.known_labels = known_labels

    def _peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _error(self, message):
        tok = self._peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            line = last.line if last else 1
            col = last.column + len(last.text) if last else 1
            raise ParseError(f"{message}, found end of input", line, col)
        raise ParseError(f"{message}, found {tok.text!r}", tok.line,
                         tok.column)

    def _take(self, text=None):
        tok = self._peek()
        if tok is None or (text is not None and tok.text != text):
            self._error(f"expected {text!r}" if text else "expected a token")
        self.pos += 1
        return tok

    def _take_int(self, what):
        tok = self._peek()
        if tok is None or tok.kind != "number":
            self._error(f"expected {what}")
        value = float(tok.text)
        if value != int(value) or value < 0:
            raise ParseError(f"{what} must be a nonnegative integer, "
                             f"got {tok.text}", tok.line, tok.column)
        self.pos += 1
        return int(value)

    def _interval(self, what):
        lo_tok = self._peek()
        self._take("[")
        lo = self._take_int(f"{what} lower bound")
        self._take(",")
        hi = self._take_int(f"{what} upper bound")
        self._take("]")
        if lo > hi:
            raise ParseError(f"malformed {what} interval [{lo},{hi}]: "
                             f"lower bound exceeds upper bound",
                             lo_tok.line, lo_tok.column)
        return lo, hi

    def parse(self):
        phi = self._implies()
        tok = self._peek()
        if tok is not None:
            self._error("expected end of input")
        return phi

    def _implies(self):
        left = self._or()
        tok = self._peek()
        if tok is not None and tok.text == "->":
            self._take("->")
            return Implies(left, self._implies())
        return left

    def _or(self):
        left = self._and()
        while (tok := self._peek()) is not None and tok.text == "|":
            self._take("|")
            left = Or(left, self._and())
        return left

    def _and(self):
        left = self._temporal()
        while (tok := self._peek()) is not None and tok.text == "&":
            self._take("&")
            left = And(left, self._temporal())
        return left

    def _temporal(self):
        tok = self._peek()
        if tok is not None and tok.text in ("F", "G"):
            self._take()
            lo, hi = self._interval("time")
            child = self._temporal()
            return (Eventually if tok.text == "F" else Always)(lo, hi, child)
        return self._spatial()

    def _spatial(self):
        left = self._unary()
        while (tok := self._peek()) is not None and tok.text == "reach":
            self._take("reach")
            self._take("[")
            d = self._take_int("reach distance")
            self._take("]")
            left = Reach(left, d, self._unary())
        return left

    def _unary(self):
        tok = self._peek()
        if tok is None:
            self._error("expected a formula")
        if tok.text == "!":
            self._take("!")
            return Not(self._unary())
        if tok.text == "somewhere":
            self._take("somewhere")
            self._take("[")
            d = self._take_int("somewhere distance")
            self._take("]")
            return Somewhere(d, self._unary())
        if tok.text == "escape":
            self._take("escape")
            lo, hi = self._interval("distance")
            return Escape(lo, hi, self._unary())
        if tok.text == "(":
            self._take("(")
            phi = self._implies()
            self._take(")")
            return phi
        if tok.text == "y":
            self._take("y")
            op = self._peek()
            if op is None or op.text not in (">", "<"):
                self._error("expected '>' or '<' after 'y'")
            self._take()
            num = self._peek()
            if num is None or num.kind != "number":
                self._error("expected a threshold number")
            self._take()
            direction = "greater" if op.text == ">" else "less"
            return AtomicCompare(direction, float(num.text))
        if tok.text == "label":
            self._take("label")
            self._take("(")
            name = self._peek()
            if name is None or name.kind != "name":
                self._error("expected a label name")
            self._take()
            self._take(")")
            if (self.known_labels is not None
                    and name.text not in self.known_labels):
                raise ParseError(f"unknown label {name.text!r}; known: "
                                 f"{sorted(self.known_labels)}",
                                 name.line, name.column)
            return AtomicLabel(name.text)
        self._error("expected a formula")


def parse(text, known_labels=None):
    """Parse formula text into an AST.

    ``known_labels``, when given, makes references to any other label a
    parse error; otherwise label existence is checked at monitoring time.
    """
    if not text or not text.strip():
        raise ParseError("empty formula text")
    return _Parser(_tokenize(text), known_labels).parse()


def parse_script(text, known_labels=None):
    """Parse a property script into an ordered ``{name: Formula}`` dict."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":=" not in line:
            raise ParseError("expected 'name := formula'", lineno, 1)
        name, body = line.split(":=", 1)
        name = name.strip()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9.]*", name):
            raise ParseError(f"invalid property name {name!r}", lineno, 1)
        if name in out:
            raise ParseError(f"duplicate property name {name!r}", lineno, 1)
        out[name] = parse(body, known_labels)
    return out

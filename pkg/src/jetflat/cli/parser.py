"""Input documents: a small line-oriented language for systems, transformations and tables.

::

    n = 2
    system:
    F[1][1] = -2*dy[1]/(1+x[1])   # comments run to end of line
    F[1][2] = 0
    F[2][2] = 0

Expressions use integer literals, ``x[i]``, ``y``, ``dy[i]``, the operators
``+ - * / ^`` (exponents are nonnegative integer literals) and parentheses.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property

from jetflat.errors import JetflatError
from jetflat.jetspace import JetContext
from jetflat.symcore import RationalExpr

BLOCKS = ("system", "transform", "vectorfield", "cubic", "pi", "theta")

# Table name, number of indices, and whether the last two indices are a symmetric pair.
TARGETS: dict[str, dict[str, tuple[int, bool]]] = {
    "system": {"F": (2, True)},
    "transform": {"X": (1, False), "Y": (0, False)},
    "vectorfield": {"XI": (1, False), "ETA": (0, False)},
    "cubic": {"G": (2, True), "H": (3, True), "L": (2, False), "M": (1, False)},
    "pi": {"Pi": (3, True)},
    "theta": {"Theta": (1, False)},
}


class InputError(JetflatError):
    """Malformed input; ``code`` names the rule that was broken."""

    def __init__(self, code: str, message: str, line: int | None = None, col: int | None = None):
        self.code = code
        self.message = message
        self.line = line
        self.col = col
        where = f"line {line}, column {col}: " if line is not None else ""
        super().__init__(f"{code}: {where}{message}")


class ParseError(InputError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__("SyntaxError", message, line, col)


@dataclass(frozen=True)
class Token:
    kind: str  # int, name, op, end
    text: str
    line: int
    col: int


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()\[\]=:]))")


def tokenize(text: str, line: int = 1, col0: int = 1) -> list[Token]:
    """Split one line (comment already removed) into tokens."""
    out = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[bad]!r}", line, col0 + bad)
        num, name, op = m.groups()
        start = m.start(m.lastindex)
        if num is not None:
            out.append(Token("int", num, line, col0 + start))
        elif name is not None:
            out.append(Token("name", name, line, col0 + start))
        else:
            if op == "**":
                raise ParseError("use '^' for powers", line, col0 + start)
            out.append(Token("op", op, line, col0 + start))
        pos = m.end()
    out.append(Token("end", "", line, col0 + len(text.rstrip())))
    return out


class _ExprParser:
    """Recursive descent over one expression; precedence ``^`` > unary > ``* /`` > ``+ -``."""

    def __init__(self, toks: list[Token], ctx: JetContext, allow_jets: bool, block: str):
        self.toks = toks
        self.i = 0
        self.ctx = ctx
        self.allow_jets = allow_jets
        self.block = block

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def take(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.tok
        if t.kind != "op" or t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text or 'end of line'!r}", t.line, t.col)
        return self.take()

    def index(self, top: int) -> int:
        self.expect("[")
        t = self.tok
        if t.kind != "int":
            raise ParseError("expected an integer index", t.line, t.col)
        self.take()
        self.expect("]")
        v = int(t.text)
        if not 1 <= v <= top:
            raise InputError("IndexOutOfRange", f"index {v} outside 1..{top}", t.line, t.col)
        return v

    def parse(self) -> RationalExpr:
        e = self.sum()
        if self.tok.kind != "end":
            t = self.tok
            raise ParseError(f"unexpected {t.text!r}", t.line, t.col)
        return e

    def sum(self) -> RationalExpr:
        e = self.product()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.take().text
            rhs = self.product()
            e = e + rhs if op == "+" else e - rhs
        return e

    def product(self) -> RationalExpr:
        e = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            t = self.take()
            rhs = self.unary()
            if t.text == "*":
                e = e * rhs
            else:
                if rhs.is_zero():
                    raise InputError("DivisionByZero", "division by an expression equal to zero", t.line, t.col)
                e = e / rhs
        return e

    def unary(self) -> RationalExpr:
        if self.tok.kind == "op" and self.tok.text in "+-":
            op = self.take().text
            e = self.unary()
            return -e if op == "-" else e
        return self.power()

    def power(self) -> RationalExpr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.take()
            t = self.tok
            if t.kind != "int":
                raise ParseError("exponent must be a nonnegative integer literal", t.line, t.col)
            self.take()
            return base ** int(t.text)
        return base

    def atom(self) -> RationalExpr:
        t = self.tok
        ctx = self.ctx
        if t.kind == "int":
            self.take()
            return ctx.const(int(t.text))
        if t.kind == "op" and t.text == "(":
            self.take()
            e = self.sum()
            self.expect(")")
            return e
        if t.kind == "name":
            self.take()
            if t.text == "x":
                return ctx.x(self.index(ctx.n))
            if t.text == "y":
                return ctx.y
            if t.text == "dy":
                i = self.index(ctx.n)
                if not self.allow_jets:
                    raise InputError(
                        "JetVariableNotAllowed", f"dy[{i}] is not allowed in the {self.block} block", t.line, t.col
                    )
                return ctx.p(i)
            raise InputError("UnknownVariable", f"unknown variable {t.text!r}", t.line, t.col)
        raise ParseError(f"unexpected {t.text or 'end of line'!r}", t.line, t.col)


def parse_expr(text: str, ctx: JetContext, *, allow_jets: bool = True) -> RationalExpr:
    """Parse a single expression over the jet variables of ``ctx``."""
    return _ExprParser(tokenize(text), ctx, allow_jets, "expression").parse()


@dataclass
class InputDocument:
    """Parsed document: ``blocks[name][(table, indices)] = expression``."""

    n: int
    blocks: dict[str, dict[tuple[str, tuple[int, ...]], RationalExpr]] = field(default_factory=dict)
    lines: dict[str, int] = field(default_factory=dict)

    @cached_property
    def ctx(self) -> JetContext:
        return JetContext(self.n)

    def has(self, block: str) -> bool:
        return block in self.blocks

    def table(self, block: str, name: str) -> dict[tuple[int, ...], RationalExpr]:
        return {idx: e for (t, idx), e in self.blocks.get(block, {}).items() if t == name}


def _strip_comment(line: str) -> str:
    cut = line.find("#")
    return line if cut < 0 else line[:cut]


def parse(text: str) -> InputDocument:
    """Parse a whole document; raises InputError with a line and column on failure."""
    n: int | None = None
    doc: InputDocument | None = None
    block: str | None = None
    seen: dict[tuple[str, tuple[int, ...]], int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = _strip_comment(raw)
        if not body.strip():
            continue
        toks = tokenize(body, lineno)
        first = toks[0]
        # Block header.
        if first.kind == "name" and toks[1].kind == "op" and toks[1].text == ":":
            if toks[2].kind != "end":
                raise ParseError("nothing may follow a block header", toks[2].line, toks[2].col)
            if first.text not in BLOCKS:
                raise InputError("UnknownBlock", f"unknown block {first.text!r}", lineno, first.col)
            if doc is None:
                raise InputError("MissingN", "'n = <int>' must come before any block", lineno, first.col)
            if first.text in doc.blocks:
                raise InputError("DuplicateBlock", f"block {first.text!r} appears twice", lineno, first.col)
            block = first.text
            doc.blocks[block] = {}
            doc.lines[block] = lineno
            continue
        # Dimension.
        if first.kind == "name" and first.text == "n" and toks[1].kind == "op" and toks[1].text == "=":
            if n is not None:
                raise InputError("DuplicateAssignment", "n is set twice", lineno, first.col)
            val = toks[2]
            if val.kind != "int" or toks[3].kind != "end":
                raise ParseError("expected 'n = <integer>'", val.line, val.col)
            n = int(val.text)
            if n < 2:
                raise InputError("NRequiresAtLeastTwo", f"n must be at least 2, got {n}", lineno, val.col)
            doc = InputDocument(n)
            continue
        # Assignment.
        if first.kind != "name":
            raise ParseError(f"expected a statement, found {first.text!r}", first.line, first.col)
        if block is None or doc is None:
            raise InputError("OutsideBlock", "assignment outside of a block", lineno, first.col)
        targets = TARGETS[block]
        if first.text not in targets:
            allowed = ", ".join(targets)
            raise InputError("UnknownTarget", f"{first.text!r} cannot be set in {block} (allowed: {allowed})", lineno, first.col)
        arity, symmetric = targets[first.text]
        ctx = doc.ctx
        p = _ExprParser(toks, ctx, block == "system", block)
        p.take()
        top = ctx.n + 1 if block in ("pi", "theta") else ctx.n
        idx = tuple(p.index(top) for _ in range(arity))
        p.expect("=")
        if block == "system" and idx[0] > idx[1]:
            raise InputError("IndexOrder", f"write F[{idx[1]}][{idx[0]}] with i <= j", lineno, first.col)
        key_idx = idx[:-2] + tuple(sorted(idx[-2:])) if symmetric else idx
        key = (first.text, key_idx)
        if key in seen:
            raise InputError(
                "DuplicateAssignment", f"{first.text}{list(idx)} already set on line {seen[key]}", lineno, first.col
            )
        seen[key] = lineno
        doc.blocks[block][key] = p.parse()
    if doc is None:
        raise InputError("MissingN", "the document does not set n")
    _check_complete(doc)
    return doc


def _check_complete(doc: InputDocument) -> None:
    # Unset F entries are zero; a transformation must be given in full.
    n = doc.n
    if doc.has("transform"):
        have = doc.table("transform", "X")
        missing = [f"X[{i}]" for i in range(1, n + 1) if (i,) not in have]
        if not doc.table("transform", "Y"):
            missing.append("Y")
        if missing:
            raise InputError("MissingEntry", f"transform block lacks {', '.join(missing)}", doc.lines["transform"], 1)

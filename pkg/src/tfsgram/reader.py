"""Tokenizer and operator-precedence reader for ALE-style grammar source.

Grammar files are sequences of Prolog-like terms terminated by ``.``.  The
reader knows the operator table needed by the grammar statements
(``sub``/``intro``, ``macro``, ``--->``, ``lex_rule``, ``rule``, ``if``,
``morphs``/``becomes``/``when``) and produces plain term objects that the
statement classifiers in :mod:`tfsgram.grammar` and
:mod:`tfsgram.description` interpret.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union


class ReadError(SyntaxError):
    """Syntax error with a 1-based line/column position."""

    def __init__(self, msg: str, line: int, col: int, source: str = "<string>"):
        super().__init__(f"{source}:{line}:{col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col
        self.source = source

    def __str__(self):
        return self.args[0]


@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Int:
    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Compound:
    functor: str
    args: tuple

    def __str__(self):
        return f"{self.functor}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class PList:
    """Bracketed list ``[a, b | T]``; ``tail`` is None for a closed list."""

    items: tuple
    tail: "Term | None" = None

    def __str__(self):
        body = ", ".join(map(str, self.items))
        if self.tail is not None:
            body += f" | {self.tail}"
        return f"[{body}]"


Term = Union[Atom, Int, Var, Compound, PList]

EMPTY_LIST = PList(())

# name -> (precedence, kind)
INFIX_OPS = {
    ":-": (1200, "xfx"),
    "lex_rule": (1190, "xfx"),
    "rule": (1190, "xfx"),
    "===>": (1180, "xfx"),
    "**>": (1180, "xfx"),
    "--->": (1180, "xfx"),
    "macro": (1180, "xfx"),
    "intro": (1180, "xfx"),
    "cons": (1180, "xfx"),
    "if": (1170, "xfx"),
    "sub": (1170, "xfx"),
    "morphs": (1160, "xfx"),
    ";": (1100, "xfy"),
    ",": (1000, "xfy"),
    "becomes": (950, "xfx"),
    "when": (940, "xfx"),
    ">": (700, "xfx"),
    "=": (700, "xfx"),
    ":": (600, "xfy"),
}

PREFIX_OPS = {
    ":-": (1200, "fx"),
    "@": (200, "fy"),
}

SYMBOL_CHARS = set("+-*/\\^<>=~:.?@#&$")
SOLO_CHARS = set("()[]{},|;!")


@dataclass
class Token:
    kind: str  # 'atom', 'qatom', 'var', 'int', 'punct', 'end', 'eof'
    text: str
    line: int
    col: int
    # True when the token is immediately followed by '(' (functional notation)
    functional: bool = False


def tokenize(text: str, source: str = "<string>") -> list[Token]:
    toks: list[Token] = []
    i, n = 0, len(text)
    line, col = 1, 1

    def advance(k: int):
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = text[i]
        if c.isspace():
            advance(1)
            continue
        if c == "%":
            while i < n and text[i] != "\n":
                advance(1)
            continue
        if c == "/" and text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end < 0:
                raise ReadError("unterminated block comment", line, col, source)
            advance(end + 2 - i)
            continue
        sl, sc = line, col
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "var" if (word[0].isupper() or word[0] == "_") else "atom"
            advance(j - i)
            toks.append(Token(kind, word, sl, sc, functional=i < n and text[i] == "("))
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("int", text[i:j], sl, sc))
            advance(j - i)
            continue
        if c == "'":
            j = i + 1
            buf = []
            while True:
                if j >= n:
                    raise ReadError("unterminated quoted atom", sl, sc, source)
                if text[j] == "'":
                    if j + 1 < n and text[j + 1] == "'":
                        buf.append("'")
                        j += 2
                        continue
                    break
                buf.append(text[j])
                j += 1
            advance(j + 1 - i)
            toks.append(Token("qatom", "".join(buf), sl, sc, functional=i < n and text[i] == "("))
            continue
        if c == "." and (i + 1 >= n or text[i + 1].isspace() or text[i + 1] == "%"):
            toks.append(Token("end", ".", sl, sc))
            advance(1)
            continue
        if c in SOLO_CHARS:
            toks.append(Token("punct", c, sl, sc))
            advance(1)
            continue
        if c in SYMBOL_CHARS:
            j = i
            while j < n and text[j] in SYMBOL_CHARS:
                # a '.' followed by layout ends the clause, even inside a symbol run
                if text[j] == "." and (j + 1 >= n or text[j + 1].isspace()):
                    break
                j += 1
            toks.append(Token("atom", text[i:j], sl, sc))
            advance(j - i)
            continue
        raise ReadError(f"unexpected character {c!r}", sl, sc, source)
    toks.append(Token("eof", "", line, col))
    return toks


class Reader:
    def __init__(self, text: str, source: str = "<string>"):
        self.source = source
        self.toks = tokenize(text, source)
        self.pos = 0

    # -- token helpers -------------------------------------------------
    def peek(self) -> Token:
        return self.toks[self.pos]

    def next(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.peek()
        return ReadError(msg, tok.line, tok.col, self.source)

    def expect(self, text: str):
        t = self.next()
        if t.text != text or t.kind not in ("punct", "atom", "end"):
            raise self.error(f"expected {text!r}, found {t.text or 'end of input'!r}", t)
        return t

    # -- clauses -------------------------------------------------------
    def read_clause(self) -> tuple[Term, int] | None:
        """Read one ``.``-terminated term; returns (term, line) or None at EOF."""
        if self.peek().kind == "eof":
            return None
        line = self.peek().line
        term, _ = self.parse(1200)
        t = self.peek()
        if t.kind != "end":
            raise self.error(f"operator expected, found {t.text or 'end of input'!r}", t)
        self.next()
        return term, line

    def read_all(self) -> Iterator[tuple[Term, int]]:
        while True:
            item = self.read_clause()
            if item is None:
                return
            yield item

    # -- Pratt parser --------------------------------------------------
    def _starts_term(self, tok: Token) -> bool:
        if tok.kind in ("var", "int", "qatom"):
            return True
        if tok.kind == "atom":
            return tok.text not in INFIX_OPS or tok.text in PREFIX_OPS
        if tok.kind == "punct":
            return tok.text in "([{"
        return False

    def parse(self, max_prec: int) -> tuple[Term, int]:
        left, left_prec = self.parse_primary(max_prec)
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.text in (",", ";", "|"):
                name = tok.text
            elif tok.kind == "atom":
                name = tok.text
            else:
                break
            if name == "|" or name not in INFIX_OPS:
                break
            prec, kind = INFIX_OPS[name]
            if prec > max_prec:
                break
            left_max = prec if kind == "yfx" else prec - 1
            if left_prec > left_max:
                break
            self.next()
            right_max = prec if kind == "xfy" else prec - 1
            right, _ = self.parse(right_max)
            left = Compound(name, (left, right))
            left_prec = prec
        return left, left_prec

    def parse_arglist(self) -> tuple:
        self.expect("(")
        args = [self.parse(999)[0]]
        while self.peek().kind == "punct" and self.peek().text == ",":
            self.next()
            args.append(self.parse(999)[0])
        self.expect(")")
        return tuple(args)

    def parse_primary(self, max_prec: int) -> tuple[Term, int]:
        tok = self.next()
        if tok.kind == "var":
            return Var(tok.text), 0
        if tok.kind == "int":
            return Int(int(tok.text)), 0
        if tok.kind == "punct":
            if tok.text == "(":
                inner, _ = self.parse(1200)
                self.expect(")")
                return inner, 0
            if tok.text == "[":
                return self.parse_list(), 0
            raise self.error(f"unexpected {tok.text!r}", tok)
        if tok.kind in ("atom", "qatom"):
            name = tok.text
            if tok.functional:
                return Compound(name, self.parse_arglist()), 0
            if tok.kind == "atom" and name in PREFIX_OPS and self._starts_term(self.peek()):
                prec, kind = PREFIX_OPS[name]
                if prec > max_prec:
                    prec = 999
                arg_max = prec if kind == "fy" else prec - 1
                arg, _ = self.parse(arg_max)
                return Compound(name, (arg,)), prec
            prec = 0
            if tok.kind == "atom" and (name in INFIX_OPS or name in PREFIX_OPS):
                prec = max(INFIX_OPS.get(name, (0,))[0], PREFIX_OPS.get(name, (0,))[0])
                if prec > max_prec:
                    prec = 0
            return Atom(name), prec
        if tok.kind == "end":
            raise self.error("unexpected end of clause", tok)
        raise self.error("unexpected end of input", tok)

    def parse_list(self) -> PList:
        if self.peek().kind == "punct" and self.peek().text == "]":
            self.next()
            return EMPTY_LIST
        items = [self.parse(999)[0]]
        tail = None
        while True:
            t = self.next()
            if t.kind == "punct" and t.text == ",":
                items.append(self.parse(999)[0])
            elif t.kind == "punct" and t.text == "|":
                tail, _ = self.parse(999)
                self.expect("]")
                break
            elif t.kind == "punct" and t.text == "]":
                break
            else:
                raise self.error(f"expected ',', '|' or ']' in list, found {t.text!r}", t)
        return PList(tuple(items), tail)


def read_terms(text: str, source: str = "<string>") -> list[tuple[Term, int]]:
    return list(Reader(text, source).read_all())


def read_term(text: str, source: str = "<string>") -> Term:
    """Read a single term; a terminating ``.`` is optional."""
    r = Reader(text.strip().rstrip(".") + " .", source)
    item = r.read_clause()
    if item is None:
        raise ReadError("empty input", 1, 1, source)
    if r.peek().kind != "eof":
        raise r.error("trailing input after term")
    return item[0]


def conj_list(term: Term, op: str = ",") -> list[Term]:
    """Flatten a right-nested operator chain (``a, b, c``) into a list."""
    out = []
    while isinstance(term, Compound) and term.functor == op and len(term.args) == 2:
        out.append(term.args[0])
        term = term.args[1]
    out.append(term)
    return out

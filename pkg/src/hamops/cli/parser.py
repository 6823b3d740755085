"""Tokenizer and recursive-descent parser for the expression language.

The same AST serves plain expressions (:func:`parse_expr`) and script
statements, which add function calls, ``{...}`` lists and keyword arguments.

Grammar (informal)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("-" | "+") unary | power
    power  := primary (("^" | "**") ["-"] INT)?
    primary:= INT | NAME | NAME "(" args ")" | "(" expr ")" | "{" [expr ("," expr)*] "}"
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from ..errors import ExprSyntaxError, UnknownName

__all__ = ["tokenize", "Parser", "parse", "parse_expr", "evaluate_expr_ast"]

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>\d+)
  | (?P<name>[A-Za-z][A-Za-z0-9_]*)
  | (?P<op>\*\*|==|:=|[-+*/^(){},=\[\]])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    pos: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        mt = _TOKEN_RE.match(text, pos)
        if not mt:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = mt.lastgroup
        if kind != "ws":
            out.append(Token(kind, mt.group(), pos))
        pos = mt.end()
    out.append(Token("end", "", len(text)))
    return out


# AST nodes are plain tuples: (kind, ..., pos)
class Parser:
    def __init__(self, text: str, allow_calls: bool = True):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.allow_calls = allow_calls

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        raise ExprSyntaxError(msg, tok.pos, self.text)

    def eat(self, value=None, kind=None) -> Token:
        t = self.tok
        if value is not None and t.value != value:
            self.error(f"expected {value!r}, found {t.value or 'end of input'!r}")
        if kind is not None and t.kind != kind:
            self.error(f"expected {kind}, found {t.value or 'end of input'!r}")
        self.i += 1
        return t

    def at(self, value) -> bool:
        return self.tok.kind == "op" and self.tok.value == value

    def parse_all(self):
        node = self.expr()
        if self.tok.kind != "end":
            self.error(f"unexpected {self.tok.value!r}")
        return node

    def expr(self):
        node = self.term()
        while self.at("+") or self.at("-"):
            t = self.eat()
            rhs = self.term()
            node = ("bin", t.value, node, rhs, t.pos)
        return node

    def term(self):
        node = self.unary()
        while self.at("*") or self.at("/"):
            t = self.eat()
            rhs = self.unary()
            node = ("bin", t.value, node, rhs, t.pos)
        return node

    def unary(self):
        if self.at("-"):
            t = self.eat()
            return ("neg", self.unary(), t.pos)
        if self.at("+"):
            self.eat()
            return self.unary()
        return self.power()

    def power(self):
        base = self.primary()
        if self.at("^") or self.at("**"):
            t = self.eat()
            sign = 1
            if self.at("-"):
                self.eat()
                sign = -1
            if self.at("("):
                # allow u^(2) and u^(-1)
                self.eat("(")
                if self.at("-"):
                    self.eat()
                    sign = -sign
                n = self.eat(kind="num")
                self.eat(")")
            else:
                n = self.eat(kind="num")
            return ("pow", base, sign * int(n.value), t.pos)
        return base

    def primary(self):
        t = self.tok
        if t.kind == "num":
            self.eat()
            return ("num", Fraction(int(t.value)), t.pos)
        if t.kind == "name":
            self.eat()
            if self.at("("):
                if not self.allow_calls:
                    self.error(f"function calls are not allowed here ({t.value!r})", t)
                self.eat("(")
                args, kwargs = [], {}
                if not self.at(")"):
                    while True:
                        if (
                            self.tok.kind == "name"
                            and self.tokens[self.i + 1].kind == "op"
                            and self.tokens[self.i + 1].value == "="
                        ):
                            key = self.eat().value
                            self.eat("=")
                            kwargs[key] = self.expr()
                        else:
                            args.append(self.expr())
                        if self.at(","):
                            self.eat()
                            continue
                        break
                self.eat(")")
                return ("call", t.value, args, kwargs, t.pos)
            return ("name", t.value, t.pos)
        if self.at("("):
            self.eat()
            node = self.expr()
            self.eat(")")
            return node
        if self.at("{"):
            if not self.allow_calls:
                self.error("lists are not allowed here")
            p = self.eat().pos
            items = []
            if not self.at("}"):
                while True:
                    items.append(self.expr())
                    if self.at(","):
                        self.eat()
                        continue
                    break
            self.eat("}")
            return ("list", items, p)
        self.error(f"unexpected {t.value or 'end of input'!r}")


def parse(text: str, allow_calls: bool = True):
    return Parser(text, allow_calls).parse_all()


def evaluate_expr_ast(node, space, lookup=None):
    """Evaluate an arithmetic AST to an Expr.

    ``lookup(name)`` may return a value for script-level names; otherwise
    names resolve to coordinates, independent variables or parameters.
    """
    kind = node[0]
    if kind == "num":
        return space.const(node[1])
    if kind == "name":
        name = node[1]
        if lookup is not None:
            val = lookup(name)
            if val is not None:
                return val
        try:
            return space.var(name)
        except UnknownName as exc:
            raise UnknownName(f"{exc} (at position {node[2]})") from None
    if kind == "neg":
        return -evaluate_expr_ast(node[1], space, lookup)
    if kind == "pow":
        base = evaluate_expr_ast(node[1], space, lookup)
        return base ** node[2]
    if kind == "bin":
        a = evaluate_expr_ast(node[2], space, lookup)
        b = evaluate_expr_ast(node[3], space, lookup)
        op = node[1]
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        return a / b
    raise ExprSyntaxError(f"unsupported construct {kind!r}", node[-1])


def parse_expr(text: str, space):
    """Parse ``text`` into a canonical Expr over ``space``."""
    return evaluate_expr_ast(parse(text, allow_calls=False), space)

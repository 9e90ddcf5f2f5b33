"""Concrete syntax: a hand-written recursive-descent parser and its printer.

Grammar::

    program  := (rule | net)*
    rule     := pattern '><' pattern ['|' guard] '=>' [eqs] ';'
    pattern  := Sym ['{' attrvar '}'] ['(' name (',' name)* ')']
    net      := 'net' [eqs] ';' ['interface' [name (',' name)*] ';']
    eqs      := term '~' term (',' term '~' term)*
    term     := name | Sym [attr] [args] | ('(*L)' | '(*R)') [Sym] [attr] [args]
    guard    := attr ('<' | '<=' | '>' | '>=' | '==' | '!=') attr

``#`` starts a comment that runs to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional

from .syntax import (GUARD_OPS, Agent, Annotated, AttrVar, Equation, Guard,
                     IntLit, Name, Net, Program, Rule, TermPath)


class ParseError(Exception):
    def __init__(self, message, line=0, col=0):
        super().__init__("%d:%d: %s" % (line, col, message))
        self.message = message
        self.line = line
        self.col = col


_TOKEN = re.compile(r"""
    (?P<skip>[ \t\r\n]+|\#[^\n]*)
  | (?P<ann>\(\*[LR]\))
  | (?P<op>><|=>|<=|>=|==|!=|[<>~|(){},;])
  | (?P<int>-?[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
""", re.VERBOSE)


@dataclass
class Token:
    kind: str   # 'sym', 'name', 'int', 'ann', 'op', 'eof'
    text: str
    line: int
    col: int


def tokenize(text: str) -> List[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError("unexpected character %r" % text[pos], line, pos - line_start + 1)
        kind, value = m.lastgroup, m.group()
        col = pos - line_start + 1
        if kind == "ident":
            kind = "sym" if value[0].isupper() else "name"
        if kind != "skip":
            tokens.append(Token(kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def at(self, text) -> bool:
        return self.tok.kind in ("op", "ann") and self.tok.text == text

    def error(self, message, tok=None):
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.col)

    def advance(self) -> Token:
        tok = self.tok
        self.i += 1
        return tok

    def expect(self, text) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error("expected %r, found %r" % (text, found))
        return self.advance()

    def expect_kind(self, kind, what) -> Token:
        if self.tok.kind != kind:
            raise self.error("expected %s, found %r" % (what, self.tok.text or "end of input"))
        return self.advance()

    # -- top level

    def program(self) -> Program:
        rules, net = [], None
        while self.tok.kind != "eof":
            if self.tok.kind == "name" and self.tok.text == "net":
                if net is not None:
                    raise self.error("more than one net declared")
                net = self.net()
            elif self.tok.kind == "sym":
                rules.append(self.rule())
            else:
                raise self.error("expected a rule or 'net', found %r" % self.tok.text)
        return Program(tuple(rules), net)

    def rule(self) -> Rule:
        line = self.tok.line
        left = self.pattern()
        self.expect("><")
        right = self.pattern()
        guard = None
        if self.at("|"):
            self.advance()
            guard = self.guard()
        self.expect("=>")
        rhs = () if self.at(";") else self.equations()
        self.expect(";")
        return Rule(left, right, rhs, guard, line=line)

    def net(self) -> Net:
        line = self.advance().line
        eqs = () if self.at(";") else self.equations()
        self.expect(";")
        interface = []
        if self.tok.kind == "name" and self.tok.text == "interface":
            self.advance()
            if not self.at(";"):
                interface.append(self.expect_kind("name", "a name").text)
                while self.at(","):
                    self.advance()
                    interface.append(self.expect_kind("name", "a name").text)
            self.expect(";")
        return Net(eqs, tuple(interface), line=line)

    # -- pieces

    def pattern(self) -> Agent:
        sym = self.expect_kind("sym", "a symbol").text
        attr = None
        if self.at("{"):
            self.advance()
            attr = AttrVar(self.expect_kind("name", "an attribute variable").text)
            self.expect("}")
        params = []
        if self.at("("):
            self.advance()
            if not self.at(")"):
                params.append(Name(self.expect_kind("name", "a name").text))
                while self.at(","):
                    self.advance()
                    params.append(Name(self.expect_kind("name", "a name").text))
            self.expect(")")
        return Agent(sym, tuple(params), attr)

    def guard(self) -> Guard:
        left = self.attr_expr()
        op = self.tok
        if op.kind != "op" or op.text not in GUARD_OPS:
            raise self.error("expected a comparison operator, found %r" % op.text)
        self.advance()
        return Guard(left, op.text, self.attr_expr())

    def attr_expr(self):
        tok = self.tok
        if tok.kind == "int":
            self.advance()
            return IntLit(int(tok.text))
        if tok.kind == "name":
            self.advance()
            return AttrVar(tok.text)
        raise self.error("expected an integer or attribute variable, found %r" % tok.text)

    def equations(self):
        eqs = [self.equation()]
        while self.at(","):
            self.advance()
            eqs.append(self.equation())
        return tuple(eqs)

    def equation(self) -> Equation:
        left = self.term()
        self.expect("~")
        return Equation(left, self.term())

    def term(self):
        tok = self.tok
        if tok.kind == "name":
            self.advance()
            return Name(tok.text)
        if tok.kind == "sym":
            self.advance()
            attr, args = self.attr_and_args()
            return Agent(tok.text, args, attr)
        if tok.kind == "ann":
            self.advance()
            cast = self.advance().text if self.tok.kind == "sym" else None
            attr, args = self.attr_and_args()
            return Annotated(tok.text[2], cast, args, attr)
        raise self.error("expected a term, found %r" % (tok.text or "end of input"))

    def attr_and_args(self):
        attr = None
        if self.at("{"):
            self.advance()
            attr = self.attr_expr()
            self.expect("}")
        args = []
        if self.at("("):
            self.advance()
            if not self.at(")"):
                args.append(self.term())
                while self.at(","):
                    self.advance()
                    args.append(self.term())
            self.expect(")")
        return attr, tuple(args)


def parse_program(text: str) -> Program:
    return _Parser(text).program()


def parse_term(text: str):
    p = _Parser(text)
    term = p.term()
    if p.tok.kind != "eof":
        raise p.error("trailing input %r" % p.tok.text)
    return term


def parse_equations(text: str):
    p = _Parser(text)
    eqs = () if p.tok.kind == "eof" else p.equations()
    if p.tok.kind != "eof":
        raise p.error("trailing input %r" % p.tok.text)
    return eqs


# -- printing ----------------------------------------------------------------

def _attr(expr) -> str:
    if expr is None:
        return ""
    inner = str(expr.value) if isinstance(expr, IntLit) else expr.id
    return "{%s}" % inner


def _args(args) -> str:
    return "(%s)" % ",".join(render(a) for a in args) if args else ""


def render(node) -> str:
    """Print a term, equation, rule, net, program or path as re-parseable text."""
    if isinstance(node, Name):
        return node.id
    if isinstance(node, Agent):
        return node.sym + _attr(node.attr) + _args(node.args)
    if isinstance(node, Annotated):
        return "(*%s)%s%s%s" % (node.side, node.cast or "", _attr(node.attr), _args(node.args))
    if isinstance(node, (IntLit, AttrVar)):
        return _attr(node)[1:-1]
    if isinstance(node, Equation):
        return "%s ~ %s" % (render(node.left), render(node.right))
    if isinstance(node, Guard):
        return "%s %s %s" % (render(node.left), node.op, render(node.right))
    if isinstance(node, Rule):
        guard = " | %s" % render(node.guard) if node.guard else ""
        rhs = ", ".join(render(e) for e in node.rhs)
        return "%s >< %s%s => %s;" % (render(node.left), render(node.right), guard, rhs)
    if isinstance(node, Net):
        text = "net %s;" % ", ".join(render(e) for e in node.equations)
        if node.interface:
            text += " interface %s;" % ", ".join(node.interface)
        return text
    if isinstance(node, Program):
        lines = [render(r) for r in node.rules]
        if node.net is not None:
            lines.append(render(node.net))
        return "".join(line + "\n" for line in lines)
    if isinstance(node, TermPath):
        return str(node)
    raise TypeError("cannot render %r" % (node,))

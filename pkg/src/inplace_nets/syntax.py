"""Abstract syntax for the textual interaction-net calculus.

Terms are immutable trees.  Symbols are plain strings here; their arity and
attribute count live in the symbol table built by :mod:`inplace_nets.check`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Tuple, Union


@dataclass(frozen=True)
class Symbol:
    name: str
    arity: int
    attr_count: int = 0


# -- attribute expressions ---------------------------------------------------

@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class AttrVar:
    id: str


AttrExpr = Union[IntLit, AttrVar]


# -- terms -------------------------------------------------------------------

@dataclass(frozen=True)
class Name:
    id: str


@dataclass(frozen=True)
class Agent:
    sym: str
    args: Tuple["Term", ...] = ()
    attr: Optional[AttrExpr] = None


@dataclass(frozen=True)
class Annotated:
    """An RHS agent occurrence that reuses the left (``L``) or right (``R``)
    active-pair cell.  ``cast`` names the new symbol when it differs from the
    reused cell's symbol."""

    side: str
    cast: Optional[str] = None
    args: Tuple["Term", ...] = ()
    attr: Optional[AttrExpr] = None


Term = Union[Name, Agent, Annotated]


@dataclass(frozen=True)
class Equation:
    left: Term
    right: Term


@dataclass(frozen=True)
class Guard:
    left: AttrExpr
    op: str
    right: AttrExpr


GUARD_OPS = ("<", "<=", ">", ">=", "==", "!=")


@dataclass(frozen=True)
class Rule:
    left: Agent
    right: Agent
    rhs: Tuple[Equation, ...] = ()
    guard: Optional[Guard] = None
    line: int = field(default=0, compare=False)

    @property
    def pair(self) -> Tuple[str, str]:
        return (self.left.sym, self.right.sym)

    @property
    def pair_name(self) -> str:
        return "%s><%s" % self.pair

    def pattern(self, side: str) -> Agent:
        return self.left if side == "L" else self.right

    def is_annotated(self) -> bool:
        return any(isinstance(t, Annotated) for _, t in iter_subterms(self.rhs))


@dataclass(frozen=True)
class Net:
    equations: Tuple[Equation, ...] = ()
    interface: Tuple[str, ...] = ()
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Program:
    rules: Tuple[Rule, ...] = ()
    net: Optional[Net] = None


# -- term paths --------------------------------------------------------------

@dataclass(frozen=True, order=True)
class TermPath:
    """Address of a subterm inside an equation sequence, rendered ``2L:12``."""

    eq: int
    side: str
    args: Tuple[int, ...] = ()

    def __str__(self) -> str:
        return "%d%s:%s" % (self.eq, self.side, "".join(str(a) for a in self.args))

    def child(self, index: int) -> "TermPath":
        return TermPath(self.eq, self.side, self.args + (index,))

    @classmethod
    def parse(cls, text: str) -> "TermPath":
        head, sep, tail = text.partition(":")
        if not sep or len(head) < 2 or head[-1] not in "LR" or not head[:-1].isdigit():
            raise ValueError("malformed term path %r" % text)
        if tail and not tail.isdigit():
            raise ValueError("malformed term path %r" % text)
        return cls(int(head[:-1]), head[-1], tuple(int(c) for c in tail))


def term_args(term: Term) -> Tuple[Term, ...]:
    return () if isinstance(term, Name) else term.args


def iter_term(term: Term, path: TermPath) -> Iterator[Tuple[TermPath, Term]]:
    yield path, term
    for i, arg in enumerate(term_args(term), 1):
        yield from iter_term(arg, path.child(i))


def iter_subterms(rhs) -> Iterator[Tuple[TermPath, Term]]:
    """Every subterm occurrence: equations left to right, L before R, node
    before its arguments."""
    for n, eq in enumerate(rhs, 1):
        yield from iter_term(eq.left, TermPath(n, "L"))
        yield from iter_term(eq.right, TermPath(n, "R"))


def resolve_path(rhs, path: TermPath) -> Term:
    if not 1 <= path.eq <= len(rhs):
        raise IndexError("equation %d out of range in %s" % (path.eq, path))
    eq = rhs[path.eq - 1]
    term = eq.left if path.side == "L" else eq.right
    for i in path.args:
        args = term_args(term)
        if not 1 <= i <= len(args):
            raise IndexError("argument %d out of range in %s" % (i, path))
        term = args[i - 1]
    return term


def replace_at(rhs, path: TermPath, new: Term) -> Tuple[Equation, ...]:
    resolve_path(rhs, path)

    def swap(term, args):
        if not args:
            return new
        i, rest = args[0], args[1:]
        children = list(term.args)
        children[i - 1] = swap(children[i - 1], rest)
        return _with_args(term, tuple(children))

    eqs = list(rhs)
    eq = eqs[path.eq - 1]
    if path.side == "L":
        eqs[path.eq - 1] = Equation(swap(eq.left, path.args), eq.right)
    else:
        eqs[path.eq - 1] = Equation(eq.left, swap(eq.right, path.args))
    return tuple(eqs)


def _with_args(term, args):
    if isinstance(term, Agent):
        return Agent(term.sym, args, term.attr)
    return Annotated(term.side, term.cast, args, term.attr)


def names_in(term: Term) -> Iterator[str]:
    if isinstance(term, Name):
        yield term.id
    else:
        for arg in term.args:
            yield from names_in(arg)


def agent_count(rhs) -> int:
    return sum(1 for _, t in iter_subterms(rhs) if not isinstance(t, Name))

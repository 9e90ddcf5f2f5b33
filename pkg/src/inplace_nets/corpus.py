"""The four example systems, net builders for them, and plain-Python oracles."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import List, Optional, Sequence

from .parser import parse_program
from .syntax import Agent, Equation, IntLit, Name, Net, Program

FILES = {
    "addition": "add.inet",
    "ackermann": "ackermann.inet",
    "insertion_sort": "isort.inet",
    "reverse": "reverse.inet",
}


def corpus_text(filename: str) -> str:
    return resources.files(__package__).joinpath("corpus").joinpath(filename).read_text("utf-8")


def corpus_path(filename: str):
    return resources.files(__package__).joinpath("corpus").joinpath(filename)


def _load(key) -> Program:
    return parse_program(corpus_text(FILES[key]))


def corpus_addition() -> Program:
    return _load("addition")


def corpus_ackermann() -> Program:
    return _load("ackermann")


def corpus_insertion_sort() -> Program:
    return _load("insertion_sort")


def corpus_reverse() -> Program:
    return _load("reverse")


# -- term builders -----------------------------------------------------------

def nat(n: int):
    term = Agent("Z")
    for _ in range(n):
        term = Agent("S", (term,))
    return term


def cons_list(values: Sequence[int]):
    term = Agent("Nil")
    for v in reversed(values):
        term = Agent("Cons", (term,), IntLit(v))
    return term


def _net(term) -> Net:
    return Net((term,), ("r",))


def addition_net(a: int, b: int) -> Net:
    return _net(Equation(Agent("Add", (nat(b), Name("r"))), nat(a)))


def ackermann_net(m: int, n: int) -> Net:
    return _net(Equation(Agent("A", (nat(n), Name("r"))), nat(m)))


def isort_net(values: Sequence[int]) -> Net:
    return _net(Equation(Agent("IS", (Name("r"),)), cons_list(values)))


def reverse_net(values: Sequence[int]) -> Net:
    return _net(Equation(Agent("Rev", (Agent("Nil"), Name("r"))), cons_list(values)))


def with_net(program: Program, net: Optional[Net]) -> Program:
    return Program(program.rules, net)


# -- decoding readbacks ------------------------------------------------------

def nat_value(term) -> int:
    n = 0
    while isinstance(term, Agent) and term.sym == "S":
        n += 1
        term = term.args[0]
    if not (isinstance(term, Agent) and term.sym == "Z"):
        raise ValueError("not a unary number: %r" % (term,))
    return n


def list_values(term) -> List[int]:
    out = []
    while isinstance(term, Agent) and term.sym == "Cons":
        out.append(term.attr.value)
        term = term.args[0]
    if not (isinstance(term, Agent) and term.sym == "Nil"):
        raise ValueError("not a list: %r" % (term,))
    return out


# -- oracles -----------------------------------------------------------------

@lru_cache(maxsize=None)
def ackermann(m: int, n: int) -> int:
    if m == 0:
        return n + 1
    if n == 0:
        return ackermann(m - 1, 1)
    return ackermann(m - 1, ackermann(m, n - 1))


@dataclass(frozen=True)
class CorpusEntry:
    path: str
    description: str
    expected_readback: str
    expected_interactions: Optional[int] = None
    expected_allocs: Optional[int] = None


ENTRIES = (
    CorpusEntry("add.inet", "add(S(Z), Z)", "r = S(Z)\n", 2, 0),
    CorpusEntry("ackermann.inet", "ack(1, 1)", "r = S(S(S(Z)))\n"),
    CorpusEntry("isort.inet", "insertion sort of 2,4,1,3",
                "r = Cons{1}(Cons{2}(Cons{3}(Cons{4}(Nil))))\n", None, 0),
    CorpusEntry("reverse.inet", "reverse of 1,2,3,4",
                "r = Cons{4}(Cons{3}(Cons{2}(Cons{1}(Nil))))\n", 5, 0),
)

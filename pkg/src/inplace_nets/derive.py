"""Node matching and automatic placement of *L / *R reuse annotations.

``match_score`` scores every subterm occurrence of a rule's right-hand side
against one side of the active pair: one point for the same symbol, plus one
point per argument position that keeps the same name.  ``select_annotations``
picks the best-scoring agent occurrence for each side.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple

from .syntax import (Agent, Annotated, Name, Program, Rule, Term, TermPath,
                     iter_subterms, replace_at, resolve_path)


class Score(NamedTuple):
    """(agent points, name points); tuples compare lexicographically."""

    agent: int
    names: int

    def __str__(self):
        return "(%d,%d)" % self


MatchResult = List[Tuple[Score, TermPath]]


def _symbol(term) -> Optional[str]:
    if isinstance(term, Agent):
        return term.sym
    return term.cast


def match_names(params, args) -> int:
    n = 0
    for param, arg in zip(params, args):
        if isinstance(arg, Name) and arg.id == param.id:
            n += 1
    return n


def match_term(pattern: Agent, term: Term, path: TermPath) -> MatchResult:
    if isinstance(term, Name):
        return [(Score(0, 0), path)]
    agent_pts = 1 if _symbol(term) == pattern.sym else 0
    out = [(Score(agent_pts, match_names(pattern.args, term.args)), path)]
    for i, arg in enumerate(term.args, 1):
        out += match_term(pattern, arg, path.child(i))
    return out


def match_score(pattern: Agent, rhs) -> MatchResult:
    out = []
    for n, eq in enumerate(rhs, 1):
        out += match_term(pattern, eq.left, TermPath(n, "L"))
        out += match_term(pattern, eq.right, TermPath(n, "R"))
    return out


def format_match(result: MatchResult) -> str:
    return "[%s]" % ", ".join("(%s,%s)" % (score, path) for score, path in result)


@dataclass(frozen=True)
class Placement:
    path: TermPath
    cast: Optional[str] = None
    score: Score = Score(0, 0)


@dataclass(frozen=True)
class AnnotationPlan:
    left: Optional[Placement] = None
    right: Optional[Placement] = None

    def __iter__(self):
        if self.left is not None:
            yield "L", self.left
        if self.right is not None:
            yield "R", self.right


def _ranked(rule: Rule, side: str):
    """Agent occurrences, best first; ties keep traversal order."""
    result = match_score(rule.pattern(side), rule.rhs)
    agents = {p for p, t in iter_subterms(rule.rhs) if not isinstance(t, Name)}
    cands = [(score, path) for score, path in result if path in agents]
    order = {path: i for i, (_, path) in enumerate(cands)}
    return sorted(cands, key=lambda c: (-c[0].agent, -c[0].names, order[c[1]]))


def select_annotations(rule: Rule) -> AnnotationPlan:
    ranked = {side: _ranked(rule, side) for side in "LR"}
    if not ranked["L"]:
        return AnnotationPlan()
    best_l, best_r = ranked["L"][0], ranked["R"][0]
    chosen = {"L": best_l, "R": best_r}
    if best_l[1] == best_r[1]:
        winner = "R" if best_r[0] > best_l[0] else "L"
        loser = "L" if winner == "R" else "R"
        rest = [c for c in ranked[loser] if c[1] != chosen[winner][1]]
        chosen[loser] = rest[0] if rest else None

    def place(side):
        if chosen[side] is None:
            return None
        score, path = chosen[side]
        sym = _symbol(resolve_path(rule.rhs, path))
        own = rule.pattern(side).sym
        return Placement(path, None if sym == own else sym, score)

    return AnnotationPlan(place("L"), place("R"))


class PlanError(ValueError):
    pass


def apply_plan(rule: Rule, plan: AnnotationPlan) -> Rule:
    rhs = rule.rhs
    for side, placement in plan:
        term = resolve_path(rhs, placement.path)
        if not isinstance(term, Agent):
            raise PlanError("%s does not address an unannotated agent in %s"
                            % (placement.path, rule.pair_name))
        cast = placement.cast
        if cast is None and term.sym != rule.pattern(side).sym:
            cast = term.sym
        rhs = replace_at(rhs, placement.path,
                         Annotated(side, cast, term.args, term.attr))
    return Rule(rule.left, rule.right, rhs, rule.guard, line=rule.line)


def derive_rule(rule: Rule) -> Rule:
    if rule.is_annotated():
        return rule
    return apply_plan(rule, select_annotations(rule))


def derive_program(program: Program) -> Program:
    return Program(tuple(derive_rule(r) for r in program.rules), program.net)


def strip_annotations(program: Program) -> Program:
    """Turn every annotated occurrence back into a plain agent (the no-reuse
    baseline)."""

    def plain(rule, term):
        if isinstance(term, Name):
            return term
        args = tuple(plain(rule, a) for a in term.args)
        if isinstance(term, Annotated):
            return Agent(term.cast or rule.pattern(term.side).sym, args, term.attr)
        return Agent(term.sym, args, term.attr)

    rules = []
    for r in program.rules:
        rhs = tuple(type(eq)(plain(r, eq.left), plain(r, eq.right)) for eq in r.rhs)
        rules.append(Rule(r.left, r.right, rhs, r.guard, line=r.line))
    return Program(tuple(rules), program.net)

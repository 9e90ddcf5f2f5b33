"""Static checks over parsed programs, and the rule case classification."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .parser import parse_program
from .syntax import (Annotated, AttrVar, IntLit, Name, Program, Rule, Symbol,
                     TermPath, agent_count, iter_subterms, iter_term)

DEFAULT_PORT_CAPACITY = 4


@dataclass(frozen=True)
class Diagnostic:
    message: str
    line: int = 0

    def __str__(self):
        return "line %d: %s" % (self.line, self.message) if self.line else self.message


class ValidationError(Exception):
    def __init__(self, errors: List[Diagnostic]):
        super().__init__("\n".join(str(e) for e in errors))
        self.errors = errors


@dataclass
class CheckedProgram:
    program: Program
    symbols: Dict[str, Symbol]
    port_capacity: int = DEFAULT_PORT_CAPACITY
    _table: Dict[frozenset, List[Rule]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for rule in self.program.rules:
            self._table.setdefault(frozenset(rule.pair), []).append(rule)

    @property
    def rules(self) -> Tuple[Rule, ...]:
        return self.program.rules

    @property
    def net(self):
        return self.program.net

    def rules_for(self, a: str, b: str) -> List[Rule]:
        """Rules for the unordered pair, in declaration order."""
        return self._table.get(frozenset((a, b)), [])


@dataclass(frozen=True)
class RuleCase:
    case: int
    rhs_agent_count: int

    @property
    def label(self) -> str:
        return "Case%d" % self.case


def classify_rule(rule: Rule) -> RuleCase:
    n = agent_count(rule.rhs)
    if n == 2:
        return RuleCase(1, n)
    return RuleCase(2 if n < 2 else 3, n)


def annotated_symbol(rule: Rule, term: Annotated) -> str:
    return term.cast or rule.pattern(term.side).sym


class _Checker:
    def __init__(self, program, port_capacity):
        self.program = program
        self.port_capacity = port_capacity
        self.errors: List[Diagnostic] = []
        self.symbols: Dict[str, Symbol] = {}
        self.seen_at: Dict[str, int] = {}

    def error(self, message, line):
        self.errors.append(Diagnostic(message, line))

    def declare(self, sym, arity, has_attr, line):
        prev = self.symbols.get(sym)
        attr_count = 1 if has_attr else 0
        if prev is None:
            self.symbols[sym] = Symbol(sym, arity, attr_count)
            self.seen_at[sym] = line
            if arity > self.port_capacity:
                self.error("symbol %s has arity %d, above port capacity %d"
                           % (sym, arity, self.port_capacity), line)
            return
        if prev.arity != arity:
            self.error("symbol %s used with arity %d, declared with arity %d (line %d)"
                       % (sym, arity, prev.arity, self.seen_at[sym]), line)
        if prev.attr_count != attr_count:
            self.error("symbol %s used %s an attribute, but first use (line %d) %s"
                       % (sym, "with" if has_attr else "without", self.seen_at[sym],
                          "had one" if prev.attr_count else "had none"), line)

    def run(self):
        for rule in self.program.rules:
            self.check_rule(rule)
        self.check_duplicates()
        if self.program.net is not None:
            self.check_net(self.program.net)

    def check_rule(self, rule: Rule):
        line = rule.line
        for pat in (rule.left, rule.right):
            self.declare(pat.sym, len(pat.args), pat.attr is not None, line)
        bound_attrs = set()
        for pat in (rule.left, rule.right):
            if pat.attr is not None:
                if pat.attr.id in bound_attrs:
                    self.error("attribute variable %s bound twice" % pat.attr.id, line)
                bound_attrs.add(pat.attr.id)

        counts = Counter(p.id for p in rule.left.args + rule.right.args)
        for name, n in counts.items():
            if n > 1:
                self.error("name %s repeated in the left-hand side" % name, line)

        sides = Counter()
        for path, term in iter_subterms(rule.rhs):
            if isinstance(term, Name):
                counts[term.id] += 1
                continue
            if isinstance(term, Annotated):
                sides[term.side] += 1
                sym = annotated_symbol(rule, term)
            else:
                sym = term.sym
            self.declare(sym, len(term.args), term.attr is not None, line)
            if isinstance(term.attr, AttrVar) and term.attr.id not in bound_attrs:
                self.error("attribute variable %s at %s is not bound by the left-hand side"
                           % (term.attr.id, path), line)
        for side, n in sides.items():
            if n > 1:
                self.error("annotation *%s used %d times" % (side, n), line)
        for name, n in sorted(counts.items()):
            if n != 2:
                self.error("name %s occurs %d time%s" % (name, n, "" if n == 1 else "s"), line)

        if rule.guard is not None:
            for operand in (rule.guard.left, rule.guard.right):
                if isinstance(operand, AttrVar) and operand.id not in bound_attrs:
                    self.error("guard variable %s is not bound by the left-hand side"
                               % operand.id, line)

    def check_duplicates(self):
        unguarded = {}
        for rule in self.program.rules:
            if rule.guard is not None:
                continue
            key = frozenset(rule.pair)
            if key in unguarded:
                self.error("duplicate rule for %s (first at line %d)"
                           % (rule.pair_name, unguarded[key].line), rule.line)
            else:
                unguarded[key] = rule

    def check_net(self, net):
        line = net.line
        counts = Counter()
        for eq in net.equations:
            for root in (eq.left, eq.right):
                for _, term in iter_term(root, TermPath(1, "L")):
                    if isinstance(term, Name):
                        counts[term.id] += 1
                    elif isinstance(term, Annotated):
                        self.error("annotations are only allowed in rule right-hand sides", line)
                    else:
                        self.declare(term.sym, len(term.args), term.attr is not None, line)
                        if isinstance(term.attr, AttrVar):
                            self.error("attribute variable %s in a net; nets take integer "
                                       "attributes" % term.attr.id, line)
        iface = Counter(net.interface)
        for name, n in iface.items():
            if n > 1:
                self.error("interface name %s listed %d times" % (name, n), line)
        # an interface name absent from the equations is a bare free port
        for name in net.interface:
            if counts[name] > 1:
                self.error("interface name %s occurs %d times in the net (expected 1)"
                           % (name, counts[name]), line)
        for name, n in sorted(counts.items()):
            if name not in iface and n != 2:
                self.error("name %s occurs %d time%s" % (name, n, "" if n == 1 else "s"), line)


def check(program: Program, port_capacity: int = DEFAULT_PORT_CAPACITY) -> List[Diagnostic]:
    checker = _Checker(program, port_capacity)
    checker.run()
    return checker.errors


def validate(program: Program, port_capacity: int = DEFAULT_PORT_CAPACITY) -> CheckedProgram:
    checker = _Checker(program, port_capacity)
    checker.run()
    if checker.errors:
        raise ValidationError(checker.errors)
    return CheckedProgram(program, checker.symbols, port_capacity)


def load_program(text: str, port_capacity: int = DEFAULT_PORT_CAPACITY) -> CheckedProgram:
    return validate(parse_program(text), port_capacity)


def lhs_port_of(rule: Rule) -> Dict[str, Tuple[str, int]]:
    """Map each left-hand-side parameter name to its (side, 1-based port)."""
    ports = {}
    for side in "LR":
        for i, param in enumerate(rule.pattern(side).args, 1):
            ports[param.id] = (side, i)
    return ports


def lhs_attr_of(rule: Rule) -> Dict[str, str]:
    return {pat.attr.id: side for side, pat in (("L", rule.left), ("R", rule.right))
            if pat.attr is not None}


def eval_attr(expr, env) -> Optional[int]:
    if isinstance(expr, IntLit):
        return expr.value
    return env[expr.id]


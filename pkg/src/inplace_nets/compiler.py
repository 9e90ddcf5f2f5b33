"""Compile annotated rules into cell-level build programs.

A compiled rule is a flat instruction list run against the two cells of an
active pair.  Annotated occurrences reuse those cells; every other RHS agent
gets a fresh cell.  Connections that a reused cell already holds at the right
port are left alone and counted as saved writes.

Operands print as ``L``/``R``/``c0`` for cells, ``r0`` for registers and
``c0.1`` for the (cell, port) endpoint, port 0 being the principal port.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

from .check import (DEFAULT_PORT_CAPACITY, CheckedProgram, annotated_symbol,
                    classify_rule, lhs_attr_of, lhs_port_of)
from .derive import derive_rule, strip_annotations
from .syntax import (Agent, Annotated, AttrVar, IntLit, Name, Program, Rule,
                     TermPath, agent_count, iter_subterms)


class CompileError(Exception):
    pass


@dataclass(frozen=True)
class Instr:
    op: str
    args: tuple = ()

    def __str__(self):
        return " ".join([self.op] + [_operand(a) for a in self.args])


def _operand(a) -> str:
    if isinstance(a, tuple):
        return "%s.%d" % a
    if isinstance(a, IntLit):
        return "#%d" % a.value
    return str(a)


@dataclass(frozen=True)
class CostReport:
    allocs: int = 0
    frees: int = 0
    reuses: int = 0
    portWrites: int = 0
    savedPortWrites: int = 0
    symbolWrites: int = 0

    def as_dict(self) -> Dict[str, int]:
        return dict(self.__dict__)


@dataclass(frozen=True)
class CompiledRule:
    rule: Rule
    instrs: Tuple[Instr, ...]
    cost: CostReport
    kept: FrozenSet[Tuple[str, int]] = frozenset()
    rhs_agents: int = 0

    def listing(self) -> str:
        return "".join(str(i) + "\n" for i in self.instrs)


def _cell_handles(rule: Rule) -> Dict[tuple, str]:
    """Give every RHS agent occurrence a cell: L, R or a fresh c<k>."""
    handles, fresh = {}, 0
    for path, term in iter_subterms(rule.rhs):
        if isinstance(term, Annotated):
            handles[path] = term.side
        elif isinstance(term, Agent):
            handles[path] = "c%d" % fresh
            fresh += 1
    return handles


def _wire_components(rule: Rule, handles) -> List[Tuple[tuple, tuple]]:
    """Trace every wire of the RHS to its two ends.

    An end is ``("pos", cell, port)`` for a port of an RHS cell (port 0 being
    the principal of an equation root) or ``("ext", side, port)`` for the
    outside connection captured from an active-pair port.  Names joined by a
    name-name equation belong to one wire.
    """
    occ: Dict[str, List[tuple]] = {}
    for name, where in lhs_port_of(rule).items():
        occ.setdefault(name, []).append(("ext",) + where)
    slot_links = []
    for n, eq in enumerate(rule.rhs, 1):
        pair = []
        for side, term, other in (("L", eq.left, eq.right), ("R", eq.right, eq.left)):
            if isinstance(term, Name):
                if isinstance(other, Name):
                    end = ("slot", n, side)
                    pair.append(end)
                else:
                    end = ("pos", handles[TermPath(n, "R" if side == "L" else "L")], 0)
                occ.setdefault(term.id, []).append(end)
        if len(pair) == 2:
            slot_links.append(tuple(pair))
    for path, term in iter_subterms(rule.rhs):
        if isinstance(term, Name):
            continue
        for i, arg in enumerate(term.args, 1):
            if isinstance(arg, Name):
                occ.setdefault(arg.id, []).append(("pos", handles[path], i))

    adj: Dict[tuple, List[tuple]] = {}

    def join(a, b):
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)

    for name, ends in occ.items():
        if len(ends) != 2:
            raise CompileError("name %s occurs %d times in %s" % (name, len(ends), rule.pair_name))
        join(*ends)
    for a, b in slot_links:
        join(a, b)

    wires, seen = [], set()
    for start in sorted(adj, key=_end_order):
        if start[0] == "slot" or start in seen:
            continue
        prev, cur = None, start
        seen.add(start)
        while True:
            nxt = [e for e in adj[cur] if e != prev] if prev is not None else adj[cur]
            prev, cur = cur, nxt[0]
            if cur[0] != "slot":
                break
            seen.add(cur)
        seen.add(cur)
        wires.append((start, cur))
    return wires


def _end_order(end):
    kind_rank = {"pos": 0, "ext": 1, "slot": 2}
    return (kind_rank[end[0]],) + tuple(str(x) for x in end[1:])


def compile_rule(rule: Rule, port_capacity: int = DEFAULT_PORT_CAPACITY) -> CompiledRule:
    """Compile ``rule`` (annotated or not) into an instruction sequence."""
    handles = _cell_handles(rule)
    terms = dict(iter_subterms(rule.rhs))
    sym_of: Dict[str, str] = {}
    attr_of: Dict[str, Optional[object]] = {}
    arity_of: Dict[str, int] = {}
    for path, cell in handles.items():
        term = terms[path]
        if isinstance(term, Name) or len(term.args) > port_capacity:
            raise CompileError("%s at %s exceeds port capacity %d"
                               % (rule.pair_name, path, port_capacity))
        sym_of[cell] = annotated_symbol(rule, term) if isinstance(term, Annotated) else term.sym
        attr_of[cell] = term.attr
        arity_of[cell] = len(term.args)
    for side in "LR":
        if len(rule.pattern(side).args) > port_capacity:
            raise CompileError("%s exceeds port capacity %d" % (rule.pattern(side).sym, port_capacity))

    regs: Dict[tuple, str] = {}
    loads, attr_loads, frees, reuses, allocs = [], [], [], [], []
    setattrs, setports, connects, pusheqs = [], [], [], []
    kept = set()
    saved = 0

    def reg_for(side, port):
        key = ("port", side, port)
        if key not in regs:
            regs[key] = "r%d" % len(regs)
            loads.append(Instr("LOADPORT", (regs[key], side, port)))
        return regs[key]

    for start, end in _wire_components(rule, handles):
        a, b = sorted((start, end), key=_end_order)
        if a[0] == "pos" and b[0] == "pos":
            if a[2] == 0 and b[2] == 0:
                pusheqs.append(Instr("PUSHEQ", ((a[1], 0), (b[1], 0))))
            else:
                src, dst = (a, b) if a[2] != 0 else (b, a)
                setports.append(Instr("SETPORT", (src[1], src[2], (dst[1], dst[2]))))
        elif a[0] == "pos":
            cell, port = a[1], a[2]
            if port and cell == b[1] and port == b[2]:
                kept.add((cell, port))
                saved += 1
            elif port:
                connects.append(Instr("CONNECT", (cell, port, reg_for(b[1], b[2]))))
            else:
                pusheqs.append(Instr("PUSHEQ", ((cell, 0), reg_for(b[1], b[2]))))
        else:
            pusheqs.append(Instr("PUSHEQ", (reg_for(a[1], a[2]), reg_for(b[1], b[2]))))

    # tree edges: parent aux port -> child principal
    for path, term in iter_subterms(rule.rhs):
        if isinstance(term, Name):
            continue
        for i, arg in enumerate(term.args, 1):
            if not isinstance(arg, Name):
                setports.append(Instr("SETPORT", (handles[path], i, (handles[path.child(i)], 0))))
    for n, eq in enumerate(rule.rhs, 1):
        if not isinstance(eq.left, Name) and not isinstance(eq.right, Name):
            pusheqs.append(Instr("PUSHEQ", ((handles[TermPath(n, "L")], 0),
                                            (handles[TermPath(n, "R")], 0))))

    attr_side = lhs_attr_of(rule)
    attr_regs: Dict[str, str] = {}

    def attr_operand(expr):
        if isinstance(expr, IntLit):
            return expr
        if expr.id not in attr_regs:
            attr_regs[expr.id] = "r%d" % (len(regs) + len(attr_regs))
            attr_loads.append(Instr("LOADATTR", (attr_regs[expr.id], attr_side[expr.id])))
        return attr_regs[expr.id]

    reused = {c for c in handles.values() if c in ("L", "R")}
    for cell in sorted(set(handles.values()), key=_cell_order):
        expr = attr_of[cell]
        if expr is None:
            continue
        own = rule.pattern(cell).attr if cell in reused else None
        if isinstance(expr, AttrVar) and own is not None and own.id == expr.id:
            saved += 1
            continue
        setattrs.append(Instr("SETATTR", (cell, attr_operand(expr))))

    symbol_writes = 0
    for side in "LR":
        if side in reused:
            reuses.append(Instr("REUSE", (side, sym_of[side])))
            if sym_of[side] != rule.pattern(side).sym:
                symbol_writes += 1
        else:
            frees.append(Instr("FREE", (side,)))
    for cell in sorted(set(handles.values()) - reused, key=_cell_order):
        allocs.append(Instr("ALLOC", (cell, sym_of[cell])))

    instrs = tuple(loads + attr_loads + frees + reuses + allocs
                   + setattrs + setports + connects + pusheqs)
    cost = CostReport(
        allocs=len(allocs), frees=len(frees), reuses=len(reuses),
        portWrites=len(setports) + len(connects) + len(setattrs),
        savedPortWrites=saved, symbolWrites=symbol_writes)
    return CompiledRule(rule, instrs, cost, frozenset(kept), agent_count(rule.rhs))


def _cell_order(cell):
    return (0, cell) if cell in ("L", "R") else (1, int(cell[1:]))


# -- whole programs ----------------------------------------------------------

ANNOTATION_MODES = ("manual", "derived", "none")


def prepare_rules(program: Program, annotations: str = "derived") -> Program:
    """Apply an annotation mode: keep what is written, derive the missing
    annotations, or drop all of them."""
    if annotations == "derived":
        return Program(tuple(derive_rule(r) for r in program.rules), program.net)
    if annotations == "none":
        return strip_annotations(program)
    if annotations == "manual":
        return program
    raise ValueError("unknown annotation mode %r" % annotations)


@dataclass
class CompiledProgram:
    checked: CheckedProgram
    rules: List[CompiledRule]
    _table: Dict[frozenset, List[CompiledRule]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for cr in self.rules:
            self._table.setdefault(frozenset(cr.rule.pair), []).append(cr)

    @property
    def symbols(self):
        return self.checked.symbols

    @property
    def port_capacity(self):
        return self.checked.port_capacity

    @property
    def net(self):
        return self.checked.net

    def rules_for(self, a: str, b: str) -> List[CompiledRule]:
        return self._table.get(frozenset((a, b)), [])


def compile_program(checked: CheckedProgram, annotations: str = "derived") -> CompiledProgram:
    program = prepare_rules(checked.program, annotations)
    cap = checked.port_capacity
    compiled = [compile_rule(r, cap) for r in program.rules]
    checked = CheckedProgram(program, checked.symbols, cap)
    return CompiledProgram(checked, compiled)


@dataclass(frozen=True)
class CostRow:
    pair: str
    case: str
    rhs_agents: int
    cost: CostReport


def estimate_program(program: Program, port_capacity: int = DEFAULT_PORT_CAPACITY):
    """Per-rule cost rows plus a totals report, in declaration order."""
    rows = []
    for rule in program.rules:
        cr = compile_rule(rule, port_capacity)
        rows.append(CostRow(rule.pair_name, classify_rule(rule).label, cr.rhs_agents, cr.cost))
    totals = Counter()
    for row in rows:
        totals.update(row.cost.as_dict())
    return rows, CostReport(**{k: totals[k] for k in CostReport().as_dict()})

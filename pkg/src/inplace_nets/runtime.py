"""Runtime: fixed-size cells, an equation stack and an interface.

Every cell has ``port_capacity + 1`` slots.  For an agent, slot 0 holds what
its principal port is attached to (``None`` while it sits in an equation) and
slots ``1..arity`` hold its auxiliary connections.  A variable cell keeps its
binding in slot 0.  Connections are ``(cell, port)`` endpoints; a variable is
addressed as ``(cell, 0)``.

Agent-agent and agent-port connections are mutual.  Variables are not: up to
two places refer to a variable cell, and the cell points at its binding.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field, fields
from typing import Callable, Dict, List, Optional, TextIO, Tuple

from .check import eval_attr
from .compiler import CompiledProgram, CompiledRule
from .syntax import Agent, Equation, IntLit, Name, Net

AGENT, VAR, FREE = "agent", "var", "free"

Endpoint = Tuple[int, int]


class Cell:
    __slots__ = ("kind", "sym", "attr", "ports", "name")

    def __init__(self, capacity):
        self.kind = FREE
        self.sym = None
        self.attr = None
        self.name = None
        self.ports: List[Optional[Endpoint]] = [None] * (capacity + 1)

    def reset(self, kind, sym=None, name=None):
        self.kind, self.sym, self.name, self.attr = kind, sym, name, None
        for i in range(len(self.ports)):
            self.ports[i] = None

    def __repr__(self):
        return "Cell(%s %s %r)" % (self.kind, self.sym or self.name, self.ports)


@dataclass
class Stats:
    interactions: int = 0
    agentAllocs: int = 0
    agentFrees: int = 0
    agentReuses: int = 0
    varAllocs: int = 0
    varFrees: int = 0
    portWrites: int = 0
    savedPortWrites: int = 0
    peakLiveAgents: int = 0

    def as_dict(self) -> Dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def block(self) -> str:
        """Machine-readable ``key=value`` lines."""
        return "".join("%s=%d\n" % kv for kv in self.as_dict().items())

    def report(self) -> str:
        d = self.as_dict()
        return ("interactions %(interactions)d; agent cells: %(agentAllocs)d allocated, "
                "%(agentFrees)d freed, %(agentReuses)d reused; variable cells: "
                "%(varAllocs)d allocated, %(varFrees)d freed; port writes %(portWrites)d "
                "(%(savedPortWrites)d saved); peak live agents %(peakLiveAgents)d" % d)


class Store:
    """Cells plus a free list.  ``high_water`` is the number of cells ever
    created, i.e. the memory footprint."""

    def __init__(self, capacity):
        self.capacity = capacity
        self.cells: List[Cell] = []
        self.free: List[int] = []
        self.live_agents = 0

    @property
    def high_water(self) -> int:
        return len(self.cells)

    def take(self, kind, sym=None, name=None) -> int:
        if self.free:
            idx = self.free.pop()
        else:
            idx = len(self.cells)
            self.cells.append(Cell(self.capacity))
        self.cells[idx].reset(kind, sym, name)
        if kind == AGENT:
            self.live_agents += 1
        return idx

    def release(self, idx):
        cell = self.cells[idx]
        if cell.kind == AGENT:
            self.live_agents -= 1
        cell.reset(FREE)
        self.free.append(idx)

    def live(self, kind=AGENT):
        return [i for i, c in enumerate(self.cells) if c.kind == kind]


@dataclass
class RuntimeState:
    program: CompiledProgram
    store: Store
    stack: List[Tuple[Endpoint, Endpoint]] = field(default_factory=list)
    interface: List[Tuple[str, int]] = field(default_factory=list)
    blocked: List[Tuple[Endpoint, Endpoint]] = field(default_factory=list)
    stats: Stats = field(default_factory=Stats)
    build_stats: Stats = field(default_factory=Stats)
    fired: Counter = field(default_factory=Counter)

    @property
    def live_agents(self) -> int:
        return self.store.live_agents

    def cell(self, idx) -> Cell:
        return self.store.cells[idx]

    def is_var(self, e: Endpoint) -> bool:
        return self.store.cells[e[0]].kind == VAR

    # -- wiring primitives

    def _write(self, e: Endpoint, target):
        cell = self.store.cells[e[0]]
        if cell.kind == AGENT:
            cell.ports[e[1]] = target

    def link(self, a: Endpoint, b: Endpoint):
        """Join two endpoints.  Two principal/variable endpoints form an
        equation; anything involving an auxiliary port is wired directly."""
        if a[1] == 0 and b[1] == 0:
            self._write(a, None)
            self._write(b, None)
            self.stack.append((a, b))
        else:
            self._write(a, b)
            self._write(b, a)

    def _note_live(self):
        if self.store.live_agents > self.stats.peakLiveAgents:
            self.stats.peakLiveAgents = self.store.live_agents


# -- construction ------------------------------------------------------------

def build_net(net: Net, program: CompiledProgram) -> RuntimeState:
    store = Store(program.port_capacity)
    state = RuntimeState(program, store)
    b = state.build_stats
    vars_: Dict[str, int] = {}

    def var(name):
        if name not in vars_:
            vars_[name] = store.take(VAR, name=name)
            b.varAllocs += 1
        return vars_[name]

    def build(term) -> Endpoint:
        if isinstance(term, Name):
            return (var(term.id), 0)
        if not isinstance(term, Agent):
            raise ValueError("annotated term %r in a net" % (term,))
        if len(term.args) > program.port_capacity:
            raise ValueError("%s has arity %d, above port capacity %d"
                             % (term.sym, len(term.args), program.port_capacity))
        idx = store.take(AGENT, term.sym)
        b.agentAllocs += 1
        cell = store.cells[idx]
        if term.attr is not None:
            cell.attr = term.attr.value
        for i, arg in enumerate(term.args, 1):
            state.link((idx, i), build(arg))
        return (idx, 0)

    for name in net.interface:
        state.interface.append((name, var(name)))
    for eq in net.equations:
        state.link(build(eq.left), build(eq.right))
    state.stats.peakLiveAgents = store.live_agents
    b.peakLiveAgents = store.live_agents
    return state


# -- execution of compiled rules ---------------------------------------------

@dataclass(frozen=True)
class _Pending:
    """Stand-in for a captured endpoint that is itself a port of the active
    pair; the real connection is made once both ends have been placed."""

    side: str
    port: int


def execute(state: RuntimeState, cr: CompiledRule, left: int, right: int):
    st = state.stats
    store = state.store
    cells = {"L": left, "R": right}
    regs = {}
    pending_edges = []
    active = {left: "L", right: "R"}
    self_wired = set()

    def endpoint(operand):
        if isinstance(operand, tuple):
            return (cells[operand[0]], operand[1])
        return regs[operand]

    def join(a, b):
        if isinstance(a, _Pending) or isinstance(b, _Pending):
            pending_edges.append((a, b))
        else:
            state.link(a, b)

    for ins in cr.instrs:
        op, args = ins.op, ins.args
        if op == "LOADPORT":
            reg, side, port = args
            peer = store.cells[cells[side]].ports[port]
            if peer[0] in active and peer[1] > 0 and store.cells[peer[0]].kind == AGENT:
                self_wired.add(frozenset(((side, port), (active[peer[0]], peer[1]))))
                regs[reg] = _Pending(side, port)
            else:
                regs[reg] = peer
        elif op == "LOADATTR":
            reg, side = args
            regs[reg] = store.cells[cells[side]].attr
        elif op == "FREE":
            store.release(cells[args[0]])
            st.agentFrees += 1
        elif op == "REUSE":
            side, sym = args
            cell = store.cells[cells[side]]
            cell.sym = sym
            cell.ports[0] = None
            st.agentReuses += 1
        elif op == "ALLOC":
            name, sym = args
            cells[name] = store.take(AGENT, sym)
            st.agentAllocs += 1
        elif op == "SETATTR":
            name, value = args
            store.cells[cells[name]].attr = value.value if isinstance(value, IntLit) else regs[value]
            st.portWrites += 1
        elif op == "SETPORT":
            name, port, target = args
            state.link((cells[name], port), endpoint(target))
            st.portWrites += 1
        elif op == "CONNECT":
            name, port, reg = args
            join((cells[name], port), regs[reg])
            st.portWrites += 1
        elif op == "PUSHEQ":
            join(endpoint(args[0]), endpoint(args[1]))
        else:
            raise ValueError("unknown instruction %s" % ins)

    # ports beyond the new arity of a reused cell are dead
    for side in "LR":
        cell = store.cells[cells[side]]
        if cell.kind == AGENT:
            arity = state.program.symbols[cell.sym].arity
            for i in range(arity + 1, len(cell.ports)):
                cell.ports[i] = None
    st.savedPortWrites += cr.cost.savedPortWrites
    if self_wired:
        _resolve_self_wires(state, cr, cells, self_wired, pending_edges)
    st.interactions += 1
    state._note_live()


def _resolve_self_wires(state, cr, cells, self_wired, pending_edges):
    adj = {}

    def join(a, b):
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)

    for wire in self_wired:
        a, b = sorted(wire)
        join(_Pending(*a), _Pending(*b))
    for a, b in pending_edges:
        join(a, b)
    for side, port in cr.kept:
        p = _Pending(side, port)
        if p in adj:
            join(p, (cells[side], port))
    done = set()
    for start in list(adj):
        if isinstance(start, _Pending) or start in done:
            continue
        prev, cur = None, start
        while True:
            nxt = [e for e in adj[cur] if e != prev] if prev is not None else adj[cur]
            prev, cur = cur, nxt[0]
            if not isinstance(cur, _Pending):
                break
        done.add(start)
        done.add(cur)
        state.link(start, cur)


# -- stepping ----------------------------------------------------------------

@dataclass(frozen=True)
class StepOutcome:
    kind: str                      # fired | indirection | blocked | done
    pair: Optional[str] = None

    def __str__(self):
        return self.kind if self.pair is None else "%s %s" % (self.kind, self.pair)


def _pop(state: RuntimeState, rng: Optional[random.Random]):
    if rng is None or len(state.stack) == 1:
        return state.stack.pop()
    i = rng.randrange(len(state.stack))
    state.stack[i], state.stack[-1] = state.stack[-1], state.stack[i]
    return state.stack.pop()


def step(state: RuntimeState, rng: Optional[random.Random] = None) -> StepOutcome:
    if not state.stack:
        return StepOutcome("done")
    a, b = _pop(state, rng)
    store = state.store
    if state.is_var(a) or state.is_var(b):
        if not state.is_var(a) or (state.is_var(b) and store.cells[b[0]].ports[0] is not None
                                   and store.cells[a[0]].ports[0] is None):
            a, b = b, a
        var = store.cells[a[0]]
        binding = var.ports[0]
        if binding is not None:
            store.release(a[0])
            state.stats.varFrees += 1
            state.link(binding, b)
        elif a == b:
            store.release(a[0])
            state.stats.varFrees += 1
        else:
            var.ports[0] = b
            other = store.cells[b[0]]
            if other.kind == AGENT:
                other.ports[0] = a
        return StepOutcome("indirection")

    ca, cb = store.cells[a[0]], store.cells[b[0]]
    for cr in state.program.rules_for(ca.sym, cb.sym):
        rule = cr.rule
        if rule.left.sym == ca.sym and rule.right.sym == cb.sym:
            left, right = a[0], b[0]
        else:
            left, right = b[0], a[0]
        if rule.guard is not None and not _guard_holds(state, rule, left, right):
            continue
        execute(state, cr, left, right)
        state.fired[cr] += 1
        return StepOutcome("fired", rule.pair_name)
    state.blocked.append((a, b))
    return StepOutcome("blocked", "%s><%s" % (ca.sym, cb.sym))


_COMPARE: Dict[str, Callable[[int, int], bool]] = {
    "<": lambda x, y: x < y, "<=": lambda x, y: x <= y,
    ">": lambda x, y: x > y, ">=": lambda x, y: x >= y,
    "==": lambda x, y: x == y, "!=": lambda x, y: x != y,
}


def _guard_holds(state, rule, left, right) -> bool:
    env = {}
    for pat, idx in ((rule.left, left), (rule.right, right)):
        if pat.attr is not None:
            env[pat.attr.id] = state.store.cells[idx].attr
    g = rule.guard
    return _COMPARE[g.op](eval_attr(g.left, env), eval_attr(g.right, env))


@dataclass
class RunResult:
    outcome: str                   # normal_form | blocked | step_limit
    stats: Stats
    steps: int


def reduce(state: RuntimeState, max_steps: Optional[int] = None,
           strategy: str = "stack", seed: Optional[int] = None,
           trace: Optional[TextIO] = None, debug: bool = False) -> RunResult:
    """Run ``step`` until the stack is empty or ``max_steps`` is reached.

    ``strategy="random"`` pops equations in a seeded random order instead of
    LIFO; the normal form and interaction count must not change.
    """
    if strategy not in ("stack", "random"):
        raise ValueError("unknown strategy %r" % strategy)
    if strategy == "random" and seed is None:
        raise ValueError("the random strategy needs a seed")
    rng = random.Random(seed) if strategy == "random" else None
    steps = 0
    while state.stack:
        if max_steps is not None and steps >= max_steps:
            return RunResult("step_limit", state.stats, steps)
        out = step(state, rng)
        steps += 1
        if trace is not None:
            trace.write("%d %s depth=%d live=%d\n"
                        % (steps, out, len(state.stack), state.live_agents))
        if debug:
            problems = check_integrity(state)
            if problems:
                raise AssertionError("after step %d (%s): %s" % (steps, out, "; ".join(problems)))
    return RunResult("blocked" if state.blocked else "normal_form", state.stats, steps)


# -- integrity ---------------------------------------------------------------

def check_integrity(state: RuntimeState) -> List[str]:
    """Every problem with mutual references, dangling endpoints or unused
    ports; empty when the state is consistent."""
    cells = state.store.cells
    problems = []

    def live(e):
        return e is not None and 0 <= e[0] < len(cells) and cells[e[0]].kind != FREE

    in_eq = set()
    for a, b in state.stack + state.blocked:
        for e in (a, b):
            if not live(e):
                problems.append("equation endpoint %r is dead" % (e,))
            elif e[1] != 0:
                problems.append("equation endpoint %r is an auxiliary port" % (e,))
            in_eq.add(e)
    for idx, cell in enumerate(cells):
        if cell.kind == VAR:
            t = cell.ports[0]
            if t is not None:
                if not live(t):
                    problems.append("var %s bound to dead %r" % (cell.name, t))
                elif cells[t[0]].kind == AGENT and cells[t[0]].ports[0] != (idx, 0):
                    problems.append("var %s binding not mutual" % cell.name)
            continue
        if cell.kind != AGENT:
            continue
        arity = state.program.symbols[cell.sym].arity
        for i, t in enumerate(cell.ports):
            if i > arity:
                if t is not None:
                    problems.append("cell %d port %d beyond arity is set" % (idx, i))
                continue
            if t is None:
                if i > 0:
                    problems.append("cell %d aux port %d is empty" % (idx, i))
                elif (idx, 0) not in in_eq:
                    problems.append("cell %d principal port is unattached" % idx)
                continue
            if not live(t):
                problems.append("cell %d port %d points at dead %r" % (idx, i, t))
                continue
            peer = cells[t[0]]
            if peer.kind == AGENT and peer.ports[t[1]] != (idx, i):
                problems.append("cell %d port %d -> %r is not mutual" % (idx, i, t))
            if peer.kind == VAR and i == 0 and peer.ports[0] != (idx, 0):
                problems.append("cell %d principal -> var %s is not mutual" % (idx, peer.name))
    return problems


# -- readback ----------------------------------------------------------------

@dataclass
class Readback:
    interface: List[Tuple[str, object]]
    equations: List[Equation]
    diagnostics: List[str] = field(default_factory=list)

    def render(self) -> str:
        from .parser import render
        lines = ["%s = %s" % (name, render(t)) for name, t in self.interface]
        lines += [render(eq) for eq in self.equations]
        lines += ["# %s" % d for d in self.diagnostics]
        return "".join(line + "\n" for line in lines)

    def to_net(self) -> Net:
        eqs = [Equation(Name(name), t) for name, t in self.interface]
        return Net(tuple(eqs + self.equations), tuple(n for n, _ in self.interface))


def readback(state: RuntimeState) -> Readback:
    cells = state.store.cells
    symbols = state.program.symbols
    wire_names: Dict[frozenset, str] = {}
    emitted = set()
    diagnostics = []

    def wire(a, b):
        key = frozenset((a, b))
        if key not in wire_names:
            wire_names[key] = "_w%d" % (len(wire_names) + 1)
        return Name(wire_names[key])

    def term(e, via=None):
        cell = cells[e[0]]
        if cell.kind == VAR:
            if cell.ports[0] is not None:
                return term(cell.ports[0])
            return Name(cell.name)
        if e[1] != 0:
            return wire(e, via)
        if e[0] in emitted:
            diagnostics.append("cycle through cell %d (%s)" % (e[0], cell.sym))
            return Name("_cycle%d" % e[0])
        emitted.add(e[0])
        args = []
        for i in range(1, symbols[cell.sym].arity + 1):
            args.append(term(cell.ports[i], via=(e[0], i)))
        attr = IntLit(cell.attr) if symbols[cell.sym].attr_count and cell.attr is not None else None
        return Agent(cell.sym, tuple(args), attr)

    iface = [(name, term((idx, 0))) for name, idx in state.interface]
    # an unbound interface variable reached from another entry is that entry
    bare = {t.id: name for name, t in iface if isinstance(t, Name) and t.id != name}
    iface = [(name, Name(bare[name]) if isinstance(t, Name) and t.id == name and name in bare
              else t) for name, t in iface]
    eqs = [Equation(term(a), term(b)) for a, b in state.stack + state.blocked]

    for idx, cell in enumerate(cells):
        if cell.kind != AGENT or idx in emitted:
            continue
        part = _component(cells, idx)
        emitted.update(part)
        diagnostics.append("disconnected cycle of %d agent%s (%s)"
                           % (len(part), "" if len(part) == 1 else "s",
                              ", ".join(sorted({cells[i].sym for i in part}))))
    return Readback(iface, eqs, diagnostics)


def _component(cells, start):
    """Agent cells reachable from ``start`` through ports and variables."""
    seen, todo, out = set(), [start], set()
    while todo:
        i = todo.pop()
        if i in seen:
            continue
        seen.add(i)
        if cells[i].kind == AGENT:
            out.add(i)
        for t in cells[i].ports:
            if t is not None:
                todo.append(t[0])
    return out

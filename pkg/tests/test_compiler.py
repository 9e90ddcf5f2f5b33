import operator
import random

import pytest

from inplace_nets import corpus
from inplace_nets.check import check, classify_rule, validate
from inplace_nets.compiler import (CompileError, compile_program, compile_rule,
                                   estimate_program, prepare_rules)
from inplace_nets.derive import derive_rule
from inplace_nets.parser import parse_program, render
from inplace_nets.runtime import VAR, build_net, check_integrity, step
from inplace_nets.syntax import (Agent, Equation, IntLit, Name, Net, Program, Symbol,
                                 agent_count)

from oracles import isomorphic, naive_rhs, state_graph, term_net_graph
from test_derive import random_rule


def rule(text):
    return parse_program(text).rules[0]


def cost(text, cap=4):
    return compile_rule(rule(text), cap).cost


def test_addition_costs():
    c = cost("Add(x1,x2) >< S(y1) => (*L)((*R)(x1),x2) ~ y1;")
    assert (c.allocs, c.frees, c.reuses, c.symbolWrites) == (0, 0, 2, 0)
    # x2 stays at port 2 of the reused Add cell
    assert c.savedPortWrites == 1
    c = cost("Add(x1,x2) >< Z => x1 ~ x2;")
    assert (c.allocs, c.frees, c.reuses) == (0, 2, 0)


def test_ackermann_a2_s_costs():
    c = cost("A2(x,r) >< S(y) => x ~ Dup((*R)A(y,w),Pred((*L)A(w,r)));")
    assert (c.allocs, c.frees, c.reuses, c.symbolWrites) == (2, 0, 2, 2)


def test_unannotated_rule_allocates_everything():
    c = cost("Add(x1,x2) >< S(y1) => Add(S(x1),x2) ~ y1;")
    assert (c.allocs, c.frees, c.reuses, c.savedPortWrites) == (2, 2, 0, 0)


def test_insertion_attribute_kept_in_place():
    c = cost("I{x}(r) >< Cons{y}(t) | x > y => r ~ (*R)Cons{y}((*L)(w)), w ~ t;")
    assert c.allocs == 0 and c.savedPortWrites >= 1


def test_listing_is_ordered():
    cr = compile_rule(rule("A2(x,r) >< S(y) => x ~ Dup((*R)A(y,w),Pred((*L)A(w,r)));"))
    ops = [i.op for i in cr.instrs]
    order = ["LOADPORT", "LOADATTR", "FREE", "REUSE", "ALLOC", "SETATTR", "SETPORT",
             "CONNECT", "PUSHEQ"]
    assert ops == sorted(ops, key=order.index)
    assert "REUSE L A" in cr.listing() and "REUSE R A" in cr.listing()


def test_port_capacity_enforced():
    with pytest.raises(CompileError):
        compile_rule(rule("A(x) >< B => x ~ T(Z,Z,Z);"), port_capacity=2)


def all_rules():
    for key in sorted(corpus.FILES):
        prog = getattr(corpus, "corpus_" + key)()
        for mode in ("derived", "none"):
            yield from prepare_rules(prog, mode).rules


@pytest.mark.parametrize("r", list(all_rules()), ids=lambda r: r.pair_name)
def test_cost_identities(r):
    c = compile_rule(r).cost
    k = agent_count(r.rhs)
    assert c.allocs == k - c.reuses
    assert c.frees == 2 - c.reuses


def test_in_place_certificate():
    for key in sorted(corpus.FILES):
        prog = prepare_rules(getattr(corpus, "corpus_" + key)(), "derived")
        for r in prog.rules:
            in_place = classify_rule(r).label in ("Case1", "Case2")
            assert in_place == (compile_rule(r).cost.allocs == 0), r.pair_name


def test_estimate_totals():
    rows, total = estimate_program(prepare_rules(corpus.corpus_ackermann()))
    assert [r.pair for r in rows][:2] == ["A><Z", "A><S"]
    assert total.allocs == sum(r.cost.allocs for r in rows) == 5


# -- semantic equivalence against naive instantiation ------------------------

OPS = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge,
       "==": operator.eq, "!=": operator.ne}


def _attr_value(expr, env):
    return expr.value if isinstance(expr, IntLit) else env[expr.id]


def expected_rule(rules, left, right):
    """First rule in declaration order whose pattern and guard fit."""
    for r in rules:
        if (r.left.sym, r.right.sym) == (left.sym, right.sym):
            l, rr = left, right
        elif (r.left.sym, r.right.sym) == (right.sym, left.sym):
            l, rr = right, left
        else:
            continue
        env = {}
        for pat, actual in ((r.left, l), (r.right, rr)):
            if pat.attr is not None:
                env[pat.attr.id] = actual.attr.value
        g = r.guard
        if g is None or OPS[g.op](_attr_value(g.left, env), _attr_value(g.right, env)):
            return r, l, rr
    return None


def random_context(rng, symbols, pattern, iface, shared):
    """Fill the pattern's ports with closed terms, interface names or
    names shared with another port of the pair."""

    def closed(depth):
        if depth > 2 or rng.random() < 0.3:
            if rng.random() < 0.5:
                iface.append("i%d" % len(iface))
                return Name(iface[-1])
            nullary = [s for s in symbols.values() if s.arity == 0]
            s = rng.choice(nullary)
        else:
            s = rng.choice(list(symbols.values()))
        return Agent(s.name, tuple(closed(depth + 1) for _ in range(s.arity)),
                     IntLit(rng.randint(0, 9)) if s.attr_count else None)

    args = []
    for _ in pattern.args:
        roll = rng.random()
        if roll < 0.25:
            shared.append(len(shared))
            args.append(Name("s%d" % (len(shared) - 1)))
        else:
            args.append(closed(0))
    attr = IntLit(rng.randint(0, 9)) if pattern.attr is not None else None
    return Agent(pattern.sym, tuple(args), attr)


def _pair_shared_names(left, right, rng):
    """Shared placeholder names must occur exactly twice: pair them up."""
    slots = [(side, i) for side, t in (("L", left), ("R", right))
             for i, a in enumerate(t.args) if isinstance(a, Name) and a.id.startswith("s")]
    rng.shuffle(slots)
    if len(slots) % 2:
        slots.pop()
    args = {"L": list(left.args), "R": list(right.args)}
    for n in range(0, len(slots), 2):
        for side, i in slots[n:n + 2]:
            args[side][i] = Name("w%d" % n)
    for side in "LR":
        for i, a in enumerate(args[side]):
            if isinstance(a, Name) and a.id.startswith("s"):
                args[side][i] = Agent("Zc")
    return (Agent(left.sym, tuple(args["L"]), left.attr),
            Agent(right.sym, tuple(args["R"]), right.attr))


def splice_variables(state):
    """Replace unbound two-ended wire variables by direct port links, the
    shape a net has after earlier interactions wired aux ports together."""
    cells = state.store.cells
    refs = {}
    for idx, cell in enumerate(cells):
        if cell.kind != "agent":
            continue
        for i, t in enumerate(cell.ports):
            if i and t is not None and cells[t[0]].kind == VAR:
                refs.setdefault(t[0], []).append((idx, i))
    iface = {idx for _, idx in state.interface}
    for var, ends in refs.items():
        if var in iface or len(ends) != 2 or cells[var].ports[0] is not None:
            continue
        a, b = ends
        state.link(a, b)
        state.store.release(var)


def run_one(program_rules, seed, mode):
    rng = random.Random(seed)
    checked = validate(Program(program_rules))
    symbols = dict(checked.symbols)
    symbols["Zc"] = Symbol("Zc", 0)
    r = rng.choice(program_rules)
    iface, shared = [], []
    left = random_context(rng, symbols, r.left, iface, shared)
    right = random_context(rng, symbols, r.right, iface, shared)
    left, right = _pair_shared_names(left, right, rng)
    eq = Equation(left, right) if rng.random() < 0.5 else Equation(right, left)
    net = Net((eq,), tuple(iface))

    prog_text = render(Program(program_rules, net)) + "\nZc >< Zc => ;\n"
    full = validate(parse_program(prog_text))
    compiled = compile_program(full, mode)
    state = build_net(full.net, compiled)
    if rng.random() < 0.7:
        splice_variables(state)
    assert check_integrity(state) == []
    out = step(state)
    assert out.kind == "fired"
    assert check_integrity(state) == []

    plain = prepare_rules(Program(program_rules), "none").rules
    chosen = expected_rule(plain, eq.left, eq.right)
    expected = naive_rhs(chosen[0], chosen[1], chosen[2], "_n")
    assert isomorphic(state_graph(state), term_net_graph(expected, iface)), (
        render(chosen[0]), render(eq))


CORPUS_RULES = [getattr(corpus, "corpus_" + k)().rules for k in sorted(corpus.FILES)]


@pytest.mark.parametrize("mode", ["derived", "none", "manual"])
@pytest.mark.parametrize("which", range(len(CORPUS_RULES)))
@pytest.mark.parametrize("seed", range(40))
def test_compiled_step_equals_naive_instantiation_corpus(which, seed, mode):
    run_one(CORPUS_RULES[which], seed * 7 + which, mode)


def valid_random_rule(seed):
    rng = random.Random(seed)
    while True:
        r = random_rule(rng)
        if not check(Program((r,))):
            return r


@pytest.mark.parametrize("seed", range(300))
def test_compiled_step_equals_naive_instantiation_random_rules(seed):
    r = valid_random_rule(seed)
    run_one((r,), seed, "derived")

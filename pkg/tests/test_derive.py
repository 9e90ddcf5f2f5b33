import random

import pytest

from inplace_nets import corpus
from inplace_nets.derive import (PlanError, Placement, AnnotationPlan, apply_plan, derive_rule,
                                 format_match, match_score, select_annotations)
from inplace_nets.parser import parse_equations, parse_program, parse_term, render
from inplace_nets.syntax import Name, TermPath

from oracles import brute_match, brute_score, occurrences

ADD_RHS = parse_equations("Add(S(x1),x2) ~ y1")
A2_RHS = parse_equations("x ~ Dup(A(y,w),Pred(A(w,r)))")

GOLDEN = [
    ("Add(x1,x2)", ADD_RHS,
     "[((1,1),1L:), ((0,1),1L:1), ((0,0),1L:11), ((0,0),1L:2), ((0,0),1R:)]"),
    ("S(y1)", ADD_RHS,
     "[((0,0),1L:), ((1,0),1L:1), ((0,0),1L:11), ((0,0),1L:2), ((0,0),1R:)]"),
    ("A2(x,r)", A2_RHS,
     "[((0,0),1L:), ((0,0),1R:), ((0,0),1R:1), ((0,0),1R:11), ((0,0),1R:12), "
     "((0,0),1R:2), ((0,1),1R:21), ((0,0),1R:211), ((0,0),1R:212)]"),
    ("S(y)", A2_RHS,
     "[((0,0),1L:), ((0,0),1R:), ((0,1),1R:1), ((0,0),1R:11), ((0,0),1R:12), "
     "((0,0),1R:2), ((0,0),1R:21), ((0,0),1R:211), ((0,0),1R:212)]"),
]


@pytest.mark.parametrize("pattern, rhs, expected", GOLDEN)
def test_match_golden(pattern, rhs, expected):
    assert format_match(match_score(parse_term(pattern), rhs)) == expected


def rule(text):
    return parse_program(text).rules[0]


def test_addition_placement():
    r = derive_rule(rule("Add(x1,x2) >< S(y1) => Add(S(x1),x2) ~ y1;"))
    assert render(r) == "Add(x1,x2) >< S(y1) => (*L)((*R)(x1),x2) ~ y1;"


def test_ackermann_placement():
    r = derive_rule(rule("A2(x,r) >< S(y) => x ~ Dup(A(y,w),Pred(A(w,r)));"))
    assert render(r) == "A2(x,r) >< S(y) => x ~ Dup((*R)A(y,w),Pred((*L)A(w,r)));"
    plan = select_annotations(rule("A2(x,r) >< S(y) => x ~ Dup(A(y,w),Pred(A(w,r)));"))
    assert str(plan.left.path) == "1R:21" and plan.left.cast == "A"
    assert str(plan.right.path) == "1R:1" and plan.right.cast == "A"


@pytest.mark.parametrize("text", ["Add(x1,x2) >< Z => x1 ~ x2;", "Pred(z) >< S(x) => z ~ x;"])
def test_empty_plan_without_rhs_agents(text):
    assert list(select_annotations(rule(text))) == []
    assert derive_rule(rule(text)) == rule(text)


def test_single_agent_goes_to_left_on_tie():
    plan = select_annotations(rule("A(x) >< B => x ~ C;"))
    assert plan.left is not None and plan.right is None


def test_single_agent_goes_to_strictly_better_side():
    plan = select_annotations(rule("A(x) >< B(y) => x ~ C(y);"))
    assert plan.left is None and plan.right.cast == "C"


def test_conflict_goes_to_strictly_higher_score():
    # R matches S(y) with (1,1); L only gets (0,0) there, so R wins it
    plan = select_annotations(rule("A(x) >< S(y) => x ~ S(y), Z ~ Q;"))
    assert str(plan.right.path) == "1R:"
    assert str(plan.left.path) == "2L:"


def test_annotated_rule_left_alone():
    r = rule("Add(x1,x2) >< S(y1) => (*R)Add((*L)S(x1),x2) ~ y1;")
    assert derive_rule(r) is r


def test_apply_plan_rejects_names():
    r = rule("A(x) >< B => x ~ C;")
    with pytest.raises(PlanError):
        apply_plan(r, AnnotationPlan(Placement(TermPath(1, "L"))))


def test_derivation_is_idempotent_and_deterministic(corpus_program):
    for r in corpus_program.rules:
        once = derive_rule(r)
        assert derive_rule(once) == once
        assert derive_rule(r) == once


def test_match_agrees_with_brute_force(corpus_program):
    for r in corpus_program.rules:
        for side in "LR":
            got = [(tuple(s), str(p)) for s, p in match_score(r.pattern(side), r.rhs)]
            assert got == brute_match(r.pattern(side), r.rhs)


def expected_plan(r):
    """Reference selection: best agent occurrence per side, earliest on
    ties; a contested occurrence goes to the strictly better side, else L."""
    agents = [(p, t) for p, t in occurrences(r.rhs) if not isinstance(t, Name)]
    if not agents:
        return None, None

    def best(side, excluded=None):
        cands = [(brute_score(r.pattern(side), t), -i, p)
                 for i, (p, t) in enumerate(agents) if p != excluded]
        return max(cands)[2] if cands else None

    left, right = best("L"), best("R")
    if left == right:
        score = {p: (brute_score(r.left, t), brute_score(r.right, t)) for p, t in agents}
        if score[left][1] > score[left][0]:
            left = best("L", excluded=right)
        else:
            right = best("R", excluded=left)
    return left, right


def check_plan(r):
    plan = select_annotations(r)
    left, right = expected_plan(r)
    got_l = str(plan.left.path) if plan.left else None
    got_r = str(plan.right.path) if plan.right else None
    assert (got_l, got_r) == (left, right), render(r)


def test_selection_matches_reference_on_corpus(corpus_program):
    for r in corpus_program.rules:
        check_plan(r)


def random_rule(rng):
    syms = [("A", 2), ("B", 1), ("C", 0), ("D", 3)]
    left_sym, la = rng.choice(syms[:2] + syms[3:])
    right_sym, ra = rng.choice(syms)
    left = ["x%d" % i for i in range(la)]
    right = ["y%d" % i for i in range(ra)]
    pool = left + right + ["w%d" % i for i in range(rng.randint(0, 2))] * 2
    rng.shuffle(pool)

    def term(depth):
        if pool and (depth > 2 or rng.random() < 0.35):
            return pool.pop()
        if depth > 2:
            return "C"
        sym, arity = rng.choice(syms)
        return "%s(%s)" % (sym, ",".join(term(depth + 1) for _ in range(arity))) if arity else sym

    eqs = []
    while pool or not eqs:
        eqs.append("%s ~ %s" % (term(0), term(0)))
        if len(eqs) > 4:
            break
    lhs = "%s%s >< %s%s" % (left_sym, "(%s)" % ",".join(left) if left else "",
                           right_sym, "(%s)" % ",".join(right) if right else "")
    return rule("%s => %s;" % (lhs, ", ".join(eqs)))


@pytest.mark.parametrize("seed", range(300))
def test_selection_matches_reference_on_random_rules(seed):
    check_plan(random_rule(random.Random(seed)))

"""Interaction nets on fixed-size cells, with automatic node-reuse annotations."""

from .check import (CheckedProgram, Diagnostic, RuleCase, ValidationError, check,
                    classify_rule, load_program, validate)
from .compiler import (CompiledProgram, CompiledRule, CostReport, compile_program,
                       compile_rule, estimate_program)
from .derive import (AnnotationPlan, Placement, Score, apply_plan, derive_program,
                     match_score, select_annotations)
from .parser import ParseError, parse_program, render
from .runtime import (RuntimeState, Stats, StepOutcome, build_net, readback, reduce,
                      step)
from .syntax import (Agent, Annotated, AttrVar, Equation, Guard, IntLit, Name, Net,
                     Program, Rule, Symbol, TermPath, iter_subterms, resolve_path)

__version__ = "0.1.0"


def run_text(text, annotations="derived", port_capacity=4, **reduce_kw):
    """Load a program with a net, reduce it, and return ``(state, result)``."""
    checked = load_program(text, port_capacity)
    if checked.net is None:
        raise ValueError("no net declared")
    state = build_net(checked.net, compile_program(checked, annotations))
    return state, reduce(state, **reduce_kw)

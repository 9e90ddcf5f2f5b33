"""Command line: ``inet {run,derive,check,cost} FILE``."""

from __future__ import annotations

import argparse
import sys

from .check import DEFAULT_PORT_CAPACITY, ValidationError, check, validate
from .compiler import ANNOTATION_MODES, compile_program, estimate_program, prepare_rules
from .parser import ParseError, parse_program, render
from .runtime import build_net, readback, reduce

EXIT_OK, EXIT_LOAD, EXIT_BLOCKED, EXIT_LIMIT = 0, 1, 2, 3
CLI_MAX_STEPS = 10 ** 8


class LoadError(Exception):
    pass


def _strategy(text):
    if text == "stack":
        return ("stack", None)
    kind, sep, seed = text.partition(":")
    if kind == "random" and sep and seed.lstrip("-").isdigit():
        return ("random", int(seed))
    raise argparse.ArgumentTypeError("expected 'stack' or 'random:<seed>', got %r" % text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="inet", description="Interaction nets with in-place rule compilation.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, annotations_default="derived"):
        p.add_argument("input", help=".inet source file")
        p.add_argument("--port-capacity", type=int, default=DEFAULT_PORT_CAPACITY,
                       help="auxiliary ports per cell (default %(default)s)")
        p.add_argument("--annotations", choices=ANNOTATION_MODES, default=annotations_default,
                       help="use written annotations, derive missing ones, or disable reuse")

    run = sub.add_parser("run", help="reduce the declared net and print its readback")
    common(run)
    run.add_argument("--stats", action="store_true", help="print counters")
    run.add_argument("--trace", action="store_true", help="print one line per step to stderr")
    run.add_argument("--strategy", type=_strategy, default=("stack", None),
                     help="'stack' (default) or 'random:<seed>'")
    run.add_argument("--max-steps", type=int, default=CLI_MAX_STEPS)

    derive = sub.add_parser("derive", help="print the program with reuse annotations added")
    common(derive)
    derive.add_argument("-o", dest="output", help="write to FILE instead of stdout")

    chk = sub.add_parser("check", help="validate a program")
    common(chk)

    cost = sub.add_parser("cost", help="per-rule allocation and write costs")
    common(cost)
    return ap


def _read(path):
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise LoadError("%s: %s" % (path, e.strerror))


def _parse(path):
    try:
        return parse_program(_read(path))
    except ParseError as e:
        raise LoadError("%s:%d:%d: %s" % (path, e.line, e.col, e.message))


def _load(path, port_capacity):
    program = _parse(path)
    try:
        return validate(program, port_capacity)
    except ValidationError as e:
        raise LoadError("\n".join("%s:%d: %s" % (path, d.line, d.message) for d in e.errors))


def cmd_run(args, out, err) -> int:
    checked = _load(args.input, args.port_capacity)
    if checked.net is None:
        raise LoadError("%s: no net declared" % args.input)
    compiled = compile_program(checked, args.annotations)
    state = build_net(checked.net, compiled)
    strategy, seed = args.strategy
    result = reduce(state, max_steps=args.max_steps, strategy=strategy, seed=seed,
                    trace=err if args.trace else None)
    out.write(readback(state).render())
    if args.stats:
        out.write("# build: %d agent cells, %d variable cells\n"
                  % (state.build_stats.agentAllocs, state.build_stats.varAllocs))
        out.write("# %s\n" % result.stats.report())
        out.write(result.stats.block())
    if result.outcome == "blocked":
        err.write("blocked: no rule applies to %d pair(s)\n" % len(state.blocked))
        return EXIT_BLOCKED
    if result.outcome == "step_limit":
        err.write("stopped after %d steps\n" % result.steps)
        return EXIT_LIMIT
    return EXIT_OK


def cmd_derive(args, out, err) -> int:
    checked = _load(args.input, args.port_capacity)
    text = render(prepare_rules(checked.program, args.annotations))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_check(args, out, err) -> int:
    program = _parse(args.input)
    problems = check(program, args.port_capacity)
    for d in problems:
        out.write("%s:%d: %s\n" % (args.input, d.line, d.message))
    if problems:
        return EXIT_LOAD
    out.write("%s: ok (%d rules%s)\n" % (args.input, len(program.rules),
                                         ", net" if program.net else ""))
    return EXIT_OK


def cmd_cost(args, out, err) -> int:
    checked = _load(args.input, args.port_capacity)
    program = prepare_rules(checked.program, args.annotations)
    rows, total = estimate_program(program, args.port_capacity)
    for row in rows:
        c = row.cost
        out.write("%s %s allocs=%d frees=%d reuses=%d savedPortWrites=%d\n"
                  % (row.pair, row.case, c.allocs, c.frees, c.reuses, c.savedPortWrites))
    out.write("total allocs=%d frees=%d reuses=%d savedPortWrites=%d\n"
              % (total.allocs, total.frees, total.reuses, total.savedPortWrites))
    return EXIT_OK


COMMANDS = {"run": cmd_run, "derive": cmd_derive, "check": cmd_check, "cost": cmd_cost}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out, err)
    except LoadError as e:
        err.write("%s\n" % e)
        return EXIT_LOAD


if __name__ == "__main__":
    sys.exit(main())

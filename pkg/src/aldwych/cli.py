"""Command line driver: ``aldwych <command> <file.aw> [options] [-- args...]``.

Exit codes: 0 ok, 1 check errors, 2 I/O or usage error, 3 deadlock,
4 step limit.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

from . import compile_source
from .core import format_core
from .errors import AldwychError, Diagnostic

EXIT_OK = 0
EXIT_CHECK = 1
EXIT_USAGE = 2
EXIT_DEADLOCK = 3
EXIT_STEPS = 4

COMMANDS = ("check", "emit-core", "emit-logic", "run")


@dataclass
class CliConfig:
    command: str
    input_path: str
    seed: int = 0
    max_steps: int = 1_000_000
    trace: bool = False
    entry: str = "main"
    stage: str | None = None
    args: list[str] = field(default_factory=list)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"aldwych: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def build_parser() -> argparse.ArgumentParser:
    from .desugar import PASSES

    p = _Parser(prog="aldwych", description="Check, lower and run Aldwych programs.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("file")
    p.add_argument("--seed", type=_nonneg, default=0)
    p.add_argument("--max-steps", type=_nonneg, default=1_000_000)
    p.add_argument("--trace", action="store_true", help="write the event trace to stderr")
    p.add_argument("--entry", default="main")
    p.add_argument("--stage", choices=("parse",) + PASSES, help="emit-core: dump the program after this pass")
    return p


def parse_args(argv: list[str]) -> CliConfig:
    rest: list[str] = []
    if "--" in argv:
        i = argv.index("--")
        argv, rest = argv[:i], argv[i + 1 :]
    ns = build_parser().parse_args(argv)
    return CliConfig(ns.command, ns.file, ns.seed, ns.max_steps, ns.trace, ns.entry, ns.stage, rest)


def _print_diags(diags: list[Diagnostic], filename: str, out) -> None:
    for d in diags:
        print(d.format(filename), file=out)


def _read(cfg: CliConfig) -> str | None:
    try:
        with open(cfg.input_path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        print(f"ERROR IO {cfg.input_path}:0:0 {e.strerror or e}", file=sys.stderr)
        return None


def cmd_check(cfg: CliConfig, text: str) -> int:
    res = compile_source(text)
    _print_diags(res.diagnostics, cfg.input_path, sys.stdout)
    return EXIT_OK if res.ok else EXIT_CHECK


def _emit_stage(cfg: CliConfig, text: str) -> int:
    from . import pretty
    from .desugar import lower_surface
    from .modecheck import check_program
    from .parser import parse

    try:
        prog = parse(text)
        if cfg.stage == "parse":
            sys.stdout.write(pretty.program(prog))
            return EXIT_OK
        stage = "recursion" if cfg.stage == "modecheck" else cfg.stage
        lowered = lower_surface(prog, stage)
    except AldwychError as e:
        _print_diags([Diagnostic("ERROR", e.code, e.message, e.span)], cfg.input_path, sys.stderr)
        return EXIT_CHECK
    if cfg.stage == "modecheck":
        diags = check_program(lowered.declarations)
        _print_diags(diags, cfg.input_path, sys.stderr)
        if any(d.is_error for d in diags):
            return EXIT_CHECK
    sys.stdout.write(pretty.program(lowered))
    return EXIT_OK


def cmd_emit_core(cfg: CliConfig, text: str) -> int:
    if cfg.stage not in (None, "handles"):
        return _emit_stage(cfg, text)
    res = compile_source(text)
    _print_diags(res.diagnostics, cfg.input_path, sys.stderr)
    if not res.ok:
        return EXIT_CHECK
    sys.stdout.write(format_core(res.core))
    return EXIT_OK


def cmd_emit_logic(cfg: CliConfig, text: str) -> int:
    from .logic import emit_logic

    res = compile_source(text)
    _print_diags(res.diagnostics, cfg.input_path, sys.stderr)
    if not res.ok:
        return EXIT_CHECK
    sys.stdout.write(emit_logic(res.core))
    return EXIT_OK


def cmd_run(cfg: CliConfig, text: str) -> int:
    from .runtime import Deadlocked, RuntimeFault, StepLimit, StreamPrinter, spawn_system

    res = compile_source(text, cfg.entry)
    _print_diags([d for d in res.diagnostics if d.is_error], cfg.input_path, sys.stderr)
    if not res.ok:
        return EXIT_CHECK
    proc = res.core.proc(cfg.entry)
    if proc is None:
        print(f"aldwych: no procedure {cfg.entry!r} to run", file=sys.stderr)
        return EXIT_USAGE
    def emit(line: str) -> None:
        sys.stdout.write(line + "\n")

    trace_out = (lambda line: print(line, file=sys.stderr)) if cfg.trace else None
    try:
        system, outs = spawn_system(res.core, cfg.entry, cfg.args, cfg.seed, cfg.trace, trace_out)
    except RuntimeFault as e:
        print(f"aldwych: {e}", file=sys.stderr)
        return EXIT_USAGE
    printers = [StreamPrinter(o, emit) for o in outs]

    def observe(_sys):
        for pr in printers:
            pr.poll()

    outcome = system.run(cfg.max_steps, observe)
    observe(system)
    sys.stdout.flush()
    if isinstance(outcome, Deadlocked):
        print(f"deadlock: {len(outcome.pids)} suspended process(es)", file=sys.stderr)
        for line in system.suspended_report():
            print("  " + line, file=sys.stderr)
        return EXIT_DEADLOCK
    if isinstance(outcome, StepLimit):
        print(f"step limit reached after {outcome.steps} steps", file=sys.stderr)
        return EXIT_STEPS
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    text = _read(cfg)
    if text is None:
        return EXIT_USAGE
    handler = {"check": cmd_check, "emit-core": cmd_emit_core, "emit-logic": cmd_emit_logic, "run": cmd_run}[cfg.command]
    return handler(cfg, text)


if __name__ == "__main__":
    raise SystemExit(main())

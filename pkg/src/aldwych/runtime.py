"""Seeded sequential interpreter for core programs.

The store holds single-assignment cells.  A process whose rules need an
unbound cell suspends on it and is woken when the cell is written.  One step
picks a runnable process uniformly at random (from a seeded generator),
tries its rules, and either commits to one, suspends, or faults.

Trace lines have the form ``SEQ KIND PID DETAIL`` where KIND is one of
SPAWN, REDUCE, BIND, SUSPEND, WAKE, FAULT, QUIESCE, DEADLOCK.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Union

from .core import CConst, CNum, CoreProc, CoreProgram, CoreRule, CTuple, CVar

# ------------------------------------------------------------------- terms


@dataclass(frozen=True)
class Atom:
    name: str

    def __repr__(self) -> str:
        return f"Atom({self.name!r})"


@dataclass(frozen=True)
class RTuple:
    tag: str
    args: tuple


class Cell:
    """A future: unbound (``value is None``), bound to a term, or aliased to
    another cell."""

    __slots__ = ("id", "value", "waiters", "writes")

    def __init__(self, cid: int):
        self.id = cid
        self.value = None
        self.waiters: list = []
        self.writes = 0

    def __repr__(self) -> str:
        return f"_{self.id}"


Term = Union[Atom, int, RTuple, Cell]

NIL = Atom("$")
TRUE = Atom("true")
FALSE = Atom("false")
_ATOMS: dict[str, Atom] = {}


def atom(name: str) -> Atom:
    a = _ATOMS.get(name)
    if a is None:
        a = _ATOMS[name] = Atom(name)
    return a


def deref(t):
    if not isinstance(t, Cell) or t.value is None:
        return t
    # follow and compress the chain
    path = []
    while isinstance(t, Cell) and t.value is not None:
        path.append(t)
        t = t.value
    for c in path[:-1]:
        c.value = t
    return t


def is_ground(t) -> bool:
    t = deref(t)
    if isinstance(t, Cell):
        return False
    if isinstance(t, RTuple):
        return all(is_ground(a) for a in t.args)
    return True


def show(t) -> str:
    """Canonical text of a runtime term."""
    t = deref(t)
    if isinstance(t, Cell):
        return f"_{t.id}"
    if isinstance(t, bool):
        return str(int(t))
    if isinstance(t, int):
        return str(t)
    if isinstance(t, Atom):
        return _show_atom(t.name)
    if t.tag == ":" and len(t.args) == 2:
        head = show(t.args[0])
        if isinstance(deref(t.args[0]), RTuple) and deref(t.args[0]).tag == ":":
            head = f"({head})"
        return f"{head} : {show(t.args[1])}"
    return _show_atom(t.tag) + "(" + ", ".join(show(a) for a in t.args) + ")"


def _show_atom(name: str) -> str:
    if name == "$" or (name and (name[0].islower()) and all(c.isalnum() or c in "_'" for c in name)):
        return name
    return "'" + name.replace("'", "\\'") + "'"


def from_python(v):
    """Build a ground runtime term from ints, strings (atoms), tuples
    ``(tag, *args)`` and lists (``$``-terminated streams)."""
    if isinstance(v, bool):
        return TRUE if v else FALSE
    if isinstance(v, int):
        return v
    if isinstance(v, str):
        return atom(v)
    if isinstance(v, list):
        out = NIL
        for x in reversed(v):
            out = RTuple(":", (from_python(x), out))
        return out
    if isinstance(v, tuple):
        return RTuple(v[0], tuple(from_python(a) for a in v[1:]))
    if isinstance(v, (Atom, RTuple, Cell)):
        return v
    raise TypeError(f"cannot convert {v!r}")


def to_python(t):
    """Inverse of :func:`from_python` for ground terms; streams become lists
    (an unclosed tail is left as the cell)."""
    t = deref(t)
    if isinstance(t, RTuple) and t.tag == ":" and len(t.args) == 2:
        out = []
        while isinstance(t, RTuple) and t.tag == ":" and len(t.args) == 2:
            out.append(to_python(t.args[0]))
            t = deref(t.args[1])
        if t != NIL:
            out.append(t)
        return out
    if t == NIL:
        return []
    if isinstance(t, Atom):
        return t.name
    if isinstance(t, RTuple):
        return (t.tag,) + tuple(to_python(a) for a in t.args)
    return t


# ---------------------------------------------------------------- matching


class _Suspend(Exception):
    pass


@dataclass
class Commit:
    rule: int
    env: dict


@dataclass
class SuspendOn:
    cells: set


@dataclass
class FailAll:
    pass


MatchResult = Union[Commit, SuspendOn, FailAll]


def _match(value, pat, env: dict, frontier: set) -> bool | None:
    """True/False for a definite answer, None when more binding is needed."""
    value = deref(value)
    if isinstance(pat, CVar):
        if pat.name in env:
            return _equal(env[pat.name], value, frontier)
        env[pat.name] = value
        return True
    if isinstance(value, Cell):
        frontier.add(value)
        return None
    if isinstance(pat, CConst):
        return isinstance(value, Atom) and value.name == pat.name
    if isinstance(pat, CNum):
        return isinstance(value, int) and not isinstance(value, bool) and value == pat.value
    if not isinstance(value, RTuple) or value.tag != pat.tag or len(value.args) != len(pat.args):
        return False
    result: bool | None = True
    for a, p in zip(value.args, pat.args):
        r = _match(a, p, env, frontier)
        if r is False:
            return False
        if r is None:
            result = None
    return result


def _equal(a, b, frontier: set) -> bool | None:
    a = deref(a)
    b = deref(b)
    if a is b:
        return True
    if isinstance(a, Cell) or isinstance(b, Cell):
        if isinstance(a, Cell):
            frontier.add(a)
        if isinstance(b, Cell):
            frontier.add(b)
        return None
    if isinstance(a, RTuple) and isinstance(b, RTuple):
        if a.tag != b.tag or len(a.args) != len(b.args):
            return False
        result: bool | None = True
        for x, y in zip(a.args, b.args):
            r = _equal(x, y, frontier)
            if r is False:
                return False
            if r is None:
                result = None
        return result
    return type(a) is type(b) and a == b


def _resolve(t, env: dict):
    if isinstance(t, CVar):
        return env.get(t.name)
    if isinstance(t, CConst):
        return atom(t.name)
    if isinstance(t, CNum):
        return t.value
    return RTuple(t.tag, tuple(_resolve(a, env) for a in t.args))


_NUMERIC = {
    ">": lambda a, b: a > b,
    "<": lambda a, b: a < b,
    ">=": lambda a, b: a >= b,
    "=<": lambda a, b: a <= b,
    "<=": lambda a, b: a <= b,
}


def eval_guard(op: str, a, b, frontier: set | None = None) -> bool | None:
    """True, False, or None (unknown: an operand is unbound)."""
    frontier = set() if frontier is None else frontier
    if op in ("==", "!="):
        r = _equal(a, b, frontier)
        if r is None:
            return None
        return r if op == "==" else not r
    a = deref(a)
    b = deref(b)
    unknown = False
    for x in (a, b):
        if isinstance(x, Cell):
            frontier.add(x)
            unknown = True
    if unknown:
        return None
    fn = _NUMERIC.get(op)
    if fn is None:
        raise ValueError(f"unknown relation {op}")
    if isinstance(a, int) and isinstance(b, int):
        return fn(a, b)
    if isinstance(a, Atom) and isinstance(b, Atom):
        return fn(a.name, b.name)
    return False


def try_rule(rule: CoreRule, env: dict, frontier: set) -> bool | None:
    """Match one rule against bound parameters in *env* (extended in place)."""
    result: bool | None = True
    for var, pat in rule.matches:
        if var not in env:
            result = None  # captured by a match that is still waiting
            continue
        r = _match(env[var], pat, env, frontier)
        if r is False:
            return False
        if r is None:
            result = None
    for op, a, b in rule.guards:
        va, vb = _resolve(a, env), _resolve(b, env)
        if va is None or vb is None:
            result = None
            continue
        r = eval_guard(op, va, vb, frontier)
        if r is False:
            return False
        if r is None:
            result = None
    return result


def try_match(proc: CoreProc, args: list, rng: random.Random | None = None) -> MatchResult:
    """Committed-choice rule selection with otherwise gating."""
    base = dict(zip(proc.ins + proc.outs, args))
    index = 0
    for group in proc.groups:
        ready = []
        waiting: set = set()
        undecided = False
        for rule in group:
            env = dict(base)
            frontier: set = set()
            r = try_rule(rule, env, frontier)
            if r is True:
                ready.append(Commit(index, env))
            elif r is None:
                undecided = True
                waiting |= frontier
            index += 1
        if ready:
            pick = ready[rng.randrange(len(ready))] if (rng and len(ready) > 1) else ready[0]
            return pick
        if undecided:
            return SuspendOn(waiting)
    return FailAll()


# ----------------------------------------------------------------- system


@dataclass
class Process:
    pid: int
    name: str
    args: list
    proc: CoreProc | None = None
    builtin: Callable | None = None
    status: str = "runnable"  # runnable | suspended | done
    epoch: int = 0
    waiting: tuple = ()


class RuntimeFault(Exception):
    def __init__(self, kind: str, detail: str):
        super().__init__(f"{kind}: {detail}")
        self.kind = kind
        self.detail = detail


@dataclass
class Quiesced:
    steps: int


@dataclass
class Deadlocked:
    steps: int
    pids: list


@dataclass
class StepLimit:
    steps: int


Outcome = Union[Quiesced, Deadlocked, StepLimit]


def _arith(fn):
    def run(sys: "System", p: Process):
        a, b, out = (deref(x) for x in p.args)
        waits = [x for x in (a, b) if isinstance(x, Cell)]
        if waits:
            return SuspendOn(set(waits))
        if not (isinstance(a, int) and isinstance(b, int)) or isinstance(a, bool) or isinstance(b, bool):
            raise RuntimeFault("TypeError", f"{p.name} on {show(a)}, {show(b)}")
        sys.bind(p, p.args[2], fn(a, b))
        return None

    return run


def _div(a: int, b: int) -> int:
    if b == 0:
        raise RuntimeFault("DivisionByZero", f"div({a}, 0)")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _relation(op):
    def run(sys: "System", p: Process):
        frontier: set = set()
        r = eval_guard(op, p.args[0], p.args[1], frontier)
        if r is None:
            return SuspendOn(frontier)
        sys.bind(p, p.args[2], TRUE if r else FALSE)
        return None

    return run


def _merge(sys: "System", p: Process):
    in1, in2, out = p.args
    a, b = deref(in1), deref(in2)
    options = []
    for k, s in ((0, a), (1, b)):
        if isinstance(s, RTuple) and s.tag == ":" and len(s.args) == 2:
            options.append(("take", k, s))
        elif s == NIL:
            options.append(("close", k, s))
        elif not isinstance(s, Cell):
            raise RuntimeFault("TypeError", f"merge input is not a stream: {show(s)}")
    if not options:
        return SuspendOn({x for x in (a, b) if isinstance(x, Cell)})
    kind, k, s = options[sys.rng.randrange(len(options))] if len(options) > 1 else options[0]
    if kind == "close":
        other = p.args[1 - k]
        sys.bind(p, out, other)
        return None
    rest = sys.new_cell()
    sys.bind(p, out, RTuple(":", (s.args[0], rest)))
    ins = [in1, in2]
    ins[k] = s.args[1]
    p.args = [ins[0], ins[1], rest]
    return "again"


BUILTINS: dict[str, tuple[int, int, Callable]] = {
    "add": (2, 1, _arith(lambda a, b: a + b)),
    "sub": (2, 1, _arith(lambda a, b: a - b)),
    "mul": (2, 1, _arith(lambda a, b: a * b)),
    "div": (2, 1, _arith(_div)),
    "gt": (2, 1, _relation(">")),
    "lt": (2, 1, _relation("<")),
    "ge": (2, 1, _relation(">=")),
    "le": (2, 1, _relation("=<")),
    "eq": (2, 1, _relation("==")),
    "ne": (2, 1, _relation("!=")),
    "merge": (2, 1, _merge),
}


class System:
    """A running ensemble: store, processes and scheduler."""

    def __init__(self, program: CoreProgram, seed: int = 0, trace: bool = False, on_event=None):
        self.program = program
        self.table = program.table
        self.rng = random.Random(seed)
        self.tracing = trace
        self.on_event = on_event
        self.trace: list[str] = []
        self.seq = 0
        self.cells = 0
        self.pids = 0
        self.procs: dict[int, Process] = {}
        self.runnable: list[int] = []
        self.steps = 0
        self.faults: list[tuple[int, str, str]] = []
        self.double_writes = 0
        self.max_writes = 0
        self.reductions: dict[int, int] = {}

    # ------------------------------------------------------------- events
    def event(self, kind: str, pid: int, detail: str = ""):
        self.seq += 1
        if self.tracing:
            line = f"{self.seq} {kind} {pid} {detail}".rstrip()
            self.trace.append(line)
            if self.on_event:
                self.on_event(line)

    # -------------------------------------------------------------- store
    def new_cell(self) -> Cell:
        self.cells += 1
        return Cell(self.cells)

    def bind(self, p: Process | None, target, value):
        """Write *value* into the cell *target* dereferences to."""
        cell = deref(target)
        pid = p.pid if p else 0
        if not isinstance(cell, Cell):
            self.double_writes += 1
            raise RuntimeFault("DoubleWrite", f"write of {show(value)} to bound {show(cell)}")
        v = deref(value)
        if v is cell:
            return
        cell.value = v
        cell.writes += 1
        self.max_writes = max(self.max_writes, cell.writes)
        if self.tracing:
            self.event("BIND", pid, f"_{cell.id} = {show(v)}")
        waiters, cell.waiters = cell.waiters, []
        for wpid, epoch in waiters:
            w = self.procs.get(wpid)
            if w is not None and w.status == "suspended" and w.epoch == epoch:
                if isinstance(v, Cell):
                    # an alias: keep waiting, now on the other cell
                    v.waiters.append((wpid, epoch))
                    continue
                w.status = "runnable"
                self.runnable.append(wpid)
                self.event("WAKE", wpid, f"by _{cell.id}")

    def build(self, t, env: dict):
        if isinstance(t, CVar):
            v = env.get(t.name)
            if v is None:
                v = env[t.name] = self.new_cell()
            return v
        if isinstance(t, CConst):
            return atom(t.name)
        if isinstance(t, CNum):
            return t.value
        return RTuple(t.tag, tuple(self.build(a, env) for a in t.args))

    # ---------------------------------------------------------- processes
    def spawn(self, name: str, args: list, parent: int = 0) -> Process:
        self.pids += 1
        p = Process(self.pids, name, list(args))
        proc = self.table.get(name)
        if proc is not None:
            if len(args) != len(proc.ins) + len(proc.outs):
                raise RuntimeFault("ArityMismatch", f"{name} called with {len(args)} arguments")
            p.proc = proc
        elif name in BUILTINS:
            nin, nout, fn = BUILTINS[name]
            if len(args) != nin + nout:
                raise RuntimeFault("ArityMismatch", f"{name} called with {len(args)} arguments")
            p.builtin = fn
        else:
            raise RuntimeFault("UnknownProcedure", name)
        self.procs[p.pid] = p
        self.runnable.append(p.pid)
        self.event("SPAWN", p.pid, name if not parent else f"{name} from {parent}")
        return p

    def suspend(self, p: Process, cells: set):
        p.status = "suspended"
        p.epoch += 1
        live = sorted((c for c in (deref(x) for x in cells) if isinstance(c, Cell)), key=lambda c: c.id)
        if not live:
            # everything it waited on got written meanwhile
            p.status = "runnable"
            self.runnable.append(p.pid)
            return
        p.waiting = tuple(live)
        for c in live:
            c.waiters.append((p.pid, p.epoch))
        self.event("SUSPEND", p.pid, "on " + ",".join(f"_{c.id}" for c in live))

    def finish(self, p: Process):
        p.status = "done"
        del self.procs[p.pid]

    def fault(self, p: Process, kind: str, detail: str):
        self.faults.append((p.pid, kind, detail))
        self.event("FAULT", p.pid, f"{kind} {detail}")
        if p.pid in self.procs:
            self.finish(p)

    def reduce(self, p: Process):
        try:
            if p.builtin is not None:
                r = p.builtin(self, p)
                if isinstance(r, SuspendOn):
                    self.suspend(p, r.cells)
                    return
                self.event("REDUCE", p.pid, p.name)
                self.reductions[p.pid] = self.reductions.get(p.pid, 0) + 1
                if r == "again":
                    self.runnable.append(p.pid)
                else:
                    self.finish(p)
                return
            r = try_match(p.proc, [p.args[i] for i in range(len(p.args))], self.rng)
            if isinstance(r, SuspendOn):
                self.suspend(p, r.cells)
                return
            if isinstance(r, FailAll):
                self.fault(p, "NoRuleMatches", p.name + "(" + ", ".join(show(a) for a in p.args) + ")")
                return
            self.commit(p, r)
        except RuntimeFault as e:
            self.fault(p, e.kind, e.detail)

    def commit(self, p: Process, c: Commit):
        rule = p.proc.rules[c.rule]
        self.event("REDUCE", p.pid, f"{p.name}/rule{c.rule + 1}")
        self.reductions[p.pid] = self.reductions.get(p.pid, 0) + 1
        env = c.env
        self.finish(p)
        spawns = []
        for call in rule.calls:
            ins = [self.build(a, env) for a in call.ins]
            outs = [self.build(CVar(o), env) for o in call.outs]
            spawns.append((call.name, ins + outs))
        for var, t in rule.binds:
            target = self.build(CVar(var), env)
            self.bind(p, target, self.build(t, env))
        for name, args in spawns:
            self.spawn(name, args, p.pid)

    # ---------------------------------------------------------- scheduler
    def step(self) -> bool:
        if not self.runnable:
            return False
        i = self.rng.randrange(len(self.runnable))
        pid = self.runnable[i]
        self.runnable[i] = self.runnable[-1]
        self.runnable.pop()
        p = self.procs.get(pid)
        if p is None or p.status != "runnable":
            return True
        self.steps += 1
        self.reduce(p)
        return True

    def run(self, max_steps: int = 1_000_000, observer: Callable[["System"], None] | None = None) -> Outcome:
        while self.runnable:
            if self.steps >= max_steps:
                return StepLimit(self.steps)
            self.step()
            if observer is not None:
                observer(self)
        if self.procs:
            pids = sorted(self.procs)
            self.event("DEADLOCK", 0, "pids " + ",".join(str(x) for x in pids))
            return Deadlocked(self.steps, pids)
        self.event("QUIESCE", 0, f"steps {self.steps}")
        return Quiesced(self.steps)

    def suspended_report(self) -> list[str]:
        out = []
        for pid in sorted(self.procs):
            p = self.procs[pid]
            on = ",".join(f"_{c.id}" for c in p.waiting)
            out.append(f"pid {pid} {p.name} waiting on {on}")
        return out


class StreamPrinter:
    """Follows an output stream and reports each element once it is ground."""

    def __init__(self, stream, emit: Callable[[str], None]):
        self.cur = stream
        self.emit = emit
        self.closed = False
        self.items: list = []

    def poll(self, _sys=None):
        while not self.closed:
            t = deref(self.cur)
            if t == NIL:
                self.closed = True
                return
            if isinstance(t, RTuple) and t.tag == ":" and len(t.args) == 2:
                if not is_ground(t.args[0]):
                    return
                self.items.append(t.args[0])
                self.emit(show(t.args[0]))
                self.cur = t.args[1]
                continue
            if isinstance(t, Cell):
                return
            # a non-stream value: print it once and stop
            if is_ground(t):
                self.items.append(t)
                self.emit(show(t))
                self.closed = True
            return


def spawn_system(program: CoreProgram, entry: str | None = None, args=(), seed: int = 0, trace: bool = False, on_event=None):
    """Create a system running ``entry``; returns ``(system, outputs)``.

    The entry's first input (if any) receives ``args`` as a ``$``-terminated
    stream of atoms; other inputs receive ``$``.  One fresh cell is made per
    output."""
    sys = System(program, seed, trace, on_event)
    entry = entry or program.entry or "main"
    proc = program.proc(entry)
    if proc is None:
        raise RuntimeFault("UnknownProcedure", entry)
    ins = []
    for i, _ in enumerate(proc.ins):
        ins.append(from_python([a if not isinstance(a, str) else a for a in args]) if i == 0 else NIL)
    outs = [sys.new_cell() for _ in proc.outs]
    sys.spawn(entry, ins + outs)
    return sys, outs


def run_program(program: CoreProgram, entry: str | None = None, args=(), seed: int = 0, max_steps: int = 1_000_000, trace: bool = False):
    """Convenience wrapper: run to completion and return ``(outcome, system, outputs)``."""
    sys, outs = spawn_system(program, entry, args, seed, trace)
    outcome = sys.run(max_steps)
    return outcome, sys, outs


def call(program: CoreProgram, name: str, inputs: list, seed: int = 0, max_steps: int = 1_000_000, trace: bool = False):
    """Run one procedure on Python-valued inputs; returns ``(outcome, outputs, system)``."""
    sys = System(program, seed, trace)
    proc = program.proc(name)
    nouts = len(proc.outs) if proc is not None else BUILTINS[name][1]
    ins = [from_python(v) for v in inputs]
    outs = [sys.new_cell() for _ in range(nouts)]
    sys.spawn(name, ins + outs)
    outcome = sys.run(max_steps)
    return outcome, [to_python(o) for o in outs], sys

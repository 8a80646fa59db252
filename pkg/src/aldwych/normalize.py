"""Canonical comparison of core programs up to renaming.

Two core programs are *alpha-equivalent* when a bijection of variable and
generated procedure names maps one onto the other.  Before comparing, each
rule is normalised so that trivially different but equal encodings agree:

* variable-to-variable binds are removed by identifying the two variables;
* a fresh variable bound once and read once is replaced by its term;
* a match on a capture variable used nowhere else is folded into the
  pattern that captured it;
* chains of binary ``merge`` calls become one n-ary, unordered merge.

The check builds a labelled multigraph per program and asks networkx for an
isomorphism.  Parameter order of declared procedures is not significant
(arguments are tied to parameter slots, not positions).  Reply flags are
ignored because they follow from the rule structure.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import replace

import networkx as nx
from networkx.algorithms import isomorphism as iso

from .core import CConst, CNum, CoreCall, CoreProc, CoreProgram, CoreRule, CTuple, CVar, term_vars

MERGE = "merge"


# -------------------------------------------------------------- substitution


def subst(t, env: dict):
    if isinstance(t, CVar):
        return env.get(t.name, t)
    if isinstance(t, CTuple):
        return CTuple(t.tag, tuple(subst(a, env) for a in t.args))
    return t


def retag(t, tags: dict):
    if isinstance(t, CConst):
        return CConst(tags.get(t.name, t.name))
    if isinstance(t, CTuple):
        return CTuple(tags.get(t.tag, t.tag), tuple(retag(a, tags) for a in t.args))
    return t


def _strip_reply(t):
    if isinstance(t, CVar):
        return CVar(t.name)
    if isinstance(t, CTuple):
        return CTuple(t.tag, tuple(_strip_reply(a) for a in t.args))
    return t


def _map_rule(r: CoreRule, f, rename=lambda n: n) -> CoreRule:
    return CoreRule(
        [(rename(v), f(t)) for v, t in r.matches],
        [(op, f(a), f(b)) for op, a, b in r.guards],
        [(rename(v), f(t)) for v, t in r.binds],
        [CoreCall(c.name, tuple(f(a) for a in c.ins), tuple(rename(o) for o in c.outs)) for c in r.calls],
        r.label,
    )


def _reads(r: CoreRule) -> Counter:
    c: Counter = Counter()
    for v, t in r.matches:
        c[v] += 1
    for op, a, b in r.guards:
        for x in list(term_vars(a)) + list(term_vars(b)):
            c[x.name] += 1
    for v, t in r.binds:
        for x in term_vars(t):
            c[x.name] += 1
    for call in r.calls:
        for a in call.ins:
            for x in term_vars(a):
                c[x.name] += 1
    return c


def _captures(r: CoreRule) -> Counter:
    c: Counter = Counter()
    for _, t in r.matches:
        for x in term_vars(t):
            c[x.name] += 1
    return c


def normalize_rule(r: CoreRule, params: set[str]) -> CoreRule:
    r = _map_rule(r, _strip_reply)
    changed = True
    while changed:
        changed = False
        # identify aliased variables
        for i, (v, t) in enumerate(r.binds):
            if isinstance(t, CVar) and not (v in params and t.name in params):
                keep, drop = (v, t.name) if t.name not in params else (t.name, v)
                if keep == drop:
                    continue
                binds = r.binds[:i] + r.binds[i + 1 :]
                r = replace(r, binds=binds)
                r = _map_rule(r, lambda x: subst(x, {drop: CVar(keep)}), lambda n: keep if n == drop else n)
                changed = True
                break
        if changed:
            continue
        reads = _reads(r)
        caps = _captures(r)
        # fold single-use fresh binds into their reader
        for i, (v, t) in enumerate(r.binds):
            if v in params or caps[v] or reads[v] != 1:
                continue
            if any(x.name == v for x in term_vars(t)):
                continue
            binds = r.binds[:i] + r.binds[i + 1 :]
            r = replace(r, binds=binds)
            r = _map_rule(r, lambda x: subst(x, {v: t}))
            changed = True
            break
        if changed:
            continue
        # fold matches on otherwise unused capture variables
        for i, (v, t) in enumerate(r.matches):
            if v in params or caps[v] != 1 or reads[v] != 1:
                continue
            rest = r.matches[:i] + r.matches[i + 1 :]
            r = replace(r, matches=[(w, subst(p, {v: t})) for w, p in rest])
            changed = True
            break
    return r


def normalize_program(prog: CoreProgram, tags: dict | None = None) -> CoreProgram:
    procs = []
    for p in prog.procedures:
        params = set(p.ins) | set(p.outs)
        groups = []
        for g in p.groups:
            ng = []
            for r in g:
                if tags:
                    r = _map_rule(r, lambda t: retag(t, tags))
                ng.append(normalize_rule(r, params))
            groups.append(ng)
        procs.append(CoreProc(p.name, list(p.ins), list(p.outs), groups))
    return CoreProgram(procs, prog.entry)


# -------------------------------------------------------------------- graphs


def _merge_groups(r: CoreRule, params: set[str]):
    """Fold binary merge chains into (inputs, output) groups."""
    merges = [c for c in r.calls if c.name == MERGE and len(c.ins) == 2 and len(c.outs) == 1]
    others = [c for c in r.calls if c not in merges]
    reads = _reads(r)
    groups = [[list(c.ins), c.outs[0]] for c in merges]
    changed = True
    while changed:
        changed = False
        for g in groups:
            out = g[1]
            if out in params or reads[out] != 1:
                continue
            for h in groups:
                if h is g:
                    continue
                idx = [k for k, t in enumerate(h[0]) if isinstance(t, CVar) and t.name == out]
                if idx:
                    h[0] = h[0][: idx[0]] + g[0] + h[0][idx[0] + 1 :]
                    groups.remove(g)
                    changed = True
                    break
            if changed:
                break
    return groups, others


class _Builder:
    def __init__(self, prog: CoreProgram, shared: set[str]):
        self.g = nx.MultiDiGraph()
        self.n = 0
        self.prog = prog
        self.shared = shared
        self.slots: dict[tuple, int] = {}
        self.proc_nodes: dict[str, int] = {}

    def node(self, label: str) -> int:
        self.n += 1
        self.g.add_node(self.n, label=label)
        return self.n

    def edge(self, a: int, b: int, label: str):
        self.g.add_edge(a, b, label=label)

    def proc(self, name: str) -> int:
        if name not in self.proc_nodes:
            known = self.prog.proc(name) is not None
            label = f"proc:{name}" if (name in self.shared or not known) else "proc:*"
            self.proc_nodes[name] = self.node(label)
        return self.proc_nodes[name]

    def slot(self, name: str, side: str, i: int) -> int:
        key = (name, side, i)
        if key not in self.slots:
            known = self.prog.proc(name) is not None
            s = self.node(side if known else f"{side}#{i}")
            self.edge(self.proc(name), s, "slot")
            self.slots[key] = s
        return self.slots[key]

    def term(self, t, env: dict) -> int:
        if isinstance(t, CVar):
            if t.name not in env:
                env[t.name] = self.node("var")
            return env[t.name]
        if isinstance(t, CConst):
            return self.node(f"c:{t.name}")
        if isinstance(t, CNum):
            return self.node(f"n:{t.value}")
        node = self.node(f"t:{t.tag}/{len(t.args)}")
        for k, a in enumerate(t.args):
            self.edge(node, self.term(a, env), f"a{k}")
        return node

    def build(self) -> nx.MultiDiGraph:
        for p in self.prog.procedures:
            pn = self.proc(p.name)
            params = set(p.ins) | set(p.outs)
            for gi, grp in enumerate(p.groups):
                for r in grp:
                    rn = self.node(f"rule:g{gi}")
                    self.edge(pn, rn, "rule")
                    env: dict[str, int] = {}
                    for i, v in enumerate(p.ins):
                        self.edge(self.term(CVar(v), env), self.slot(p.name, "in", i), "param")
                    for i, v in enumerate(p.outs):
                        self.edge(self.term(CVar(v), env), self.slot(p.name, "out", i), "param")
                    for v, t in r.matches:
                        m = self.node("match")
                        self.edge(rn, m, "has")
                        self.edge(m, self.term(CVar(v), env), "subject")
                        self.edge(m, self.term(t, env), "pattern")
                    for op, a, b in r.guards:
                        m = self.node(f"guard:{op}")
                        self.edge(rn, m, "has")
                        self.edge(m, self.term(a, env), "l")
                        self.edge(m, self.term(b, env), "r")
                    for v, t in r.binds:
                        m = self.node("bind")
                        self.edge(rn, m, "has")
                        self.edge(m, self.term(CVar(v), env), "dest")
                        self.edge(m, self.term(t, env), "value")
                    merges, calls = _merge_groups(r, params)
                    for ins, out in merges:
                        m = self.node("merge")
                        self.edge(rn, m, "has")
                        for t in ins:
                            self.edge(m, self.term(t, env), "min")
                        self.edge(m, self.term(CVar(out), env), "mout")
                    for c in calls:
                        m = self.node("call")
                        self.edge(rn, m, "has")
                        self.edge(m, self.proc(c.name), "callee")
                        for i, a in enumerate(c.ins):
                            an = self.node("arg")
                            self.edge(m, an, "arg")
                            self.edge(an, self.slot(c.name, "in", i), "slot")
                            self.edge(an, self.term(a, env), "value")
                        for i, o in enumerate(c.outs):
                            on = self.node("res")
                            self.edge(m, on, "res")
                            self.edge(on, self.slot(c.name, "out", i), "slot")
                            self.edge(on, self.term(CVar(o), env), "value")
        return self.g


def program_graph(prog: CoreProgram, shared: set[str] | None = None) -> nx.MultiDiGraph:
    return _Builder(prog, shared or set()).build()


def alpha_equivalent(a: CoreProgram, b: CoreProgram, tags_a: dict | None = None, tags_b: dict | None = None) -> bool:
    na = normalize_program(a, tags_a)
    nb = normalize_program(b, tags_b)
    if len(na.procedures) != len(nb.procedures):
        return False
    shared = {p.name for p in na.procedures} & {p.name for p in nb.procedures}
    ga = program_graph(na, shared)
    gb = program_graph(nb, shared)
    if ga.number_of_nodes() != gb.number_of_nodes() or ga.number_of_edges() != gb.number_of_edges():
        return False
    return nx.is_isomorphic(
        ga,
        gb,
        node_match=iso.categorical_node_match("label", None),
        edge_match=iso.categorical_multiedge_match("label", None),
    )

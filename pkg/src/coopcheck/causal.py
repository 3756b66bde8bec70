"""Causal graphs, closures, traversability, causal loops, levels, and agent-count bounds.

A graph carries, besides its edges, the ground transitions that induced them
(``GraphAction``), the node domains, and initial values, so that
traversability can be decided without going back to the problem.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace
from itertools import combinations, product
from math import prod

import networkx as nx

from coopcheck import errors
from coopcheck.errors import ProblemError
from coopcheck.model import MapProblem
from coopcheck.signatures import EX_AG, action_signature, is_homogeneous_team, vs_token

DEFAULT_TRAVERSAL_CAP = 200_000
DEFAULT_MAX_LOOPS = 1_000


@dataclass(frozen=True)
class GraphAction:
    name: str
    need: Mapping[str, str]  # pre ⊔ prv
    post: Mapping[str, str]
    prevail: Mapping[str, str]  # prv plus checked-only pre


@dataclass
class CausalGraph:
    nodes: tuple[str, ...]
    domains: dict[str, tuple[str, ...]]
    init: dict[str, str]
    actions: tuple[GraphAction, ...]
    static: frozenset[str] = frozenset()
    agent_vs: frozenset[str] = frozenset()
    goal: frozenset[str] = frozenset()
    directed: dict[tuple[str, str], list[str]] = field(default_factory=dict)
    undirected: dict[tuple[str, str], list[str]] = field(default_factory=dict)

    @property
    def order(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.nodes)}

    def ukey(self, a: str, b: str) -> tuple[str, str]:
        order = self.order
        return (a, b) if order[a] <= order[b] else (b, a)

    def has_undirected(self, a: str, b: str) -> bool:
        return self.ukey(a, b) in self.undirected

    def neighbours(self, node: str) -> list[str]:
        return [b if a == node else a for a, b in self.undirected if node in (a, b)]


class Icgs(CausalGraph):
    """Causal graph of a representative agent of a homogeneous team, over signatures."""


def _attach_edges(g: CausalGraph) -> CausalGraph:
    order = g.order
    directed: dict[tuple[str, str], list[str]] = {}
    undirected: dict[tuple[str, str], list[str]] = {}
    for act in g.actions:
        updated = [n for n in g.nodes if n in act.post]
        for target in updated:
            for source in act.prevail:
                if source != target:
                    directed.setdefault((source, target), []).append(act.name)
        for a, b in combinations(updated, 2):
            undirected.setdefault(g.ukey(a, b), []).append(act.name)
    g.directed = {k: v for k, v in sorted(directed.items(), key=lambda kv: (order[kv[0][0]], order[kv[0][1]]))}
    g.undirected = {k: v for k, v in sorted(undirected.items(), key=lambda kv: (order[kv[0][0]], order[kv[0][1]]))}
    return g


def _updated_anywhere(problem: MapProblem) -> set[str]:
    return {v for a in problem.actions for v in a.post.defined()}


def build_causal_graph(problem: MapProblem) -> CausalGraph:
    """Directed edge v -> w when an action updates w under a prevail condition on v;
    undirected edge v -- w when one action updates both."""
    actions = []
    for a in problem.actions:
        prevail = a.prevail_like()
        actions.append(GraphAction(f"{a.name}", a.requirement().defined(), a.post.defined(), prevail))
    updated = _updated_anywhere(problem)
    g = CausalGraph(
        nodes=problem.names,
        domains={v.name: v.domain for v in problem.variables},
        init=problem.init.defined(),
        actions=tuple(actions),
        static=frozenset(n for n in problem.names if n not in updated),
        agent_vs=frozenset(v.name for v in problem.variables if v.agent is not None),
        goal=frozenset(problem.goal.defined()),
    )
    return _attach_edges(g)


def build_agent_graph(problem: MapProblem, agent: str, cls=CausalGraph) -> CausalGraph:
    """Causal graph of one agent over world variables and that agent's VSs."""
    if agent not in problem.agents:
        raise ProblemError(errors.UNKNOWN_AGENT, f"unknown agent {agent!r}")
    agent_names = set(problem.agents)
    updated = {vs_token(problem, v) for v in _updated_anywhere(problem)}
    nodes, domains, init, agent_vs = [], {}, {}, set()
    for var in problem.variables:
        if var.agent is not None and var.agent != agent:
            continue
        token = vs_token(problem, var.name)
        nodes.append(token)
        domains[token] = tuple(dict.fromkeys(EX_AG if d in agent_names else d for d in var.domain))
        iv = problem.init[var.name]
        init[token] = EX_AG if iv in agent_names else iv
        if var.agent is not None:
            agent_vs.add(token)
    actions = []
    for sig in dict.fromkeys(action_signature(problem, a) for a in problem.actions_of(agent)):
        pre, post, prv = sig.as_dicts()
        prevail = dict(prv)
        for c in sig.checked:
            prevail[c] = pre[c]
        actions.append(GraphAction(sig.name, {**pre, **prv}, post, prevail))
    g = cls(
        nodes=tuple(nodes),
        domains=domains,
        init=init,
        actions=tuple(actions),
        static=frozenset(n for n in nodes if n not in updated),
        agent_vs=frozenset(agent_vs),
        goal=frozenset(problem.goal.defined()),
    )
    return _attach_edges(g)


def build_icgs(problem: MapProblem) -> Icgs:
    if not is_homogeneous_team(problem):
        raise ProblemError(errors.NOT_HOMOGENEOUS, "the individual causal graph signature needs a homogeneous team")
    return build_agent_graph(problem, problem.agents[0], cls=Icgs)


# -- closures and traversability --------------------------------------------


@dataclass(frozen=True)
class InnerClosure:
    vars: tuple[str, ...]
    oc: tuple[str, ...]


def outer_closure(g: CausalGraph, members: Iterable[str]) -> tuple[str, ...]:
    inside = set(members)
    sources = {a for (a, b) in g.directed if b in inside and a not in inside}
    return tuple(n for n in g.nodes if n in sources)


def inner_closures(g: CausalGraph) -> list[InnerClosure]:
    """Minimal inner closures: connected components of the undirected edges."""
    seen: set[str] = set()
    out = []
    for start in g.nodes:
        if start in seen:
            continue
        comp = {start}
        queue = deque([start])
        while queue:
            n = queue.popleft()
            for m in g.neighbours(n):
                if m not in comp:
                    comp.add(m)
                    queue.append(m)
        seen |= comp
        members = tuple(n for n in g.nodes if n in comp)
        out.append(InnerClosure(members, outer_closure(g, members)))
    return out


def _effective_domain(g: CausalGraph, node: str, init: Mapping[str, str]) -> tuple[str, ...]:
    # static variables never leave their initial value
    return (init[node],) if node in g.static else g.domains[node]


def is_traversable(g: CausalGraph, ic, init: Mapping[str, str] | None = None,
                   cap: int = DEFAULT_TRAVERSAL_CAP) -> bool | None:
    """Whether every state of ``ic`` reaches every other, with the rest of the graph free.

    Dynamic variables outside the closure may take any value; static ones hold
    their initial value. Returns None when the closure's state space exceeds
    ``cap``.
    """
    members = tuple(ic.vars if isinstance(ic, InnerClosure) else ic)
    init = dict(g.init if init is None else init)
    inside = set(members)
    domains = [_effective_domain(g, n, init) for n in members]
    if prod(len(d) for d in domains) > cap:
        return None
    states = list(product(*domains))
    index = {s: i for i, s in enumerate(states)}
    pos = {n: i for i, n in enumerate(members)}
    succ: list[set[int]] = [set() for _ in states]
    pred: list[set[int]] = [set() for _ in states]
    for act in g.actions:
        touched = set(act.post)
        if not touched or not touched <= inside:
            continue
        ok = True
        inner_need = []
        for v, val in act.need.items():
            if v in inside:
                inner_need.append((pos[v], val))
            elif v in g.static and init.get(v) != val:
                ok = False
                break
        if not ok:
            continue
        effects = [(pos[v], val) for v, val in act.post.items()]
        for i, s in enumerate(states):
            if all(s[p] == val for p, val in inner_need):
                t = list(s)
                for p, val in effects:
                    t[p] = val
                j = index.get(tuple(t))
                if j is not None and j != i:
                    succ[i].add(j)
                    pred[j].add(i)
    return _reaches_all(succ) and _reaches_all(pred)


def _reaches_all(adj: list[set[int]]) -> bool:
    seen = {0}
    queue = deque([0])
    while queue:
        for j in adj[queue.popleft()]:
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return len(seen) == len(adj)


def _and3(verdicts: Iterable[bool | None]) -> bool | None:
    verdicts = list(verdicts)
    if any(v is False for v in verdicts):
        return False
    if any(v is None for v in verdicts):
        return None
    return True


def traversal_report(g: CausalGraph, init: Mapping[str, str] | None = None, cap: int = DEFAULT_TRAVERSAL_CAP,
                     union_limit: int = 1) -> list[tuple[InnerClosure, bool | None]]:
    """Traversability of every minimal closure, and of unions of up to ``union_limit`` of them."""
    ics = inner_closures(g)
    out = [(ic, is_traversable(g, ic, init, cap)) for ic in ics]
    for size in range(2, union_limit + 1):
        for group in combinations(ics, size):
            members = tuple(n for n in g.nodes if any(n in ic.vars for ic in group))
            union = InnerClosure(members, outer_closure(g, members))
            out.append((union, is_traversable(g, union, init, cap)))
    return out


def icgs_traversable(g: CausalGraph, init: Mapping[str, str] | None = None, cap: int = DEFAULT_TRAVERSAL_CAP,
                     union_limit: int = 1) -> bool | None:
    return _and3(v for _, v in traversal_report(g, init, cap, union_limit))


# -- causal loops ------------------------------------------------------------


@dataclass(frozen=True)
class CausalLoop:
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str, str], ...]  # (kind, source, target), kind '->' or '--'
    contains_agent_vs: bool


@dataclass
class LoopReport:
    loops: list[CausalLoop]
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.loops)

    def __iter__(self):
        return iter(self.loops)


def _arc_graph(g: CausalGraph, skip: Iterable[str] = ()) -> nx.DiGraph:
    skip = set(skip)
    dg = nx.DiGraph()
    dg.add_nodes_from(n for n in g.nodes if n not in skip)
    for a, b in g.directed:
        if a not in skip and b not in skip:
            dg.add_edge(a, b)
    for a, b in g.undirected:
        if a not in skip and b not in skip:
            dg.add_edge(a, b)
            dg.add_edge(b, a)
    return dg


def has_causal_loop(g: CausalGraph, skip: Iterable[str] = ()) -> bool:
    """Exact test: a directed edge a -> b lies on a loop iff a is reachable from b."""
    skip = set(skip)
    dg = _arc_graph(g, skip)
    comp = {}
    for i, scc in enumerate(nx.strongly_connected_components(dg)):
        for n in scc:
            comp[n] = i
    return any(comp[a] == comp[b] for a, b in g.directed if a not in skip and b not in skip)


def _edge_options(g: CausalGraph, a: str, b: str) -> list[tuple[str, str, str]]:
    opts = []
    if (a, b) in g.directed:
        opts.append(("->", a, b))
    if g.has_undirected(a, b):
        opts.append(("--",) + g.ukey(a, b))
    return opts


def find_causal_loops(g: CausalGraph, max_loops: int = DEFAULT_MAX_LOOPS) -> LoopReport:
    """A covering set of causal loops: every edge lying on some loop appears in a reported one.

    Undirected edges may be walked either way; a loop needs at least one
    directed edge. Enumeration stops after ``max_loops`` cycles, flagging the
    report as truncated.
    """
    order = g.order
    dg = _arc_graph(g)
    chosen: list[CausalLoop] = []
    covered: set[tuple[str, str, str]] = set()
    truncated = False
    examined = 0
    for cycle in nx.simple_cycles(dg):
        examined += 1
        if examined > max_loops:
            truncated = True
            break
        k = min(range(len(cycle)), key=lambda i: order[cycle[i]])
        cycle = cycle[k:] + cycle[:k]
        arcs = [(cycle[i], cycle[(i + 1) % len(cycle)]) for i in range(len(cycle))]
        options = [_edge_options(g, a, b) for a, b in arcs]
        directed_at = [i for i, opts in enumerate(options) if any(o[0] == "->" for o in opts)]
        if not directed_at:
            continue
        usable = set()
        for i, opts in enumerate(options):
            for o in opts:
                if o[0] == "->" or any(j != i for j in directed_at):
                    usable.add(o)
        if usable <= covered:
            continue
        covered |= usable
        realised = tuple(next((o for o in opts if o[0] == "->"), opts[0]) for opts in options)
        chosen.append(CausalLoop(tuple(cycle), realised, any(n in g.agent_vs for n in cycle)))
    return LoopReport(chosen, truncated)


def nodes_on_loops(g: CausalGraph, max_loops: int = DEFAULT_MAX_LOOPS) -> tuple[set[str], bool]:
    """Nodes lying on at least one causal loop (enumerative), plus a truncation flag."""
    dg = _arc_graph(g)
    found: set[str] = set()
    for examined, cycle in enumerate(nx.simple_cycles(dg)):
        if examined >= max_loops:
            return found, True
        arcs = [(cycle[i], cycle[(i + 1) % len(cycle)]) for i in range(len(cycle))]
        if any((a, b) in g.directed for a, b in arcs):
            found |= set(cycle)
    return found, False


# -- levels -----------------------------------------------------------------


def level_decomposition(g: CausalGraph) -> list[list[str]]:
    """Partition nodes into levels, highest first, for a loop-free graph.

    Undirected components are layered greedily by longest path from the
    sources, so directed edges always point to a later level.
    """
    if has_causal_loop(g):
        raise ProblemError(errors.NOT_ACYCLIC, "graph contains a causal loop")
    ics = inner_closures(g)
    comp_of = {n: i for i, ic in enumerate(ics) for n in ic.vars}
    dag = nx.DiGraph()
    dag.add_nodes_from(range(len(ics)))
    for a, b in g.directed:
        dag.add_edge(comp_of[a], comp_of[b])
    depth = {}
    for c in nx.lexicographical_topological_sort(dag):
        depth[c] = max((depth[p] + 1 for p in dag.predecessors(c)), default=0)
    levels: list[list[str]] = [[] for _ in range(max(depth.values(), default=-1) + 1)]
    for n in g.nodes:
        levels[depth[comp_of[n]]].append(n)
    return levels


def check_levels(g: CausalGraph, levels: list[Iterable[str]]) -> list[str]:
    """Violations of the three leveling properties; an empty list means valid."""
    problems = []
    level_of: dict[str, int] = {}
    for i, level in enumerate(levels):
        for n in level:
            if n in level_of:
                problems.append(f"{n} appears in levels {level_of[n]} and {i}")
            level_of[n] = i
    for n in g.nodes:
        if n not in level_of:
            problems.append(f"{n} is in no level")
    extra = set(level_of) - set(g.nodes)
    for n in sorted(extra):
        problems.append(f"{n} is not a graph node")
    for a, b in g.directed:
        if a in level_of and b in level_of and level_of[a] >= level_of[b]:
            problems.append(f"directed edge {a} -> {b} does not go from a higher to a lower level")
    for a, b in g.undirected:
        if a in level_of and b in level_of and level_of[a] != level_of[b]:
            problems.append(f"undirected edge {a} -- {b} crosses levels")
    return problems


# -- CR and bounds --------------------------------------------------------------


def compute_cr(g: CausalGraph, max_loops: int = DEFAULT_MAX_LOOPS) -> set[str]:
    """Agent VSs on causal loops, closed under directed edges into further agent VSs."""
    on_loop, _ = nodes_on_loops(g, max_loops)
    cr = {n for n in on_loop if n in g.agent_vs}
    changed = True
    while changed:
        changed = False
        for a, b in g.directed:
            if a in cr and b in g.agent_vs and b not in cr:
                cr.add(b)
                changed = True
    return cr


def replacement_name(node: str, value: str) -> str:
    return f"{node}={value}"


def expand_cr(g: CausalGraph, cr: Iterable[str]) -> CausalGraph:
    """Replace each node in ``cr`` by one single-valued node per domain value.

    Outgoing edges are copied to every replacement and incoming edges are
    dropped. Transitions that updated a replaced node lose that effect, and
    conditions on it are served by the replacement holding the required value.
    """
    cr = [n for n in g.nodes if n in set(cr)]
    if not cr:
        return replace(g, directed=dict(g.directed), undirected=dict(g.undirected))
    bad = [n for n in cr if n not in g.agent_vs]
    if bad:
        raise ProblemError(errors.STRUCTURAL, f"only agent VSs can be expanded, not {bad}")
    crs = set(cr)
    nodes, domains, init = [], {}, {}
    repl: dict[str, list[str]] = {}
    for n in g.nodes:
        if n in crs:
            repl[n] = []
            for d in g.domains[n]:
                r = replacement_name(n, d)
                repl[n].append(r)
                nodes.append(r)
                domains[r] = (d,)
                init[r] = d
        else:
            nodes.append(n)
            domains[n] = g.domains[n]
            init[n] = g.init[n]

    def conv_cond(cond):
        return {(replacement_name(v, val) if v in crs else v): val for v, val in cond.items()}

    actions = []
    for act in g.actions:
        post = {v: val for v, val in act.post.items() if v not in crs}
        if not post:
            continue
        actions.append(GraphAction(act.name, conv_cond(act.need), post, conv_cond(act.prevail)))
    new = type(g)(
        nodes=tuple(nodes),
        domains=domains,
        init=init,
        actions=tuple(actions),
        static=frozenset(n for n in g.static if n not in crs) | {r for rs in repl.values() for r in rs},
        agent_vs=frozenset(n for n in g.agent_vs if n not in crs) | {r for rs in repl.values() for r in rs},
        goal=g.goal,
    )
    for (a, b), names in g.directed.items():
        if b in crs:
            continue
        for src in repl.get(a, [a]):
            new.directed.setdefault((src, b), []).extend(names)
    for (a, b), names in g.undirected.items():
        for x in repl.get(a, [a]):
            for y in repl.get(b, [b]):
                new.undirected.setdefault(new.ukey(x, y), []).extend(names)
    return new


@dataclass
class BoundResult:
    applicable: bool | None
    value: int | None
    hypotheses: dict[str, bool | None]
    nodes: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "applicable": _verdict_out(self.applicable),
            "value": self.value,
            "hypotheses": {k: _verdict_out(v) for k, v in self.hypotheses.items()},
            "nodes": list(self.nodes),
        }


def _verdict_out(v: bool | None):
    return "indeterminate" if v is None else v


def agent_edges_directed(g: CausalGraph) -> bool:
    return not any(a in g.agent_vs or b in g.agent_vs for a, b in g.undirected)


def bound_lemma2(g: CausalGraph, solvable: bool | None = None, cap: int = DEFAULT_TRAVERSAL_CAP,
                 max_loops: int = DEFAULT_MAX_LOOPS) -> BoundResult:
    """Upper bound on team size from breaking loops through agent VSs.

    The bound is the product of domain sizes over CR. It applies when the
    problem is solvable, every edge at an agent VS is directed, every causal
    loop passes through an agent VS, and the graph is traversable once CR is
    expanded. The literal "no loop contains an agent VS" reading is reported
    alongside but not required.
    """
    cr = compute_cr(g, max_loops)
    nodes = tuple(n for n in g.nodes if n in cr)
    expanded = expand_cr(g, cr)
    on_loop, _ = nodes_on_loops(g, max_loops)
    hyp = {
        "solvable": solvable,
        "agent_edges_directed": agent_edges_directed(g),
        "every_loop_has_agent_vs": not has_causal_loop(g, skip=g.agent_vs),
        "traversable_after_expansion": icgs_traversable(expanded, cap=cap),
        "icgs_traversable": icgs_traversable(g, cap=cap),
        "no_loop_has_agent_vs": not (on_loop & g.agent_vs),
    }
    used = ("solvable", "agent_edges_directed", "every_loop_has_agent_vs", "traversable_after_expansion")
    applicable = _and3(hyp[k] for k in used)
    value = prod(len(g.domains[n]) for n in nodes)
    return BoundResult(applicable, value if applicable else None, hyp, nodes)


def bound_lemma3(g: CausalGraph, solvable: bool | None = None) -> BoundResult:
    """Upper bound on team size from letting agents start in every agent-VS state."""
    nodes = tuple(n for n in g.nodes if n in g.agent_vs)
    hyp = {"solvable": solvable, "agent_edges_directed": agent_edges_directed(g)}
    applicable = _and3(hyp.values())
    value = prod(len(g.domains[n]) for n in nodes)
    return BoundResult(applicable, value if applicable else None, hyp, nodes)


@dataclass
class Certificate:
    granted: bool | None
    reasons: list[str]
    levels: list[list[str]] | None = None

    def to_dict(self) -> dict:
        return {"granted": _verdict_out(self.granted), "reasons": list(self.reasons), "levels": self.levels}


def theorem1_certificate(problem: MapProblem, cap: int = DEFAULT_TRAVERSAL_CAP, union_limit: int = 1) -> Certificate:
    """Certify that any single agent can solve a (solvable) problem.

    Granted when the team is homogeneous, the ICGS is traversable, and it has
    no causal loop; the level decomposition is attached as evidence.
    """
    if not is_homogeneous_team(problem):
        return Certificate(False, ["team is heterogeneous"])
    g = build_icgs(problem)
    reasons = []
    trav = icgs_traversable(g, cap=cap, union_limit=union_limit)
    if trav is False:
        reasons.append("ICGS is not traversable")
    elif trav is None:
        reasons.append("traversability indeterminate (cap exceeded)")
    loop = has_causal_loop(g)
    if loop:
        reasons.append("ICGS has a causal loop")
    if trav is False or loop:
        return Certificate(False, reasons)
    if trav is None:
        return Certificate(None, reasons)
    return Certificate(True, [], level_decomposition(g))

"""Exhaustive breadth-first oracle for solvability, required cooperation, and team size."""

from __future__ import annotations

import logging
from collections import deque
from collections.abc import Iterable
from dataclasses import dataclass, field, replace
from itertools import combinations, combinations_with_replacement, product
from math import comb

from coopcheck import errors
from coopcheck.errors import ProblemError
from coopcheck.model import MapProblem, PartialState, Plan, Variable, make_action, split_tokens, substitute
from coopcheck.signatures import (
    agent_action_signatures,
    agent_variable_signatures,
    is_homogeneous_team,
    vs_token,
)

log = logging.getLogger(__name__)

DEFAULT_MAX_STATES = 2_000_000

SOLVED = "solved"
UNSOLVABLE = "unsolvable"
INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class SearchConfig:
    max_states: int = DEFAULT_MAX_STATES
    max_plan_len: int | None = None

    def __post_init__(self):
        if self.max_states <= 0:
            raise ValueError("max_states must be positive")
        if self.max_plan_len is not None and self.max_plan_len <= 0:
            raise ValueError("max_plan_len must be positive")


@dataclass(frozen=True)
class SolveResult:
    status: str
    plan: Plan | None
    states: int
    cap: str | None = None

    @property
    def solved(self) -> bool:
        return self.status == SOLVED

    @property
    def indeterminate(self) -> bool:
        return self.status == INDETERMINATE

    @property
    def verdict(self) -> bool | None:
        return None if self.indeterminate else self.solved


def solve(problem: MapProblem, subset: Iterable[str], config: SearchConfig | None = None) -> SolveResult:
    """Shortest plan for the sub-team ``subset`` by breadth-first search.

    Agent variables of agents outside the sub-team keep their initial values
    since only their owners' actions could change them.
    """
    config = config or SearchConfig()
    subset = set(subset)
    if not subset:
        raise ProblemError(errors.STRUCTURAL, "agent subset is empty")
    unknown = subset - set(problem.agents)
    if unknown:
        raise ProblemError(errors.UNKNOWN_AGENT, f"unknown agents {sorted(unknown)}")
    index = {n: i for i, n in enumerate(problem.names)}
    compiled = []
    for act in problem.actions:
        if act.agent in subset:
            need = tuple((index[v], val) for v, val in act.requirement().defined().items())
            eff = tuple((index[v], val) for v, val in act.post.defined().items())
            compiled.append((act.key, need, eff))
    goal = tuple((index[v], val) for v, val in problem.goal.defined().items())

    start = problem.init.values
    parent: dict[tuple, tuple | None] = {start: None}
    depth = {start: 0}
    frontier = deque([start])
    cut = False
    while frontier:
        state = frontier.popleft()
        if all(state[i] == val for i, val in goal):
            steps = []
            while parent[state] is not None:
                state, key = parent[state]
                steps.append(key)
            return SolveResult(SOLVED, Plan(tuple(reversed(steps))), len(parent))
        d = depth[state]
        if config.max_plan_len is not None and d >= config.max_plan_len:
            cut = True
            continue
        for key, need, eff in compiled:
            if all(state[i] == val for i, val in need):
                nxt = list(state)
                for i, val in eff:
                    nxt[i] = val
                nxt = tuple(nxt)
                if nxt not in parent:
                    parent[nxt] = (state, key)
                    depth[nxt] = d + 1
                    if len(parent) > config.max_states:
                        return SolveResult(INDETERMINATE, None, len(parent), f"max_states={config.max_states}")
                    frontier.append(nxt)
    if cut:
        return SolveResult(INDETERMINATE, None, len(parent), f"max_plan_len={config.max_plan_len}")
    return SolveResult(UNSOLVABLE, None, len(parent))


@dataclass
class RcVerdict:
    solvable: bool | None
    rc: bool | None
    witness_plan: Plan | None
    per_agent_solvable: dict[str, bool | None]
    per_agent_plans: dict[str, Plan] = field(default_factory=dict)
    caps_hit: list[str] = field(default_factory=list)
    states: dict[str, int] = field(default_factory=dict)


def is_rc(problem: MapProblem, config: SearchConfig | None = None, team: SolveResult | None = None) -> RcVerdict:
    """Decide required cooperation: the team solves the problem and no single agent does."""
    team = team or solve(problem, problem.agents, config)
    caps = [f"team: {team.cap}"] if team.indeterminate else []
    per_agent, plans, states = {}, {}, {"team": team.states}
    for agent in problem.agents:
        res = solve(problem, [agent], config)
        per_agent[agent] = res.verdict
        states[agent] = res.states
        if res.solved:
            plans[agent] = res.plan
        if res.indeterminate:
            caps.append(f"{agent}: {res.cap}")
    singles = list(per_agent.values())
    if team.verdict is False:
        rc = False
    elif any(v is True for v in singles):
        rc = False
    elif team.verdict is None or any(v is None for v in singles):
        rc = None
    else:
        rc = True
    return RcVerdict(team.verdict, rc, team.plan, per_agent, plans, caps, states)


def agent_equivalence_classes(problem: MapProblem) -> list[list[str]]:
    """Group agents that are interchangeable for search.

    Agents match when they share AS and VS sets with equal domains, start in
    the same agent state, and are named by the same world variables initially.
    """
    classes: dict[tuple, list[str]] = {}
    for agent in problem.agents:
        vs = agent_variable_signatures(problem, agent)
        init = tuple(sorted((vs_token(problem, n), problem.init[n]) for n in problem.agent_vars(agent)))
        held = tuple(v for v in problem.world_vars if problem.init[v] == agent)
        key = (
            frozenset(agent_action_signatures(problem, agent)),
            frozenset((t, s.domain) for t, s in vs.items()),
            init,
            held,
        )
        classes.setdefault(key, []).append(agent)
    return list(classes.values())


def _class_multisets(sizes: list[int], k: int):
    """Counts per class summing to ``k``, each within its class size, in lexicographic order."""
    if not sizes:
        if k == 0:
            yield ()
        return
    for take in range(min(k, sizes[0]), -1, -1):
        for rest in _class_multisets(sizes[1:], k - take):
            yield (take,) + rest


def candidate_subsets(problem: MapProblem, k: int, prune: bool = True):
    if not prune:
        yield from (list(c) for c in combinations(problem.agents, k))
        return
    classes = agent_equivalence_classes(problem)
    for counts in _class_multisets([len(c) for c in classes], k):
        yield [a for cls, n in zip(classes, counts) for a in cls[:n]]


@dataclass
class MinimalK:
    k: int | None
    subset: list[str] | None
    plan: Plan | None
    caps_hit: list[str] = field(default_factory=list)


def minimal_k(problem: MapProblem, config: SearchConfig | None = None, prune: bool = True,
              team: SolveResult | None = None) -> MinimalK:
    """Smallest number of agents from the team that can solve the problem."""
    team = team or solve(problem, problem.agents, config)
    if team.verdict is False:
        raise ProblemError(errors.UNSOLVABLE_PROBLEM, "the full team cannot solve the problem")
    caps = [] if team.solved else [f"team: {team.cap}"]
    for k in range(1, len(problem.agents) + 1):
        capped = False
        for subset in candidate_subsets(problem, k, prune):
            if k == len(problem.agents):
                res = team
            else:
                res = solve(problem, subset, config)
            if res.solved:
                return MinimalK(k, subset, res.plan, caps)
            if res.indeterminate:
                capped = True
                caps.append(f"{'+'.join(subset)}: {res.cap}")
        if capped:
            return MinimalK(None, None, None, caps)
    return MinimalK(None, None, None, caps)


# -- bounds ------------------------------------------------------------------


def clone_team(problem: MapProblem, n: int) -> tuple[MapProblem, list[str], list[str]]:
    """A problem with ``n`` copies of the first agent, other agents removed.

    Returns the problem (initial agent states as in the representative) plus
    the clone names and the representative's agent variables. The first clones
    reuse the original agent names.
    """
    if not is_homogeneous_team(problem):
        raise ProblemError(errors.NOT_HOMOGENEOUS, "cloning the representative needs a homogeneous team")
    if n < 1:
        raise ProblemError(errors.STRUCTURAL, "team size must be at least 1")
    rep = problem.agents[0]
    originals = set(problem.agents)
    taken = {t for v in problem.variables for t in split_tokens(v.name)}
    clones = list(problem.agents[:n])
    i = 0
    while len(clones) < n:
        i += 1
        cand = f"{rep}_c{i}"
        if cand not in taken and cand not in originals:
            clones.append(cand)

    def world_domain(domain):
        out = []
        for d in domain:
            if d in originals:
                if not any(c in out for c in clones):
                    out.extend(clones)
            else:
                out.append(d)
        return tuple(dict.fromkeys(out))

    rep_vars = problem.agent_vars(rep)
    variables, init = [], {}
    for var in problem.variables:
        if var.agent is None:
            variables.append(Variable(var.name, world_domain(var.domain)))
            iv = problem.init[var.name]
            if iv in originals:
                pos = problem.agents.index(iv)
                if pos >= n:
                    raise ProblemError(errors.STRUCTURAL, f"{var.name} starts at agent {iv!r}, beyond the {n} clones")
                iv = clones[pos]
            init[var.name] = iv
    for clone in clones:
        for name in rep_vars:
            var = problem.variable(name)
            cname = substitute(name, rep, clone)
            variables.append(Variable(cname, var.domain, clone))
            init[cname] = problem.init[name]
    names = tuple(v.name for v in variables)
    actions = []
    for clone in clones:
        for act in problem.actions_of(rep):
            def conv(state):
                return {substitute(v, rep, clone): substitute(val, rep, clone) for v, val in state.defined().items()}

            actions.append(make_action(
                names, substitute(act.name, rep, clone), clone, conv(act.pre), conv(act.post), conv(act.prv),
                [substitute(c, rep, clone) for c in act.checked],
            ))
    goal = PartialState.from_mapping(names, problem.goal.defined())
    cloned = MapProblem(tuple(variables), tuple(clones), tuple(actions), PartialState.from_mapping(names, init), goal,
                        single_agent=n == 1)
    return cloned, clones, list(rep_vars)


def verify_bound(problem: MapProblem, n: int, config: SearchConfig | None = None,
                 max_assignments: int = 5_000) -> bool | None:
    """Whether ``n`` clones of the representative solve the problem for some choice of their initial states.

    World variables keep their initial values; agent states range over the
    representative's agent-variable domains, up to permutation of clones.
    Assignments using more distinct states are tried first.
    """
    cloned, clones, rep_vars = clone_team(problem, n)
    rep = problem.agents[0]
    agent_states = list(product(*(problem.variable(v).domain for v in rep_vars)))
    if comb(len(agent_states) + n - 1, n) > max_assignments:
        log.info("verify_bound: too many initial-state assignments for n=%d", n)
        return None
    assignments = combinations_with_replacement(range(len(agent_states)), n)
    ordered = sorted(assignments, key=lambda a: (-len(set(a)), a))
    saw_cap = False
    base = cloned.init.defined()
    for assignment in ordered:
        init = dict(base)
        for clone, state_idx in zip(clones, assignment):
            for var, val in zip(rep_vars, agent_states[state_idx]):
                init[substitute(var, rep, clone)] = val
        trial = replace(cloned, init=PartialState.from_mapping(cloned.names, init))
        res = solve(trial, clones, config)
        if res.solved:
            return True
        if res.indeterminate:
            saw_cap = True
    return None if saw_cap else False

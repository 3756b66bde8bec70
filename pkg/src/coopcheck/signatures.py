"""Action and variable signatures, heterogeneity conditions, and the super agent."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from itertools import product

from coopcheck import errors
from coopcheck.errors import ProblemError
from coopcheck.model import Action, MapProblem, PartialState, Variable, make_action, substitute

EX_AG = "EX-AG"


@dataclass(frozen=True)
class VariableSignature:
    token: str
    domain: tuple[str, ...]


@dataclass(frozen=True)
class ActionSignature:
    """An action with its executing agent abstracted to ``EX-AG``.

    Conditions are stored as sorted ``(variable signature, value)`` pairs so
    that signatures compare and hash by content.
    """

    name: str
    pre: tuple[tuple[str, str], ...]
    post: tuple[tuple[str, str], ...]
    prv: tuple[tuple[str, str], ...]
    checked: tuple[str, ...] = ()

    def as_dicts(self) -> tuple[dict[str, str], dict[str, str], dict[str, str]]:
        return dict(self.pre), dict(self.post), dict(self.prv)

    def __str__(self) -> str:
        return self.name


def _sig_value(value: str, agent_names) -> str:
    return EX_AG if value in agent_names else value


def _dedup(values) -> tuple[str, ...]:
    return tuple(dict.fromkeys(values))


def variable_signature(var: Variable, owner: str | None = None, agent_names=()) -> VariableSignature:
    """Signature of ``var``: its owner's name becomes ``EX-AG`` in the name and domain.

    Values of any variable that name an agent in ``agent_names`` also map to
    ``EX-AG`` (duplicates collapse), so that agent-valued world variables
    compare across agents.
    """
    if owner is not None and var.agent is not None and var.agent != owner:
        raise ProblemError(errors.STRUCTURAL, f"variable {var.name!r} belongs to {var.agent!r}, not {owner!r}")
    names = set(agent_names)
    if var.agent is not None:
        names.add(var.agent)
    token = substitute(var.name, var.agent, EX_AG) if var.agent is not None else var.name
    domain = _dedup(_sig_value(v, names) for v in var.domain)
    return VariableSignature(token, domain)


def vs_token(problem: MapProblem, name: str) -> str:
    """The VS operator: agent variables lose their agent reference, others are unchanged."""
    var = problem.variable(name)
    return substitute(var.name, var.agent, EX_AG) if var.agent is not None else var.name


def action_signature(problem: MapProblem, action: Action) -> ActionSignature:
    owner = action.agent

    def conv(state):
        items = []
        for v, val in state.defined().items():
            items.append((vs_token(problem, v), substitute(val, owner, EX_AG)))
        return tuple(sorted(items))

    checked = tuple(sorted(vs_token(problem, v) for v in action.checked))
    return ActionSignature(substitute(action.name, owner, EX_AG), conv(action.pre), conv(action.post), conv(action.prv), checked)


def agent_action_signatures(problem: MapProblem, agent: str) -> list[ActionSignature]:
    """AS(agent) in file order, without duplicates."""
    return list(dict.fromkeys(action_signature(problem, a) for a in problem.actions_of(agent)))


def agent_variable_signatures(problem: MapProblem, agent: str) -> dict[str, VariableSignature]:
    """VS(agent): token -> signature, in file order."""
    out = {}
    for name in problem.agent_vars(agent):
        sig = variable_signature(problem.variable(name), agent, problem.agents)
        out[sig.token] = sig
    return out


@dataclass(frozen=True)
class DhWitness:
    variable: str
    signature: str
    extra_values: tuple[str, ...]


@dataclass
class HeterogeneityReport:
    dh: dict[str, list[DhWitness]]
    vh: dict[str, list[str]]
    ch: dict[str, list[ActionSignature]]
    single_valued: list[str] = field(default_factory=list)

    @property
    def dvc(self) -> bool:
        return any(self.dh.values()) or any(self.vh.values()) or any(self.ch.values())

    def to_dict(self) -> dict:
        return {
            "dvc": self.dvc,
            "dh": {a: [{"variable": w.variable, "signature": w.signature, "extra_values": list(w.extra_values)} for w in ws]
                   for a, ws in self.dh.items()},
            "vh": {a: list(ws) for a, ws in self.vh.items()},
            "ch": {a: [s.name for s in ws] for a, ws in self.ch.items()},
            "single_valued": list(self.single_valued),
        }


def check_dh(problem: MapProblem) -> dict[str, list[DhWitness]]:
    """Domain heterogeneity: an agent variable holding a value no same-VS variable of another agent has.

    A VS that no other agent possesses is left to VH.
    """
    sigs = {a: agent_variable_signatures(problem, a) for a in problem.agents}
    names_by_vs = {a: {vs_token(problem, n): n for n in problem.agent_vars(a)} for a in problem.agents}
    out = {}
    for agent in problem.agents:
        witnesses = []
        for token, sig in sigs[agent].items():
            others = [sigs[o][token].domain for o in problem.agents if o != agent and token in sigs[o]]
            if not others:
                continue
            covered = set().union(*others)
            extra = tuple(v for v in sig.domain if v not in covered)
            if extra:
                witnesses.append(DhWitness(names_by_vs[agent][token], token, extra))
        out[agent] = witnesses
    return out


def check_vh(problem: MapProblem) -> dict[str, list[str]]:
    """Variable heterogeneity: VSs of an agent that no other agent has."""
    vs = {a: list(agent_variable_signatures(problem, a)) for a in problem.agents}
    out = {}
    for agent in problem.agents:
        rest = set().union(*(vs[o] for o in problem.agents if o != agent))
        out[agent] = [t for t in vs[agent] if t not in rest]
    return out


def check_ch(problem: MapProblem) -> dict[str, list[ActionSignature]]:
    """Capability heterogeneity: action signatures of an agent that no other agent has."""
    sigs = {a: agent_action_signatures(problem, a) for a in problem.agents}
    out = {}
    for agent in problem.agents:
        rest = set().union(*(sigs[o] for o in problem.agents if o != agent))
        out[agent] = [s for s in sigs[agent] if s not in rest]
    return out


def check_dvc(problem: MapProblem) -> HeterogeneityReport:
    single = []
    for agent in problem.agents:
        for token, sig in agent_variable_signatures(problem, agent).items():
            if len(sig.domain) == 1 and token not in single:
                single.append(token)
    return HeterogeneityReport(check_dh(problem), check_vh(problem), check_ch(problem), single)


def is_homogeneous_team(problem: MapProblem) -> bool:
    """True iff every agent has the same AS set, VS set, and per-VS domains."""
    profiles = []
    for agent in problem.agents:
        vs = {t: s.domain for t, s in agent_variable_signatures(problem, agent).items()}
        profiles.append((frozenset(agent_action_signatures(problem, agent)), frozenset(vs.items())))
    return all(p == profiles[0] for p in profiles[1:])


# -- super agent -----------------------------------------------------------

SUPER_AGENT = "superagent"


def _vs_members(problem: MapProblem) -> dict[str, list[str]]:
    """VS token -> agent variables carrying it, keyed in first-appearance order."""
    out: dict[str, list[str]] = {}
    for var in problem.variables:
        if var.agent is not None:
            out.setdefault(vs_token(problem, var.name), []).append(var.name)
    return out


def super_agent_init_candidates(problem: MapProblem) -> dict[str, list[str]]:
    """For each VS, the distinct initial values the agents sharing it start with."""
    agents = set(problem.agents)
    return {
        token: list(dict.fromkeys(_sig_value(problem.init[n], agents) for n in members))
        for token, members in _vs_members(problem).items()
    }


def build_super_agent(problem: MapProblem, init_choice: Mapping[str, str] | None = None,
                      name: str = SUPER_AGENT) -> MapProblem:
    """Merge every agent into one agent owning all VSs, the union of domains, and AS(Φ).

    Agent initial states cannot be merged: where agents sharing a VS start
    with different values, ``init_choice`` (VS token -> value) must decide.
    """
    init_choice = dict(init_choice or {})
    agents = set(problem.agents)
    if name in agents or any(name in v.name for v in problem.variables):
        raise ProblemError(errors.DUPLICATE_NAME, f"super agent name {name!r} collides with the problem")

    def to_super(value: str) -> str:
        return name if value in agents or value == EX_AG else value

    def var_name(token: str) -> str:
        return substitute(token, EX_AG, name)

    members = _vs_members(problem)
    candidates = super_agent_init_candidates(problem)
    variables, init, done = [], {}, set()
    for var in problem.variables:
        if var.agent is None:
            variables.append(Variable(var.name, _dedup(to_super(v) for v in var.domain)))
            init[var.name] = to_super(problem.init[var.name])
            continue
        token = vs_token(problem, var.name)
        if token in done:
            continue
        done.add(token)
        domain = _dedup(to_super(v) for m in members[token] for v in problem.variable(m).domain)
        sname = var_name(token)
        variables.append(Variable(sname, domain, name))
        values = [to_super(c) for c in candidates[token]]
        if len(values) == 1:
            init[sname] = values[0]
        else:
            chosen = init_choice.get(token, init_choice.get(sname))
            if chosen is None:
                raise ProblemError(
                    errors.SUPERAGENT_INIT_AMBIGUOUS, f"agents start {token} at different values {values}; choose one"
                )
            if chosen not in domain:
                raise ProblemError(errors.VALUE_OUT_OF_DOMAIN, f"super agent initial value {chosen!r} not in {domain}")
            init[sname] = chosen
    names = tuple(v.name for v in variables)
    sigs = list(dict.fromkeys(action_signature(problem, a) for a in problem.actions))
    actions, used = [], {}
    for sig in sigs:
        def conv(items):
            return {var_name(v): to_super(val) for v, val in items}

        # distinct signatures may share a name (same label, different prevails)
        aname = var_name(sig.name)
        used[aname] = used.get(aname, 0) + 1
        if used[aname] > 1:
            aname = f"{aname}#{used[aname]}"
        actions.append(make_action(
            names, aname, name, pre=conv(sig.pre), post=conv(sig.post), prv=conv(sig.prv),
            checked=[var_name(c) for c in sig.checked],
        ))
    goal = {v: to_super(val) for v, val in problem.goal.defined().items()}
    return MapProblem(tuple(variables), (name,), tuple(actions), PartialState.from_mapping(names, init),
                      PartialState.from_mapping(names, goal), single_agent=True)


@dataclass
class SuperAgentResult:
    solvable: bool | None
    init_choice: dict[str, str]
    plan: object = None
    tried: int = 0


def is_super_agent_solvable(problem: MapProblem, config=None, init_choice: Mapping[str, str] | None = None
                            ) -> SuperAgentResult:
    """Whether the merged super agent alone solves the problem.

    Without ``init_choice``, every combination of the agents' own initial
    values is tried for ambiguous VSs; the first that succeeds is reported.
    """
    from coopcheck.oracle import solve

    given = dict(init_choice or {})
    ambiguous = {t: vals for t, vals in super_agent_init_candidates(problem).items() if len(vals) > 1 and t not in given}
    tokens = list(ambiguous)
    saw_cap = False
    tried = 0
    for combo in product(*(ambiguous[t] for t in tokens)):
        choice = {**given, **dict(zip(tokens, combo))}
        sup = build_super_agent(problem, choice)
        tried += 1
        res = solve(sup, sup.agents, config)
        if res.solved:
            return SuperAgentResult(True, choice, res.plan, tried)
        if res.indeterminate:
            saw_cap = True
    return SuperAgentResult(None if saw_cap else False, given, None, tried)

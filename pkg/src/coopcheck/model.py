"""SAS+ multi-agent planning model: partial states, actions, problems and plans.

The undefined value is represented by ``None`` (exported as ``U``). Partial
states are immutable mappings over a fixed, ordered tuple of variable names.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

from coopcheck import errors
from coopcheck.errors import ProblemError

U = None
#: Reserved token for the undefined value in documents; never a domain value.
U_TOKEN = "u"

_TOKEN_SPLIT = re.compile(r"([(),\s])")


def split_tokens(text: str) -> list[str]:
    """Split a structured name ``op(a, b)`` into atoms and delimiters."""
    return [t for t in _TOKEN_SPLIT.split(text) if t != ""]


def mentions(text: str, token: str) -> bool:
    return token in split_tokens(text)


def substitute(text: str, old: str, new: str) -> str:
    """Replace every atom equal to ``old`` inside a structured name."""
    return "".join(new if t == old else t for t in split_tokens(text))


@lru_cache(maxsize=None)
def _index_of(names: tuple[str, ...]) -> dict[str, int]:
    return {n: i for i, n in enumerate(names)}


class PartialState(Mapping):
    """Assignment of a value or ``U`` to every variable of a fixed variable tuple."""

    __slots__ = ("_names", "_values")

    def __init__(self, names: Sequence[str], values: Sequence[str | None] | None = None):
        names = tuple(names)
        if values is None:
            values = (U,) * len(names)
        values = tuple(values)
        if len(values) != len(names):
            raise ProblemError(errors.STRUCTURAL, "state has a different number of values than variables")
        self._names = names
        self._values = values

    @classmethod
    def from_mapping(cls, names: Sequence[str], mapping: Mapping[str, str | None]) -> PartialState:
        names = tuple(names)
        index = _index_of(names)
        values: list[str | None] = [U] * len(names)
        for key, value in mapping.items():
            if key not in index:
                raise ProblemError(errors.UNKNOWN_VARIABLE, f"unknown variable {key!r}")
            values[index[key]] = None if value == U_TOKEN else value
        return cls(names, values)

    @property
    def names(self) -> tuple[str, ...]:
        return self._names

    @property
    def values(self) -> tuple[str | None, ...]:
        return self._values

    def __getitem__(self, name: str) -> str | None:
        try:
            return self._values[_index_of(self._names)[name]]
        except KeyError:
            raise KeyError(name) from None

    def __iter__(self) -> Iterator[str]:
        return iter(self._names)

    def __len__(self) -> int:
        return len(self._names)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PartialState):
            return NotImplemented
        return self._names == other._names and self._values == other._values

    def __hash__(self) -> int:
        return hash((self._names, self._values))

    def __repr__(self) -> str:
        return f"PartialState({self.defined()!r})"

    def defined(self) -> dict[str, str]:
        """The non-``U`` entries, in variable order."""
        return {n: v for n, v in zip(self._names, self._values) if v is not U}

    def is_total(self) -> bool:
        return all(v is not U for v in self._values)


def _check_same_vars(s1: PartialState, s2: PartialState) -> None:
    if s1.names != s2.names:
        raise ProblemError(errors.STRUCTURAL, "states are defined over different variable sets")


def update(s1: PartialState, s2: PartialState) -> PartialState:
    """``s1`` updated by ``s2``: defined entries of ``s2`` overwrite ``s1``."""
    _check_same_vars(s1, s2)
    return PartialState(s1.names, [b if b is not U else a for a, b in zip(s1.values, s2.values)])


def join(s1: PartialState, s2: PartialState) -> PartialState:
    """Pointwise join; only defined where at least one side is ``U`` on every variable."""
    _check_same_vars(s1, s2)
    out = []
    for name, a, b in zip(s1.names, s1.values, s2.values):
        if a is not U and b is not U:
            raise ProblemError(errors.JOIN_CONFLICT, f"both states define {name!r}")
        out.append(a if a is not U else b)
    return PartialState(s1.names, out)


def subsumes(s1: PartialState, s2: PartialState) -> bool:
    """True iff every defined entry of ``s1`` agrees with ``s2``."""
    _check_same_vars(s1, s2)
    return all(a is U or a == b for a, b in zip(s1.values, s2.values))


@dataclass(frozen=True)
class Variable:
    name: str
    domain: tuple[str, ...]
    agent: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(self.domain))
        if not self.domain:
            raise ProblemError(errors.INVALID_DOMAIN, f"variable {self.name!r} has an empty domain")
        if len(set(self.domain)) != len(self.domain):
            raise ProblemError(errors.INVALID_DOMAIN, f"variable {self.name!r} has duplicate domain values")
        if U_TOKEN in self.domain or U in self.domain:
            raise ProblemError(errors.INVALID_DOMAIN, f"variable {self.name!r} declares the undefined value in its domain")

    @property
    def is_agent_variable(self) -> bool:
        return self.agent is not None


@dataclass(frozen=True)
class Action:
    """A ground action owned by one agent.

    ``checked`` lists variables whose precondition is only tested, not paired
    with a postcondition. Such preconditions behave like prevail conditions.
    """

    name: str
    agent: str
    pre: PartialState
    post: PartialState
    prv: PartialState
    checked: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "checked", frozenset(self.checked))
        label = f"action {self.name!r} of {self.agent!r}"
        if not (self.pre.names == self.post.names == self.prv.names):
            raise ProblemError(errors.STRUCTURAL, f"{label}: conditions over different variable sets")
        post = self.post.defined()
        pre = self.pre.defined()
        prv = self.prv.defined()
        if not post:
            raise ProblemError(errors.INVALID_ACTION, f"{label}: postcondition is empty")
        for v in prv:
            if v in post:
                raise ProblemError(errors.INVALID_ACTION, f"{label}: {v!r} is both prevail and updated")
            if v in pre:
                raise ProblemError(errors.INVALID_ACTION, f"{label}: {v!r} is both precondition and prevail")
        for v in pre:
            if v not in post and v not in self.checked:
                raise ProblemError(
                    errors.INVALID_ACTION, f"{label}: precondition on {v!r} has no postcondition and is not flagged checked"
                )
        for v in self.checked:
            if v not in pre:
                raise ProblemError(errors.INVALID_ACTION, f"{label}: checked variable {v!r} has no precondition")
            if v in post:
                raise ProblemError(errors.INVALID_ACTION, f"{label}: checked variable {v!r} is also updated")

    @property
    def key(self) -> tuple[str, str]:
        return (self.name, self.agent)

    def requirement(self) -> PartialState:
        """``pre ⊔ prv``: the values a state must hold for the action to apply."""
        return join(self.pre, self.prv)

    def prevail_like(self) -> dict[str, str]:
        """Prevail conditions plus checked-only preconditions."""
        out = self.prv.defined()
        for v in self.checked:
            out[v] = self.pre[v]
        return out


def make_action(
    names: Sequence[str],
    name: str,
    agent: str,
    pre: Mapping[str, str] | None = None,
    post: Mapping[str, str] | None = None,
    prv: Mapping[str, str] | None = None,
    checked: Iterable[str] = (),
) -> Action:
    names = tuple(names)
    return Action(
        name,
        agent,
        PartialState.from_mapping(names, pre or {}),
        PartialState.from_mapping(names, post or {}),
        PartialState.from_mapping(names, prv or {}),
        frozenset(checked),
    )


@dataclass(frozen=True)
class Agent:
    name: str
    actions: tuple[Action, ...]
    agent_vars: tuple[str, ...]


@dataclass(frozen=True)
class Plan:
    """Ordered ``(action name, agent)`` steps."""

    steps: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple((str(a), str(g)) for a, g in self.steps))

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __add__(self, other: Plan) -> Plan:
        return Plan(self.steps + other.steps)

    def agents(self) -> set[str]:
        return {g for _, g in self.steps}


@dataclass(frozen=True)
class MapProblem:
    """A ground SAS+ multi-agent planning problem.

    ``single_agent`` marks derived artifacts (super-agent problems, reduction
    inputs) that are allowed to have one agent.
    """

    variables: tuple[Variable, ...]
    agents: tuple[str, ...]
    actions: tuple[Action, ...]
    init: PartialState
    goal: PartialState
    single_agent: bool = False

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "agents", tuple(self.agents))
        object.__setattr__(self, "actions", tuple(self.actions))
        self._validate()

    # -- validation -------------------------------------------------------
    def _validate(self) -> None:
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ProblemError(errors.DUPLICATE_NAME, "duplicate variable names")
        if len(set(self.agents)) != len(self.agents):
            raise ProblemError(errors.DUPLICATE_NAME, "duplicate agent names")
        if not self.agents:
            raise ProblemError(errors.NEEDS_MULTIPLE_AGENTS, "problem declares no agents")
        if len(self.agents) < 2 and not self.single_agent:
            raise ProblemError(errors.NEEDS_MULTIPLE_AGENTS, "a multi-agent problem needs more than one agent")
        agent_set = set(self.agents)
        for var in self.variables:
            refs = [t for t in split_tokens(var.name) if t in agent_set]
            if len(set(refs)) > 1:
                raise ProblemError(errors.MULTI_AGENT_REFERENCE, f"variable {var.name!r} references several agents")
            if var.agent is not None:
                if var.agent not in agent_set:
                    raise ProblemError(errors.UNKNOWN_AGENT, f"variable {var.name!r} names unknown agent {var.agent!r}")
                if refs and refs[0] != var.agent:
                    raise ProblemError(
                        errors.MULTI_AGENT_REFERENCE, f"variable {var.name!r} is owned by {var.agent!r} but names {refs[0]!r}"
                    )
            elif refs:
                raise ProblemError(
                    errors.MULTI_AGENT_REFERENCE, f"variable {var.name!r} names agent {refs[0]!r} but is not declared as its variable"
                )
        names_t = tuple(names)
        for label, state in (("init", self.init), ("goal", self.goal)):
            if state.names != names_t:
                raise ProblemError(errors.STRUCTURAL, f"{label} is not defined over the problem variables")
        for var in self.variables:
            iv = self.init[var.name]
            if iv is U:
                raise ProblemError(errors.INIT_INCOMPLETE, f"initial state leaves {var.name!r} undefined")
            if iv not in var.domain:
                raise ProblemError(errors.VALUE_OUT_OF_DOMAIN, f"initial value {iv!r} of {var.name!r} outside its domain")
            gv = self.goal[var.name]
            if gv is not U:
                if var.agent is not None:
                    raise ProblemError(errors.GOAL_ON_AGENT_VAR, f"goal sets agent variable {var.name!r}")
                if gv not in var.domain:
                    raise ProblemError(errors.VALUE_OUT_OF_DOMAIN, f"goal value {gv!r} of {var.name!r} outside its domain")
        seen = set()
        domains = {v.name: v.domain for v in self.variables}
        owner = {v.name: v.agent for v in self.variables}
        for act in self.actions:
            if act.agent not in agent_set:
                raise ProblemError(errors.UNKNOWN_AGENT, f"action {act.name!r} owned by unknown agent {act.agent!r}")
            if act.key in seen:
                raise ProblemError(errors.DUPLICATE_NAME, f"duplicate action {act.name!r} for {act.agent!r}")
            seen.add(act.key)
            if act.pre.names != names_t:
                raise ProblemError(errors.STRUCTURAL, f"action {act.name!r} is not defined over the problem variables")
            for part in (act.pre, act.post, act.prv):
                for v, val in part.defined().items():
                    if val not in domains[v]:
                        raise ProblemError(
                            errors.VALUE_OUT_OF_DOMAIN, f"action {act.name!r}: value {val!r} outside domain of {v!r}"
                        )
                    if owner[v] is not None and owner[v] != act.agent:
                        raise ProblemError(
                            errors.FOREIGN_AGENT_VARIABLE,
                            f"action {act.name!r} of {act.agent!r} touches {v!r}, an agent variable of {owner[v]!r}",
                        )

    # -- views --------------------------------------------------------------
    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @cached_property
    def variable_map(self) -> dict[str, Variable]:
        return {v.name: v for v in self.variables}

    def variable(self, name: str) -> Variable:
        try:
            return self.variable_map[name]
        except KeyError:
            raise ProblemError(errors.UNKNOWN_VARIABLE, f"unknown variable {name!r}") from None

    @cached_property
    def _action_map(self) -> dict[tuple[str, str], Action]:
        return {a.key: a for a in self.actions}

    def action(self, name: str, agent: str) -> Action:
        try:
            return self._action_map[(name, agent)]
        except KeyError:
            if agent not in self.agents:
                raise ProblemError(errors.UNKNOWN_AGENT, f"unknown agent {agent!r}") from None
            raise ProblemError(errors.UNKNOWN_ACTION, f"agent {agent!r} has no action {name!r}") from None

    def actions_of(self, agent: str) -> tuple[Action, ...]:
        return tuple(a for a in self.actions if a.agent == agent)

    def agent_vars(self, agent: str) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables if v.agent == agent)

    def agent(self, name: str) -> Agent:
        if name not in self.agents:
            raise ProblemError(errors.UNKNOWN_AGENT, f"unknown agent {name!r}")
        return Agent(name, self.actions_of(name), self.agent_vars(name))

    @cached_property
    def world_vars(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables if v.agent is None)

    def state(self, mapping: Mapping[str, str | None]) -> PartialState:
        return PartialState.from_mapping(self.names, mapping)


def _resolve(problem: MapProblem, step: tuple[str, str]) -> Action:
    name, agent = step
    return problem.action(name, agent)


@dataclass(frozen=True)
class ExecutionResult:
    state: PartialState
    skipped: tuple[int, ...]


def execute(problem: MapProblem, state: PartialState, plan: Plan) -> ExecutionResult:
    """Run ``plan`` from ``state``; inapplicable steps leave the state unchanged.

    Skipped step indices are recorded so that callers can reject such plans.
    """
    if state.names != problem.names:
        raise ProblemError(errors.STRUCTURAL, "state is not defined over the problem variables")
    current = state
    skipped = []
    for i, step in enumerate(plan.steps):
        act = _resolve(problem, step)
        if subsumes(act.requirement(), current):
            current = update(current, act.post)
        else:
            skipped.append(i)
    return ExecutionResult(current, tuple(skipped))


@dataclass(frozen=True)
class ValidationResult:
    valid: bool
    final_state: PartialState
    failed_step: int | None = None
    reason: str | None = None


def validate_plan(problem: MapProblem, plan: Plan) -> ValidationResult:
    """Valid iff every step applies in turn and the goal holds at the end."""
    current = problem.init
    for i, step in enumerate(plan.steps):
        act = _resolve(problem, step)
        need = act.requirement()
        if not subsumes(need, current):
            bad = next(v for v, val in need.defined().items() if current[v] != val)
            reason = f"step {i} {act.name} by {act.agent}: requires {bad}={need[bad]} but state has {current[bad]}"
            return ValidationResult(False, current, i, reason)
        current = update(current, act.post)
    if not subsumes(problem.goal, current):
        unmet = [f"{v}={val}" for v, val in problem.goal.defined().items() if current[v] != val]
        return ValidationResult(False, current, None, "goal unmet: " + ", ".join(unmet))
    return ValidationResult(True, current)

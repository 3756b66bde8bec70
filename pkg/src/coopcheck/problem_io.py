"""JSON problem documents: parsing with coded errors, and serialization."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from coopcheck import errors
from coopcheck.errors import ProblemError
from coopcheck.model import MapProblem, PartialState, Plan, Variable, make_action, split_tokens


def _expect(obj: Any, kind: type, where: str):
    if not isinstance(obj, kind):
        raise ProblemError(errors.SCHEMA, f"{where} must be a {kind.__name__}")
    return obj


def _conditions(raw: Any, where: str) -> dict[str, str]:
    if raw is None:
        return {}
    _expect(raw, dict, where)
    for k, v in raw.items():
        if not isinstance(v, str):
            raise ProblemError(errors.SCHEMA, f"{where}[{k!r}] must be a string")
    return dict(raw)


def problem_from_dict(data: Any) -> MapProblem:
    _expect(data, dict, "document")
    for key in ("agents", "variables", "actions", "init"):
        if key not in data:
            raise ProblemError(errors.SCHEMA, f"document is missing {key!r}")
    agents = [str(a) for a in _expect(data["agents"], list, "agents")]
    agent_set = set(agents)

    variables = []
    for i, raw in enumerate(_expect(data["variables"], list, "variables")):
        _expect(raw, dict, f"variables[{i}]")
        name = raw.get("name")
        if not isinstance(name, str):
            raise ProblemError(errors.SCHEMA, f"variables[{i}] needs a string name")
        domain = [str(x) for x in _expect(raw.get("domain"), list, f"domain of {name!r}")]
        agent = raw.get("agent")
        if isinstance(agent, list):
            if len(agent) != 1:
                raise ProblemError(errors.MULTI_AGENT_REFERENCE, f"variable {name!r} references {len(agent)} agents")
            agent = agent[0]
        if agent is None:
            # agent references are detected by token match against declared agents
            refs = sorted({t for t in split_tokens(name) if t in agent_set})
            if len(refs) > 1:
                raise ProblemError(errors.MULTI_AGENT_REFERENCE, f"variable {name!r} references agents {refs}")
            agent = refs[0] if refs else None
        variables.append(Variable(name, tuple(domain), agent))
    names = tuple(v.name for v in variables)

    actions = []
    for i, raw in enumerate(_expect(data["actions"], list, "actions")):
        _expect(raw, dict, f"actions[{i}]")
        name, agent = raw.get("name"), raw.get("agent")
        if not isinstance(name, str) or not isinstance(agent, str):
            raise ProblemError(errors.SCHEMA, f"actions[{i}] needs string name and agent")
        if agent not in agent_set:
            raise ProblemError(errors.UNKNOWN_AGENT, f"action {name!r} owned by unknown agent {agent!r}")
        actions.append(
            make_action(
                names,
                name,
                agent,
                pre=_conditions(raw.get("pre"), f"{name}.pre"),
                post=_conditions(raw.get("post"), f"{name}.post"),
                prv=_conditions(raw.get("prv"), f"{name}.prv"),
                checked=[str(c) for c in raw.get("checked", [])],
            )
        )
    init = PartialState.from_mapping(names, _conditions(data["init"], "init"))
    goal = PartialState.from_mapping(names, _conditions(data.get("goal"), "goal"))
    return MapProblem(tuple(variables), tuple(agents), tuple(actions), init, goal, bool(data.get("single_agent", False)))


def parse_problem(text: str) -> MapProblem:
    """Parse a JSON problem document.

    Raises ProblemError with code SYNTAX (carrying line/column) for malformed
    JSON, and a distinct semantic code for every model invariant violation.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(errors.SYNTAX, exc.msg, exc.lineno, exc.colno) from None
    return problem_from_dict(data)


def load_problem(path: str | Path) -> MapProblem:
    return parse_problem(Path(path).read_text(encoding="utf-8"))


def problem_to_dict(problem: MapProblem) -> dict[str, Any]:
    out: dict[str, Any] = {"agents": list(problem.agents), "variables": []}
    for v in problem.variables:
        entry: dict[str, Any] = {"name": v.name, "domain": list(v.domain)}
        if v.agent is not None:
            entry["agent"] = v.agent
        out["variables"].append(entry)
    out["actions"] = []
    for a in problem.actions:
        entry = {"name": a.name, "agent": a.agent}
        for part in ("pre", "post", "prv"):
            values = getattr(a, part).defined()
            if values:
                entry[part] = values
        if a.checked:
            entry["checked"] = [n for n in problem.names if n in a.checked]
        out["actions"].append(entry)
    out["init"] = problem.init.defined()
    out["goal"] = problem.goal.defined()
    if problem.single_agent:
        out["single_agent"] = True
    return out


def serialize_problem(problem: MapProblem) -> str:
    return json.dumps(problem_to_dict(problem), indent=2) + "\n"


def plan_to_list(plan: Plan) -> list[dict[str, str]]:
    return [{"action": a, "agent": g} for a, g in plan.steps]


def plan_from_list(raw: list[dict[str, str]]) -> Plan:
    return Plan(tuple((s["action"], s["agent"]) for s in raw))

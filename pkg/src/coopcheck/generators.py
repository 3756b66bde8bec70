"""Derived test instances: the reduction probe and seeded random problems."""

from __future__ import annotations

import random
from dataclasses import dataclass

from coopcheck import errors
from coopcheck.errors import ProblemError
from coopcheck.fixtures import ProblemBuilder
from coopcheck.model import MapProblem, subsumes

PROBE_PREFIX = "__probe_"


def build_rc_probe(single: MapProblem) -> MapProblem:
    """Add a second agent whose only action reaches the goal directly.

    That action needs a fresh fluent which only the original agent's
    (lexicographically first) initially applicable action can set. The result
    is always solvable, and needs cooperation exactly when ``single`` is
    unsolvable.
    """
    if len(single.agents) != 1:
        raise ProblemError(errors.STRUCTURAL, "the probe needs a single-agent problem")
    agent = single.agents[0]
    applicable = sorted(
        (a for a in single.actions if subsumes(a.requirement(), single.init)), key=lambda a: a.name
    )
    if not applicable:
        raise ProblemError(errors.GADGET_UNBUILDABLE, "no action of the agent is applicable in the initial state")
    trigger = applicable[0]
    helper = f"{PROBE_PREFIX}agent"
    fluent = f"{PROBE_PREFIX}fluent"
    done = f"{PROBE_PREFIX}done"
    b = ProblemBuilder((agent, helper))
    for var in single.variables:
        b.var(var.name, var.domain, single.init[var.name], agent=var.agent)
    b.var(fluent, ("false", "true"), "false")
    b.var(done, ("false", "true"), "false")
    b.goal = single.goal.defined()
    for act in single.actions:
        post = act.post.defined()
        if act is trigger:
            post[fluent] = "true"
        b.action(act.name, agent, pre=act.pre.defined(), post=post, prv=act.prv.defined(), checked=act.checked)
    b.action(f"{PROBE_PREFIX}achieve({helper})", helper, prv={fluent: "true"}, post={**single.goal.defined(), done: "true"})
    return b.build()


@dataclass(frozen=True)
class GeneratorProfile:
    """Size and shape knobs for ``random_instance``.

    ``structure`` selects how transitions are drawn:

    - ``"random"``: arbitrary pre/post/prevail combinations;
    - ``"layered"``: prevail conditions only point from earlier to later
      variables, and every value of every variable can be set, which favours
      traversable, loop-free graphs;
    - ``"agent-loops"``: like layered for world variables, but world actions
      may be conditioned on agent variables and agent moves on world
      variables, so loops only pass through agent variables and no action
      updates an agent variable together with anything else.
    """

    n_agents: int = 2
    n_world_vars: int = 3
    n_agent_vars: int = 1
    max_values: int = 3
    n_schemas: int = 6
    homogeneous: bool = True
    single_agent: bool = False
    structure: str = "random"
    prv_prob: float = 0.4
    goal_size: int = 1

    def __post_init__(self):
        if self.n_world_vars + self.n_agent_vars > 6 or self.n_world_vars < 1:
            raise ValueError("profile allows 1..6 variables")
        if not 2 <= self.max_values <= 4:
            raise ValueError("profile allows 2..4 values per domain")
        agents = 1 if self.single_agent else self.n_agents
        if not 1 <= agents <= 4 or (not self.single_agent and agents < 2):
            raise ValueError("profile allows 2..4 agents (or a single agent)")
        if not 1 <= self.n_schemas <= 12:
            raise ValueError("profile allows 1..12 action schemas")
        if self.structure not in ("random", "layered", "agent-loops"):
            raise ValueError(f"unknown structure {self.structure!r}")


def random_instance(seed: int, profile: GeneratorProfile = GeneratorProfile()) -> MapProblem:
    """A deterministic pseudo-random problem for property tests.

    Agent variables are written ``a<i>(<agent>)`` and world variables ``w<i>``;
    world values never name agents.
    """
    rng = random.Random(seed)
    n_agents = 1 if profile.single_agent else profile.n_agents
    agents = [f"ag{i}" for i in range(1, n_agents + 1)]
    world = [f"w{i}" for i in range(profile.n_world_vars)]
    world_dom = {w: tuple(f"d{j}" for j in range(rng.randint(2, profile.max_values))) for w in world}
    agent_vs = [f"a{i}" for i in range(profile.n_agent_vars)]
    vs_dom = {a: tuple(f"s{j}" for j in range(rng.randint(2, profile.max_values))) for a in agent_vs}

    # per-agent view of VSs (heterogeneous teams may drop a VS or a value)
    agent_view: dict[str, dict[str, tuple[str, ...]]] = {}
    for ag in agents:
        view = dict(vs_dom)
        if not profile.homogeneous and ag != agents[0]:
            for a in agent_vs:
                roll = rng.random()
                if roll < 0.25:
                    del view[a]
                elif roll < 0.5 and len(view[a]) > 2:
                    view[a] = view[a][:-1]
        agent_view[ag] = view

    b = ProblemBuilder(agents)
    for ag in agents:
        for a, dom in agent_view[ag].items():
            b.var(f"{a}({ag})", dom, rng.choice(dom), agent=ag)
    for w in world:
        b.var(w, world_dom[w], rng.choice(world_dom[w]))
    goal_vars = rng.sample(world, min(profile.goal_size, len(world)))
    b.goal = {w: rng.choice(world_dom[w]) for w in goal_vars}

    schemas = _schemas(rng, profile, world, world_dom, agent_vs, vs_dom)
    for ag in agents:
        view = agent_view[ag]
        allowed = schemas if profile.homogeneous or ag == agents[0] else [s for s in schemas if rng.random() < 0.8]
        for label, pre, post, prv in allowed:
            def conv(cond):
                out = {}
                for v, val in cond.items():
                    if v in vs_dom:
                        if v not in view or val not in view[v]:
                            return None
                        out[f"{v}({ag})"] = val
                    else:
                        out[v] = val
                return out

            cpre, cpost, cprv = conv(pre), conv(post), conv(prv)
            if cpre is None or cpost is None or cprv is None or not cpost:
                continue
            b.action(f"{label}({ag})", ag, pre=cpre, post=cpost, prv=cprv)
    return b.build(single_agent=profile.single_agent)


def _schemas(rng, profile, world, world_dom, agent_vs, vs_dom):
    """Action templates over VS names (agent filled in later)."""
    domains = {**world_dom, **vs_dom}
    out = []
    if profile.structure == "random":
        variables = world + agent_vs
        for j in range(profile.n_schemas):
            targets = rng.sample(variables, rng.choice([1, 1, 2]) if len(variables) > 1 else 1)
            pre = {t: rng.choice(domains[t]) for t in targets if rng.random() < 0.5}
            post = {t: rng.choice(domains[t]) for t in targets}
            others = [v for v in variables if v not in targets]
            prv = {v: rng.choice(domains[v]) for v in others if rng.random() < profile.prv_prob}
            out.append((f"op{j}", pre, post, prv))
        return out

    order = list(agent_vs) + list(world) if profile.structure == "layered" else list(world)
    rng.shuffle(order)
    j = 0
    for pos, v in enumerate(order):
        earlier = order[:pos]
        for value in domains[v]:
            prv = {}
            for e in earlier:
                if rng.random() < profile.prv_prob:
                    prv[e] = rng.choice(domains[e])
            if profile.structure == "agent-loops":
                for a in agent_vs:
                    if rng.random() < profile.prv_prob:
                        prv[a] = rng.choice(vs_dom[a])
            out.append((f"set{j}", {}, {v: value}, prv))
            j += 1
    if profile.structure == "agent-loops":
        for a in agent_vs:
            for value in vs_dom[a]:
                prv = {}
                for w in world:
                    if rng.random() < profile.prv_prob:
                        prv[w] = rng.choice(world_dom[w])
                out.append((f"move{j}", {}, {a: value}, prv))
                j += 1
    return out

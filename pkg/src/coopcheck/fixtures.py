"""Built-in example problems."""

from __future__ import annotations

from itertools import product

from coopcheck.model import MapProblem, PartialState, Variable, make_action


class ProblemBuilder:
    """Accumulates variables and actions in declaration order, then freezes them."""

    def __init__(self, agents):
        self.agents = list(agents)
        self.variables: list[Variable] = []
        self._actions: list[tuple] = []
        self.init: dict[str, str] = {}
        self.goal: dict[str, str] = {}

    def var(self, name, domain, init, agent=None):
        self.variables.append(Variable(name, tuple(domain), agent))
        self.init[name] = init
        return name

    def action(self, name, agent, pre=None, post=None, prv=None, checked=()):
        self._actions.append((name, agent, pre, post, prv, checked))

    def build(self, single_agent=False) -> MapProblem:
        names = tuple(v.name for v in self.variables)
        actions = [
            make_action(names, name, agent, pre=pre, post=post, prv=prv, checked=checked)
            for name, agent, pre, post, prv, checked in self._actions
        ]
        return MapProblem(
            tuple(self.variables),
            tuple(self.agents),
            tuple(actions),
            PartialState.from_mapping(names, self.init),
            PartialState.from_mapping(names, self.goal),
            single_agent,
        )


def fixture_diamond() -> MapProblem:
    """Two agents must cooperate to steal a diamond guarded by a door that locks on theft.

    The switch that unlocks the door sits in the other room, so one agent has
    to stay outside.
    """
    agents = ("agent1", "agent2")
    rooms = ("room1", "room2")
    b = ProblemBuilder(agents)
    for ag in agents:
        b.var(f"location({ag})", rooms, "room1", agent=ag)
    b.var("location(diamond1)", rooms + agents, "room1")
    b.var("doorLocked(room1)", ("true", "false"), "false")
    b.var("location(switch1)", rooms, "room2")
    b.goal = {"location(diamond1)": "room2"}
    for ag in agents:
        loc = f"location({ag})"
        for src, dst in ((rooms[0], rooms[1]), (rooms[1], rooms[0])):
            b.action(
                f"WalkThrough({ag},door1,{src},{dst})", ag,
                prv={"doorLocked(room1)": "false"}, pre={loc: src}, post={loc: dst},
            )
        for room in rooms:
            b.action(
                f"Steal({ag},diamond1,{room},door1)", ag,
                prv={loc: room}, pre={"location(diamond1)": room},
                post={"doorLocked(room1)": "true", "location(diamond1)": ag},
            )
        for room in rooms:
            b.action(
                f"Switch({ag},switch1,{room},door1)", ag,
                prv={"location(switch1)": room, loc: room}, post={"doorLocked(room1)": "false"},
            )
        for room in rooms:
            b.action(
                f"Place({ag},diamond1,{room})", ag,
                prv={loc: room}, pre={"location(diamond1)": ag}, post={"location(diamond1)": room},
            )
    return b.build()


def fixture_oneway_grid(fuel_variant: bool = False, two_way: bool = False) -> MapProblem:
    """Two trucks at vertex a deliver packages to b and c over one-way roads.

    ``fuel_variant`` gives the trucks distinct fuel variables (gas vs diesel),
    which makes the team heterogeneous without changing why cooperation is
    needed. ``two_way`` opens the return roads, removing the need for two trucks.
    """
    trucks = ("truck1", "truck2")
    vertices = ("a", "b", "c")
    roads = (("a", "b"), ("b", "a"), ("a", "c"), ("c", "a"))
    b = ProblemBuilder(trucks)
    fuel = {"truck1": "uses_gas", "truck2": "uses_diesel"}
    for t in trucks:
        b.var(f"location({t})", vertices, "a", agent=t)
        if fuel_variant:
            b.var(f"{fuel[t]}({t})", ("true",), "true", agent=t)
    for x, y in roads:
        open_ = x == "a" or two_way
        b.var(f"connected({x},{y})", ("true", "false"), "true" if open_ else "false")
    targets = {"p1": "b", "p2": "c"}
    for p in targets:
        b.var(f"location({p})", vertices + trucks, "a")
    b.goal = {f"location({p})": v for p, v in targets.items()}
    for t in trucks:
        loc = f"location({t})"
        extra = {f"{fuel[t]}({t})": "true"} if fuel_variant else {}
        for x, y in roads:
            b.action(f"drive({t},{x},{y})", t, prv={f"connected({x},{y})": "true", **extra}, pre={loc: x}, post={loc: y})
        for p in targets:
            for x in vertices:
                b.action(f"load({t},{p},{x})", t, prv={loc: x}, pre={f"location({p})": x}, post={f"location({p})": t})
                b.action(f"unload({t},{p},{x})", t, prv={loc: x}, pre={f"location({p})": t}, post={f"location({p})": x})
    return b.build()


def fixture_logistics_mini(two_city: bool = True) -> MapProblem:
    """A minimal truck+plane logistics grounding.

    The truck drives inside city 1 (post office and airport); the plane flies
    between the two airports. With ``two_city`` the package goes from the
    city-1 post office to the city-2 airport, which needs both vehicles;
    otherwise it only moves to the city-1 airport and the truck suffices.
    """
    agents = ("truck1", "plane1")
    b = ProblemBuilder(agents)
    b.var("location(truck1)", ("c1-po", "c1-ap"), "c1-po", agent="truck1")
    b.var("location(plane1)", ("c1-ap", "c2-ap"), "c1-ap", agent="plane1")
    places = ("c1-po", "c1-ap", "c2-ap")
    b.var("location(pkg1)", places + agents, "c1-po")
    b.goal = {"location(pkg1)": "c2-ap" if two_city else "c1-ap"}
    for x, y in (("c1-po", "c1-ap"), ("c1-ap", "c1-po")):
        b.action(f"drive(truck1,{x},{y})", "truck1", pre={"location(truck1)": x}, post={"location(truck1)": y})
    for x, y in (("c1-ap", "c2-ap"), ("c2-ap", "c1-ap")):
        b.action(f"fly(plane1,{x},{y})", "plane1", pre={"location(plane1)": x}, post={"location(plane1)": y})
    reach = {"truck1": ("c1-po", "c1-ap"), "plane1": ("c1-ap", "c2-ap")}
    for ag in agents:
        loc = f"location({ag})"
        for x in reach[ag]:
            b.action(f"load({ag},pkg1,{x})", ag, prv={loc: x}, pre={"location(pkg1)": x}, post={"location(pkg1)": ag})
            b.action(f"unload({ag},pkg1,{x})", ag, prv={loc: x}, pre={"location(pkg1)": ag}, post={"location(pkg1)": x})
    return b.build()


def fixture_rovers() -> MapProblem:
    """Two rovers with complementary sensors; both readings are needed."""
    agents = ("rover1", "rover2")
    b = ProblemBuilder(agents)
    b.var("equipped_for_imaging(rover1)", ("true",), "true", agent="rover1")
    b.var("equipped_for_rock_analysis(rover2)", ("true",), "true", agent="rover2")
    b.var("have_image(wp1)", ("true", "false"), "false")
    b.var("have_rock_analysis(wp1)", ("true", "false"), "false")
    b.goal = {"have_image(wp1)": "true", "have_rock_analysis(wp1)": "true"}
    b.action("take_image(rover1,wp1)", "rover1", prv={"equipped_for_imaging(rover1)": "true"},
             post={"have_image(wp1)": "true"})
    b.action("sample_rock(rover2,wp1)", "rover2", prv={"equipped_for_rock_analysis(rover2)": "true"},
             post={"have_rock_analysis(wp1)": "true"})
    return b.build()


# Eight binary variables in five levels; the edge set is our own reconstruction.
LEVELED_EDGES = {
    "directed": [
        ("v1", "v2"), ("v1", "v3"), ("v3", "v4"), ("v4", "v5"), ("v4", "v7"),
        ("v5", "v6"), ("v5", "v8"), ("v7", "v6"), ("v7", "v8"),
    ],
    "undirected": [("v2", "v3"), ("v6", "v8")],
}
REFERENCE_LEVELS = [["v1"], ["v2", "v3"], ["v4"], ["v5", "v7"], ["v6", "v8"]]


def fixture_leveled() -> MapProblem:
    """A homogeneous two-agent problem whose causal graph is the leveled example graph.

    Each undirected component is set jointly to any assignment, conditioned on
    its parents holding ``1``; the goal is ``v6 = 1``.
    """
    agents = ("agent1", "agent2")
    b = ProblemBuilder(agents)
    nodes = [f"v{i}" for i in range(1, 9)]
    for n in nodes:
        b.var(n, ("0", "1"), "0")
    b.goal = {"v6": "1"}
    components = [["v1"], ["v2", "v3"], ["v4"], ["v5"], ["v7"], ["v6", "v8"]]
    parents = {n: [x for x, y in LEVELED_EDGES["directed"] if y == n] for n in nodes}
    for ag in agents:
        for comp in components:
            prv = {p: "1" for n in comp for p in parents[n] if p not in comp}
            for values in product("01", repeat=len(comp)):
                label = "_".join(comp)
                vals = ",".join(values)
                b.action(f"set_{label}({ag},{vals})", ag, prv=prv, post=dict(zip(comp, values)))
    return b.build()


FIXTURES = {
    "diamond": fixture_diamond,
    "oneway-grid": fixture_oneway_grid,
    "oneway-grid-fuel": lambda: fixture_oneway_grid(fuel_variant=True),
    "logistics-mini": fixture_logistics_mini,
    "logistics-one-city": lambda: fixture_logistics_mini(two_city=False),
    "rovers": fixture_rovers,
    "figure3-graph": fixture_leveled,
}

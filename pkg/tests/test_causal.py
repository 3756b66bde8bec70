from collections import deque
from itertools import product

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coopcheck import errors
from coopcheck.causal import (
    bound_lemma2,
    bound_lemma3,
    build_causal_graph,
    build_icgs,
    check_levels,
    compute_cr,
    expand_cr,
    find_causal_loops,
    has_causal_loop,
    inner_closures,
    is_traversable,
    level_decomposition,
    theorem1_certificate,
    traversal_report,
)
from coopcheck.errors import ProblemError
from coopcheck.fixtures import (
    LEVELED_EDGES,
    REFERENCE_LEVELS,
    fixture_diamond,
    fixture_leveled,
    fixture_logistics_mini,
    fixture_oneway_grid,
)
from coopcheck.generators import GeneratorProfile, random_instance

LOC, DIA, DOOR, SW = "location(EX-AG)", "location(diamond1)", "doorLocked(room1)", "location(switch1)"


# diamond ICGS, derived by hand from the sixteen ground actions


def test_diamond_icgs_nodes_and_edges():
    g = build_icgs(fixture_diamond())
    assert g.nodes == (LOC, DIA, DOOR, SW)
    assert set(g.directed) == {(LOC, DIA), (LOC, DOOR), (DOOR, LOC), (SW, DOOR)}
    assert set(g.undirected) == {(DIA, DOOR)}
    assert g.agent_vs == {LOC} and g.goal == {DIA}


def test_diamond_closures_traversable():
    g = build_icgs(fixture_diamond())
    ics = inner_closures(g)
    assert [ic.vars for ic in ics] == [(LOC,), (DIA, DOOR), (SW,)]
    assert [ic.oc for ic in ics] == [(DOOR,), (LOC, SW), ()]
    assert all(v is True for _, v in traversal_report(g))


def test_diamond_loops_and_cr():
    g = build_icgs(fixture_diamond())
    loops = find_causal_loops(g)
    assert loops and all(cl.contains_agent_vs for cl in loops)
    assert any(LOC in cl.nodes for cl in loops)
    assert compute_cr(g) == {LOC}
    with pytest.raises(ProblemError) as e:
        level_decomposition(g)
    assert e.value.code == errors.NOT_ACYCLIC


def test_diamond_expansion():
    g = build_icgs(fixture_diamond())
    x = expand_cr(g, {LOC})
    r1, r2 = f"{LOC}=room1", f"{LOC}=room2"
    assert x.nodes == (r1, r2, DIA, DOOR, SW)
    assert set(x.directed) == {(r1, DIA), (r2, DIA), (r1, DOOR), (r2, DOOR), (SW, DOOR)}
    assert not has_causal_loop(x)


def test_diamond_bounds():
    g = build_icgs(fixture_diamond())
    b2, b3 = bound_lemma2(g, solvable=True), bound_lemma3(g, solvable=True)
    assert (b2.applicable, b2.value, b2.nodes) == (True, 2, (LOC,))
    assert (b3.applicable, b3.value) == (True, 2)
    assert b2.hypotheses["no_loop_has_agent_vs"] is False
    assert bound_lemma2(g, solvable=False).applicable is False


def test_oneway_location_closure_not_traversable():
    g = build_icgs(fixture_oneway_grid())
    verdicts = {ic.vars: v for ic, v in traversal_report(g)}
    assert verdicts[(LOC,)] is False
    assert is_traversable(build_icgs(fixture_oneway_grid(two_way=True)), [LOC]) is True


def test_traversal_cap_is_indeterminate():
    g = build_icgs(fixture_diamond())
    assert is_traversable(g, [DIA, DOOR], cap=3) is None


def test_icgs_needs_homogeneous_team():
    with pytest.raises(ProblemError) as e:
        build_icgs(fixture_logistics_mini())
    assert e.value.code == errors.NOT_HOMOGENEOUS


def test_figure3_graph_and_levels():
    g = build_icgs(fixture_leveled())
    assert set(g.directed) == set(LEVELED_EDGES["directed"])
    assert set(g.undirected) == set(LEVELED_EDGES["undirected"])
    ocs = {ic.vars: ic.oc for ic in inner_closures(g)}
    assert ocs[("v2", "v3")] == ("v1",) and ocs[("v4",)] == ("v3",)
    levels = level_decomposition(g)
    assert check_levels(g, levels) == []
    assert check_levels(g, REFERENCE_LEVELS) == []
    assert theorem1_certificate(fixture_leveled()).granted is True


def test_check_levels_flags_each_property():
    g = build_icgs(fixture_leveled())
    assert any("appears in levels" in m for m in check_levels(g, REFERENCE_LEVELS + [["v1"]]))
    swapped = [["v2", "v3"], ["v1"]] + REFERENCE_LEVELS[2:]
    assert any("higher to a lower" in m for m in check_levels(g, swapped))
    split = [["v1"], ["v2"], ["v3"]] + REFERENCE_LEVELS[2:]
    assert any("crosses levels" in m for m in check_levels(g, split))


# properties against independent recomputations

profiles = st.sampled_from([
    GeneratorProfile(structure="random"),
    GeneratorProfile(structure="layered"),
    GeneratorProfile(structure="agent-loops"),
    GeneratorProfile(structure="random", n_world_vars=4, n_agent_vars=2, n_schemas=10),
])


def _direct_edges(p):
    directed, undirected = set(), set()
    for a in p.actions:
        post = a.post.defined()
        sources = set(a.prv.defined()) | set(a.checked)
        for w in post:
            directed |= {(v, w) for v in sources if v != w}
        for v in post:
            undirected |= {frozenset((v, w)) for w in post if v != w}
    return directed, undirected


@given(st.integers(0, 10_000), profiles)
def test_edges_match_direct_derivation(seed, profile):
    p = random_instance(seed, profile)
    g = build_causal_graph(p)
    directed, undirected = _direct_edges(p)
    assert set(g.directed) == directed
    assert {frozenset(k) for k in g.undirected} == undirected


def _reach(g, start):
    adj = {n: set() for n in g.nodes}
    for a, b in g.directed:
        adj[a].add(b)
    for a, b in g.undirected:
        adj[a].add(b)
        adj[b].add(a)
    seen, queue = {start}, deque([start])
    while queue:
        for m in adj[queue.popleft()]:
            if m not in seen:
                seen.add(m)
                queue.append(m)
    return seen


@given(st.integers(0, 10_000), profiles)
def test_loop_report_covers_every_looping_directed_edge(seed, profile):
    g = build_icgs(random_instance(seed, profile))
    looping = {(a, b) for a, b in g.directed if a in _reach(g, b)}
    report = find_causal_loops(g)
    assert has_causal_loop(g) == bool(looping)
    if not report.truncated:
        reported = {(s, t) for cl in report for kind, s, t in cl.edges if kind == "->"}
        assert looping <= {(a, b) for cl in report for a, b in zip(cl.nodes, cl.nodes[1:] + cl.nodes[:1])}
        assert reported <= looping
    for cl in report:
        assert any(kind == "->" for kind, _, _ in cl.edges)
        assert cl.contains_agent_vs == any(n in g.agent_vs for n in cl.nodes)


@given(st.integers(0, 10_000), profiles)
def test_levels_valid_whenever_loop_free(seed, profile):
    g = build_icgs(random_instance(seed, profile))
    if has_causal_loop(g):
        return
    assert check_levels(g, level_decomposition(g)) == []


def _direct_traversable(g, members):
    """Closure state graph built by brute force, strong connectivity via networkx."""
    inside = set(members)
    doms = [(g.init[n],) if n in g.static else g.domains[n] for n in members]
    dg = nx.DiGraph()
    states = list(product(*doms))
    dg.add_nodes_from(states)
    for s in states:
        cur = dict(zip(members, s))
        for act in g.actions:
            if not act.post or not set(act.post) <= inside:
                continue
            if any(cur[v] != val for v, val in act.need.items() if v in inside):
                continue
            if any(g.init[v] != val for v, val in act.need.items() if v not in inside and v in g.static):
                continue
            nxt = tuple({**cur, **act.post}[n] for n in members)
            if nxt in dg:
                dg.add_edge(s, nxt)
    return nx.is_strongly_connected(dg)


@given(st.integers(0, 10_000), profiles)
def test_traversability_matches_brute_force(seed, profile):
    g = build_icgs(random_instance(seed, profile))
    for ic in inner_closures(g):
        assert is_traversable(g, ic) == _direct_traversable(g, ic.vars)


@given(st.integers(0, 10_000))
def test_expansion_removes_loops_through_cr(seed):
    g = build_icgs(random_instance(seed, GeneratorProfile(structure="agent-loops")))
    cr = compute_cr(g)
    x = expand_cr(g, cr)
    assert not any(n in x.nodes for n in cr)
    assert all(not (b.split("=")[0] in cr) for _, b in x.directed)
    if not has_causal_loop(g, skip=g.agent_vs):
        assert not has_causal_loop(x)

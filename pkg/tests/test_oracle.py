from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from coopcheck import errors
from coopcheck.errors import ProblemError
from coopcheck.fixtures import fixture_diamond, fixture_logistics_mini, fixture_oneway_grid
from coopcheck.generators import GeneratorProfile, random_instance
from coopcheck.model import validate_plan
from coopcheck.oracle import (
    SearchConfig,
    agent_equivalence_classes,
    clone_team,
    is_rc,
    minimal_k,
    solve,
    verify_bound,
)


def test_diamond_team_plan_is_valid_and_shortest():
    p = fixture_diamond()
    res = solve(p, p.agents)
    assert res.solved and len(res.plan) == 5
    assert validate_plan(p, res.plan).valid
    assert res.plan.agents() == {"agent1", "agent2"}


def test_diamond_singletons_exhaust_small_space():
    p = fixture_diamond()
    for agent in p.agents:
        res = solve(p, [agent])
        assert res.status == "unsolvable" and res.states < 10_000


def test_caps_make_results_indeterminate():
    p = fixture_diamond()
    assert solve(p, p.agents, SearchConfig(max_states=5)).verdict is None
    assert solve(p, p.agents, SearchConfig(max_plan_len=3)).verdict is None
    assert solve(p, p.agents, SearchConfig(max_plan_len=5)).solved
    rc = is_rc(p, SearchConfig(max_states=5))
    assert rc.rc is None and rc.caps_hit


def test_rc_verdicts_on_fixtures():
    assert is_rc(fixture_diamond()).rc is True
    assert is_rc(fixture_oneway_grid()).rc is True
    assert is_rc(fixture_oneway_grid(two_way=True)).rc is False
    assert is_rc(fixture_logistics_mini(two_city=False)).rc is False


def test_minimal_k():
    assert minimal_k(fixture_diamond()).k == 2
    assert minimal_k(fixture_logistics_mini(two_city=False)).subset == ["truck1"]


def test_minimal_k_on_unsolvable_problem():
    p = fixture_oneway_grid()
    stuck = p.__class__(p.variables, p.agents, p.actions[:1], p.init, p.goal)
    with pytest.raises(ProblemError) as e:
        minimal_k(stuck)
    assert e.value.code == errors.UNSOLVABLE_PROBLEM


def test_equivalence_classes():
    assert agent_equivalence_classes(fixture_diamond()) == [["agent1", "agent2"]]
    assert len(agent_equivalence_classes(fixture_logistics_mini())) == 2


def _min_k_brute(p):
    for k in range(1, len(p.agents) + 1):
        for sub in combinations(p.agents, k):
            if solve(p, sub).solved:
                return k
    return None


@given(st.integers(0, 10_000), st.sampled_from(["random", "agent-loops"]))
def test_pruned_minimal_k_matches_brute_force(seed, structure):
    p = random_instance(seed, GeneratorProfile(n_agents=3, structure=structure))
    expected = _min_k_brute(p)
    if expected is None:
        with pytest.raises(ProblemError):
            minimal_k(p)
    else:
        assert minimal_k(p).k == expected == minimal_k(p, prune=False).k


@given(st.integers(0, 10_000))
def test_rc_matches_definition(seed):
    p = random_instance(seed, GeneratorProfile(n_agents=2))
    team = solve(p, p.agents).solved
    singles = [solve(p, [a]).solved for a in p.agents]
    assert is_rc(p).rc == (team and not any(singles))


def test_clone_team_names():
    p = fixture_diamond()
    cloned, clones, rep_vars = clone_team(p, 3)
    assert clones == ["agent1", "agent2", "agent1_c1"]
    assert rep_vars == ["location(agent1)"]
    assert "location(agent1_c1)" in cloned.names
    assert cloned.variable("location(diamond1)").domain == ("room1", "room2", "agent1", "agent2", "agent1_c1")


def test_verify_bound_on_diamond():
    p = fixture_diamond()
    assert verify_bound(p, 1) is False
    assert verify_bound(p, 2) is True
    assert verify_bound(p, 2, SearchConfig(max_states=3)) is None


def test_verify_bound_needs_homogeneous_team():
    with pytest.raises(ProblemError):
        verify_bound(fixture_logistics_mini(), 2)

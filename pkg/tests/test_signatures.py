import pytest
from hypothesis import given
from hypothesis import strategies as st

from coopcheck import errors
from coopcheck.errors import ProblemError
from coopcheck.fixtures import (
    ProblemBuilder,
    fixture_diamond,
    fixture_logistics_mini,
    fixture_oneway_grid,
    fixture_rovers,
)
from coopcheck.generators import GeneratorProfile, random_instance
from coopcheck.signatures import (
    EX_AG,
    action_signature,
    agent_variable_signatures,
    build_super_agent,
    check_dvc,
    is_homogeneous_team,
    is_super_agent_solvable,
    variable_signature,
)


def test_world_variable_signature_is_itself():
    p = fixture_diamond()
    sig = variable_signature(p.variable("doorLocked(room1)"))
    assert (sig.token, sig.domain) == ("doorLocked(room1)", ("true", "false"))


def test_agent_valued_domain_collapses():
    p = fixture_diamond()
    sig = variable_signature(p.variable("location(diamond1)"), agent_names=p.agents)
    assert sig.domain == ("room1", "room2", EX_AG)


def test_action_signature_matches_across_agents():
    p = fixture_diamond()
    s1 = action_signature(p, p.action("Steal(agent1,diamond1,room1,door1)", "agent1"))
    s2 = action_signature(p, p.action("Steal(agent2,diamond1,room1,door1)", "agent2"))
    assert s1 == s2
    assert dict(s1.post) == {"doorLocked(room1)": "true", "location(diamond1)": EX_AG}
    assert dict(s1.prv) == {"location(EX-AG)": "room1"}


def test_diamond_is_homogeneous():
    p = fixture_diamond()
    rep = check_dvc(p)
    assert not rep.dvc and is_homogeneous_team(p)


def test_logistics_has_dh_and_ch():
    rep = check_dvc(fixture_logistics_mini())
    assert rep.dvc
    assert [w.extra_values for w in rep.dh["truck1"]] == [("c1-po",)]
    assert [w.extra_values for w in rep.dh["plane1"]] == [("c2-ap",)]
    assert {s.name for s in rep.ch["plane1"]} >= {"fly(EX-AG,c1-ap,c2-ap)"}


def test_rovers_vh_and_single_valued_annotation():
    rep = check_dvc(fixture_rovers())
    assert rep.vh == {"rover1": ["equipped_for_imaging(EX-AG)"], "rover2": ["equipped_for_rock_analysis(EX-AG)"]}
    assert set(rep.single_valued) == {"equipped_for_imaging(EX-AG)", "equipped_for_rock_analysis(EX-AG)"}


def test_fuel_variant_is_heterogeneous():
    assert not check_dvc(fixture_oneway_grid()).dvc
    assert check_dvc(fixture_oneway_grid(fuel_variant=True)).dvc


# independent recomputation of the three conditions, straight from variable and action lists


def _direct(p):
    def vs(agent):
        out = {}
        for v in p.variables:
            if v.agent == agent:
                tok = v.name.replace(f"({agent})", f"({EX_AG})").replace(f"({agent},", f"({EX_AG},")
                out[tok] = {EX_AG if d in p.agents else d for d in v.domain}
        return out

    def as_(agent):
        return {action_signature(p, a) for a in p.actions if a.agent == agent}

    vh, dh, ch = {}, {}, {}
    for ag in p.agents:
        others = [o for o in p.agents if o != ag]
        mine = vs(ag)
        vh[ag] = {t for t in mine if all(t not in vs(o) for o in others)}
        dh[ag] = set()
        for t, dom in mine.items():
            theirs = [vs(o)[t] for o in others if t in vs(o)]
            if theirs and dom - set().union(*theirs):
                dh[ag].add(t)
        ch[ag] = as_(ag) - set().union(*(as_(o) for o in others))
    return dh, vh, ch


@given(st.integers(0, 10_000), st.booleans())
def test_witnesses_match_direct_recomputation(seed, homogeneous):
    p = random_instance(seed, GeneratorProfile(n_agents=3, n_agent_vars=2, homogeneous=homogeneous))
    rep = check_dvc(p)
    dh, vh, ch = _direct(p)
    for ag in p.agents:
        assert {w.signature for w in rep.dh[ag]} == dh[ag]
        assert set(rep.vh[ag]) == vh[ag]
        assert set(rep.ch[ag]) == ch[ag]
    if homogeneous:
        assert not rep.dvc


# super agent


def test_super_agent_merges_signatures():
    sup = build_super_agent(fixture_logistics_mini(), {"location(EX-AG)": "c1-po"})
    assert sup.agents == ("superagent",)
    assert sup.variable("location(superagent)").domain == ("c1-po", "c1-ap", "c2-ap")
    assert sup.variable("location(pkg1)").domain == ("c1-po", "c1-ap", "c2-ap", "superagent")


def test_super_agent_ambiguous_init():
    b = ProblemBuilder(["r1", "r2"])
    b.var("at(r1)", ("x", "y"), "x", agent="r1")
    b.var("at(r2)", ("x", "y"), "y", agent="r2")
    b.var("done", ("no", "yes"), "no")
    b.goal = {"done": "yes"}
    for r in ("r1", "r2"):
        b.action(f"finish({r})", r, prv={f"at({r})": "y"}, post={"done": "yes"})
    p = b.build()
    with pytest.raises(ProblemError) as e:
        build_super_agent(p)
    assert e.value.code == errors.SUPERAGENT_INIT_AMBIGUOUS
    assert build_super_agent(p, {"at(EX-AG)": "x"}).init["at(superagent)"] == "x"
    res = is_super_agent_solvable(p)
    assert res.solvable and res.init_choice == {"at(EX-AG)": "y"}
    assert is_super_agent_solvable(p, init_choice={"at(EX-AG)": "x"}).solvable is False


def test_super_agent_solves_logistics():
    assert is_super_agent_solvable(fixture_logistics_mini()).solvable is True
    assert is_super_agent_solvable(fixture_rovers()).solvable is True


def test_agent_variable_signatures_in_file_order():
    p = fixture_oneway_grid(fuel_variant=True)
    assert list(agent_variable_signatures(p, "truck1")) == ["location(EX-AG)", "uses_gas(EX-AG)"]

import json
import subprocess
import sys

import pytest
from hypothesis import given
from hypothesis import strategies as st

from coopcheck.causal import build_icgs
from coopcheck.cli import EXIT_CAPS, EXIT_INPUT, EXIT_OK, main
from coopcheck.dot import export_dot, to_dot
from coopcheck.fixtures import FIXTURES, ProblemBuilder, fixture_diamond, fixture_leveled
from coopcheck.generators import GeneratorProfile, random_instance
from coopcheck.problem_io import serialize_problem
from coopcheck.report import NOT_RC, TYPE_1, TYPE_2, AnalysisOptions, AnalysisReport, analyze


def test_logistics_is_type1_with_super_agent():
    r = analyze(FIXTURES["logistics-mini"]())
    assert (r.rc, r.rc_class, r.super_agent_solvable) == (True, TYPE_1, True)
    assert r.heterogeneity["ch"]["plane1"]
    assert r.bounds is None and r.agent_graphs


def test_non_rc_still_reports_causal_fields():
    r = analyze(FIXTURES["figure3-graph"]())
    assert (r.rc, r.rc_class) == (False, NOT_RC)
    assert r.icgs["built"] and r.icgs["levels"] is not None


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_report_json_round_trip(name):
    r = analyze(FIXTURES[name](), AnalysisOptions(minimal_k=True))
    again = AnalysisReport.from_dict(json.loads(r.to_json()))
    assert again == r
    assert again.to_json() == r.to_json()


@given(st.integers(0, 10_000), st.booleans(), st.sampled_from(["random", "agent-loops"]))
def test_classification_invariants(seed, homogeneous, structure):
    p = random_instance(seed, GeneratorProfile(homogeneous=homogeneous, structure=structure))
    r = analyze(p)
    if r.rc_class == TYPE_1:
        assert r.heterogeneity["dvc"]
    if r.rc_class == TYPE_2:
        assert not r.heterogeneity["dvc"]
    if r.rc:
        assert r.causes


def test_dot_output():
    g = build_icgs(fixture_diamond())
    text = to_dot(g)
    assert text == to_dot(build_icgs(fixture_diamond()))
    assert text.count("[dir=none]") == 1
    assert text.count(" -> ") - 1 == 4
    assert '"location(EX-AG)" [peripheries=2];' in text
    assert '"location(diamond1)" [style=bold];' in text
    assert '"v6" [style=bold];' in to_dot(build_icgs(fixture_leveled()))


def test_dot_edgeless_graph(tmp_path):
    b = ProblemBuilder(["a1", "a2"])
    b.var("x", ("0", "1"), "0")
    b.goal = {"x": "1"}
    for ag in ("a1", "a2"):
        b.action(f"set({ag})", ag, post={"x": "1"})
    out = tmp_path / "g.dot"
    text = export_dot(build_icgs(b.build()), out)
    assert out.read_text() == text
    assert "->" not in text and '"x" [style=bold];' in text


def _write(tmp_path, name):
    path = tmp_path / f"{name}.json"
    path.write_text(serialize_problem(FIXTURES[name]()))
    return path


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_cli_exit_zero_for_every_fixture(tmp_path, name, capsys):
    assert main(["analyze", str(_write(tmp_path, name)), "--minimal-k", "--check-bounds"]) == EXIT_OK
    assert "required cooperation" in capsys.readouterr().out


def test_cli_writes_json_and_dot(tmp_path):
    src = _write(tmp_path, "diamond")
    js, dot = tmp_path / "r.json", tmp_path / "g.dot"
    assert main(["analyze", str(src), "--json", str(js), "--dot", str(dot)]) == EXIT_OK
    assert json.loads(js.read_text())["rc_class"] == TYPE_2
    assert dot.read_text().startswith("digraph")


def test_cli_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{ nope")
    assert main(["analyze", str(bad)]) == EXIT_INPUT
    assert "SYNTAX" in capsys.readouterr().err
    assert main(["analyze", str(tmp_path / "missing.json")]) == EXIT_INPUT


def test_cli_over_cap_exit(tmp_path):
    assert main(["analyze", str(_write(tmp_path, "diamond")), "--max-states", "5"]) == EXIT_CAPS


def test_cli_super_init(tmp_path):
    path = _write(tmp_path, "logistics-mini")
    assert main(["analyze", str(path), "--super-init", "location(EX-AG)=c1-ap"]) == EXIT_OK


def test_fixtures_command_emits_parsable_problem():
    out = subprocess.run([sys.executable, "-m", "coopcheck.cli", "fixtures", "diamond"],
                         capture_output=True, text=True, check=True).stdout
    assert out == serialize_problem(fixture_diamond())

"""The full analysis pipeline and its JSON / text report."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any

from coopcheck import errors
from coopcheck.causal import (
    DEFAULT_MAX_LOOPS,
    DEFAULT_TRAVERSAL_CAP,
    CausalGraph,
    _and3,
    _verdict_out,
    bound_lemma2,
    bound_lemma3,
    build_agent_graph,
    build_icgs,
    find_causal_loops,
    has_causal_loop,
    level_decomposition,
    theorem1_certificate,
    traversal_report,
)
from coopcheck.errors import ProblemError
from coopcheck.model import MapProblem
from coopcheck.oracle import DEFAULT_MAX_STATES, SearchConfig, is_rc, minimal_k, solve, verify_bound
from coopcheck.problem_io import plan_to_list
from coopcheck.signatures import check_dvc, is_homogeneous_team, is_super_agent_solvable

TYPE_1 = "type-1"
TYPE_2 = "type-2"
NOT_RC = "not-rc"
INDETERMINATE = "indeterminate"

NON_TRAVERSABLE = "non-traversable"
CAUSAL_LOOP = "causal-loop"


@dataclass(frozen=True)
class AnalysisOptions:
    minimal_k: bool = False
    max_states: int = DEFAULT_MAX_STATES
    check_bounds: bool = False
    union_ic_limit: int = 1
    super_init: dict[str, str] | None = None
    traversal_cap: int = DEFAULT_TRAVERSAL_CAP
    max_loops: int = DEFAULT_MAX_LOOPS


def _verdict_in(v):
    return None if v == INDETERMINATE else v


@dataclass
class AnalysisReport:
    """Everything ``analyze`` found.

    Top-level verdicts are ``True``/``False``/``None``; nested sections are
    already in their JSON form, where an undecided verdict reads "indeterminate".
    """

    solvable: bool | None
    rc: bool | None
    rc_class: str
    heterogeneity: dict[str, Any]
    super_agent_solvable: bool | None = None
    super_agent: dict[str, Any] | None = None
    icgs: dict[str, Any] = field(default_factory=lambda: {"built": False})
    agent_graphs: dict[str, Any] = field(default_factory=dict)
    bounds: dict[str, Any] | None = None
    bound_checks: dict[str, Any] | None = None
    certificate: dict[str, Any] | None = None
    minimal_k: dict[str, Any] | None = None
    witness_plans: dict[str, list] = field(default_factory=dict)
    causes: list[str] = field(default_factory=list)
    mixed_cause: bool = False
    caps_hit: list[str] = field(default_factory=list)

    VERDICTS = ("solvable", "rc", "super_agent_solvable")

    @property
    def indeterminate(self) -> bool:
        return bool(self.caps_hit) or self.rc is None or self.solvable is None

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        for k in self.VERDICTS:
            out[k] = _verdict_out(out[k])
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> AnalysisReport:
        data = dict(data)
        for k in cls.VERDICTS:
            data[k] = _verdict_in(data.get(k))
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def summary(self) -> str:
        def v(x):
            return _verdict_out(x)

        lines = [
            f"solvable: {v(self.solvable)}",
            f"required cooperation: {v(self.rc)} ({self.rc_class})",
            f"agent heterogeneity (DVC): {self.heterogeneity['dvc']}",
        ]
        if self.super_agent is not None:
            lines.append(f"super agent solvable: {v(self.super_agent_solvable)}")
        if self.icgs.get("built"):
            loops = self.icgs["causal_loops"]
            lines.append(f"ICGS traversable: {self.icgs['traversable']}")
            lines.append(f"ICGS causal loops: {len(loops)}" + (" (truncated)" if self.icgs["loops_truncated"] else ""))
            if self.icgs.get("levels") is not None:
                lines.append("levels: " + " | ".join(", ".join(level) for level in self.icgs["levels"]))
        if self.bounds is not None:
            for key in ("lemma2", "lemma3"):
                b = self.bounds[key]
                value = b["value"] if b["applicable"] is True else f"not applicable ({b['applicable']})"
                lines.append(f"bound {key}: {value}")
        if self.minimal_k is not None:
            lines.append(f"minimal k: {self.minimal_k['k']}")
        lines.append("causes: " + (", ".join(self.causes) if self.causes else "none"))
        if self.mixed_cause:
            lines.append("mixed cause: heterogeneity together with a structural cause")
        for cap in self.caps_hit:
            lines.append(f"cap hit: {cap}")
        return "\n".join(lines) + "\n"


def _graph_section(g: CausalGraph, options: AnalysisOptions) -> dict[str, Any]:
    trav = traversal_report(g, cap=options.traversal_cap, union_limit=options.union_ic_limit)
    loops = find_causal_loops(g, options.max_loops)
    return {
        "traversable": _verdict_out(_and3(v for _, v in trav)),
        "closures": [{"vars": list(ic.vars), "oc": list(ic.oc), "traversable": _verdict_out(v)} for ic, v in trav],
        "causal_loops": [
            {"nodes": list(cl.nodes), "edges": [list(e) for e in cl.edges], "contains_agent_vs": cl.contains_agent_vs}
            for cl in loops
        ],
        "loops_truncated": loops.truncated,
        "has_causal_loop": has_causal_loop(g),
    }


def _structural_causes(sections: list[dict[str, Any]]) -> list[str]:
    causes = []
    if any(s["traversable"] is False for s in sections):
        causes.append(NON_TRAVERSABLE)
    if any(s["has_causal_loop"] for s in sections):
        causes.append(CAUSAL_LOOP)
    return causes


def analyze(p: MapProblem, options: AnalysisOptions | None = None) -> AnalysisReport:
    """Run solvability, heterogeneity, RC, classification, and the graph analyses in turn.

    Caps never abort the run: the affected verdicts become indeterminate and
    the cap is listed in ``caps_hit``.
    """
    options = options or AnalysisOptions()
    config = SearchConfig(max_states=options.max_states)
    team = solve(p, p.agents, config)
    het = check_dvc(p)
    rcv = is_rc(p, config, team)
    caps = list(rcv.caps_hit)
    if rcv.rc is None:
        rc_class = INDETERMINATE
    elif rcv.rc:
        rc_class = TYPE_1 if het.dvc else TYPE_2
    else:
        rc_class = NOT_RC
    report = AnalysisReport(rcv.solvable, rcv.rc, rc_class, het.to_dict(), caps_hit=caps)
    if team.solved:
        report.witness_plans["team"] = plan_to_list(team.plan)
    for agent, plan in rcv.per_agent_plans.items():
        report.witness_plans[agent] = plan_to_list(plan)

    if rc_class == TYPE_1:
        sup = is_super_agent_solvable(p, config, options.super_init)
        report.super_agent_solvable = sup.solvable
        report.super_agent = {"init_choice": sup.init_choice, "tried": sup.tried}
        if sup.solvable is None:
            caps.append("super agent: state cap")
        if sup.plan is not None:
            report.witness_plans["superagent"] = plan_to_list(sup.plan)

    if is_homogeneous_team(p):
        g = build_icgs(p)
        section = {"built": True, **_graph_section(g, options), "levels": None}
        if not section["has_causal_loop"]:
            section["levels"] = level_decomposition(g)
        report.icgs = section
        lemma2 = bound_lemma2(g, rcv.solvable, options.traversal_cap, options.max_loops)
        lemma3 = bound_lemma3(g, rcv.solvable)
        report.bounds = {"lemma2": lemma2.to_dict(), "lemma3": lemma3.to_dict()}
        report.certificate = theorem1_certificate(p, options.traversal_cap, options.union_ic_limit).to_dict()
        structural = _structural_causes([section])
        if options.check_bounds:
            report.bound_checks = {}
            for key, b in (("lemma2", lemma2), ("lemma3", lemma3)):
                if b.applicable is True:
                    verdict = verify_bound(p, b.value, config)
                    if verdict is None:
                        caps.append(f"bound check {key}: cap")
                    report.bound_checks[key] = _verdict_out(verdict)
    else:
        for agent in p.agents:
            report.agent_graphs[agent] = _graph_section(build_agent_graph(p, agent), options)
        structural = _structural_causes(list(report.agent_graphs.values()))

    causes = [c for c, hit in (("DH", het.dh), ("VH", het.vh), ("CH", het.ch)) if any(hit.values())]
    report.causes = causes + structural
    report.mixed_cause = het.dvc and bool(structural)

    if options.minimal_k and rcv.solvable:
        try:
            mk = minimal_k(p, config, team=team)
        except ProblemError as exc:  # pragma: no cover - guarded by the solvable check
            if exc.code != errors.UNSOLVABLE_PROBLEM:
                raise
        else:
            report.minimal_k = {"k": mk.k, "subset": mk.subset}
            caps.extend(c for c in mk.caps_hit if c not in caps)
            if mk.plan is not None:
                report.witness_plans["minimal_k"] = plan_to_list(mk.plan)
    return report

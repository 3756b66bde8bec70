"""Required-cooperation analysis for multi-agent SAS+ planning problems."""

from coopcheck.causal import (
    bound_lemma2,
    bound_lemma3,
    build_causal_graph,
    build_icgs,
    check_levels,
    expand_cr,
    find_causal_loops,
    inner_closures,
    is_traversable,
    level_decomposition,
    theorem1_certificate,
)
from coopcheck.errors import ProblemError
from coopcheck.fixtures import FIXTURES
from coopcheck.model import MapProblem, PartialState, Plan, execute, join, subsumes, update, validate_plan
from coopcheck.oracle import SearchConfig, is_rc, minimal_k, solve, verify_bound
from coopcheck.problem_io import load_problem, parse_problem, serialize_problem
from coopcheck.report import AnalysisOptions, AnalysisReport, analyze
from coopcheck.signatures import build_super_agent, check_dvc, is_homogeneous_team

__version__ = "0.1.0"

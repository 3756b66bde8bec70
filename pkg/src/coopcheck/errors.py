"""Error type shared by every analysis module."""

from __future__ import annotations


class ProblemError(ValueError):
    """A structural or semantic problem with an input, tagged with a stable code.

    ``line`` and ``column`` are only set for syntax errors in problem documents.
    """

    def __init__(self, code: str, message: str, line: int | None = None, column: int | None = None):
        self.code = code
        self.message = message
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{code}: {message}{where}")


# model-level codes
STRUCTURAL = "STRUCTURAL"
JOIN_CONFLICT = "JOIN_CONFLICT"
UNKNOWN_VARIABLE = "UNKNOWN_VARIABLE"
UNKNOWN_AGENT = "UNKNOWN_AGENT"
UNKNOWN_ACTION = "UNKNOWN_ACTION"
VALUE_OUT_OF_DOMAIN = "VALUE_OUT_OF_DOMAIN"
INVALID_DOMAIN = "INVALID_DOMAIN"
INVALID_ACTION = "INVALID_ACTION"
DUPLICATE_NAME = "DUPLICATE_NAME"
INIT_INCOMPLETE = "INIT_INCOMPLETE"
GOAL_ON_AGENT_VAR = "GOAL_ON_AGENT_VAR"
NEEDS_MULTIPLE_AGENTS = "NEEDS_MULTIPLE_AGENTS"
MULTI_AGENT_REFERENCE = "MULTI_AGENT_REFERENCE"
FOREIGN_AGENT_VARIABLE = "FOREIGN_AGENT_VARIABLE"
# io
SYNTAX = "SYNTAX"
SCHEMA = "SCHEMA"
GADGET_UNBUILDABLE = "GADGET_UNBUILDABLE"
# analyses
SUPERAGENT_INIT_AMBIGUOUS = "SUPERAGENT_INIT_AMBIGUOUS"
NOT_HOMOGENEOUS = "NOT_HOMOGENEOUS"
NOT_ACYCLIC = "NOT_ACYCLIC"
UNSOLVABLE_PROBLEM = "UNSOLVABLE_PROBLEM"

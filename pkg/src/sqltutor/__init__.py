"""Hybrid SQL tutoring engine.

Grades SELECT submissions dynamically against hidden test data, harmonizes
them through rewrite rules, locates the closest reference solution under a
clause-wise distance measure, emits node-level hints, and grows the
reference-solution pool under lecturer review.
"""

from .checker import compare, provision, recheck_pool, run_select, verdict
from .config import EngineConfig, Task
from .distance import WeightsConfig, closest_reference, levenshtein, total_distance
from .feedback import FeedbackReport, generate_feedback, static_diff
from .harmonize import CanonicalQuery, harmonize, rule_catalog
from .nodes import QueryTree, SchemaDef, extract_nodes, serialize
from .parser import ParseError, classify, parse, parse_schema, unresolved_columns
from .pool import PoolState

__all__ = [
    "CanonicalQuery",
    "EngineConfig",
    "FeedbackReport",
    "ParseError",
    "PoolState",
    "QueryTree",
    "SchemaDef",
    "Task",
    "WeightsConfig",
    "classify",
    "closest_reference",
    "compare",
    "extract_nodes",
    "generate_feedback",
    "harmonize",
    "levenshtein",
    "parse",
    "parse_schema",
    "provision",
    "recheck_pool",
    "rule_catalog",
    "run_select",
    "serialize",
    "static_diff",
    "total_distance",
    "unresolved_columns",
    "verdict",
]

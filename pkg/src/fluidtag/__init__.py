"""fluidtag: an openly writeable tag store with a query language, plus the
tooling that publishes Cactus thorn metadata into it and turns queries into
component retrieval lists."""

from fluidtag.model import (
    PermissionPolicy,
    TagPath,
    TagValue,
    classify_value,
    parse_tag_path,
    permission_allows,
)
from fluidtag.query import brute_force_eval, eval_query, parse_query, render_query
from fluidtag.store import TagStore

__version__ = "0.1.0"

__all__ = [
    "PermissionPolicy",
    "TagPath",
    "TagStore",
    "TagValue",
    "brute_force_eval",
    "classify_value",
    "eval_query",
    "parse_query",
    "parse_tag_path",
    "permission_allows",
    "render_query",
    "__version__",
]

"""Core vocabulary: tag paths, tag values, permissions.

Objects are anonymous containers identified by a UUID; everything a client
can say about an object lives in tag instances.  Values are either primitive
(indexed, queryable by content) or opaque (MIME-typed bytes, queryable only
by presence).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from fluidtag.errors import InvalidValueError, PathSyntaxError

SEGMENT_RE = re.compile(r"[A-Za-z0-9_.\-]+\Z")

PRIMITIVE_KINDS = ("integer", "float", "boolean", "string", "null", "string-set")
OPAQUE = "opaque"

DEFAULT_OPAQUE_MIME = "application/octet-stream"

# Reserved tags owned by the built-in `fluiddb` user.
ABOUT_TAG = "fluiddb/about"
USERNAME_TAG = "fluiddb/users/username"

TAG_ACTIONS = ("create", "read", "update", "delete")
NAMESPACE_ACTIONS = ("create", "list")


@dataclass(frozen=True)
class TagPath:
    """Validated slash-separated path; first segment names the owning user."""

    segments: tuple[str, ...]

    def __str__(self) -> str:
        return "/".join(self.segments)

    @property
    def user(self) -> str:
        return self.segments[0]

    @property
    def name(self) -> str:
        return self.segments[-1]

    def parent(self) -> str:
        return "/".join(self.segments[:-1])

    def ancestors(self) -> list[str]:
        """Namespace chain from the top-level user namespace down to parent()."""
        return ["/".join(self.segments[:i]) for i in range(1, len(self.segments))]


def parse_tag_path(text: str) -> TagPath:
    """Validate and split a tag path; rendering the result reproduces `text`."""
    if not isinstance(text, str) or not text:
        raise PathSyntaxError("empty tag path")
    segments = text.split("/")
    if len(segments) < 2:
        raise PathSyntaxError(f"tag path needs at least 2 segments: {text!r}")
    for seg in segments:
        if not seg:
            raise PathSyntaxError(f"empty segment in tag path: {text!r}")
        if not SEGMENT_RE.match(seg):
            raise PathSyntaxError(f"illegal characters in segment {seg!r}")
    return TagPath(tuple(segments))


def valid_username(name: str) -> bool:
    return bool(name) and SEGMENT_RE.match(name) is not None


@dataclass(frozen=True)
class TagValue:
    """A classified value: primitive payload, or opaque bytes plus MIME type."""

    kind: str
    payload: object
    mime: str | None = None

    def is_primitive(self) -> bool:
        return self.kind != OPAQUE

    def is_numeric(self) -> bool:
        return self.kind in ("integer", "float")


def classify_value(raw, mime: str | None = None,
                   default_mime: str | None = DEFAULT_OPAQUE_MIME) -> TagValue:
    """Classify a decoded wire value as primitive or opaque.

    Integers, floats, booleans, strings, null and homogeneous sets of strings
    are primitive.  Anything else is opaque: raw bytes keep their caller MIME
    (or `default_mime`), other JSON-encodable values are serialized and
    stored as JSON bytes.
    """
    if raw is None:
        return TagValue("null", None)
    if isinstance(raw, bool):  # bool before int: bool is an int subclass
        return TagValue("boolean", raw)
    if isinstance(raw, int):
        return TagValue("integer", raw)
    if isinstance(raw, float):
        return TagValue("float", raw)
    if isinstance(raw, str):
        return TagValue("string", raw)
    if isinstance(raw, (list, tuple, set, frozenset)):
        items = list(raw)
        if all(isinstance(x, str) for x in items):
            return TagValue("string-set", frozenset(items))
        raw = list(items)  # fall through: sets of non-strings are opaque
    if isinstance(raw, (bytes, bytearray)):
        resolved = mime or default_mime
        if resolved is None:
            raise InvalidValueError("opaque value without a MIME type")
        return TagValue(OPAQUE, bytes(raw), resolved)
    try:
        payload = json.dumps(raw, sort_keys=True, separators=(",", ":")).encode("utf-8")
    except (TypeError, ValueError) as exc:
        raise InvalidValueError(f"value cannot be stored: {exc}") from None
    return TagValue(OPAQUE, payload, mime or "application/json")


def encode_wire(value: TagValue) -> tuple[bytes, str]:
    """Render a value for HTTP transport: (body, content-type).

    Primitives become native JSON (string sets as sorted arrays); opaque
    payloads pass through byte-exact under their stored MIME type.
    """
    if value.kind == OPAQUE:
        return value.payload, value.mime or DEFAULT_OPAQUE_MIME
    if value.kind == "string-set":
        body = json.dumps(sorted(value.payload))
    else:
        body = json.dumps(value.payload)
    return body.encode("utf-8"), "application/json"


def _is_json_mime(content_type: str) -> bool:
    media = content_type.split(";", 1)[0].strip().lower()
    return media == "application/json" or media.endswith("+json")


def decode_wire(body: bytes, content_type: str | None) -> TagValue:
    """Classify an HTTP body.  JSON bodies are parsed and classified; any
    JSON shape that is not primitive stays opaque with its original bytes.
    Non-JSON content types are opaque byte-exact."""
    ct = content_type or DEFAULT_OPAQUE_MIME
    if _is_json_mime(ct):
        try:
            raw = json.loads(body.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise InvalidValueError(f"undecodable JSON body: {exc}") from None
        value = classify_value(raw, mime=ct)
        if value.kind == OPAQUE:
            return TagValue(OPAQUE, bytes(body), ct)
        return value
    return TagValue(OPAQUE, bytes(body), ct)


def encode_json_value(value: TagValue):
    """JSON-embeddable rendering used by multi-tag query results.

    Primitives embed natively; opaque values use a {"mime","base64"} envelope
    (a JSON object can never be a primitive, so the envelope is unambiguous).
    """
    import base64

    if value.kind == OPAQUE:
        return {"mime": value.mime, "base64": base64.b64encode(value.payload).decode("ascii")}
    if value.kind == "string-set":
        return sorted(value.payload)
    return value.payload


def decode_json_value(raw) -> TagValue:
    import base64

    if isinstance(raw, dict):
        if set(raw) == {"mime", "base64"}:
            return TagValue(OPAQUE, base64.b64decode(raw["base64"]), raw["mime"])
        raise InvalidValueError(f"unexpected value envelope: {sorted(raw)}")
    return classify_value(raw)


@dataclass(frozen=True)
class PermissionPolicy:
    """open = everyone except the listed users; closed = nobody except them."""

    policy: str  # "open" | "closed"
    exceptions: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.policy not in ("open", "closed"):
            raise InvalidValueError(f"policy must be open or closed, not {self.policy!r}")
        object.__setattr__(self, "exceptions", frozenset(self.exceptions))


def permission_allows(policy: PermissionPolicy, user: str | None) -> bool:
    """Pure truth table; `user` may be None for anonymous callers."""
    excepted = user is not None and user in policy.exceptions
    if policy.policy == "open":
        return not excepted
    return excepted


def default_policy(owner: str, action: str) -> PermissionPolicy:
    """Owner-only writes, open reads/listings."""
    if action in ("read", "list"):
        return PermissionPolicy("open", frozenset())
    return PermissionPolicy("closed", frozenset({owner}))


@dataclass
class User:
    username: str
    token: str | None
    user_object: str  # ObjectId carrying the fluiddb/users/username tag


@dataclass
class Namespace:
    path: str
    owner: str
    children: dict[str, str] = field(default_factory=dict)  # name -> "tag" | "namespace"


@dataclass
class TagInstance:
    object_id: str
    tag: str
    value: TagValue
    updated_at: int  # diagnostics only, excluded from equality checks

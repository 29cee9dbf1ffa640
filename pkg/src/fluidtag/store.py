"""Persistent tag store: users, namespaces, tags, objects, instances, indexes.

Layout on disk is a directory holding a format marker, a lock file, and a
single append-only log (`store.log`).  Each log line is one atomically
applied batch of key-value records, so a torn trailing line (crash mid
write) is detected and dropped while every acknowledged batch survives.
Records address three data keyspaces (`objects`, `instances`, `index`) plus
a `system` keyspace for users, namespaces and permission policies.  The
`index` keyspace is derived: it is rebuilt from `instances` on every open,
which is also what the `reindex` maintenance operation does explicitly.

Concurrency: one re-entrant lock serializes all operations on a handle, so
every operation observes a consistent snapshot.  Cross-process exclusion is
a flock on the lock file; a second opener fails fast.
"""

from __future__ import annotations

import base64
import fcntl
import json
import os
import re
import threading
import time
import uuid
from pathlib import Path

from fluidtag.errors import (
    AuthenticationError,
    CorruptStoreError,
    DuplicateError,
    ImmutableTagError,
    InvalidValueError,
    NotFoundError,
    PermissionDeniedError,
    StoreLockedError,
)
from fluidtag.model import (
    ABOUT_TAG,
    NAMESPACE_ACTIONS,
    OPAQUE,
    TAG_ACTIONS,
    USERNAME_TAG,
    Namespace,
    PermissionPolicy,
    TagInstance,
    TagValue,
    TagPath,
    User,
    default_policy,
    parse_tag_path,
    permission_allows,
    valid_username,
)

FORMAT_MARKER = "fluidtag-store/v1"
RESERVED_USER = "fluiddb"
ADMIN_USER = "admin"

TOKEN_RE = re.compile(r"\w+", re.UNICODE)


def tokenize_text(text: str) -> list[str]:
    """Word tokens for `matches` queries: case-folded, punctuation-split."""
    return TOKEN_RE.findall(text.casefold())


def _encode_payload(value: TagValue):
    if value.kind == OPAQUE:
        return base64.b64encode(value.payload).decode("ascii")
    if value.kind == "string-set":
        return sorted(value.payload)
    return value.payload


def _decode_payload(kind: str, raw) -> object:
    if kind == OPAQUE:
        return base64.b64decode(raw)
    if kind == "string-set":
        return frozenset(raw)
    return raw


def index_keys(value: TagValue) -> list[tuple]:
    """Normalized primitive-index keys; opaque values yield none.

    Numeric kinds share one key class so `5` and `5.0` land in the same
    bucket; booleans get their own class so True never collides with 1.
    """
    if value.kind in ("integer", "float"):
        return [("num", value.payload)]
    if value.kind == "boolean":
        return [("bool", value.payload)]
    if value.kind == "string":
        return [("str", value.payload)]
    if value.kind == "null":
        return [("null",)]
    if value.kind == "string-set":
        return [("elem", e) for e in value.payload]
    return []


class TagStore:
    def __init__(self, root: str | Path, create: bool = True):
        self.root = Path(root)
        self._lock = threading.RLock()
        self._log = None
        self._lock_fd = None

        self.objects: dict[str, str | None] = {}          # id -> about
        self.instances: dict[tuple[str, str], TagInstance] = {}
        self.users: dict[str, User] = {}
        self.namespaces: dict[str, Namespace] = {}
        self.tags: dict[str, dict] = {}                   # path -> {"owner": ...}
        self.policies: dict[tuple[str, str, str], PermissionPolicy] = {}

        # Derived state (the index keyspace plus lookup maps).
        self.abouts: dict[str, str] = {}
        self._presence: dict[str, set[str]] = {}
        self._primitive: dict[str, dict[tuple, set[str]]] = {}
        self._tokens: dict[str, dict[str, set[str]]] = {}
        self._object_tags: dict[str, set[str]] = {}
        self._tokens_by_user: dict[str, str] = {}

        self._open(create=create)

    # ------------------------------------------------------------------ setup

    def _open(self, create: bool):
        marker = self.root / "FORMAT"
        log_path = self.root / "store.log"
        fresh = not marker.exists()
        if fresh:
            if not create:
                raise CorruptStoreError(f"no store at {self.root}")
            self.root.mkdir(parents=True, exist_ok=True)
        self._acquire_lock()
        try:
            if fresh:
                marker.write_text(FORMAT_MARKER + "\n")
                log_path.touch()
            else:
                found = marker.read_text().strip()
                if found != FORMAT_MARKER:
                    raise CorruptStoreError(f"unknown store format {found!r}")
            self._replay(log_path)
            self._log = open(log_path, "ab")
            self._rebuild_derived()
            if fresh:
                self._bootstrap()
        except Exception:
            self._release_lock()
            raise

    def _acquire_lock(self):
        fd = os.open(self.root / "lock", os.O_RDWR | os.O_CREAT, 0o644)
        try:
            fcntl.flock(fd, fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError:
            os.close(fd)
            raise StoreLockedError(f"store at {self.root} is locked by another process")
        self._lock_fd = fd

    def _release_lock(self):
        if self._lock_fd is not None:
            fcntl.flock(self._lock_fd, fcntl.LOCK_UN)
            os.close(self._lock_fd)
            self._lock_fd = None

    def close(self):
        with self._lock:
            if self._log is not None:
                self._log.flush()
                os.fsync(self._log.fileno())
                self._log.close()
                self._log = None
            self._release_lock()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _bootstrap(self):
        """Reserved accounts: `fluiddb` owns the about/username tags, and the
        instance admin creates all further users."""
        self._create_user_records(RESERVED_USER, token=None)
        ns_users = f"{RESERVED_USER}/users"
        self._commit([
            ["set", "system", ["ns", ns_users], {"owner": RESERVED_USER}],
            ["set", "system", ["tag", ABOUT_TAG], {"owner": RESERVED_USER}],
            ["set", "system", ["tag", USERNAME_TAG], {"owner": RESERVED_USER}],
            ["set", "system", ["perm", "tag", ABOUT_TAG, "create"],
             {"policy": "closed", "exceptions": []}],
            ["set", "system", ["perm", "tag", ABOUT_TAG, "update"],
             {"policy": "closed", "exceptions": []}],
            ["set", "system", ["perm", "tag", ABOUT_TAG, "delete"],
             {"policy": "closed", "exceptions": []}],
            ["set", "system", ["perm", "tag", USERNAME_TAG, "create"],
             {"policy": "closed", "exceptions": []}],
            ["set", "system", ["perm", "tag", USERNAME_TAG, "update"],
             {"policy": "closed", "exceptions": []}],
            ["set", "system", ["perm", "tag", USERNAME_TAG, "delete"],
             {"policy": "closed", "exceptions": []}],
        ])
        self._create_user_records(ADMIN_USER, token=None)

    # ------------------------------------------------------------ persistence

    def _replay(self, log_path: Path):
        good_end = 0
        with open(log_path, "rb") as fh:
            data = fh.read()
        pos = 0
        while pos < len(data):
            nl = data.find(b"\n", pos)
            if nl == -1:
                break  # torn trailing line: drop it below
            line = data[pos:nl]
            try:
                batch = json.loads(line.decode("utf-8"))
                for record in batch:
                    self._apply(record)
            except Exception as exc:
                if nl == len(data) - 1 or data.find(b"\n", nl + 1) == -1:
                    break  # damaged final line is recoverable
                raise CorruptStoreError(
                    f"corrupt record at byte {pos} of {log_path}: {exc}") from None
            pos = nl + 1
            good_end = pos
        if good_end < len(data):
            with open(log_path, "r+b") as fh:
                fh.truncate(good_end)

    def _apply(self, record):
        op, keyspace, key = record[0], record[1], record[2]
        value = record[3] if op == "set" else None
        if keyspace == "objects":
            if op == "set":
                self.objects[key] = value["about"]
            else:
                self.objects.pop(key, None)
        elif keyspace == "instances":
            obj, tag = key
            if op == "set":
                tv = TagValue(value["kind"], _decode_payload(value["kind"], value["value"]),
                              value.get("mime"))
                self.instances[(obj, tag)] = TagInstance(obj, tag, tv, value.get("ts", 0))
            else:
                self.instances.pop((obj, tag), None)
        elif keyspace == "system":
            kind = key[0]
            if kind == "user":
                if op == "set":
                    self.users[key[1]] = User(key[1], value.get("token"), value.get("object", ""))
                else:
                    self.users.pop(key[1], None)
            elif kind == "ns":
                if op == "set":
                    self.namespaces[key[1]] = Namespace(key[1], value["owner"])
                else:
                    self.namespaces.pop(key[1], None)
            elif kind == "tag":
                if op == "set":
                    self.tags[key[1]] = {"owner": value["owner"]}
                else:
                    self.tags.pop(key[1], None)
            elif kind == "perm":
                pkey = (key[1], key[2], key[3])
                if op == "set":
                    self.policies[pkey] = PermissionPolicy(
                        value["policy"], frozenset(value["exceptions"]))
                else:
                    self.policies.pop(pkey, None)
            else:
                raise CorruptStoreError(f"unknown system record {key!r}")
        else:
            raise CorruptStoreError(f"unknown keyspace {keyspace!r}")

    def _commit(self, records: list):
        """One fsynced log line per logical operation, applied only after the
        write is durable (an acknowledged write survives SIGKILL)."""
        line = json.dumps(records, separators=(",", ":"), ensure_ascii=False) + "\n"
        self._log.write(line.encode("utf-8"))
        self._log.flush()
        os.fsync(self._log.fileno())
        for record in records:
            self._apply(record)
            if record[1] == "instances":
                obj, tag = record[2]
                self._deindex(obj, tag)
                if record[0] == "set":
                    self._index(self.instances[(obj, tag)])
            elif record[1] == "objects" and record[0] == "set":
                about = record[3]["about"]
                if about is not None:
                    self.abouts[about] = record[2]
                self._object_tags.setdefault(record[2], set())
            elif record[1] == "system" and record[2][0] == "user":
                self._tokens_by_user = {
                    u.token: u.username for u in self.users.values() if u.token}

    # ------------------------------------------------------------ index state

    def _rebuild_derived(self):
        self.abouts = {about: oid for oid, about in self.objects.items() if about is not None}
        self._presence = {}
        self._primitive = {}
        self._tokens = {}
        self._object_tags = {oid: set() for oid in self.objects}
        for inst in self.instances.values():
            self._index(inst)
        self._tokens_by_user = {u.token: u.username for u in self.users.values() if u.token}

    def _index(self, inst: TagInstance):
        self._presence.setdefault(inst.tag, set()).add(inst.object_id)
        self._object_tags.setdefault(inst.object_id, set()).add(inst.tag)
        for key in index_keys(inst.value):
            self._primitive.setdefault(inst.tag, {}).setdefault(key, set()).add(inst.object_id)
        if inst.value.kind == "string":
            buckets = self._tokens.setdefault(inst.tag, {})
            for token in set(tokenize_text(inst.value.payload)):
                buckets.setdefault(token, set()).add(inst.object_id)

    def _deindex(self, obj: str, tag: str):
        presence = self._presence.get(tag)
        if presence:
            presence.discard(obj)
            if not presence:
                self._presence.pop(tag, None)
        tags = self._object_tags.get(obj)
        if tags:
            tags.discard(tag)
        for table in (self._primitive, self._tokens):
            buckets = table.get(tag)
            if not buckets:
                continue
            for key in list(buckets):
                buckets[key].discard(obj)
                if not buckets[key]:
                    del buckets[key]
            if not buckets:
                table.pop(tag, None)

    def audit_indexes(self) -> list[str]:
        """Full-scan consistency check of every derived index table."""
        with self._lock:
            problems = []
            presence: dict[str, set[str]] = {}
            primitive: dict[str, dict[tuple, set[str]]] = {}
            tokens: dict[str, dict[str, set[str]]] = {}
            object_tags = {oid: set() for oid in self.objects}
            for inst in self.instances.values():
                presence.setdefault(inst.tag, set()).add(inst.object_id)
                object_tags.setdefault(inst.object_id, set()).add(inst.tag)
                for key in index_keys(inst.value):
                    primitive.setdefault(inst.tag, {}).setdefault(key, set()).add(inst.object_id)
                if inst.value.kind == "string":
                    for token in set(tokenize_text(inst.value.payload)):
                        tokens.setdefault(inst.tag, {}).setdefault(token, set()).add(inst.object_id)
            for name, live, fresh in (
                ("presence", self._presence, presence),
                ("primitive", self._primitive, primitive),
                ("tokens", self._tokens, tokens),
                ("object-tags", self._object_tags, object_tags),
            ):
                if live != fresh:
                    problems.append(f"{name} index out of sync")
            abouts = {about: oid for oid, about in self.objects.items() if about is not None}
            if abouts != self.abouts:
                problems.append("about map out of sync")
            for (oid, tag) in self.instances:
                if oid not in self.objects:
                    problems.append(f"instance of {tag} on unknown object {oid}")
            return problems

    def reindex(self) -> dict:
        """Rebuild the derived index keyspace from instances and compact the
        log into a snapshot.  Returns counters for reporting."""
        with self._lock:
            self._rebuild_derived()
            records = []
            for name, user in sorted(self.users.items()):
                records.append(["set", "system", ["user", name],
                                {"token": user.token, "object": user.user_object}])
            for path, ns in sorted(self.namespaces.items()):
                records.append(["set", "system", ["ns", path], {"owner": ns.owner}])
            for path, td in sorted(self.tags.items()):
                records.append(["set", "system", ["tag", path], {"owner": td["owner"]}])
            for (kind, path, action), pol in sorted(self.policies.items()):
                records.append(["set", "system", ["perm", kind, path, action],
                                {"policy": pol.policy, "exceptions": sorted(pol.exceptions)}])
            for oid, about in sorted(self.objects.items()):
                records.append(["set", "objects", oid, {"about": about}])
            for (oid, tag), inst in sorted(self.instances.items()):
                records.append(["set", "instances", [oid, tag],
                                {"kind": inst.value.kind,
                                 "value": _encode_payload(inst.value),
                                 "mime": inst.value.mime,
                                 "ts": inst.updated_at}])
            log_path = self.root / "store.log"
            tmp_path = self.root / "store.log.tmp"
            with open(tmp_path, "wb") as fh:
                for record in records:
                    fh.write(json.dumps([record], separators=(",", ":"),
                                        ensure_ascii=False).encode("utf-8") + b"\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._log.close()
            os.replace(tmp_path, log_path)
            self._log = open(log_path, "ab")
            return {
                "objects": len(self.objects),
                "instances": len(self.instances),
                "indexed_tags": len(self._presence),
            }

    # ------------------------------------------------------------- permissions

    def _owner_of(self, path: str) -> str:
        return path.split("/", 1)[0]

    def effective_policy(self, kind: str, path: str, action: str) -> PermissionPolicy:
        pol = self.policies.get((kind, path, action))
        if pol is not None:
            return pol
        return default_policy(self._owner_of(path), action)

    def _check_tag(self, path: str, action: str, actor: str | None) -> bool:
        return permission_allows(self.effective_policy("tag", path, action), actor)

    def _check_ns(self, path: str, action: str, actor: str | None) -> bool:
        return permission_allows(self.effective_policy("ns", path, action), actor)

    def tag_readable(self, path: str, actor: str | None) -> bool:
        return self._check_tag(path, "read", actor)

    # ------------------------------------------------------------------- users

    def authenticate(self, token: str) -> str:
        with self._lock:
            user = self._tokens_by_user.get(token)
            if user is None:
                raise AuthenticationError("unknown token")
            return user

    def _require_user(self, actor: str | None) -> str:
        if actor is None:
            raise AuthenticationError("authentication required")
        if actor not in self.users:
            raise AuthenticationError(f"unknown user {actor!r}")
        return actor

    def _create_user_records(self, username: str, token: str | None) -> User:
        oid = str(uuid.uuid4())
        about = f"@{username}"
        ts = int(time.time())
        self._commit([
            ["set", "system", ["user", username], {"token": token, "object": oid}],
            ["set", "system", ["ns", username], {"owner": username}],
            ["set", "objects", oid, {"about": about}],
            ["set", "instances", [oid, ABOUT_TAG],
             {"kind": "string", "value": about, "mime": None, "ts": ts}],
            ["set", "instances", [oid, USERNAME_TAG],
             {"kind": "string", "value": username, "mime": None, "ts": ts}],
        ])
        return self.users[username]

    def create_user(self, actor: str | None, username: str, token: str | None) -> User:
        with self._lock:
            self._require_user(actor)
            if actor != ADMIN_USER:
                raise PermissionDeniedError("only the instance admin may create users")
            if not valid_username(username):
                raise InvalidValueError(f"invalid username {username!r}")
            if username in self.users:
                raise DuplicateError(f"user {username!r} already exists")
            if username in self.namespaces:
                raise DuplicateError(f"namespace {username!r} already exists")
            return self._create_user_records(username, token)

    def set_token(self, username: str, token: str) -> None:
        """Refresh a user's bearer token (credential file merge at startup)."""
        with self._lock:
            user = self.users.get(username)
            if user is None:
                raise NotFoundError(f"unknown user {username!r}")
            self._commit([["set", "system", ["user", username],
                           {"token": token, "object": user.user_object}]])

    def ensure_user(self, username: str, token: str) -> None:
        """Operator-level provisioning: create or re-token a user.  Reserved
        for the credential-file merge, which carries admin authority."""
        with self._lock:
            if not valid_username(username):
                raise InvalidValueError(f"invalid username {username!r}")
            if username in self.users:
                if self.users[username].token != token:
                    self.set_token(username, token)
            else:
                self._create_user_records(username, token)

    # ----------------------------------------------------------------- objects

    def create_object(self, actor: str | None, about: str | None = None) -> str:
        with self._lock:
            self._require_user(actor)
            if about is not None:
                if not isinstance(about, str) or not about:
                    raise InvalidValueError("about must be non-empty text")
                existing = self.abouts.get(about)
                if existing is not None:
                    return existing
            oid = str(uuid.uuid4())
            records = [["set", "objects", oid, {"about": about}]]
            if about is not None:
                records.append(["set", "instances", [oid, ABOUT_TAG],
                                {"kind": "string", "value": about, "mime": None,
                                 "ts": int(time.time())}])
            self._commit(records)
            return oid

    def object_exists(self, oid: str) -> bool:
        with self._lock:
            return oid in self.objects

    def resolve_about(self, about: str) -> str | None:
        with self._lock:
            return self.abouts.get(about)

    # --------------------------------------------------------------- instances

    def _materialization_records(self, path: TagPath, actor: str) -> list:
        """Records creating missing namespaces/tag definitions for a put.

        Namespace auto-creation is limited to the actor's own top-level
        namespace; anywhere else a missing chain is a permission failure.
        """
        records = []
        for ns_path in path.ancestors():
            if ns_path in self.namespaces:
                continue
            if ns_path in self.tags:
                raise DuplicateError(f"{ns_path!r} already names a tag")
            if path.user != actor:
                raise PermissionDeniedError(
                    f"namespace {ns_path!r} does not exist and only {path.user!r} "
                    "may create it implicitly")
            if "/" in ns_path:
                parent = ns_path.rsplit("/", 1)[0]
                if parent in self.namespaces and not self._check_ns(parent, "create", actor):
                    raise PermissionDeniedError(f"cannot create namespace under {parent!r}")
            records.append(["set", "system", ["ns", ns_path], {"owner": path.user}])
        tag_str = str(path)
        if tag_str not in self.tags:
            if tag_str in self.namespaces:
                raise DuplicateError(f"{tag_str!r} already names a namespace")
            records.append(["set", "system", ["tag", tag_str], {"owner": path.user}])
        return records

    def put_tag(self, actor: str | None, oid: str, tag: str | TagPath,
                value: TagValue) -> TagInstance:
        with self._lock:
            actor = self._require_user(actor)
            path = tag if isinstance(tag, TagPath) else parse_tag_path(str(tag))
            tag_str = str(path)
            if tag_str == ABOUT_TAG:
                raise ImmutableTagError("the about tag is immutable")
            if not isinstance(value, TagValue):
                raise InvalidValueError("value must be a classified TagValue")
            if oid not in self.objects:
                raise NotFoundError(f"unknown object {oid!r}")
            records = self._materialization_records(path, actor)
            action = "update" if (oid, tag_str) in self.instances else "create"
            if not self._check_tag(tag_str, action, actor):
                raise PermissionDeniedError(f"{action} denied on {tag_str!r}")
            ts = int(time.time())
            records.append(["set", "instances", [oid, tag_str],
                            {"kind": value.kind, "value": _encode_payload(value),
                             "mime": value.mime, "ts": ts}])
            self._commit(records)
            return self.instances[(oid, tag_str)]

    def get_tag(self, actor: str | None, oid: str, tag: str | TagPath) -> TagValue:
        with self._lock:
            path = tag if isinstance(tag, TagPath) else parse_tag_path(str(tag))
            tag_str = str(path)
            if oid not in self.objects:
                raise NotFoundError(f"unknown object {oid!r}")
            inst = self.instances.get((oid, tag_str))
            # Denied reads are reported as not-found so tag presence never leaks.
            if inst is None or not self._check_tag(tag_str, "read", actor):
                raise NotFoundError(f"no readable {tag_str!r} on {oid!r}")
            return inst.value

    def delete_tag(self, actor: str | None, oid: str, tag: str | TagPath) -> None:
        with self._lock:
            actor = self._require_user(actor)
            path = tag if isinstance(tag, TagPath) else parse_tag_path(str(tag))
            tag_str = str(path)
            if tag_str == ABOUT_TAG:
                raise ImmutableTagError("the about tag is immutable")
            if oid not in self.objects:
                raise NotFoundError(f"unknown object {oid!r}")
            if (oid, tag_str) not in self.instances:
                raise NotFoundError(f"no {tag_str!r} on {oid!r}")
            if not self._check_tag(tag_str, "delete", actor):
                raise PermissionDeniedError(f"delete denied on {tag_str!r}")
            self._commit([["del", "instances", [oid, tag_str]]])

    def list_object_tags(self, actor: str | None, oid: str) -> list[tuple[str, str]]:
        """(path, kind) pairs readable by the actor, sorted by path."""
        with self._lock:
            if oid not in self.objects:
                raise NotFoundError(f"unknown object {oid!r}")
            out = []
            for tag in sorted(self._object_tags.get(oid, ())):
                if not self._check_tag(tag, "read", actor):
                    continue
                out.append((tag, self.instances[(oid, tag)].value.kind))
            return out

    # -------------------------------------------------------------- namespaces

    def create_namespace(self, actor: str | None, path: str) -> Namespace:
        with self._lock:
            actor = self._require_user(actor)
            parsed = parse_tag_path(path)
            ns_path = str(parsed)
            parent = parsed.parent()
            if parent not in self.namespaces:
                raise NotFoundError(f"parent namespace {parent!r} does not exist")
            if ns_path in self.namespaces or ns_path in self.tags:
                raise DuplicateError(f"{ns_path!r} already exists")
            if not self._check_ns(parent, "create", actor):
                raise PermissionDeniedError(f"create denied in namespace {parent!r}")
            self._commit([["set", "system", ["ns", ns_path], {"owner": parsed.user}]])
            return self.namespaces[ns_path]

    def namespace_children(self, path: str) -> dict[str, str]:
        with self._lock:
            if path not in self.namespaces:
                raise NotFoundError(f"unknown namespace {path!r}")
            depth = path.count("/") + 1
            children = {}
            for other in self.namespaces:
                if other.startswith(path + "/") and other.count("/") == depth:
                    children[other.rsplit("/", 1)[1]] = "namespace"
            for tag in self.tags:
                if tag.startswith(path + "/") and tag.count("/") == depth:
                    children[tag.rsplit("/", 1)[1]] = "tag"
            return children

    # ------------------------------------------------------------- permissions

    def _resolve_path_kind(self, path: str) -> str:
        if path in self.tags:
            return "tag"
        if path in self.namespaces:
            return "ns"
        raise NotFoundError(f"unknown tag or namespace {path!r}")

    def _validate_action(self, kind: str, action: str):
        allowed = TAG_ACTIONS if kind == "tag" else NAMESPACE_ACTIONS
        if action not in allowed:
            raise InvalidValueError(
                f"action {action!r} not valid for {'tags' if kind == 'tag' else 'namespaces'}")

    def set_permission(self, actor: str | None, path: str, action: str,
                       policy: PermissionPolicy) -> None:
        with self._lock:
            actor = self._require_user(actor)
            kind = self._resolve_path_kind(path)
            self._validate_action(kind, action)
            if self._owner_of(path) != actor:
                raise PermissionDeniedError(f"only the owner may change policy on {path!r}")
            self._commit([["set", "system", ["perm", kind, path, action],
                           {"policy": policy.policy, "exceptions": sorted(policy.exceptions)}]])

    def get_permission(self, actor: str | None, path: str, action: str) -> PermissionPolicy:
        with self._lock:
            actor = self._require_user(actor)
            kind = self._resolve_path_kind(path)
            self._validate_action(kind, action)
            if self._owner_of(path) != actor:
                raise PermissionDeniedError(f"only the owner may read policy on {path!r}")
            return self.effective_policy(kind, path, action)

    # ------------------------------------------------------------ query access

    def all_object_ids(self) -> list[str]:
        with self._lock:
            return list(self.objects)

    def visible_instance(self, actor: str | None, oid: str, tag: str) -> TagValue | None:
        with self._lock:
            inst = self.instances.get((oid, tag))
            if inst is None or not self._check_tag(tag, "read", actor):
                return None
            return inst.value

    def presence_index(self, tag: str) -> set[str]:
        return self._presence.get(tag, set())

    def primitive_index(self, tag: str) -> dict[tuple, set[str]]:
        return self._primitive.get(tag, {})

    def token_index(self, tag: str) -> dict[str, set[str]]:
        return self._tokens.get(tag, {})

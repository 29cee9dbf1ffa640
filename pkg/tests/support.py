"""Shared fixture builders and independent oracles used across the suite."""

from __future__ import annotations

import random
import socket
import subprocess
import sys
import time

import httpx
from fastapi.testclient import TestClient

from fluidtag.client import Client
from fluidtag.model import PermissionPolicy, TagValue, classify_value, permission_allows
from fluidtag.query import And, Except, Numeric, Or, Presence, SetContains, Textual
from fluidtag.service import create_app
from fluidtag.store import TagStore

ADMIN_TOKEN = "tok-admin"


def open_store(path) -> TagStore:
    store = TagStore(path)
    store.ensure_user("admin", ADMIN_TOKEN)
    return store


def service_client(store: TagStore, token: str | None = None) -> Client:
    app = create_app(store)
    return Client("http://testserver", token=token, http=TestClient(app))


def client_for(app_client: Client, token: str | None) -> Client:
    """Second handle on the same in-process app with different credentials."""
    return Client("http://testserver", token=token, http=app_client._http)


def free_port() -> int:
    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.close()
    return port


def spawn_server(store_dir, credentials, port: int) -> subprocess.Popen:
    """Real server subprocess; waits until /healthz answers."""
    proc = subprocess.Popen(
        [sys.executable, "-m", "fluidtag", "serve",
         "--bind", f"127.0.0.1:{port}",
         "--store", str(store_dir),
         "--credentials", str(credentials)],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.PIPE,
    )
    deadline = time.time() + 20
    url = f"http://127.0.0.1:{port}/healthz"
    while time.time() < deadline:
        if proc.poll() is not None:
            raise RuntimeError(f"server died: {proc.stderr.read().decode()}")
        try:
            if httpx.get(url, timeout=1.0).status_code == 200:
                return proc
        except httpx.HTTPError:
            time.sleep(0.05)
    proc.kill()
    raise RuntimeError("server did not come up in time")


# ------------------------------------------------------------- worked example

def build_worked_fixture(store: TagStore) -> dict[str, str]:
    """Four objects under eric/john/imdb.com tags; the example query
    `(has eric/seen and (eric/rating > 4 or john/rating > 8))
     except imdb.com/rating < 5`
    picks O1 and O3 by hand enumeration: presence holds for O1 O2 O3,
    the rating disjunction for all four, and the except arm drops O2."""
    for user in ("eric", "john", "imdb.com"):
        store.ensure_user(user, f"tok-{user}")
    null = classify_value(None)
    o1 = store.create_object("eric")
    o2 = store.create_object("eric")
    o3 = store.create_object("eric")
    o4 = store.create_object("eric")
    store.put_tag("eric", o1, "eric/seen", null)
    store.put_tag("eric", o1, "eric/rating", classify_value(6))
    store.put_tag("eric", o2, "eric/seen", null)
    store.put_tag("john", o2, "john/rating", classify_value(9))
    store.put_tag("imdb.com", o2, "imdb.com/rating", classify_value(4))
    store.put_tag("eric", o3, "eric/seen", null)
    store.put_tag("eric", o3, "eric/rating", classify_value(5))
    store.put_tag("eric", o4, "eric/rating", classify_value(7))
    return {"O1": o1, "O2": o2, "O3": o3, "O4": o4}

WORKED_QUERY = ("(has eric/seen and (eric/rating > 4 or john/rating > 8)) "
                "except imdb.com/rating < 5")
WORKED_EXPECTED = ("O1", "O3")


# ----------------------------------------------------------- permission cells

MATRIX_USERS = {"owner": "polly", "excepted": "xena", "other": "otto"}


def run_permission_cell(store: TagStore, action: str, policy: str,
                        actor_kind: str, counter: int) -> bool:
    """Observed allow/deny for one (action, policy, actor) cell, using a
    fresh tag so cells stay independent."""
    owner = MATRIX_USERS["owner"]
    actor = MATRIX_USERS[actor_kind]
    tag = f"{owner}/cell{counter}"
    scratch = store.create_object(owner)
    target = store.create_object(owner)
    store.put_tag(owner, scratch, tag, classify_value(1))  # materialize the tag
    if action in ("read", "update", "delete"):
        store.put_tag(owner, target, tag, classify_value(2))
    store.set_permission(owner, tag, action,
                         PermissionPolicy(policy, frozenset({MATRIX_USERS["excepted"]})))
    try:
        if action == "create":
            store.put_tag(actor, target, tag, classify_value(3))
        elif action == "update":
            store.put_tag(actor, target, tag, classify_value(4))
        elif action == "read":
            store.get_tag(actor, target, tag)
        else:
            store.delete_tag(actor, target, tag)
        return True
    except Exception:
        return False


def expected_cell(policy: str, actor_kind: str) -> bool:
    pol = PermissionPolicy(policy, frozenset({MATRIX_USERS["excepted"]}))
    return permission_allows(pol, MATRIX_USERS[actor_kind])


# ------------------------------------------------------------- random fixture

WORDS = ("alpha", "beta", "gamma", "delta", "star", "black", "hole",
         "wave", "grid", "mesh", "deep", "field")

FIXTURE_USERS = ("eric", "john", "alice", "imdb.com")

FIXTURE_TAGS = (
    "eric/rating", "eric/seen", "eric/title", "eric/flag", "eric/blob",
    "eric/mixed", "john/rating", "john/keywords", "john/ok", "john/note",
    "alice/note", "alice/tags", "alice/secret", "imdb.com/rating",
    "imdb.com/title", "alice/score",
)


def _random_value(rng: random.Random, tag: str) -> TagValue:
    roll = rng.random()
    if tag.endswith(("rating", "score")) and roll < 0.8:
        if rng.random() < 0.5:
            return classify_value(rng.randint(-10, 10))
        return classify_value(round(rng.uniform(-10, 10), 3))
    if tag.endswith(("keywords", "tags")) and roll < 0.8:
        return classify_value(set(rng.sample(WORDS, k=rng.randint(0, 4))))
    if tag.endswith(("title", "note")) and roll < 0.8:
        return classify_value(" ".join(rng.sample(WORDS, k=rng.randint(1, 4))))
    if tag.endswith(("flag", "ok")) and roll < 0.8:
        return classify_value(rng.random() < 0.5)
    if tag.endswith("blob") and roll < 0.8:
        return classify_value(bytes(rng.randrange(256) for _ in range(8)))
    # heterogeneous leftovers: every tag can hold any kind
    return rng.choice([
        classify_value(None),
        classify_value(rng.randint(-5, 5)),
        classify_value(rng.choice(WORDS)),
        classify_value(rng.random() < 0.5),
        classify_value(set(rng.sample(WORDS, k=2))),
        classify_value([1, 2, rng.randint(0, 9)]),
    ])


def build_random_fixture(store: TagStore, rng: random.Random, n_objects: int):
    for user in FIXTURE_USERS:
        store.ensure_user(user, f"tok-{user}")
    for i in range(n_objects):
        about = f"random:{i}" if rng.random() < 0.3 else None
        oid = store.create_object("eric", about)
        for tag in rng.sample(FIXTURE_TAGS, k=rng.randint(0, 6)):
            owner = tag.split("/", 1)[0]
            store.put_tag(owner, oid, tag, _random_value(rng, tag))
    # one invisible tag: denied readers must see queries as if it were absent
    store.set_permission("alice", "alice/secret", "read",
                         PermissionPolicy("closed", frozenset({"alice"})))


def random_ast(rng: random.Random, depth: int):
    if depth <= 0 or rng.random() < 0.35:
        tag = rng.choice(FIXTURE_TAGS + ("eric/nosuch", "john/void"))
        kind = rng.randrange(4)
        if kind == 0:
            return Presence(tag)
        if kind == 1:
            if rng.random() < 0.2:
                return Numeric(tag, rng.choice(("=", "!=")), rng.random() < 0.5)
            op = rng.choice(("=", "!=", "<", "<=", ">", ">="))
            number = rng.randint(-10, 10) if rng.random() < 0.6 \
                else round(rng.uniform(-10, 10), 3)
            return Numeric(tag, op, number)
        if kind == 2:
            text = " ".join(rng.sample(WORDS, k=rng.randint(1, 2)))
            return Textual(tag, text)
        return SetContains(tag, rng.choice(WORDS))
    node = rng.choice((And, Or, Except))
    return node(random_ast(rng, depth - 1), random_ast(rng, depth - 1))


# -------------------------------------------------------------- closure oracle

def oracle_closure(records: dict, base: list[str]) -> set[str]:
    """Independent re-implementation of the closure rule: repeatedly satisfy
    the smallest unsatisfied interface, preferring toolkit providers then
    the smallest about."""
    result = set(base)
    while True:
        unsatisfied = sorted({
            interface
            for member in result
            for interface in records[member].inherits
            if not any(interface in records[m].implements for m in result)
        })
        if not unsatisfied:
            return result
        interface = unsatisfied[0]
        candidates = sorted(a for a in records if interface in records[a].implements)
        if not candidates:
            raise AssertionError(f"oracle: interface {interface!r} has no provider")
        toolkit = [a for a in candidates if records[a].toolkit]
        result.add(toolkit[0] if toolkit else candidates[0])


def closure_sound(records: dict, result: set[str]) -> bool:
    return all(
        any(interface in records[m].implements for m in result)
        for member in result
        for interface in records[member].inherits
    )


def closure_minimal(records: dict, result: set[str], base: list[str]) -> bool:
    extras = result - set(base)
    return all(not closure_sound(records, result - {member}) for member in extras)

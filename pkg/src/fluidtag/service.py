"""HTTP surface: one route per store/query operation, JSON envelopes for
primitives and raw bodies for opaque values.

Authentication is a static bearer token per user.  Mutating routes require
a valid token; reads may be anonymous, in which case only tags with an open
read policy are visible.

The about-addressed routes treat the about value as a single path segment,
so an about containing `/` must be percent-encoded (`CCTK:Carpet%2FCarpet`).
The raw request path is used for that split because ASGI servers hand the
decoded path to the router.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from urllib.parse import unquote

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from fluidtag import query as fq
from fluidtag.errors import (
    AuthenticationError,
    FluidTagError,
    InvalidValueError,
    NotFoundError,
    PathSyntaxError,
)
from fluidtag.model import PermissionPolicy, decode_wire, encode_json_value, encode_wire
from fluidtag.store import TagStore


@dataclass
class ServeConfig:
    bind: str = "127.0.0.1:8080"
    store: str = "./fluidtag-store"
    credentials: str | None = None

    def host_port(self) -> tuple[str, int]:
        host, _, port = self.bind.rpartition(":")
        if not host or not port.isdigit():
            raise InvalidValueError(f"bind must be host:port, got {self.bind!r}")
        return host, int(port)


def load_credentials(path: str | Path) -> dict[str, str]:
    """Credential file: one `username token` pair per line, `#` comments."""
    tokens: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InvalidValueError(f"{path}:{lineno}: expected 'username token'")
        tokens[parts[0]] = parts[1]
    return tokens


def _error_response(exc: FluidTagError) -> JSONResponse:
    return JSONResponse(status_code=exc.http_status,
                        content={"error": exc.code, "message": exc.message})


def create_app(store: TagStore) -> FastAPI:
    app = FastAPI(title="fluidtag", docs_url=None, redoc_url=None)
    # Browser front-ends are served from a different origin; auth is the
    # bearer token, so wide-open CORS grants nothing extra.
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(FluidTagError)
    async def _handle(request, exc: FluidTagError):
        return _error_response(exc)

    def actor_of(request: Request, required: bool = False) -> str | None:
        header = request.headers.get("authorization")
        if header is None:
            if required:
                raise AuthenticationError("authentication required")
            return None
        scheme, _, token = header.partition(" ")
        if scheme.lower() != "bearer" or not token.strip():
            raise AuthenticationError("expected a bearer token")
        return store.authenticate(token.strip())

    def json_body(raw: bytes) -> dict:
        try:
            body = json.loads(raw.decode("utf-8")) if raw else {}
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise InvalidValueError(f"undecodable JSON body: {exc}") from None
        if not isinstance(body, dict):
            raise InvalidValueError("expected a JSON object body")
        return body

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/users", status_code=201)
    async def create_user(request: Request):
        actor = actor_of(request, required=True)
        body = json_body(await request.body())
        username = body.get("username")
        token = body.get("token")
        if not isinstance(username, str) or not isinstance(token, str) or not token:
            raise InvalidValueError("body must carry username and token strings")
        user = store.create_user(actor, username, token)
        return {"username": user.username}

    @app.post("/objects", status_code=201)
    async def create_object(request: Request):
        actor = actor_of(request, required=True)
        body = json_body(await request.body())
        about = body.get("about")
        if about is not None and not isinstance(about, str):
            raise InvalidValueError("about must be text")
        oid = store.create_object(actor, about)
        return {"id": oid}

    @app.get("/objects")
    def run_query(request: Request):
        actor = actor_of(request)
        text = request.query_params.get("query")
        if text is None:
            raise InvalidValueError("missing query parameter")
        ast = fq.parse_query(text)
        ids = sorted(fq.eval_query(store, ast, actor))
        payload = {"ids": ids}
        tags_param = request.query_params.get("tags")
        if tags_param is not None:
            # No wildcards: callers list the exact tags to return.
            tags = [t for t in tags_param.split(",") if t]
            results = {}
            for oid in ids:
                values = {}
                for tag in tags:
                    value = store.visible_instance(actor, oid, tag)
                    if value is not None:
                        values[tag] = encode_json_value(value)
                results[oid] = values
            payload["results"] = results
        return payload

    @app.get("/objects/{object_id}")
    def list_tags(object_id: str, request: Request):
        actor = actor_of(request)
        listing = store.list_object_tags(actor, object_id)
        return {"id": object_id,
                "tags": [{"path": path, "kind": kind} for path, kind in listing]}

    def tag_response(actor, oid: str, tag: str) -> Response:
        value = store.get_tag(actor, oid, tag)
        body, content_type = encode_wire(value)
        return Response(content=body, headers={"content-type": content_type})

    async def tag_put(request: Request, actor, oid: str, tag: str):
        value = decode_wire(await request.body(), request.headers.get("content-type"))
        inst = store.put_tag(actor, oid, tag, value)
        return {"id": oid, "tag": tag, "kind": inst.value.kind}

    @app.api_route("/objects/{object_id}/{tag_path:path}",
                   methods=["GET", "PUT", "DELETE"])
    async def object_tag(object_id: str, tag_path: str, request: Request):
        if request.method == "GET":
            return tag_response(actor_of(request), object_id, tag_path)
        actor = actor_of(request, required=True)
        if request.method == "PUT":
            return await tag_put(request, actor, object_id, tag_path)
        store.delete_tag(actor, object_id, tag_path)
        return {"deleted": True}

    def split_about_path(request: Request) -> tuple[str, str]:
        """Split `/about/<about>/<tag...>` on the raw (still percent-encoded)
        path so abouts containing `/` stay one segment."""
        raw = request.scope.get("raw_path") or request.url.path.encode("utf-8")
        raw_text = raw.split(b"?", 1)[0].decode("latin-1")
        parts = raw_text.split("/")
        # ['', 'about', '<about>', seg, seg, ...]
        if len(parts) < 5 or parts[1] != "about":
            raise PathSyntaxError("expected /about/{about}/{tag path}")
        about = unquote(parts[2])
        if not about:
            raise PathSyntaxError("empty about value")
        tag = "/".join(unquote(seg) for seg in parts[3:])
        return about, tag

    @app.api_route("/about/{rest:path}", methods=["GET", "PUT", "DELETE"])
    async def about_tag(rest: str, request: Request):
        about, tag = split_about_path(request)
        if request.method == "GET":
            actor = actor_of(request)
            oid = store.resolve_about(about)
            if oid is None:
                raise NotFoundError(f"no object about {about!r}")
            return tag_response(actor, oid, tag)
        actor = actor_of(request, required=True)
        if request.method == "PUT":
            oid = store.create_object(actor, about)
            return await tag_put(request, actor, oid, tag)
        oid = store.resolve_about(about)
        if oid is None:
            raise NotFoundError(f"no object about {about!r}")
        store.delete_tag(actor, oid, tag)
        return {"deleted": True}

    @app.post("/namespaces/{ns_path:path}", status_code=201)
    def create_namespace(ns_path: str, request: Request):
        actor = actor_of(request, required=True)
        ns = store.create_namespace(actor, ns_path)
        return {"path": ns.path, "owner": ns.owner}

    @app.api_route("/permissions/{perm_path:path}", methods=["GET", "PUT"])
    async def permissions(perm_path: str, request: Request):
        actor = actor_of(request, required=True)
        action = request.query_params.get("action")
        if not action:
            raise InvalidValueError("missing action parameter")
        if request.method == "GET":
            policy = store.get_permission(actor, perm_path, action)
        else:
            body = json_body(await request.body())
            exceptions = body.get("exceptions", [])
            if not isinstance(exceptions, list) or \
                    not all(isinstance(e, str) for e in exceptions):
                raise InvalidValueError("exceptions must be a list of usernames")
            policy = PermissionPolicy(body.get("policy", ""), frozenset(exceptions))
            store.set_permission(actor, perm_path, action, policy)
        return {"path": perm_path, "action": action,
                "policy": policy.policy, "exceptions": sorted(policy.exceptions)}

    return app


def serve(config: ServeConfig) -> None:
    """Open the store (refusing on lock or corruption), merge credentials,
    and run until interrupted; the final close flushes the log."""
    import uvicorn

    host, port = config.host_port()
    store = TagStore(config.store)
    try:
        if config.credentials:
            for username, token in load_credentials(config.credentials).items():
                store.ensure_user(username, token)
        app = create_app(store)
        uvicorn.run(app, host=host, port=port, log_level="warning")
    finally:
        store.close()

"""Thin HTTP client for the tag service.

Raises ApiError with the server's machine-readable code on any error
response, and reconstructs TagValue objects from wire bodies (raw bytes for
opaque values, so round-trips stay byte-exact).
"""

from __future__ import annotations

from urllib.parse import quote

import httpx

from fluidtag.model import (
    OPAQUE,
    TagValue,
    decode_json_value,
    decode_wire,
    encode_wire,
)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(f"{status} {code}: {message}")
        self.status = status
        self.code = code
        self.message = message


class TransportError(Exception):
    """Server unreachable or connection dropped."""


def _about_segment(about: str) -> str:
    return quote(about, safe="")


def _tag_url(tag: str) -> str:
    return "/".join(quote(seg, safe="") for seg in tag.split("/"))


class Client:
    def __init__(self, server: str, token: str | None = None,
                 http: httpx.Client | None = None):
        self.token = token
        self._http = http or httpx.Client(base_url=server, timeout=30.0)

    def close(self):
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _request(self, method: str, url: str, *, expect_error: bool = False,
                 **kwargs) -> httpx.Response:
        headers = kwargs.pop("headers", {})
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        try:
            resp = self._http.request(method, url, headers=headers, **kwargs)
        except httpx.HTTPError as exc:
            raise TransportError(str(exc)) from exc
        if resp.status_code >= 400:
            try:
                body = resp.json()
                raise ApiError(resp.status_code, body["error"], body["message"])
            except (ValueError, KeyError):
                raise ApiError(resp.status_code, "http-error", resp.text) from None
        return resp

    # ------------------------------------------------------------- operations

    def healthz(self) -> bool:
        return self._request("GET", "/healthz").json().get("status") == "ok"

    def create_user(self, username: str, token: str) -> None:
        self._request("POST", "/users", json={"username": username, "token": token})

    def create_object(self, about: str | None = None) -> str:
        body = {} if about is None else {"about": about}
        return self._request("POST", "/objects", json=body).json()["id"]

    def query(self, text: str, tags: list[str] | None = None):
        """Sorted id list; with `tags`, also a per-object value map."""
        params = {"query": text}
        if tags is not None:
            params["tags"] = ",".join(tags)
        data = self._request("GET", "/objects", params=params).json()
        ids = data["ids"]
        if tags is None:
            return ids
        results = {
            oid: {tag: decode_json_value(raw) for tag, raw in values.items()}
            for oid, values in data.get("results", {}).items()
        }
        return ids, results

    def list_tags(self, object_id: str) -> list[tuple[str, str]]:
        data = self._request("GET", f"/objects/{object_id}").json()
        return [(entry["path"], entry["kind"]) for entry in data["tags"]]

    def get_tag(self, object_id: str, tag: str) -> TagValue:
        resp = self._request("GET", f"/objects/{object_id}/{_tag_url(tag)}")
        return decode_wire(resp.content, resp.headers.get("content-type"))

    def get_tag_raw(self, object_id: str, tag: str) -> tuple[bytes, str]:
        resp = self._request("GET", f"/objects/{object_id}/{_tag_url(tag)}")
        return resp.content, resp.headers.get("content-type", "")

    def put_tag(self, object_id: str, tag: str, value: TagValue) -> str:
        body, content_type = encode_wire(value)
        resp = self._request("PUT", f"/objects/{object_id}/{_tag_url(tag)}",
                             content=body, headers={"Content-Type": content_type})
        return resp.json()["kind"]

    def delete_tag(self, object_id: str, tag: str) -> None:
        self._request("DELETE", f"/objects/{object_id}/{_tag_url(tag)}")

    def get_about_tag(self, about: str, tag: str) -> TagValue:
        resp = self._request("GET", f"/about/{_about_segment(about)}/{_tag_url(tag)}")
        return decode_wire(resp.content, resp.headers.get("content-type"))

    def put_about_tag(self, about: str, tag: str, value: TagValue) -> str:
        body, content_type = encode_wire(value)
        resp = self._request("PUT", f"/about/{_about_segment(about)}/{_tag_url(tag)}",
                             content=body, headers={"Content-Type": content_type})
        return resp.json()["id"]

    def delete_about_tag(self, about: str, tag: str) -> None:
        self._request("DELETE", f"/about/{_about_segment(about)}/{_tag_url(tag)}")

    def create_namespace(self, path: str) -> None:
        self._request("POST", f"/namespaces/{_tag_url(path)}")

    def get_permission(self, path: str, action: str) -> tuple[str, list[str]]:
        data = self._request("GET", f"/permissions/{_tag_url(path)}",
                             params={"action": action}).json()
        return data["policy"], data["exceptions"]

    def set_permission(self, path: str, action: str, policy: str,
                       exceptions: list[str]) -> None:
        self._request("PUT", f"/permissions/{_tag_url(path)}",
                      params={"action": action},
                      json={"policy": policy, "exceptions": exceptions})


def opaque_bytes(value: TagValue) -> bytes:
    if value.kind != OPAQUE:
        raise ValueError("not an opaque value")
    return value.payload

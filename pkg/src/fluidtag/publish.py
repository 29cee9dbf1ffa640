"""Publishing workflows: push thorn records into the tag service, mark
toolkit membership, build retrieval lists from queries, and close a base
set of thorns over the interfaces they inherit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from fluidtag import crl
from fluidtag.ccl import ThornMetadata
from fluidtag.client import ApiError, Client
from fluidtag.errors import (
    IncompleteObjectError,
    UnknownThornError,
    UnresolvedInterfaceError,
)
from fluidtag.model import TagValue, USERNAME_TAG, classify_value

log = logging.getLogger("fluidtag.publish")

ABOUT_PREFIX = "CCTK:"
TOOLKIT_TAG = "einsteintoolkit.org/includes"
AUTHOR_TAG = "cactuscode.org/author"

# The tag names published per thorn and the subset a retrieval list needs.
THORN_FIELDS = ("arrangement", "authors", "description", "implements",
                "inherits", "name", "scm", "url")
RETRIEVAL_FIELDS = ("arrangement", "name", "url", "scm")


def thorn_about(arrangement: str, name: str) -> str:
    return f"{ABOUT_PREFIX}{arrangement}/{name}"


def thorn_tag_values(meta: ThornMetadata) -> dict[str, TagValue]:
    """The eight published values.  `inherits` stays a plain string for a
    single parent and becomes a string set otherwise; readers normalize."""
    inherits = meta.inherits[0] if len(meta.inherits) == 1 else set(meta.inherits)
    return {
        "arrangement": classify_value(meta.arrangement),
        "authors": classify_value(set(meta.authors)),
        "description": classify_value(meta.description),
        "implements": classify_value(set(meta.implements)),
        "inherits": classify_value(inherits),
        "name": classify_value(meta.name),
        "scm": classify_value(meta.scm),
        "url": classify_value(meta.url),
    }


def publish_thorn(client: Client, meta: ThornMetadata, prefix: str) -> str:
    """Create-or-reuse the thorn object by its about value and upsert the
    eight metadata tags under `prefix`; republishing is idempotent."""
    about = thorn_about(meta.arrangement, meta.name)
    oid = client.create_object(about)
    for field, value in thorn_tag_values(meta).items():
        client.put_tag(oid, f"{prefix}/{field}", value)
    return oid


def tag_membership(client: Client, tag: str, value: TagValue,
                   abouts: list[str]) -> tuple[int, list[str]]:
    """Tag every named object; unknown abouts are reported, not fatal."""
    tagged = 0
    missing: list[str] = []
    for about in abouts:
        try:
            client.get_about_tag(about, "fluiddb/about")
        except ApiError as exc:
            if exc.status == 404:
                missing.append(about)
                continue
            raise
        client.put_about_tag(about, tag, value)
        tagged += 1
    for about in missing:
        log.warning("no object about %r; skipped", about)
    return tagged, missing


def _first_hit(values: dict[str, TagValue], prefixes: list[str], field: str):
    for prefix in prefixes:
        value = values.get(f"{prefix}/{field}")
        if value is not None:
            return value
    return None


def _as_text(value: TagValue) -> str:
    if value.kind == "string":
        return value.payload
    return str(value.payload)


def generate_thornlist(client: Client, query_text: str,
                       prefixes: list[str]) -> str:
    """Resolve a query and emit the retrieval list for every hit, reading
    arrangement/name/url/scm under the first prefix that carries them."""
    wanted = [f"{p}/{f}" for p in prefixes for f in RETRIEVAL_FIELDS]
    ids, results = client.query(query_text, tags=wanted)
    entries = []
    incomplete: list[str] = []
    for oid in ids:
        values = results.get(oid, {})
        fields = {}
        for field in RETRIEVAL_FIELDS:
            hit = _first_hit(values, prefixes, field)
            if hit is None:
                incomplete.append(f"{oid}: missing {field}")
                break
            fields[field] = _as_text(hit)
        else:
            entries.append(crl.entry_for(fields["arrangement"], fields["name"],
                                         fields["scm"], fields["url"]))
    if incomplete:
        raise IncompleteObjectError(
            "objects lacking retrieval tags under every prefix:\n  "
            + "\n  ".join(incomplete),
            objects=incomplete)
    return crl.generate(entries)


def thornlist_for_abouts(client: Client, abouts: list[str],
                         prefixes: list[str]) -> str:
    """Retrieval list for an explicit set of thorn objects named by about."""
    entries = []
    incomplete: list[str] = []
    for about in abouts:
        values: dict[str, TagValue] = {}
        for prefix in prefixes:
            for field in RETRIEVAL_FIELDS:
                tag = f"{prefix}/{field}"
                try:
                    values[tag] = client.get_about_tag(about, tag)
                except ApiError as exc:
                    if exc.status != 404:
                        raise
        fields = {}
        for field in RETRIEVAL_FIELDS:
            hit = _first_hit(values, prefixes, field)
            if hit is None:
                incomplete.append(f"{about}: missing {field}")
                break
            fields[field] = _as_text(hit)
        else:
            entries.append(crl.entry_for(fields["arrangement"], fields["name"],
                                         fields["scm"], fields["url"]))
    if incomplete:
        raise IncompleteObjectError(
            "thorns lacking retrieval tags under every prefix:\n  "
            + "\n  ".join(incomplete),
            objects=incomplete)
    return crl.generate(entries)


@dataclass
class ThornRecord:
    about: str
    implements: frozenset[str]
    inherits: frozenset[str]
    toolkit: bool


def _as_name_set(value: TagValue | None) -> frozenset[str]:
    if value is None or value.kind == "null":
        return frozenset()
    if value.kind == "string":
        return frozenset({value.payload})
    if value.kind == "string-set":
        return frozenset(value.payload)
    return frozenset()


def fetch_thorn_records(client: Client, prefixes: list[str]) -> dict[str, ThornRecord]:
    """Every object holding an `implements` tag under some prefix, keyed by
    its about value; objects with no about cannot be referenced and are
    skipped."""
    query_text = " or ".join(f"has {p}/implements" for p in prefixes)
    wanted = ["fluiddb/about", TOOLKIT_TAG]
    wanted += [f"{p}/{f}" for p in prefixes for f in ("implements", "inherits")]
    ids, results = client.query(query_text, tags=wanted)
    records: dict[str, ThornRecord] = {}
    for oid in ids:
        values = results.get(oid, {})
        about_value = values.get("fluiddb/about")
        if about_value is None or about_value.kind != "string":
            log.warning("object %s has no about value; skipped", oid)
            continue
        about = about_value.payload
        toolkit_value = values.get(TOOLKIT_TAG)
        records[about] = ThornRecord(
            about=about,
            implements=_as_name_set(_first_hit(values, prefixes, "implements")),
            inherits=_as_name_set(_first_hit(values, prefixes, "inherits")),
            toolkit=(toolkit_value is not None and toolkit_value.kind == "boolean"
                     and toolkit_value.payload is True),
        )
    return records


def choose_provider(records: dict[str, ThornRecord], interface: str) -> str | None:
    """Deterministic provider rule for an unsatisfied interface: prefer
    toolkit-tagged providers, then the lexicographically smallest about.
    (A provider already in the result set means nothing needs choosing.)"""
    candidates = sorted(a for a, r in records.items() if interface in r.implements)
    if not candidates:
        return None
    toolkit = [a for a in candidates if records[a].toolkit]
    return toolkit[0] if toolkit else candidates[0]


def close_base_set(records: dict[str, ThornRecord], base: list[str]) -> set[str]:
    """Fixed-point closure of `base` under inherited interfaces."""
    for about in base:
        if about not in records:
            raise UnknownThornError(f"unknown base thorn {about!r}")
    result = set(base)
    while True:
        added = False
        for about in sorted(result):
            for interface in sorted(records[about].inherits):
                if any(interface in records[member].implements for member in result):
                    continue
                provider = choose_provider(records, interface)
                if provider is None:
                    raise UnresolvedInterfaceError(interface)
                result.add(provider)
                added = True
        if not added:
            return result


def resolve_base_set(client: Client, base: list[str],
                     prefixes: list[str]) -> list[str]:
    """Closed thorn set for a base selection, as sorted about values."""
    records = fetch_thorn_records(client, prefixes)
    return sorted(close_base_set(records, base))


def discover_authors(client: Client) -> list[str]:
    """Usernames of every user object carrying the author tag."""
    ids, results = client.query(f"has {AUTHOR_TAG}", tags=[USERNAME_TAG])
    names = []
    for oid in ids:
        value = results.get(oid, {}).get(USERNAME_TAG)
        if value is None or value.kind != "string":
            log.warning("object %s lacks %s; skipped", oid, USERNAME_TAG)
            continue
        names.append(value.payload)
    return sorted(names)

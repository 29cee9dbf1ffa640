"""Command line front door.

Exit codes: 0 success, 1 usage error, 2 server/store error, 3 incomplete
data (missing metadata, unresolved interfaces, objects lacking retrieval
tags).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from fluidtag import publish
from fluidtag.ccl import extract_thorn_metadata, find_thorn_dirs, parse_manifest
from fluidtag.client import ApiError, Client, TransportError
from fluidtag.errors import (
    FluidTagError,
    IncompleteDataError,
    QuerySyntaxError,
    StoreError,
)
from fluidtag.model import classify_value
from fluidtag.query import parse_query
from fluidtag.service import ServeConfig, serve
from fluidtag.store import TagStore

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SERVER = 2
EXIT_INCOMPLETE = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on bad usage instead of argparse's 2
        raise UsageError(message)


def _env(name: str, fallback=None):
    return os.environ.get(f"FLUIDTAG_{name}", fallback)


def build_parser() -> _Parser:
    parser = _Parser(prog="fluidtag", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the tag service")
    p.add_argument("--bind", default=_env("BIND", "127.0.0.1:8080"))
    p.add_argument("--store", default=_env("STORE", "./fluidtag-store"))
    p.add_argument("--credentials", default=_env("CREDENTIALS"))

    p = sub.add_parser("reindex", help="rebuild indexes and compact the store log")
    p.add_argument("--store", default=_env("STORE", "./fluidtag-store"))

    for name in ("publish", "tag-membership", "thornlist", "resolve", "authors"):
        q = sub.add_parser(name)
        q.add_argument("--server", default=_env("SERVER", "http://127.0.0.1:8080"))
        q.add_argument("--token", default=_env("TOKEN"))
        if name == "publish":
            q.add_argument("thorn_root")
            q.add_argument("--manifest", required=True)
            q.add_argument("--prefix", default=None,
                           help="tag prefix; defaults to <user>/CCTK")
            q.add_argument("--user", default=_env("USER"))
        elif name == "tag-membership":
            q.add_argument("tag")
            q.add_argument("value")
            q.add_argument("--abouts", required=True,
                           help="file with one about value per line")
        elif name == "thornlist":
            q.add_argument("--query", required=True)
            q.add_argument("--prefixes", required=True,
                           help="comma-separated tag prefixes, most authoritative first")
            q.add_argument("-o", "--output", default=None)
        elif name == "resolve":
            q.add_argument("--base", required=True,
                           help="comma-separated about values of the base thorns")
            q.add_argument("--prefixes", required=True)
            q.add_argument("--crl", action="store_true",
                           help="emit a retrieval list for the closure instead of abouts")
    return parser


def _parse_cli_value(text: str):
    if text in ("True", "False"):
        return text == "True"
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _split_csv(text: str) -> list[str]:
    items = [part.strip() for part in text.split(",")]
    return [part for part in items if part]


def cmd_serve(args) -> int:
    serve(ServeConfig(bind=args.bind, store=args.store, credentials=args.credentials))
    return EXIT_OK


def cmd_reindex(args) -> int:
    with TagStore(args.store, create=False) as store:
        problems = store.audit_indexes()
        stats = store.reindex()
    for problem in problems:
        print(f"repaired: {problem}")
    print(f"reindexed {stats['objects']} objects, {stats['instances']} instances, "
          f"{stats['indexed_tags']} tags")
    return EXIT_OK


def cmd_publish(args, client: Client) -> int:
    prefix = args.prefix
    if prefix is None:
        if not args.user:
            raise UsageError("--prefix or --user (or FLUIDTAG_USER) is required")
        prefix = f"{args.user}/CCTK"
    manifest = parse_manifest(Path(args.manifest).read_text())
    count = 0
    for thorn_dir in find_thorn_dirs(args.thorn_root):
        meta = extract_thorn_metadata(thorn_dir, manifest)
        oid = publish.publish_thorn(client, meta, prefix)
        print(f"published {meta.arrangement}/{meta.name} -> {oid}")
        count += 1
    print(f"published {count} thorns under {prefix}")
    return EXIT_OK


def cmd_tag_membership(args, client: Client) -> int:
    abouts = [line.strip() for line in Path(args.abouts).read_text().splitlines()
              if line.strip() and not line.lstrip().startswith("#")]
    value = classify_value(_parse_cli_value(args.value))
    tagged, missing = publish.tag_membership(client, args.tag, value, abouts)
    for about in missing:
        print(f"missing: {about}", file=sys.stderr)
    print(f"tagged {tagged} of {len(abouts)} objects with {args.tag}")
    return EXIT_OK


def cmd_thornlist(args, client: Client) -> int:
    try:
        parse_query(args.query)
    except QuerySyntaxError as exc:
        raise UsageError(f"bad query: {exc.message}") from None
    document = publish.generate_thornlist(client, args.query, _split_csv(args.prefixes))
    if args.output:
        Path(args.output).write_text(document)
    else:
        sys.stdout.write(document)
    return EXIT_OK


def cmd_resolve(args, client: Client) -> int:
    base = _split_csv(args.base)
    prefixes = _split_csv(args.prefixes)
    closure = publish.resolve_base_set(client, base, prefixes)
    if args.crl:
        sys.stdout.write(publish.thornlist_for_abouts(client, closure, prefixes))
    else:
        for about in closure:
            print(about)
    return EXIT_OK


def cmd_authors(args, client: Client) -> int:
    for name in publish.discover_authors(client):
        print(name)
    return EXIT_OK


_CLIENT_COMMANDS = {
    "publish": cmd_publish,
    "tag-membership": cmd_tag_membership,
    "thornlist": cmd_thornlist,
    "resolve": cmd_resolve,
    "authors": cmd_authors,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "serve":
            return cmd_serve(args)
        if args.command == "reindex":
            return cmd_reindex(args)
        handler = _CLIENT_COMMANDS[args.command]
        with Client(args.server, token=args.token) as client:
            return handler(args, client)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IncompleteDataError as exc:
        print(f"incomplete data: {exc.message}", file=sys.stderr)
        return EXIT_INCOMPLETE
    except (ApiError, TransportError, StoreError) as exc:
        print(f"server error: {exc}", file=sys.stderr)
        return EXIT_SERVER
    except FluidTagError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return EXIT_SERVER


if __name__ == "__main__":
    sys.exit(main())

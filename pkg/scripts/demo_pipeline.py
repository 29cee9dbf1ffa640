#!/usr/bin/env python3
"""End-to-end walkthrough against a throwaway server.

Starts the service on a scratch store, publishes the synthetic toolkit
corpus as `gridaphobe`, marks every thorn as a toolkit member as
`einsteintoolkit.org`, then shows the three consumer workflows: a count
query, a generated retrieval list, and a base-set closure.
"""

import signal
import socket
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import httpx

from fluidtag import corpus, publish
from fluidtag.ccl import extract_thorn_metadata, find_thorn_dirs, parse_manifest
from fluidtag.client import Client
from fluidtag.model import classify_value

PREFIX = "gridaphobe/CCTK"


def free_port() -> int:
    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.close()
    return port


def wait_healthy(url: str, proc: subprocess.Popen):
    for _ in range(200):
        if proc.poll() is not None:
            sys.exit("server failed to start")
        try:
            if httpx.get(f"{url}/healthz", timeout=1.0).status_code == 200:
                return
        except httpx.HTTPError:
            time.sleep(0.05)
    sys.exit("server did not come up")


def main():
    workdir = Path(tempfile.mkdtemp(prefix="fluidtag-demo-"))
    creds = workdir / "credentials"
    creds.write_text("admin tok-admin\n"
                     "gridaphobe tok-grid\n"
                     "einsteintoolkit.org tok-etk\n")
    port = free_port()
    url = f"http://127.0.0.1:{port}"
    proc = subprocess.Popen(
        [sys.executable, "-m", "fluidtag", "serve", "--bind", f"127.0.0.1:{port}",
         "--store", str(workdir / "store"), "--credentials", str(creds)],
        stdout=subprocess.DEVNULL)
    try:
        wait_healthy(url, proc)
        print(f"service up at {url}, store in {workdir}")

        manifest_path = corpus.write_corpus(workdir / "tree", corpus.toolkit_specs())
        manifest = parse_manifest(manifest_path.read_text())

        gridaphobe = Client(url, token="tok-grid")
        toolkit = Client(url, token="tok-etk")

        abouts = []
        for thorn_dir in find_thorn_dirs(workdir / "tree"):
            meta = extract_thorn_metadata(thorn_dir, manifest)
            publish.publish_thorn(gridaphobe, meta, PREFIX)
            abouts.append(publish.thorn_about(meta.arrangement, meta.name))
        print(f"published {len(abouts)} thorns under {PREFIX}")

        tagged, _ = publish.tag_membership(
            toolkit, publish.TOOLKIT_TAG, classify_value(True), abouts)
        print(f"tagged {tagged} thorns with {publish.TOOLKIT_TAG} = True")

        ids = gridaphobe.query(f"{publish.TOOLKIT_TAG} = True")
        print(f"query '{publish.TOOLKIT_TAG} = True' matches {len(ids)} objects")

        document = publish.generate_thornlist(
            gridaphobe, f"{publish.TOOLKIT_TAG} = True", [PREFIX])
        head = "\n".join(document.splitlines()[:8])
        print(f"retrieval list: {document.count('!CHECKOUT')} checkouts; head:\n{head}\n...")

        base = ["CCTK:EinsteinBase/ADMBase", "CCTK:CactusNumerical/MoL"]
        closure = publish.resolve_base_set(gridaphobe, base, [PREFIX])
        print(f"closure of {base}:")
        for about in closure:
            marker = "*" if about in base else " "
            print(f"  {marker} {about}")
    finally:
        proc.send_signal(signal.SIGTERM)
        proc.wait(timeout=10)
        print(f"server stopped; inspect the store under {workdir}")


if __name__ == "__main__":
    main()

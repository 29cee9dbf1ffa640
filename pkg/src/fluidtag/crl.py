"""Component retrieval lists: the thornlist dialect GetComponents-style
tools consume.

A document is a version header followed by blocks; each block fixes a
target directory, repository type, and URL, then lists one checkout per
thorn.  `generate` and `parse` are exact inverses over the four-tuples
(target, scm, url, checkout).
"""

from __future__ import annotations

from dataclasses import dataclass

from fluidtag.errors import CrlError
from fluidtag.ccl import SCM_KINDS

CRL_VERSION = "1.0"
_ROOT_PREFIX = "$ROOT/"


@dataclass(frozen=True, order=True)
class CrlEntry:
    target: str  # arrangements/<arrangement>
    scm: str
    url: str
    checkout: str  # thorn name

    @property
    def arrangement(self) -> str:
        return self.target.split("/", 1)[1] if "/" in self.target else self.target


def entry_for(arrangement: str, name: str, scm: str, url: str) -> CrlEntry:
    return CrlEntry(target=f"arrangements/{arrangement}", scm=scm, url=url, checkout=name)


def _check(entry: CrlEntry) -> None:
    for label, value in (("target", entry.target), ("scm", entry.scm),
                         ("url", entry.url), ("checkout", entry.checkout)):
        if not value:
            raise CrlError(f"empty {label} in entry {entry!r}")
        if "\n" in value or "\r" in value:
            raise CrlError(f"{label} must be a single line in entry {entry!r}")
    if entry.scm not in SCM_KINDS:
        raise CrlError(f"unknown scm {entry.scm!r} in entry {entry!r}")


def generate(entries: list[CrlEntry]) -> str:
    """Deterministic text: entries sorted by (target, checkout), consecutive
    entries sharing (target, scm, url) merged into one block."""
    seen: dict[tuple[str, str], CrlEntry] = {}
    for entry in entries:
        _check(entry)
        key = (entry.target, entry.checkout)
        if key in seen and seen[key] != entry:
            raise CrlError(f"conflicting entries for {key[0]}/{key[1]}")
        seen[key] = entry
    lines = [f"!CRL_VERSION = {CRL_VERSION}"]
    block: tuple[str, str, str] | None = None
    for entry in sorted(seen.values()):
        head = (entry.target, entry.scm, entry.url)
        if head != block:
            lines.append("")
            lines.append(f"!TARGET = {_ROOT_PREFIX}{entry.target}")
            lines.append(f"!TYPE = {entry.scm}")
            lines.append(f"!URL = {entry.url}")
            block = head
        lines.append(f"!CHECKOUT = {entry.checkout}")
    return "\n".join(lines) + "\n"


def parse(text: str) -> list[CrlEntry]:
    entries: list[CrlEntry] = []
    target = scm = url = None
    saw_version = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not line.startswith("!") or "=" not in line:
            raise CrlError(f"line {lineno}: expected '!DIRECTIVE = value'")
        keyword, _, value = line[1:].partition("=")
        keyword = keyword.strip().upper()
        value = value.strip()
        if keyword == "CRL_VERSION":
            if value != CRL_VERSION:
                raise CrlError(f"line {lineno}: unsupported version {value!r}")
            saw_version = True
        elif keyword == "TARGET":
            if not value.startswith(_ROOT_PREFIX):
                raise CrlError(f"line {lineno}: target must start with {_ROOT_PREFIX}")
            target = value[len(_ROOT_PREFIX):]
        elif keyword == "TYPE":
            scm = value
        elif keyword == "URL":
            url = value
        elif keyword == "CHECKOUT":
            if target is None or scm is None or url is None:
                raise CrlError(f"line {lineno}: checkout before target/type/url")
            entry = CrlEntry(target=target, scm=scm, url=url, checkout=value)
            _check(entry)
            entries.append(entry)
        else:
            raise CrlError(f"line {lineno}: unknown directive {keyword!r}")
    if not saw_version:
        raise CrlError("missing !CRL_VERSION header")
    return entries

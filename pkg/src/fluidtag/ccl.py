"""Thorn metadata extraction: interface.ccl, configuration.ccl, Readme.

All parsers are best-effort and total: unknown content is skipped, missing
sections yield empty values plus a warning flag.  The one hard error is a
thorn declaring more than one `implements` line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from fluidtag.errors import MalformedInterfaceError, MetadataIncompleteError

SCM_KINDS = ("git", "svn", "cvs", "darcs", "hg")

_IMPLEMENTS_RE = re.compile(r"implements\s*:\s*(.*)", re.IGNORECASE)
_INHERITS_RE = re.compile(r"inherits\s*:\s*(.*)", re.IGNORECASE)
_FRIEND_RE = re.compile(r"friend\s*:\s*(.*)", re.IGNORECASE)

_THORN_HEADER_RE = re.compile(r"cactus\s+code\s+thorn\s+(\S+)", re.IGNORECASE)
_AUTHOR_RE = re.compile(r"author(?:\(s\)|s)?\s*:\s*(.*)", re.IGNORECASE)
_HEADER_FIELD_RE = re.compile(r"\S[^:]*:")
_EMAIL_RE = re.compile(r"<[^>]*>")


@dataclass
class InterfaceInfo:
    implements: list[str] = field(default_factory=list)
    inherits: list[str] = field(default_factory=list)
    friends: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


@dataclass
class CapabilityDeps:
    provides: list[str] = field(default_factory=list)
    requires: list[str] = field(default_factory=list)
    optional: list[str] = field(default_factory=list)


@dataclass
class ReadmeInfo:
    name: str = ""
    authors: list[str] = field(default_factory=list)
    description: str = ""
    warnings: list[str] = field(default_factory=list)


@dataclass
class ThornMetadata:
    arrangement: str
    name: str
    authors: list[str]
    description: str
    implements: list[str]
    inherits: list[str]
    scm: str
    url: str
    friends: list[str] = field(default_factory=list)
    capabilities: CapabilityDeps = field(default_factory=CapabilityDeps)
    has_param_ccl: bool = False
    has_schedule_ccl: bool = False
    has_test_ccl: bool = False
    warnings: list[str] = field(default_factory=list)


def _logical_lines(text: str) -> list[str]:
    """Strip comments, join backslash continuations, drop blanks."""
    joined: list[str] = []
    pending = ""
    for raw in text.splitlines():
        line = raw.split("#", 1)[0]
        if line.rstrip().endswith("\\"):
            pending += line.rstrip()[:-1] + " "
            continue
        pending += line
        if pending.strip():
            joined.append(pending.strip())
        pending = ""
    if pending.strip():
        joined.append(pending.strip())
    return joined


def _split_names(text: str) -> list[str]:
    return [part for part in re.split(r"[,\s]+", text.strip()) if part]


def parse_interface_ccl(text: str) -> InterfaceInfo:
    """Interface names are case-insensitive identifiers; normalize to lower."""
    info = InterfaceInfo()
    implements_lines = 0
    for line in _logical_lines(text):
        m = _IMPLEMENTS_RE.match(line)
        if m:
            implements_lines += 1
            if implements_lines > 1:
                raise MalformedInterfaceError("multiple implements lines")
            info.implements = [n.lower() for n in _split_names(m.group(1))]
            continue
        m = _INHERITS_RE.match(line)
        if m:
            info.inherits.extend(n.lower() for n in _split_names(m.group(1)))
            continue
        m = _FRIEND_RE.match(line)
        if m:
            info.friends.extend(n.lower() for n in _split_names(m.group(1)))
    if not info.implements:
        info.warnings.append("no implements declaration")
    return info


def parse_configuration_ccl(text: str) -> CapabilityDeps:
    """PROVIDES/REQUIRES/OPTIONAL capability names; script/lang blocks and
    unknown directives are skipped."""
    deps = CapabilityDeps()
    depth = 0
    for line in _logical_lines(text):
        depth_before = depth
        depth = max(0, depth + line.count("{") - line.count("}"))
        if depth_before > 0:
            continue
        stripped = line.strip("{} \t")
        if not stripped:
            continue
        words = stripped.split()
        keyword = words[0].upper()
        names = words[1:]
        if keyword == "PROVIDES" and names:
            deps.provides.extend(n for n in names if n not in deps.provides)
        elif keyword == "REQUIRES" and names:
            deps.requires.extend(n for n in names if n not in deps.requires)
        elif keyword == "OPTIONAL" and names:
            deps.optional.extend(n for n in names if n not in deps.optional)
    return deps


def _clean_author(raw: str) -> str:
    name = _EMAIL_RE.sub("", raw)
    return " ".join(name.split())


def parse_readme(text: str) -> ReadmeInfo:
    info = ReadmeInfo()
    lines = text.splitlines()
    rule_at = None
    for i, line in enumerate(lines):
        stripped = line.strip()
        if stripped and set(stripped) == {"-"} and len(stripped) >= 10:
            rule_at = i
            break
    header = lines if rule_at is None else lines[:rule_at]
    in_authors = False
    raw_authors: list[str] = []
    for line in header:
        m = _THORN_HEADER_RE.match(line.strip())
        if m:
            info.name = m.group(1)
            in_authors = False
            continue
        m = _AUTHOR_RE.match(line)
        if m:
            raw_authors.append(m.group(1))
            in_authors = True
            continue
        if in_authors and line[:1].isspace() and line.strip() and \
                not _HEADER_FIELD_RE.match(line.strip()):
            raw_authors.append(line)
            continue
        if line.strip():
            in_authors = False
    for chunk in raw_authors:
        for part in chunk.split(","):
            author = _clean_author(part)
            if author and author not in info.authors:
                info.authors.append(author)
    if rule_at is not None:
        info.description = "\n".join(lines[rule_at + 1:]).strip()
    else:
        info.warnings.append("no horizontal rule; description empty")
    if not info.name:
        info.warnings.append("no thorn header line")
    if not info.authors:
        info.warnings.append("no authors found")
    return info


def parse_manifest(text: str) -> dict[str, tuple[str, str]]:
    """Repository manifest: `<arrangement>/<thorn>  <scm>  <url>` per line."""
    entries: dict[str, tuple[str, str]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise MetadataIncompleteError(
                f"manifest line {lineno}: expected '<arrangement>/<thorn> <scm> <url>'")
        key, scm, url = parts
        if scm not in SCM_KINDS:
            raise MetadataIncompleteError(
                f"manifest line {lineno}: unknown scm {scm!r}")
        entries[key] = (scm, url)
    return entries


def _read_optional(path: Path) -> str | None:
    return path.read_text(errors="replace") if path.is_file() else None


def _find_readme(thorn_dir: Path) -> str | None:
    for candidate in ("README", "Readme", "readme", "README.txt"):
        text = _read_optional(thorn_dir / candidate)
        if text is not None:
            return text
    return None


def extract_thorn_metadata(thorn_dir: str | Path,
                           manifest: dict[str, tuple[str, str]]) -> ThornMetadata:
    """Assemble one thorn record from its source tree plus the manifest.

    The directory names are authoritative for arrangement/name; a Readme
    header naming a different thorn only raises a warning.
    """
    thorn_dir = Path(thorn_dir)
    arrangement = thorn_dir.parent.name
    name = thorn_dir.name
    warnings: list[str] = []

    interface_text = _read_optional(thorn_dir / "interface.ccl")
    readme_text = _find_readme(thorn_dir)
    if interface_text is None and readme_text is None:
        raise MetadataIncompleteError(
            f"{arrangement}/{name}: neither interface.ccl nor a Readme present")

    iface = parse_interface_ccl(interface_text) if interface_text is not None \
        else InterfaceInfo(warnings=["no interface.ccl"])
    warnings.extend(iface.warnings)

    config_text = _read_optional(thorn_dir / "configuration.ccl")
    capabilities = parse_configuration_ccl(config_text) if config_text is not None \
        else CapabilityDeps()

    readme = parse_readme(readme_text) if readme_text is not None \
        else ReadmeInfo(warnings=["no Readme"])
    warnings.extend(readme.warnings)
    if readme.name and readme.name != name:
        warnings.append(f"Readme names thorn {readme.name!r}, directory says {name!r}")

    key = f"{arrangement}/{name}"
    if key not in manifest:
        raise MetadataIncompleteError(f"{key}: no manifest entry (scm/url required)")
    scm, url = manifest[key]

    return ThornMetadata(
        arrangement=arrangement,
        name=name,
        authors=readme.authors,
        description=readme.description,
        implements=iface.implements,
        inherits=iface.inherits,
        scm=scm,
        url=url,
        friends=iface.friends,
        capabilities=capabilities,
        has_param_ccl=(thorn_dir / "param.ccl").is_file(),
        has_schedule_ccl=(thorn_dir / "schedule.ccl").is_file(),
        has_test_ccl=(thorn_dir / "test.ccl").is_file(),
        warnings=warnings,
    )


def find_thorn_dirs(root: str | Path) -> list[Path]:
    """Thorn directories under `<root>/arrangements/<arrangement>/<thorn>`
    (or directly under `<root>/<arrangement>/<thorn>` if there is no
    arrangements directory)."""
    root = Path(root)
    base = root / "arrangements" if (root / "arrangements").is_dir() else root
    thorns = []
    for arrangement in sorted(p for p in base.iterdir() if p.is_dir()):
        for thorn in sorted(p for p in arrangement.iterdir() if p.is_dir()):
            if (thorn / "interface.ccl").is_file() or _find_readme(thorn) is not None:
                thorns.append(thorn)
    return thorns

"""Synthetic thorn corpora for experiments and tests.

Two deterministic fixtures: a 135-thorn toolkit tree (the scale of a full
toolkit release) and a 20-thorn dependency fixture whose inheritance web
uses six interfaces, one of them provided by two thorns with only one of
the providers toolkit-tagged.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

TOOLKIT_SIZE = 135


@dataclass(frozen=True)
class ThornSpec:
    arrangement: str
    name: str
    implements: str
    inherits: tuple[str, ...] = ()
    friends: tuple[str, ...] = ()
    authors: tuple[str, ...] = ("Cactus Maintainers",)
    description: str = "A synthetic thorn."
    requires: tuple[str, ...] = ()
    optional: tuple[str, ...] = ()
    provides: tuple[str, ...] = ()
    scm: str = "git"
    url: str = ""
    has_param: bool = False
    has_schedule: bool = False
    has_test: bool = False
    toolkit: bool = True

    @property
    def key(self) -> str:
        return f"{self.arrangement}/{self.name}"

    def repo_url(self) -> str:
        if self.url:
            return self.url
        if self.scm == "svn":
            return f"https://svn.example.org/{self.arrangement.lower()}/{self.name}/trunk"
        return f"https://repo.example.org/{self.arrangement.lower()}/{self.name}.git"


_AUTHOR_POOL = (
    "Ada Wright", "Bruno Keller", "Carla Mendes", "Dmitri Volkov",
    "Elena Fischer", "Farid Haddad", "Grace Okafor", "Henrik Larsen",
    "Iris Takahashi", "Jonas Becker", "Katya Petrova", "Liam O'Connor",
)

_PREFIXES = (
    "ADM", "Wave", "Hydro", "Weyl", "Grid", "IO", "Time", "Spectral",
    "Puncture", "BSSN", "Scalar", "Vector", "Tensor", "Horizon", "Lapse",
)
_SUFFIXES = (
    "Base", "Evolve", "Analysis", "Solver", "Utils", "Data", "Mask",
    "Regrid", "Interp", "Extract",
)
_ARRANGEMENTS = (
    "CactusBase", "CactusNumerical", "CactusUtils", "CactusIO",
    "EinsteinBase", "EinsteinEvolve", "EinsteinAnalysis",
    "EinsteinInitialData", "McLachlan", "CTThorns",
)

_CURATED = (
    ("Carpet", "Carpet", "driver", ("io",)),
    ("Carpet", "CarpetLib", "carpetlib", ()),
    ("Carpet", "CarpetRegrid", "carpetregrid", ("driver",)),
    ("Carpet", "CarpetIOHDF5", "carpetiohdf5", ("io", "driver")),
    ("CactusBase", "Boundary", "boundary", ("grid",)),
    ("CactusBase", "CartGrid3D", "grid", ("coordbase",)),
    ("CactusBase", "CoordBase", "coordbase", ()),
    ("CactusBase", "IOUtil", "io", ()),
    ("CactusBase", "SymBase", "symbase", ("grid",)),
    ("CactusBase", "Time", "time", ()),
    ("CactusNumerical", "MoL", "methodoflines", ("driver",)),
    ("EinsteinBase", "ADMBase", "admbase", ("grid",)),
)


def toolkit_specs(seed: int = 2718) -> list[ThornSpec]:
    """Exactly TOOLKIT_SIZE deterministic thorn definitions."""
    rng = random.Random(seed)
    specs: list[ThornSpec] = []
    implemented: list[str] = []
    for arrangement, name, impl, inherits in _CURATED:
        specs.append(_make_spec(rng, arrangement, name, impl, inherits, implemented))
        implemented.append(impl)
    seen = {(s.arrangement, s.name) for s in specs}
    combos = [(p, s) for p in _PREFIXES for s in _SUFFIXES]
    rng.shuffle(combos)
    for prefix, suffix in combos:
        if len(specs) >= TOOLKIT_SIZE:
            break
        name = prefix + suffix
        arrangement = rng.choice(_ARRANGEMENTS)
        if (arrangement, name) in seen:
            continue
        seen.add((arrangement, name))
        impl = name.lower()
        inherits = tuple(sorted(rng.sample(implemented, k=rng.randint(0, 3))))
        specs.append(_make_spec(rng, arrangement, name, impl, inherits, implemented))
        implemented.append(impl)
    if len(specs) != TOOLKIT_SIZE:
        raise RuntimeError(f"corpus generator produced {len(specs)} thorns")
    return specs


def _make_spec(rng: random.Random, arrangement: str, name: str, impl: str,
               inherits, implemented: list[str]) -> ThornSpec:
    authors = tuple(rng.sample(_AUTHOR_POOL, k=rng.randint(1, 3)))
    scm = rng.choice(("git", "git", "svn"))
    requires = tuple(sorted(rng.sample(("MPI", "HDF5", "GSL", "LAPACK"),
                                       k=rng.randint(0, 2))))
    return ThornSpec(
        arrangement=arrangement,
        name=name,
        implements=impl,
        inherits=tuple(inherits),
        authors=authors,
        description=f"{name} provides the {impl} layer for synthetic runs.",
        requires=requires,
        optional=("OpenMP",) if rng.random() < 0.2 else (),
        scm=scm,
        has_param=rng.random() < 0.6,
        has_schedule=rng.random() < 0.6,
        has_test=rng.random() < 0.3,
    )


def closure_specs() -> list[ThornSpec]:
    """20 thorns whose inheritance web names six interfaces: driver, io,
    grid, coordbase, mol, admbase.  `driver` has two providers and only
    Carpet carries the toolkit tag, so the provider rule is observable."""
    core = [
        ThornSpec("Carpet", "Carpet", "driver", inherits=("io",), toolkit=True),
        ThornSpec("CactusPUGH", "PUGH", "driver", inherits=("io",), toolkit=False),
        ThornSpec("CactusBase", "IOUtil", "io", toolkit=True),
        ThornSpec("CactusBase", "CartGrid3D", "grid",
                  inherits=("coordbase", "driver"), toolkit=True),
        ThornSpec("CactusBase", "CoordBase", "coordbase", toolkit=True),
        ThornSpec("CactusNumerical", "MoL", "mol", inherits=("driver",), toolkit=True),
        ThornSpec("EinsteinBase", "ADMBase", "admbase", inherits=("grid",), toolkit=True),
    ]
    fillers = []
    filler_names = (
        ("EinsteinAnalysis", "WeylScal4", ("admbase", "grid")),
        ("EinsteinAnalysis", "Multipole", ("grid",)),
        ("EinsteinAnalysis", "AHFinderDirect", ("admbase", "io")),
        ("EinsteinEvolve", "GRHydro", ("admbase", "mol")),
        ("EinsteinEvolve", "ML_BSSN", ("admbase", "mol", "grid")),
        ("EinsteinInitialData", "TwoPunctures", ("admbase",)),
        ("EinsteinInitialData", "Meudon", ("admbase", "io")),
        ("CactusNumerical", "Dissipation", ("grid",)),
        ("CactusNumerical", "SphericalSurface", ("grid",)),
        ("CactusNumerical", "InterpToArray", ("grid", "io")),
        ("CactusUtils", "NaNChecker", ("grid",)),
        ("CactusUtils", "TerminationTrigger", ()),
        ("CactusIO", "IOJpeg", ("io",)),
    )
    for i, (arrangement, name, inherits) in enumerate(filler_names):
        fillers.append(ThornSpec(
            arrangement, name, name.lower(), inherits=tuple(inherits),
            toolkit=(i % 3 != 0), scm="git" if i % 2 else "svn",
        ))
    specs = core + fillers
    if len(specs) != 20:
        raise RuntimeError(f"closure fixture has {len(specs)} thorns")
    return specs


# A base selection over the closure fixture and its hand-checked closure:
# ADMBase needs grid -> CartGrid3D; MoL and CartGrid3D need driver -> Carpet
# (toolkit beats PUGH); CartGrid3D needs coordbase -> CoordBase; Carpet
# needs io -> IOUtil.
CLOSURE_BASE = ("CCTK:EinsteinBase/ADMBase", "CCTK:CactusNumerical/MoL")
CLOSURE_EXPECTED = (
    "CCTK:CactusBase/CartGrid3D",
    "CCTK:CactusBase/CoordBase",
    "CCTK:CactusBase/IOUtil",
    "CCTK:CactusNumerical/MoL",
    "CCTK:Carpet/Carpet",
    "CCTK:EinsteinBase/ADMBase",
)


def interface_ccl_text(spec: ThornSpec) -> str:
    lines = [
        f"# Interface definition for thorn {spec.name}",
        f"implements: {spec.implements}",
    ]
    if spec.inherits:
        lines.append(f"inherits: {' '.join(spec.inherits)}")
    if spec.friends:
        lines.append(f"friend: {' '.join(spec.friends)}")
    lines += [
        "",
        "CCTK_REAL evolved_fields type=GF timelevels=3",
        "{",
        "  phi",
        "} \"synthetic state\"",
    ]
    return "\n".join(lines) + "\n"


def readme_text(spec: ThornSpec) -> str:
    authors = ",\n               ".join(spec.authors)
    return (
        f"Cactus Code Thorn {spec.name}\n"
        f"Author(s)    : {authors}\n"
        f"Maintainer(s): {spec.authors[0]}\n"
        f"Licence      : LGPL\n"
        + "-" * 74 + "\n"
        + "\n"
        + spec.description + "\n"
    )


def configuration_ccl_text(spec: ThornSpec) -> str:
    lines = []
    for cap in spec.provides:
        lines += [f"PROVIDES {cap}", "{", f"  SCRIPT configure_{cap.lower()}.sh",
                  "  LANG bash", "}", ""]
    if spec.requires:
        lines.append(f"REQUIRES {' '.join(spec.requires)}")
    if spec.optional:
        lines.append(f"OPTIONAL {' '.join(spec.optional)}")
    return "\n".join(lines) + "\n"


def write_thorn(base: Path, spec: ThornSpec) -> Path:
    thorn_dir = base / "arrangements" / spec.arrangement / spec.name
    thorn_dir.mkdir(parents=True, exist_ok=True)
    (thorn_dir / "interface.ccl").write_text(interface_ccl_text(spec))
    (thorn_dir / "README").write_text(readme_text(spec))
    if spec.requires or spec.optional or spec.provides:
        (thorn_dir / "configuration.ccl").write_text(configuration_ccl_text(spec))
    if spec.has_param:
        (thorn_dir / "param.ccl").write_text('KEYWORD verbose "chatter" { } "off"\n')
    if spec.has_schedule:
        (thorn_dir / "schedule.ccl").write_text("schedule synthetic_init AT initial { } \"init\"\n")
    if spec.has_test:
        (thorn_dir / "test.ccl").write_text("# regression test definitions\n")
    return thorn_dir


def manifest_text(specs: list[ThornSpec]) -> str:
    lines = ["# <arrangement>/<thorn>  <scm>  <url>"]
    for spec in sorted(specs, key=lambda s: s.key):
        lines.append(f"{spec.key}  {spec.scm}  {spec.repo_url()}")
    return "\n".join(lines) + "\n"


def write_corpus(root: str | Path, specs: list[ThornSpec]) -> Path:
    """Write the thorn tree plus manifest under `root`; returns the manifest
    path."""
    root = Path(root)
    for spec in specs:
        write_thorn(root, spec)
    manifest_path = root / "manifest.txt"
    manifest_path.write_text(manifest_text(specs))
    return manifest_path

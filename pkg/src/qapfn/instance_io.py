"""QAPLIB instance and solution files.

A ``.dat`` file holds ``n`` followed by two whitespace-separated ``n x n``
matrices. The first matrix is read as the flow matrix ``F`` and the second
as the distance matrix ``D``, so that the cost of a permutation ``p`` is
``sum_ij F[i, j] * D[p[i], p[j]]`` (the usual QAPLIB convention; a few
mirrors document the opposite order, which does not change the optimum for
symmetric data but does for the rest).

A ``.sln`` file holds ``n`` and the objective value on the first line and
then ``n`` one-based location indices.
"""

from __future__ import annotations

import configparser
import enum
import hashlib
import io
import os
import urllib.error
import urllib.parse
import urllib.request
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from .errors import (
    ChecksumMismatch,
    DimensionMismatch,
    InstanceNotFound,
    MissingBestKnown,
    NetworkFailure,
    NonFiniteEntry,
    NonSquareData,
    NonzeroDiagonal,
    NotAPermutation,
    TruncatedFile,
)

#: default QAPLIB mirror, laid out as ``data.d/<name>.dat`` and ``soln.d/<name>.sln``
DEFAULT_MIRROR = "https://qaplib.mgi.polymtl.ca/"
MIRROR_ENV = "QAPFN_MIRROR"
CONFIG_ENV = "QAPFN_CONFIG"

#: instances shipped with the package
VENDORED = ("chr12a", "chr15a", "chr25a", "esc16a", "had12", "had20",
            "nug20", "tai12a", "tai25a", "tai50a")

#: best-known objective values from QAPLIB (optimal unless noted)
BEST_KNOWN: dict[str, float] = {
    "chr12a": 9552, "chr15a": 9896, "chr25a": 3796, "esc16a": 68,
    "esc32e": 2, "had12": 1652, "had20": 6922, "lipa20a": 3683,
    "lipa40a": 31538, "nug20": 2570, "nug30": 6124, "tai12a": 224416,
    "tai25a": 1167256, "tai40a": 3139370,  # tai40a: best known
    "tai50a": 4938796,  # best known
    "tho30": 149936, "tho40": 240516,  # tho40: best known
}


class Symmetry(str, enum.Enum):
    Symmetric = "symmetric"
    SemiSymmetricFsym = "semi-symmetric-F"
    SemiSymmetricDsym = "semi-symmetric-D"
    Asymmetric = "asymmetric"


def classify_symmetry(F, D) -> Symmetry:
    F = np.asarray(F)
    D = np.asarray(D)
    if F.ndim != 2 or F.shape[0] != F.shape[1] or F.shape != D.shape:
        raise DimensionMismatch(f"F{F.shape} and D{D.shape} must be square and equal")
    fsym = bool(np.array_equal(F, F.T))
    dsym = bool(np.array_equal(D, D.T))
    if fsym and dsym:
        return Symmetry.Symmetric
    if fsym:
        return Symmetry.SemiSymmetricFsym
    if dsym:
        return Symmetry.SemiSymmetricDsym
    return Symmetry.Asymmetric


@dataclass(frozen=True, eq=False)
class Instance:
    """A QAP instance ``QAP(F, D)`` with zero-diagonal float matrices."""

    name: str
    F: np.ndarray
    D: np.ndarray
    symmetry: Symmetry = field(init=False)

    def __post_init__(self):
        F = np.array(self.F, dtype=float)
        D = np.array(self.D, dtype=float)
        if F.ndim != 2 or F.shape[0] != F.shape[1]:
            raise NonSquareData(f"flow matrix has shape {F.shape}")
        if D.shape != F.shape:
            raise NonSquareData(f"distance matrix {D.shape} != flow matrix {F.shape}")
        if F.shape[0] < 2:
            raise NonSquareData("instances need n >= 2")
        if not (np.isfinite(F).all() and np.isfinite(D).all()):
            raise NonFiniteEntry(f"{self.name}: non-finite matrix entry")
        if np.diagonal(F).any() or np.diagonal(D).any():
            raise NonzeroDiagonal(f"{self.name}: nonzero diagonal")
        F.setflags(write=False)
        D.setflags(write=False)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "symmetry", classify_symmetry(F, D))

    @property
    def n(self) -> int:
        return self.F.shape[0]

    @classmethod
    def from_matrices(cls, F, D, name: str = "", strict: bool = False) -> "Instance":
        """Build an instance, zeroing nonzero diagonals unless ``strict``."""
        F = np.array(F, dtype=float)
        D = np.array(D, dtype=float)
        if F.ndim == 2 and F.shape == D.shape and F.shape[0] == F.shape[1]:
            if np.diagonal(F).any() or np.diagonal(D).any():
                if strict:
                    raise NonzeroDiagonal(f"{name or 'instance'}: nonzero diagonal")
                warnings.warn(f"{name or 'instance'}: zeroing nonzero diagonal entries",
                              stacklevel=2)
                np.fill_diagonal(F, 0.0)
                np.fill_diagonal(D, 0.0)
        return cls(name, F, D)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.name == other.name and np.array_equal(self.F, other.F)
                and np.array_equal(self.D, other.D))

    __hash__ = None


@dataclass(frozen=True)
class ReferenceSolution:
    n: int
    objective: float
    permutation: tuple[int, ...]

    def __post_init__(self):
        perm = tuple(int(p) for p in self.permutation)
        if len(perm) != self.n:
            raise DimensionMismatch(f"expected {self.n} entries, got {len(perm)}")
        if sorted(perm) != list(range(self.n)):
            raise NotAPermutation(f"{perm} is not a permutation of 0..{self.n - 1}")
        object.__setattr__(self, "permutation", perm)


def _read(text: str | TextIO) -> str:
    return text if isinstance(text, str) else text.read()


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else format(v, ".17g")


def parse_instance(text: str | TextIO, name: str = "", strict: bool = False) -> Instance:
    tokens = _read(text).split()
    if not tokens:
        raise TruncatedFile(f"{name or 'instance'}: empty input")
    try:
        n = int(tokens[0])
    except ValueError:
        raise TruncatedFile(f"{name or 'instance'}: first token {tokens[0]!r} is not n") from None
    if n < 1:
        raise NonSquareData(f"{name or 'instance'}: n = {n}")
    need = 2 * n * n
    if len(tokens) - 1 < need:
        raise TruncatedFile(
            f"{name or 'instance'}: expected {need} matrix values, got {len(tokens) - 1}")
    if len(tokens) - 1 > need:
        raise NonSquareData(
            f"{name or 'instance'}: {len(tokens) - 1 - need} values beyond two {n}x{n} matrices")
    try:
        values = np.array(tokens[1:], dtype=float)
    except ValueError as exc:
        raise NonFiniteEntry(f"{name or 'instance'}: {exc}") from None
    if not np.isfinite(values).all():
        raise NonFiniteEntry(f"{name or 'instance'}: non-finite matrix entry")
    F = values[: n * n].reshape(n, n)
    D = values[n * n:].reshape(n, n)
    return Instance.from_matrices(F, D, name=name, strict=strict)


def serialize_instance(inst: Instance) -> str:
    rows = [str(inst.n), ""]
    rows += [" ".join(_fmt(v) for v in row) for row in inst.F]
    rows.append("")
    rows += [" ".join(_fmt(v) for v in row) for row in inst.D]
    return "\n".join(rows) + "\n"


def parse_solution(text: str | TextIO) -> ReferenceSolution:
    tokens = _read(text).replace(",", " ").split()
    if len(tokens) < 2:
        raise DimensionMismatch("solution file needs n and objective")
    n = int(tokens[0])
    objective = float(tokens[1])
    perm = [int(t) - 1 for t in tokens[2:]]
    if len(perm) != n:
        raise DimensionMismatch(f"expected {n} permutation entries, got {len(perm)}")
    return ReferenceSolution(n, objective, tuple(perm))


def serialize_solution(sol: ReferenceSolution) -> str:
    return f"{sol.n} {_fmt(sol.objective)}\n" + " ".join(str(p + 1) for p in sol.permutation) + "\n"


# ---------------------------------------------------------------- loading

def _vendored(filename: str):
    return resources.files("qapfn").joinpath("data", filename)


def vendored_names() -> tuple[str, ...]:
    return VENDORED


def load_instance(source: str | os.PathLike, strict: bool = False) -> Instance:
    """Load an instance from a path or by vendored name."""
    path = Path(source)
    if path.suffix == ".dat" or path.exists():
        return parse_instance(path.read_text(), name=path.stem, strict=strict)
    res = _vendored(f"{source}.dat")
    if not res.is_file():
        raise InstanceNotFound([str(source)])
    return parse_instance(res.read_text(), name=str(source), strict=strict)


def load_solution(source: str | os.PathLike) -> ReferenceSolution:
    path = Path(source)
    if path.suffix == ".sln" or path.exists():
        return parse_solution(path.read_text())
    res = _vendored(f"{source}.sln")
    if not res.is_file():
        raise InstanceNotFound([str(source)])
    return parse_solution(res.read_text())


def best_known(name: str, search_dir: str | os.PathLike | None = None) -> float:
    """Best-known objective: sibling ``.sln`` file, vendored ``.sln``, then table."""
    if search_dir is not None:
        sln = Path(search_dir) / f"{name}.sln"
        if sln.exists():
            return parse_solution(sln.read_text()).objective
    res = _vendored(f"{name}.sln")
    if res.is_file():
        return parse_solution(res.read_text()).objective
    if name in BEST_KNOWN:
        return float(BEST_KNOWN[name])
    raise MissingBestKnown(f"no best-known value for {name!r}")


# ---------------------------------------------------------------- fetching

def read_config(path: str | os.PathLike | None = None) -> dict[str, str]:
    """Read a ``key = value`` config file (no section header needed)."""
    if path is None:
        path = os.environ.get(CONFIG_ENV) or Path.home() / ".config" / "qapfn" / "config"
    path = Path(path)
    if not path.exists():
        return {}
    parser = configparser.ConfigParser()
    parser.read_string("[qapfn]\n" + path.read_text())
    return {k.replace("-", "_"): v for k, v in parser["qapfn"].items()}


def mirror_url(config: dict[str, str] | None = None) -> str:
    if os.environ.get(MIRROR_ENV):
        url = os.environ[MIRROR_ENV]
    else:
        url = (config if config is not None else read_config()).get("mirror", DEFAULT_MIRROR)
    if "://" not in url:
        url = Path(url).resolve().as_uri()
    return url if url.endswith("/") else url + "/"


def _get(url: str, timeout: float) -> bytes | None:
    """Fetch ``url``; None when the resource does not exist."""
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            return resp.read()
    except urllib.error.HTTPError as exc:
        if exc.code == 404:
            return None
        raise NetworkFailure(f"{url}: HTTP {exc.code}") from exc
    except urllib.error.URLError as exc:
        if isinstance(exc.reason, FileNotFoundError) or url.startswith("file:"):
            return None
        raise NetworkFailure(f"{url}: {exc.reason}") from exc
    except OSError as exc:
        if url.startswith("file:"):
            return None
        raise NetworkFailure(f"{url}: {exc}") from exc


def _checksums(base: str, timeout: float) -> dict[str, str]:
    raw = _get(base + "SHA256SUMS", timeout)
    if raw is None:
        return {}
    sums = {}
    for line in raw.decode().splitlines():
        parts = line.split()
        if len(parts) == 2:
            sums[parts[1].lstrip("*")] = parts[0].lower()
    return sums


def _valid(path: Path, parse) -> bool:
    try:
        parse(path.read_text())
    except Exception:
        return False
    return True


def fetch_instances(names: Iterable[str], destination: str | os.PathLike,
                    mirror: str | None = None, timeout: float = 30.0) -> dict[str, dict]:
    """Download ``<name>.dat`` and ``<name>.sln`` into ``destination``.

    Files that already exist and parse are left alone. Returns a manifest
    ``{name: {"dat": path, "sln": path or None}}``; raises
    :class:`InstanceNotFound` listing every name whose ``.dat`` is missing.
    """
    names = list(names)
    dest = Path(destination)
    manifest: dict[str, dict] = {}
    if not names:
        return manifest
    dest.mkdir(parents=True, exist_ok=True)
    if mirror is None:
        base = mirror_url()
    else:
        base = mirror if "://" in mirror else Path(mirror).resolve().as_uri()
        base = base if base.endswith("/") else base + "/"
    sums = None
    missing = []
    for name in names:
        entry = {"dat": None, "sln": None}
        for kind, sub, parse in (("dat", "data.d", lambda s, nm=name: parse_instance(s, nm)),
                                 ("sln", "soln.d", parse_solution)):
            target = dest / f"{name}.{kind}"
            if target.exists() and _valid(target, parse):
                entry[kind] = target
                continue
            rel = f"{sub}/{name}.{kind}"
            raw = _get(base + rel, timeout)
            if raw is None:
                continue
            if sums is None:
                sums = _checksums(base, timeout)
            if rel in sums and hashlib.sha256(raw).hexdigest() != sums[rel]:
                raise ChecksumMismatch(f"{rel}: checksum mismatch")
            parse(io.StringIO(raw.decode()))
            target.write_bytes(raw)
            entry[kind] = target
        if entry["dat"] is None:
            missing.append(name)
        manifest[name] = entry
    if missing:
        raise InstanceNotFound(missing)
    return manifest

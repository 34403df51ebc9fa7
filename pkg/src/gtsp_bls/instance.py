"""TSPLIB and clustered-GTSP instance files.

Node and cluster indices are 0-based everywhere in the Python API; the
text formats are 1-based and converted on the way in and out.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

WEIGHT_KINDS = ("EUC_2D", "CEIL_2D", "GEO", "ATT", "EXPLICIT")
EXPLICIT_FORMATS = ("FULL_MATRIX", "UPPER_ROW", "LOWER_DIAG_ROW", "UPPER_DIAG_ROW")

_SECTIONS = (
    "NODE_COORD_SECTION",
    "EDGE_WEIGHT_SECTION",
    "DISPLAY_DATA_SECTION",
    "GTSP_SET_SECTION",
)


class ParseError(ValueError):
    """Malformed instance text."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedFormatError(ParseError):
    """Weight kind or matrix layout outside the supported set."""


class PartitionError(ValueError):
    """Cluster sets do not partition the node set."""

    def __init__(self, message: str, node: int | None = None):
        self.node = node
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class NodeSet:
    """Nodes of a symmetric instance with a precomputed integer distance matrix."""

    n: int
    weight_kind: str
    dist: np.ndarray = field(repr=False)
    coordinates: np.ndarray | None = field(default=None, repr=False)
    explicit_weights: np.ndarray | None = field(default=None, repr=False)
    name: str = ""

    def __post_init__(self):
        if self.weight_kind not in WEIGHT_KINDS:
            raise UnsupportedFormatError(f"unsupported EDGE_WEIGHT_TYPE {self.weight_kind}")
        has_coords = self.coordinates is not None
        has_matrix = self.explicit_weights is not None
        if has_coords == has_matrix:
            raise ValueError("exactly one of coordinates / explicit_weights must be given")
        if has_matrix != (self.weight_kind == "EXPLICIT"):
            raise ValueError(f"weight kind {self.weight_kind} inconsistent with data given")
        d = self.dist
        if d.shape != (self.n, self.n):
            raise ValueError(f"distance matrix shape {d.shape} != ({self.n}, {self.n})")
        if not np.array_equal(d, d.T):
            raise ValueError("distance matrix is not symmetric")
        if np.any(np.diag(d) != 0):
            raise ValueError("distance matrix has a non-zero diagonal")
        d.setflags(write=False)

    @classmethod
    def from_coordinates(cls, coords, weight_kind: str = "EUC_2D", name: str = "") -> "NodeSet":
        coords = np.asarray(coords, dtype=float).reshape(-1, 2)
        return cls(
            n=len(coords),
            weight_kind=weight_kind,
            dist=coordinate_distances(coords, weight_kind),
            coordinates=coords,
            name=name,
        )

    @classmethod
    def from_matrix(cls, matrix, name: str = "") -> "NodeSet":
        w = np.array(matrix, dtype=np.int64)
        return cls(n=len(w), weight_kind="EXPLICIT", dist=w.copy(), explicit_weights=w, name=name)

    def distance(self, i: int, j: int) -> int:
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError(f"node index out of range: ({i}, {j}) for n = {self.n}")
        return int(self.dist[i, j])


@dataclass(frozen=True, eq=False)
class GtspInstance:
    """A node set partitioned into ``m`` clusters."""

    nodes: NodeSet
    members: tuple[np.ndarray, ...]
    name: str = ""
    best_known: int | None = None
    cluster_of: np.ndarray = field(init=False, repr=False)
    _blocks: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.nodes.n
        members = tuple(np.asarray(c, dtype=np.intp) for c in self.members)
        if not 1 <= len(members) <= n:
            raise PartitionError(f"cluster count {len(members)} outside [1, {n}]")
        owner = np.full(n, -1, dtype=np.intp)
        for k, c in enumerate(members):
            if len(c) == 0:
                raise PartitionError(f"cluster {k} is empty")
            for v in c.tolist():
                if not 0 <= v < n:
                    raise PartitionError(f"node {v} out of range", node=v)
                if owner[v] >= 0:
                    raise PartitionError(
                        f"node {v} listed in clusters {owner[v]} and {k}", node=v
                    )
                owner[v] = k
        missing = np.flatnonzero(owner < 0)
        if len(missing):
            v = int(missing[0])
            raise PartitionError(f"node {v} belongs to no cluster", node=v)
        for c in members:
            c.setflags(write=False)
        owner.setflags(write=False)
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "cluster_of", owner)
        object.__setattr__(self, "_blocks", {})
        if self.best_known is not None and self.best_known <= 0:
            raise ValueError("best_known must be positive")

    @property
    def n(self) -> int:
        return self.nodes.n

    @property
    def m(self) -> int:
        return len(self.members)

    @property
    def dist(self) -> np.ndarray:
        return self.nodes.dist

    def distance(self, i: int, j: int) -> int:
        return self.nodes.distance(i, j)

    def with_best_known(self, best_known: int | None) -> "GtspInstance":
        return GtspInstance(self.nodes, self.members, self.name, best_known)

    def block(self, k: int, l: int) -> np.ndarray:
        """Distances from the members of cluster ``k`` to those of cluster ``l`` (cached)."""
        key = (k, l)
        b = self._blocks.get(key)
        if b is None:
            b = self.nodes.dist[np.ix_(self.members[k], self.members[l])]
            b.setflags(write=False)
            self._blocks[key] = b
        return b


# ---------------------------------------------------------------------------
# distance functions (TSPLIB 95 definitions)
# ---------------------------------------------------------------------------

def _nint(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5)


def _geo_radians(v: np.ndarray) -> np.ndarray:
    deg = np.trunc(v)
    minutes = v - deg
    return 3.141592 * (deg + 5.0 * minutes / 3.0) / 180.0


def coordinate_distances(coords: np.ndarray, weight_kind: str) -> np.ndarray:
    """Full integer distance matrix for a coordinate-based weight kind."""
    x = coords[:, 0]
    y = coords[:, 1]
    dx = x[:, None] - x[None, :]
    dy = y[:, None] - y[None, :]
    if weight_kind == "EUC_2D":
        d = _nint(np.sqrt(dx * dx + dy * dy))
    elif weight_kind == "CEIL_2D":
        d = np.ceil(np.sqrt(dx * dx + dy * dy))
    elif weight_kind == "ATT":
        r = np.sqrt((dx * dx + dy * dy) / 10.0)
        t = _nint(r)
        d = np.where(t < r, t + 1.0, t)
    elif weight_kind == "GEO":
        lat = _geo_radians(x)
        lon = _geo_radians(y)
        q1 = np.cos(lon[:, None] - lon[None, :])
        q2 = np.cos(lat[:, None] - lat[None, :])
        q3 = np.cos(lat[:, None] + lat[None, :])
        arg = np.clip(0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3), -1.0, 1.0)
        d = np.trunc(6378.388 * np.arccos(arg) + 1.0)
    else:
        raise UnsupportedFormatError(f"unsupported EDGE_WEIGHT_TYPE {weight_kind}")
    d = d.astype(np.int64)
    np.fill_diagonal(d, 0)
    return d


def _expand_explicit(values: list[int], n: int, fmt: str, line: int) -> np.ndarray:
    expected = {
        "FULL_MATRIX": n * n,
        "UPPER_ROW": n * (n - 1) // 2,
        "LOWER_DIAG_ROW": n * (n + 1) // 2,
        "UPPER_DIAG_ROW": n * (n + 1) // 2,
    }[fmt]
    if len(values) != expected:
        raise ParseError(
            f"EDGE_WEIGHT_SECTION has {len(values)} entries, {fmt} with DIMENSION {n} needs {expected}",
            line,
        )
    w = np.zeros((n, n), dtype=np.int64)
    if fmt == "FULL_MATRIX":
        w[:] = np.asarray(values, dtype=np.int64).reshape(n, n)
        if not np.array_equal(w, w.T):
            raise ParseError("FULL_MATRIX is not symmetric", line)
        return w
    if fmt == "UPPER_ROW":
        rows, cols = np.triu_indices(n, 1)
    elif fmt == "UPPER_DIAG_ROW":
        rows, cols = np.triu_indices(n, 0)
    else:
        # row-major lower triangle == column-major upper triangle
        cols, rows = np.tril_indices(n, 0)
    w[rows, cols] = values
    w[cols, rows] = values
    np.fill_diagonal(w, 0)
    return w


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def _as_lines(text) -> list[str]:
    if isinstance(text, str):
        return text.splitlines()
    return [ln.decode() if isinstance(ln, bytes) else ln for ln in text]


def _section_name(stripped: str) -> str | None:
    head = stripped.split(":")[0].strip().upper()
    return head if head in _SECTIONS else None


def _parse(text) -> tuple[NodeSet, dict, list[tuple[int, list[int]]] | None]:
    lines = _as_lines(text)
    header: dict[str, str] = {}
    coord_rows: list[tuple[int, list[str]]] | None = None
    weight_tokens: list[int] | None = None
    weight_end = 0
    sets: list[tuple[int, list[int]]] | None = None
    i = 0
    total = len(lines)

    def dimension() -> int:
        if "DIMENSION" not in header:
            raise ParseError("DIMENSION must precede data sections", i + 1)
        return int(header["DIMENSION"])

    while i < total:
        stripped = lines[i].strip()
        if not stripped:
            i += 1
            continue
        if stripped.upper() == "EOF":
            break
        section = _section_name(stripped)
        if section is None:
            if ":" not in stripped:
                raise ParseError(f"unexpected line {stripped!r}", i + 1)
            key, value = stripped.split(":", 1)
            header[key.strip().upper()] = value.strip()
            i += 1
            continue
        i += 1
        if section in ("NODE_COORD_SECTION", "DISPLAY_DATA_SECTION"):
            n = dimension()
            rows = []
            while i < total and len(rows) < n:
                s = lines[i].strip()
                if s:
                    if s.upper() == "EOF" or _section_name(s):
                        break
                    rows.append((i + 1, s.split()))
                i += 1
            if len(rows) != n:
                raise ParseError(f"{section} has {len(rows)} rows, DIMENSION is {n}", i + 1)
            if section == "NODE_COORD_SECTION":
                coord_rows = rows
        elif section == "EDGE_WEIGHT_SECTION":
            tokens: list[int] = []
            while i < total:
                s = lines[i].strip()
                if s and (s.upper() == "EOF" or _section_name(s) or _is_header(s)):
                    break
                for tok in s.split():
                    try:
                        tokens.append(int(float(tok)))
                    except ValueError:
                        raise ParseError(f"bad weight {tok!r}", i + 1) from None
                i += 1
            weight_tokens = tokens
            weight_end = i
        else:
            sets = []
            current: list[int] | None = None
            set_id = 0
            while i < total:
                s = lines[i].strip()
                if s and (s.upper() == "EOF" or _section_name(s) or _is_header(s)):
                    break
                for tok in s.split():
                    try:
                        val = int(tok)
                    except ValueError:
                        raise ParseError(f"bad set entry {tok!r}", i + 1) from None
                    if current is None:
                        set_id = val
                        current = []
                    elif val == -1:
                        sets.append((set_id, current))
                        current = None
                    else:
                        current.append(val)
                i += 1
            if current is not None:
                raise ParseError(f"set {set_id} not terminated by -1", i)

    name = header.get("NAME", "")
    if "DIMENSION" not in header:
        raise ParseError("missing DIMENSION")
    n = int(header["DIMENSION"])
    if n < 1:
        raise ParseError(f"DIMENSION must be positive, got {n}")
    kind = header.get("EDGE_WEIGHT_TYPE", "").upper()
    if kind not in WEIGHT_KINDS:
        raise UnsupportedFormatError(f"unsupported EDGE_WEIGHT_TYPE {kind or '<missing>'}")
    if kind == "EXPLICIT":
        fmt = header.get("EDGE_WEIGHT_FORMAT", "").upper()
        if fmt not in EXPLICIT_FORMATS:
            raise UnsupportedFormatError(f"unsupported EDGE_WEIGHT_FORMAT {fmt or '<missing>'}")
        if weight_tokens is None:
            raise ParseError("EXPLICIT instance without EDGE_WEIGHT_SECTION")
        w = _expand_explicit(weight_tokens, n, fmt, weight_end)
        nodes = NodeSet(n=n, weight_kind=kind, dist=w.copy(), explicit_weights=w, name=name)
    else:
        if coord_rows is None:
            raise ParseError(f"{kind} instance without NODE_COORD_SECTION")
        coords = np.empty((n, 2))
        seen = np.zeros(n, dtype=bool)
        for lineno, parts in coord_rows:
            if len(parts) < 3:
                raise ParseError("coordinate row needs 'id x y'", lineno)
            try:
                idx = int(parts[0]) - 1
                coords[idx] = float(parts[1]), float(parts[2])
            except (ValueError, IndexError):
                raise ParseError(f"bad coordinate row {' '.join(parts)!r}", lineno) from None
            if not 0 <= idx < n or seen[idx]:
                raise ParseError(f"node id {idx + 1} out of range or repeated", lineno)
            seen[idx] = True
        nodes = NodeSet(
            n=n, weight_kind=kind, dist=coordinate_distances(coords, kind),
            coordinates=coords, name=name,
        )
    return nodes, header, sets


def _is_header(s: str) -> bool:
    if ":" not in s:
        return False
    key = s.split(":", 1)[0].strip()
    return key.replace("_", "").isalpha()


def parse_tsplib(text) -> NodeSet:
    """Parse TSPLIB text (a string or an iterable of lines) into a :class:`NodeSet`."""
    return _parse(text)[0]


def parse_gtsp(text, best_known: int | None = None) -> GtspInstance:
    """Parse a TSPLIB body carrying ``GTSP_SETS`` and ``GTSP_SET_SECTION``."""
    nodes, header, sets = _parse(text)
    if sets is None:
        raise ParseError("missing GTSP_SET_SECTION")
    if "GTSP_SETS" in header and int(header["GTSP_SETS"]) != len(sets):
        raise ParseError(f"GTSP_SETS is {header['GTSP_SETS']} but {len(sets)} sets listed")
    sets = sorted(sets, key=lambda s: s[0])
    members = []
    for _, nodes_1based in sets:
        for v in nodes_1based:
            if not 1 <= v <= nodes.n:
                raise PartitionError(f"node {v} out of range 1..{nodes.n}", node=v - 1)
        members.append(np.asarray(nodes_1based, dtype=np.intp) - 1)
    try:
        return GtspInstance(nodes, tuple(members), name=nodes.name, best_known=best_known)
    except PartitionError as exc:
        # report the node with its 1-based file id
        if exc.node is not None:
            raise PartitionError(
                str(exc).replace(f"node {exc.node}", f"node {exc.node + 1}"), node=exc.node
            ) from None
        raise


def format_gtsp(inst: GtspInstance, comment: str | None = None) -> str:
    """Serialize to the clustered GTSP text format (explicit FULL_MATRIX when no coordinates)."""
    nodes = inst.nodes
    out = [f"NAME : {inst.name or nodes.name}", "TYPE : GTSP"]
    if comment:
        out.append(f"COMMENT : {comment}")
    out += [f"DIMENSION : {nodes.n}", f"GTSP_SETS : {inst.m}", f"EDGE_WEIGHT_TYPE : {nodes.weight_kind}"]
    if nodes.weight_kind == "EXPLICIT":
        out.append("EDGE_WEIGHT_FORMAT : FULL_MATRIX")
        out.append("EDGE_WEIGHT_SECTION")
        out += [" ".join(str(int(v)) for v in row) for row in nodes.explicit_weights]
    else:
        out.append("NODE_COORD_SECTION")
        out += [f"{i + 1} {x!r} {y!r}" for i, (x, y) in enumerate(nodes.coordinates.tolist())]
    out.append("GTSP_SET_SECTION")
    for k, c in enumerate(inst.members):
        out.append(" ".join([str(k + 1), *(str(v + 1) for v in c.tolist()), "-1"]))
    out.append("EOF")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# best-known sidecar and bundled data
# ---------------------------------------------------------------------------

def parse_best_known(text) -> dict[str, int]:
    table = {}
    for lineno, line in enumerate(_as_lines(text), 1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        parts = s.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'name cost', got {s!r}", lineno)
        table[parts[0]] = int(parts[1].replace(",", ""))
    return table


def bundled_best_known() -> dict[str, int]:
    return parse_best_known(resources.files(__package__).joinpath("data/best_known.txt").read_text())


def bundled_tsplib_names() -> list[str]:
    root = resources.files(__package__).joinpath("data/tsplib")
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".tsp"))


def load_bundled_tsplib(name: str) -> NodeSet:
    """TSPLIB file shipped with the package, e.g. ``"eil51"``."""
    path = resources.files(__package__).joinpath(f"data/tsplib/{name}.tsp")
    if not path.is_file():
        raise FileNotFoundError(f"no bundled TSPLIB instance {name!r}")
    return parse_tsplib(path.read_text())


def read_tsplib(path: str | Path) -> NodeSet:
    return parse_tsplib(Path(path).read_text())


def read_gtsp(path: str | Path, best_known: dict[str, int] | None = None) -> GtspInstance:
    inst = parse_gtsp(Path(path).read_text())
    if best_known and inst.name in best_known:
        inst = inst.with_best_known(best_known[inst.name])
    return inst


def gtsp_name(base: str, m: int) -> str:
    """Benchmark naming convention: cluster count prefixed to the TSPLIB name."""
    return f"{m}{base}"


def split_gtsp_name(name: str) -> tuple[int, str]:
    digits = len(name) - len(name.lstrip("0123456789"))
    if digits == 0:
        raise ValueError(f"{name!r} has no cluster-count prefix")
    return int(name[:digits]), name[digits:]


def euclidean_instance(coords, members, weight_kind: str = "EUC_2D", name: str = "",
                       best_known: int | None = None) -> GtspInstance:
    """Convenience constructor used by tests and demos."""
    nodes = NodeSet.from_coordinates(coords, weight_kind, name=name)
    return GtspInstance(nodes, tuple(np.asarray(c, dtype=np.intp) for c in members), name, best_known)


def matrix_instance(matrix, members, name: str = "", best_known: int | None = None) -> GtspInstance:
    nodes = NodeSet.from_matrix(matrix, name=name)
    return GtspInstance(nodes, tuple(np.asarray(c, dtype=np.intp) for c in members), name, best_known)


__all__ = [
    "NodeSet", "GtspInstance", "ParseError", "UnsupportedFormatError", "PartitionError",
    "parse_tsplib", "parse_gtsp", "format_gtsp", "parse_best_known", "coordinate_distances",
    "bundled_best_known", "bundled_tsplib_names", "load_bundled_tsplib", "read_tsplib",
    "read_gtsp", "gtsp_name", "split_gtsp_name", "euclidean_instance",
    "matrix_instance",
]

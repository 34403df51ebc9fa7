"""Benchmark harness: seeded repeated runs per instance and per-instance result tables."""

from __future__ import annotations

import csv
import io
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .bls import BlsParams
from .clustering import ClusteringConfig, cluster
from .instance import (
    GtspInstance,
    bundled_best_known,
    bundled_tsplib_names,
    load_bundled_tsplib,
    read_gtsp,
    read_tsplib,
    split_gtsp_name,
)
from .memetic import MemeticParams, solve
from .report import RunReport, compute_dev
from .tour import parse_tour, tour_cost


class ValidationFailure(RuntimeError):
    """A reported tour does not re-validate against its instance."""


@dataclass
class BenchConfig:
    instances: list[str] = field(default_factory=list)
    runs: int = 20
    seed: int = 0
    bls: BlsParams = field(default_factory=BlsParams)
    p_mut: float = 0.3
    time_limit: float | None = 120.0
    output: str | None = None
    format: str = "csv"
    jobs: int = 1

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.format not in ("csv", "markdown"):
            raise ValueError(f"unknown output format {self.format!r}")

    @property
    def memetic(self) -> MemeticParams:
        return MemeticParams(bls=self.bls, p_mut=self.p_mut)


_BLS_KEYS = {f.name: f.type for f in fields(BlsParams)}


def _coerce(key: str, value: str):
    if value.lower() in ("none", ""):
        return None
    if key in ("P0", "Q", "p_mut", "time_limit"):
        return float(value)
    if key == "exhaustive":
        return value.lower() in ("1", "true", "yes", "on")
    return int(value)


def parse_params(text: str) -> dict:
    """Parse flat ``key = value`` text; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        if "=" not in s:
            raise ValueError(f"line {lineno}: expected 'key = value', got {s!r}")
        key, value = (p.strip() for p in s.split("=", 1))
        out[key] = value
    return out


def bls_params_from(values: dict, base: BlsParams | None = None) -> BlsParams:
    base = base or BlsParams()
    updates = {k: _coerce(k, v) for k, v in values.items() if k in _BLS_KEYS}
    p = replace(base, **updates)
    p.check()
    return p


def config_from_text(text: str) -> BenchConfig:
    values = parse_params(text)
    known = set(_BLS_KEYS) | {"instances", "runs", "seed", "p_mut", "time_limit", "output",
                              "format", "jobs"}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    cfg = BenchConfig(bls=bls_params_from(values))
    if "instances" in values:
        cfg.instances = values["instances"].replace(",", " ").split()
    for key in ("runs", "seed", "jobs"):
        if key in values:
            setattr(cfg, key, int(values[key]))
    for key in ("p_mut", "time_limit"):
        if key in values:
            setattr(cfg, key, _coerce(key, values[key]))
    if "output" in values:
        cfg.output = values["output"]
    if "format" in values:
        cfg.format = values["format"]
    cfg.__post_init__()
    return cfg


def load_instance(spec: str, best_known: int | None = None, m: int | None = None) -> GtspInstance:
    """Resolve a benchmark name (``"11eil51"``), a clustered file or a TSPLIB file.

    Plain TSPLIB files are clustered with the default rule (or ``m`` clusters).
    The best-known cost comes from ``best_known`` or else the bundled table.
    """
    table = bundled_best_known()
    path = Path(spec)
    if path.is_file():
        text = path.read_text()
        if "GTSP_SET_SECTION" in text:
            inst = read_gtsp(path)
        else:
            inst = cluster(read_tsplib(path), ClusteringConfig(m=m))
    else:
        try:
            count, base = split_gtsp_name(spec)
        except ValueError:
            count, base = m, spec
        if base not in bundled_tsplib_names():
            raise FileNotFoundError(f"{spec!r} is neither a file nor a bundled benchmark instance")
        inst = cluster(load_bundled_tsplib(base), ClusteringConfig(m=count))
    bk = best_known if best_known is not None else table.get(inst.name)
    return inst.with_best_known(bk)


def derive_seed(master: int, instance: str, run: int) -> int:
    """Per-run seed from (master seed, instance name, run index); stable under reordering."""
    ss = np.random.SeedSequence([master, zlib.crc32(instance.encode()), run])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def revalidate(report: RunReport, inst: GtspInstance) -> None:
    """Round-trip the serialized tour and recompute its cost."""
    t = parse_tour(report.tour_text)
    try:
        c = tour_cost(t, inst)
    except ValueError as exc:
        raise ValidationFailure(f"{inst.name} seed {report.seed}: {exc}") from exc
    if c != report.cost:
        raise ValidationFailure(f"{inst.name} seed {report.seed}: reported {report.cost}, recomputed {c}")


def _run_one(task) -> RunReport:
    inst, params, seed, time_limit = task
    return solve(inst, params, seed=seed, time_limit=time_limit)


@dataclass
class InstanceSummary:
    instance: str
    n: int
    m: int
    best_known: int | None
    runs: list[RunReport]

    @property
    def f_avg(self) -> float:
        return sum(r.cost for r in self.runs) / len(self.runs)

    @property
    def best_found(self) -> int:
        return min(r.cost for r in self.runs)

    @property
    def dev(self) -> float | None:
        return None if self.best_known is None else compute_dev(self.f_avg, self.best_known)

    @property
    def hits(self) -> int | None:
        if self.best_known is None:
            return None
        return sum(r.cost <= self.best_known for r in self.runs)

    @property
    def mean_time(self) -> float:
        return sum(r.wall_time for r in self.runs) / len(self.runs)


@dataclass
class BenchReport:
    summaries: list[InstanceSummary]

    def average_dev(self) -> float | None:
        devs = [s.dev for s in self.summaries if s.dev is not None]
        return sum(devs) / len(devs) if devs else None

    def average_time(self) -> float | None:
        if not self.summaries:
            return None
        return sum(s.mean_time for s in self.summaries) / len(self.summaries)

    def rows(self, include_time: bool = True) -> list[list[str]]:
        header = ["Instance", "Nodes", "Clusters", "Best", "f_avg", "best_found", "hits", "runs", "dev"]
        if include_time:
            header.append("CPU(s)")
        out = [header]
        for s in self.summaries:
            row = [s.instance, str(s.n), str(s.m), _opt(s.best_known), f"{s.f_avg:.2f}",
                   str(s.best_found), _opt(s.hits), str(len(s.runs)), _pct(s.dev)]
            if include_time:
                row.append(f"{s.mean_time:.2f}")
            out.append(row)
        if self.summaries:
            avg = ["Average", "", "", "", "", "", "", "", _pct(self.average_dev())]
            if include_time:
                avg.append(f"{self.average_time():.2f}")
            out.append(avg)
        return out

    def to_csv(self, include_time: bool = True) -> str:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(self.rows(include_time))
        return buf.getvalue()

    def to_markdown(self, include_time: bool = True) -> str:
        rows = self.rows(include_time)
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines = []
        for k, r in enumerate(rows):
            cells = [c.rjust(w) if k and i else c.ljust(w) for i, (c, w) in enumerate(zip(r, widths))]
            lines.append("| " + " | ".join(cells) + " |")
            if k == 0:
                lines.append("|" + "|".join("-" * (w + 2) for w in widths) + "|")
        return "\n".join(lines) + "\n"

    def runs_csv(self, include_time: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["instance", "seed", "cost", "dev", "generations", "descents", "tour"]
        if include_time:
            header.insert(4, "wall_time")
        w.writerow(header)
        for s in self.summaries:
            for r in s.runs:
                row = [r.instance, r.seed, r.cost, _pct(r.dev), r.generations, r.descents, r.tour_text]
                if include_time:
                    row.insert(4, f"{r.wall_time:.3f}")
                w.writerow(row)
        return buf.getvalue()


def _opt(v) -> str:
    return "" if v is None else str(v)


def _pct(v) -> str:
    return "" if v is None else f"{v:.2f}"


def run_benchmark(cfg: BenchConfig, jobs: int | None = None) -> BenchReport:
    """``cfg.runs`` seeded solves per instance; results do not depend on ``jobs``."""
    jobs = cfg.jobs if jobs is None else jobs
    instances = [load_instance(name) for name in cfg.instances]
    params = cfg.memetic
    tasks = []
    for inst in instances:
        for run in range(cfg.runs):
            tasks.append((inst, params, derive_seed(cfg.seed, inst.name, run), cfg.time_limit))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_run_one, tasks))
    else:
        reports = [_run_one(t) for t in tasks]
    summaries = []
    for i, inst in enumerate(instances):
        runs = reports[i * cfg.runs:(i + 1) * cfg.runs]
        for r in runs:
            revalidate(r, inst)
        summaries.append(InstanceSummary(inst.name, inst.n, inst.m, inst.best_known, runs))
    return BenchReport(summaries)


def write_report(report: BenchReport, cfg: BenchConfig) -> str:
    text = report.to_csv() if cfg.format == "csv" else report.to_markdown()
    if cfg.output:
        Path(cfg.output).write_text(text)
    return text

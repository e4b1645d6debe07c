"""Per-iteration, per-process timing traces.

A trace is a K x P matrix of wall-clock seconds (row = iteration, column =
MPI rank) plus run metadata. On disk it is a long-format CSV with header
``rank,iteration,seconds`` and a ``.meta`` sidecar of ``key=value`` lines.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .dist import Uniform
from .errors import (
    ConfigError,
    IncompleteMatrix,
    IndivisibleLayout,
    IterationOutOfRange,
    MalformedRow,
    MissingMetadata,
    NodeOutOfRange,
    NonPositiveTime,
)

HEADER = ("rank", "iteration", "seconds")


class Method(str, Enum):
    BARRIER = "barrier"
    PIPELINED = "pipelined"


@dataclass(frozen=True)
class CycleLayout:
    restart: int = 30
    fill: int = 0

    def __post_init__(self):
        if self.restart < 1 or self.fill < 0:
            raise ConfigError(f"invalid cycle layout restart={self.restart} fill={self.fill}")

    @property
    def length(self) -> int:
        return self.restart + self.fill


@dataclass(frozen=True)
class TraceMeta:
    P: int
    cores_per_node: int = 1
    method: Method = Method.BARRIER
    cycle: CycleLayout = field(default_factory=CycleLayout)
    platform: str = ""
    solve_seconds: float | None = None

    def __post_init__(self):
        if self.P < 1 or self.cores_per_node < 1:
            raise ConfigError("P and cores_per_node must be >= 1")
        object.__setattr__(self, "method", Method(self.method))

    @property
    def n_nodes(self) -> int:
        return effective_process_count(self.P, self.cores_per_node)


@dataclass(frozen=True, eq=False)
class TimingTrace:
    times: np.ndarray
    meta: TraceMeta

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        if t.ndim != 2 or t.shape[0] < 1 or t.shape[1] < 1:
            raise IncompleteMatrix([])
        if t.shape[1] != self.meta.P:
            raise ConfigError(f"trace has {t.shape[1]} ranks but metadata says P={self.meta.P}")
        if not np.all(np.isfinite(t)) or np.any(t <= 0):
            raise NonPositiveTime("iteration times must be finite and > 0")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    @property
    def K(self) -> int:
        return self.times.shape[0]

    @property
    def P(self) -> int:
        return self.times.shape[1]

    def __eq__(self, other):
        return (
            isinstance(other, TimingTrace)
            and self.meta == other.meta
            and np.array_equal(self.times, other.times)
        )


@dataclass(frozen=True)
class IterationFit:
    """Per-iteration uniform minimum ``a`` and span ``s`` (seconds)."""

    a: np.ndarray
    s: np.ndarray

    def specs(self) -> list[Uniform]:
        return [Uniform(float(a), float(s)) for a, s in zip(self.a, self.s)]

    def __len__(self):
        return len(self.a)


# -- ingestion -------------------------------------------------------------------


def parse_trace(stream, meta: TraceMeta) -> TimingTrace:
    """Parse trace CSV (bytes, str or a binary/text file object)."""
    if hasattr(stream, "read"):
        stream = stream.read()
    if isinstance(stream, bytes):
        stream = stream.decode("utf-8")
    reader = csv.reader(io.StringIO(stream))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow(1, "empty file") from None
    if tuple(h.strip() for h in header) != HEADER:
        raise MalformedRow(1, f"expected header {','.join(HEADER)}")

    ranks, iters, secs, lines = [], [], [], []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise MalformedRow(line, f"expected 3 fields, got {len(row)}")
        try:
            p, k, t = int(row[0]), int(row[1]), float(row[2])
        except ValueError:
            raise MalformedRow(line, f"unparseable row {','.join(row)!r}") from None
        if not 0 <= p < meta.P:
            raise MalformedRow(line, f"rank {p} outside [0, {meta.P})")
        if k < 0:
            raise MalformedRow(line, f"negative iteration {k}")
        if not math.isfinite(t):
            raise MalformedRow(line, f"non-finite time {row[2]!r}")
        if t <= 0:
            raise NonPositiveTime(f"line {line}: time {row[2]} is not positive")
        ranks.append(p)
        iters.append(k)
        secs.append(t)
        lines.append(line)
    if not secs:
        raise IncompleteMatrix([])

    K = max(iters) + 1
    times = np.full((K, meta.P), np.nan)
    seen = np.zeros((K, meta.P), dtype=bool)
    for p, k, t, line in zip(ranks, iters, secs, lines):
        if seen[k, p]:
            raise MalformedRow(line, f"duplicate entry for rank {p}, iteration {k}")
        seen[k, p] = True
        times[k, p] = t
    if not seen.all():
        raise IncompleteMatrix(zip(*np.nonzero(~seen)))
    return TimingTrace(times, meta)


def serialize_trace(trace: TimingTrace) -> bytes:
    out = io.StringIO()
    out.write(",".join(HEADER) + "\n")
    for k, row in enumerate(trace.times):
        for p, t in enumerate(row):
            out.write(f"{p},{k},{float(t)!r}\n")
    return out.getvalue().encode("utf-8")


def parse_kv(text: str) -> dict[str, str]:
    """``key=value`` lines; blank lines and ``#`` comments are skipped."""
    kv = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {n}: expected key=value")
        kv[key.strip()] = value.strip()
    return kv


def parse_meta(text: str) -> TraceMeta:
    return meta_from_mapping(parse_kv(text))


def meta_from_mapping(kv: dict) -> TraceMeta:
    try:
        return TraceMeta(
            P=int(kv["P"]),
            cores_per_node=int(kv.get("cores_per_node", 1)),
            method=Method(kv.get("method", "barrier").lower()),
            cycle=CycleLayout(int(kv.get("restart", 30)), int(kv.get("fill", 0))),
            platform=kv.get("platform", ""),
            solve_seconds=float(kv["solve_seconds"]) if kv.get("solve_seconds") else None,
        )
    except KeyError as exc:
        raise ConfigError(f"metadata is missing {exc.args[0]}") from None
    except ValueError as exc:
        raise ConfigError(f"bad metadata value: {exc}") from None


def format_meta(meta: TraceMeta) -> str:
    lines = [
        f"P={meta.P}",
        f"cores_per_node={meta.cores_per_node}",
        f"method={meta.method.value}",
        f"restart={meta.cycle.restart}",
        f"fill={meta.cycle.fill}",
        f"platform={meta.platform}",
    ]
    if meta.solve_seconds is not None:
        lines.append(f"solve_seconds={meta.solve_seconds!r}")
    return "\n".join(lines) + "\n"


def meta_path(path) -> Path:
    return Path(path).with_suffix(".meta")


def read_trace(path) -> TimingTrace:
    path = Path(path)
    data = path.read_bytes()
    sidecar = meta_path(path)
    if not sidecar.is_file():
        raise MissingMetadata(f"no metadata sidecar {sidecar}")
    meta = parse_meta(sidecar.read_text(encoding="utf-8"))
    return parse_trace(data, meta)


def write_trace(trace: TimingTrace, path) -> None:
    path = Path(path)
    path.write_bytes(serialize_trace(trace))
    meta_path(path).write_bytes(format_meta(trace.meta).encode("utf-8"))


# -- cycle bookkeeping -------------------------------------------------------------


def cycle_position(k: int, layout: CycleLayout) -> int:
    return k % layout.length


def fill_mask(K: int, layout: CycleLayout) -> np.ndarray:
    """Boolean mask of iterations that fill the pipeline (first ``fill`` of each cycle)."""
    return (np.arange(K) % layout.length) < layout.fill


def filter_fill(trace: TimingTrace) -> TimingTrace:
    """Drop pipeline-fill iterations; the result has ``fill=0`` so this is idempotent."""
    layout = trace.meta.cycle
    if layout.fill == 0:
        return trace
    keep = ~fill_mask(trace.K, layout)
    meta = replace(trace.meta, cycle=CycleLayout(layout.restart, 0))
    return TimingTrace(trace.times[keep], meta)


def effective_process_count(P: int, cores_per_node: int) -> int:
    if P % cores_per_node:
        raise IndivisibleLayout(f"P={P} is not divisible by cores_per_node={cores_per_node}")
    return P // cores_per_node


def node_ranks(meta: TraceMeta, node: int) -> slice:
    if not 0 <= node < meta.n_nodes:
        raise NodeOutOfRange(f"node {node} outside [0, {meta.n_nodes})")
    c = meta.cores_per_node
    return slice(node * c, (node + 1) * c)


def iteration_slice(trace: TimingTrace, k: int) -> np.ndarray:
    if not 0 <= k < trace.K:
        raise IterationOutOfRange(f"iteration {k} outside [0, {trace.K})")
    return trace.times[k]


def per_iteration_uniform_fits(trace: TimingTrace) -> IterationFit:
    lo = trace.times.min(axis=1)
    hi = trace.times.max(axis=1)
    s = hi - lo
    # round the span up where lo + s would land one ulp short of hi
    short = lo + s < hi
    s[short] = np.nextafter(s[short], np.inf)
    return IterationFit(lo, s)

"""Benchmark runner: binned vs brute over a grid of (n, d, k) cells.

Timing uses the median over repeats with one discarded warm-up run.  The
binned timing covers index build plus search (the index is part of the
method); brute covers the scan.  Peak auxiliary memory is measured in a
separate untimed pass with tracemalloc: peak traced allocation during the
operation minus the output arrays it returns.
"""

from __future__ import annotations

import statistics
import sys
import time
import tracemalloc
from dataclasses import dataclass, fields

from ..binning import BinningConfig, build_bin_index
from ..errors import BadShapeError, VerificationFailedError
from ..knn import KnnOptions, binned_select_knn, brute_force_knn
from .datasets import generate_dataset
from .verify import distance_checksum

__all__ = ["BenchPlan", "BenchRecord", "run_bench", "emit_results",
           "parse_results", "measure_knn_memory"]

_METHODS = ("binned", "brute")

# soft-warning region: the binned route is expected to win comfortably for
# large n at low dimension; losing there hints at a build or search problem
_ANOMALY_MIN_N = 100_000
_ANOMALY_MAX_D = 5


@dataclass(frozen=True)
class BenchPlan:
    """What to run: the cross product of sizes x dims x ks, per method."""

    dims: tuple = (3,)
    sizes: tuple = (1000, 10000)
    ks: tuple = (10,)
    splits: int = 1
    seed: int = 0
    repeats: int = 5
    methods: tuple = ("binned", "brute")
    distribution: str = "uniform"
    warmup: bool = True
    measure_mem: bool = True

    def __post_init__(self):
        if not self.dims or not self.sizes or not self.ks:
            raise BadShapeError("dims, sizes and ks must be non-empty")
        if self.repeats < 1:
            raise BadShapeError("repeats must be >= 1")
        if self.splits < 1:
            raise BadShapeError("splits must be >= 1")
        for m in self.methods:
            if m not in _METHODS:
                raise BadShapeError(f"unknown method {m!r}; expected {_METHODS}")
        if not self.methods:
            raise BadShapeError("methods must be non-empty")


@dataclass(frozen=True)
class BenchRecord:
    """One benchmark cell result."""

    method: str
    n: int
    d: int
    k: int
    splits: int
    time_s: float
    qps: float
    mem_bytes: int
    checksum: str


def _run_binned(cloud, k, threads, backend):
    index = build_bin_index(cloud, BinningConfig(k_target=k), backend=backend)
    result = binned_select_knn(cloud, index, KnnOptions(k=k),
                               threads=threads, backend=backend)
    return index, result


def _run_brute(cloud, k, threads, backend):
    return brute_force_knn(cloud, KnnOptions(k=k), threads=threads,
                           backend=backend)


def measure_knn_memory(cloud, k, method, *, threads=0, backend=None):
    """Peak traced allocation of one run, minus the returned output arrays.

    For the binned method the bin-index arrays therefore count as auxiliary
    memory, which is exactly the overhead the method claims to keep small.
    """
    tracemalloc.start()
    try:
        if method == "binned":
            _, result = _run_binned(cloud, k, threads, backend)
        else:
            result = _run_brute(cloud, k, threads, backend)
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    outputs = result.indices.nbytes + result.dist2.nbytes
    return max(0, int(peak) - outputs)


def run_bench(plan: BenchPlan, *, threads: int = 0, backend: str | None = None,
              progress=None, warn=None) -> list:
    """Run the plan; returns records in deterministic cell order.

    Within a cell every method sees the same generated cloud.  When both
    methods run, their distance checksums must agree; a mismatch raises
    VerificationFailed naming the cell.  A cell where brute beats binned in
    the large-n low-d region is reported through ``warn`` (default stderr)
    but does not fail the run.
    """
    if warn is None:
        warn = lambda msg: print(msg, file=sys.stderr)
    records = []
    case = 0
    for n in plan.sizes:
        for d in plan.dims:
            for k in plan.ks:
                case += 1
                cloud = generate_dataset(n, d, splits=plan.splits,
                                         seed=plan.seed + case,
                                         distribution=plan.distribution)
                cell_records = {}
                for method in plan.methods:
                    runner = _run_binned if method == "binned" else _run_brute
                    if plan.warmup:
                        runner(cloud, k, threads, backend)
                    times = []
                    result = None
                    for _ in range(plan.repeats):
                        t0 = time.perf_counter()
                        out = runner(cloud, k, threads, backend)
                        times.append(time.perf_counter() - t0)
                        result = out[1] if method == "binned" else out
                    mem = 0
                    if plan.measure_mem:
                        mem = measure_knn_memory(cloud, k, method,
                                                 threads=threads, backend=backend)
                    t_med = statistics.median(times)
                    rec = BenchRecord(method=method, n=n, d=d, k=k,
                                      splits=plan.splits, time_s=t_med,
                                      qps=n / t_med if t_med > 0 else 0.0,
                                      mem_bytes=mem,
                                      checksum=distance_checksum(result))
                    cell_records[method] = rec
                    records.append(rec)
                    if progress is not None:
                        progress(rec)
                if "binned" in cell_records and "brute" in cell_records:
                    rb, ro = cell_records["binned"], cell_records["brute"]
                    if rb.checksum != ro.checksum:
                        raise VerificationFailedError(
                            f"checksum mismatch at n={n}, d={d}, k={k}: "
                            f"binned {rb.checksum[:16]}.. != brute {ro.checksum[:16]}.."
                        )
                    if (rb.time_s > ro.time_s and n >= _ANOMALY_MIN_N
                            and d <= _ANOMALY_MAX_D):
                        warn(f"anomaly: brute ({ro.time_s:.4f}s) beat binned "
                             f"({rb.time_s:.4f}s) at n={n}, d={d}, k={k}")
    return records


def emit_results(records, fmt: str = "csv") -> str:
    """Render records as CSV (stable header) or JSON-lines."""
    if not records:
        raise BadShapeError("no records to emit")
    names = [f.name for f in fields(BenchRecord)]
    if fmt == "csv":
        lines = [",".join(names)]
        for r in records:
            lines.append(",".join(_csv_field(getattr(r, n)) for n in names))
        return "\n".join(lines) + "\n"
    if fmt == "jsonl":
        import json
        lines = []
        for r in records:
            lines.append(json.dumps({n: getattr(r, n) for n in names}))
        return "\n".join(lines) + "\n"
    raise BadShapeError(f"unknown format {fmt!r}; expected csv or jsonl")


def _csv_field(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_results(text: str) -> list:
    """Inverse of emit_results for both formats."""
    text = text.strip()
    if not text:
        return []
    records = []
    if text.startswith("{"):
        import json
        for line in text.splitlines():
            obj = json.loads(line)
            records.append(BenchRecord(**obj))
        return records
    lines = text.splitlines()
    names = [f.name for f in fields(BenchRecord)]
    header = lines[0].split(",")
    if header != names:
        raise BadShapeError(f"unexpected CSV header {header!r}")
    for line in lines[1:]:
        parts = line.split(",")
        records.append(BenchRecord(
            method=parts[0], n=int(parts[1]), d=int(parts[2]), k=int(parts[3]),
            splits=int(parts[4]), time_s=float(parts[5]), qps=float(parts[6]),
            mem_bytes=int(parts[7]), checksum=parts[8]))
    return records

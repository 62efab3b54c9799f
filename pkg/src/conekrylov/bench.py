"""Benchmark harness: several methods over a suite of instances.

Each ``(instance, method)`` pair yields one :class:`BenchRecord`. Pairs run
concurrently on a thread pool (the heavy lifting happens in LAPACK, which
releases the GIL); records come back in suite order regardless of timing.
A method that raises is recorded with ``outcome=None``.
"""

import csv
import io
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np

from .errors import ConeKrylovError, InvalidParams
from .rksm import SolverOptions, direct_oracle, newton_baseline, solve

log = logging.getLogger(__name__)

SCHEMA = 1
METHODS = ("rksm1", "rksm10", "newton", "oracle")


@dataclass(frozen=True)
class BenchRecord:
    instance: str
    method: str
    outcome: Optional[str]
    iterations: Optional[int]
    #: what ``iterations`` counts; differs between methods and is never normalized
    iteration_kind: Optional[str]
    wall_time: float
    chi_rel: Optional[float]
    s_star: Optional[float]
    #: subspace ledger (RKSM only): final = initial + ell * expansions
    initial_dim: Optional[int] = None
    ell: Optional[int] = None
    expansions: Optional[int] = None
    error: Optional[str] = None

    def __post_init__(self):
        if self.chi_rel is not None and self.chi_rel < 0:
            raise InvalidParams("chi_rel must be >= 0")


@dataclass(frozen=True)
class Instance:
    id: str
    M: object
    q: np.ndarray


def run_method(method, M, q, opts=None):
    opts = SolverOptions() if opts is None else opts
    if method == "rksm1":
        return solve(M, q, replace(opts, ell=1))
    if method == "rksm10":
        return solve(M, q, replace(opts, ell=10))
    if method == "newton":
        return newton_baseline(M, q, opts=opts)
    if method == "oracle":
        return direct_oracle(M, q, opts)
    raise InvalidParams(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


def _record(inst, method, opts):
    try:
        r = run_method(method, inst.M, inst.q, opts)
    except ConeKrylovError as exc:
        log.warning("%s/%s failed: %s", inst.id, method, exc)
        return BenchRecord(inst.id, method, None, None, None, 0.0, None, None, error=str(exc))
    return BenchRecord(
        instance=inst.id,
        method=method,
        outcome=r.outcome.value,
        iterations=r.iterations,
        iteration_kind=r.iteration_kind,
        wall_time=r.wall_time,
        chi_rel=None if r.chi is None else r.chi.total,
        s_star=r.s_star,
        **(dict(initial_dim=r.initial_dim, ell=r.ell, expansions=r.expansions) if r.method == "rksm" else {}),
    )


def run_bench(instances, methods=METHODS, opts=None, workers=None):
    for m in methods:
        if m not in METHODS:
            raise InvalidParams(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    jobs = [(inst, m) for inst in instances for m in methods]
    workers = workers or min(len(jobs), os.cpu_count() or 1) or 1
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: _record(job[0], job[1], opts), jobs))


FIELDS = [f for f in BenchRecord.__dataclass_fields__]


def records_to_csv(records):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=FIELDS, lineterminator="\r\n")
    w.writeheader()
    for r in records:
        w.writerow({k: ("" if v is None else v) for k, v in asdict(r).items()})
    return buf.getvalue()


def records_to_json(records):
    return json.dumps({"schema": SCHEMA, "records": [asdict(r) for r in records]}, indent=2)

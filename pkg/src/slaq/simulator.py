"""Discrete-event validation of the closed-form waiting times.

Jobs arrive in one merged Poisson stream, are labeled with an SLA class,
and are dispatched to single-job non-preemptive servers according to the
architecture (dedicated FCFS pools, one shared priority pool, or the
hybrid two-part split).  Because dispatch never looks at server state,
each server can be replayed independently and deterministically from the
pre-drawn arrival/service arrays.

Replication r draws from a Philox stream keyed by (seed, r), so runs are
reproducible and replications are independent.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .errors import InstabilityError, InvalidParameterError
from .optimizer import ArchitectureConfig
from .queueing import ServiceDist, fcfs_delay, hybrid_delays, priority_delays

#: A queue this long means the configuration is effectively unstable.
QUEUE_GUARD = 10_000_000


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    warmup_jobs: int = 100_000
    measured_jobs: int = 1_000_000
    replications: int = 10
    dispatch: str = "random"  # "random" | "round_robin"

    def __post_init__(self):
        if self.dispatch not in ("random", "round_robin"):
            raise InvalidParameterError(f"unknown dispatch policy {self.dispatch!r}")
        if self.warmup_jobs < 0 or self.measured_jobs < 1 or self.replications < 1:
            raise InvalidParameterError("bad job/replication counts")


@dataclass(frozen=True)
class ClassStats:
    mean_wait: float
    ci_half_width: float
    throughput: float
    mean_queue_length: float
    jobs: int


@dataclass(frozen=True)
class SimReport:
    per_class: tuple[ClassStats, ...]
    utilization: float
    utilization_ci: float
    jobs_simulated: int
    replications: int


@dataclass(frozen=True)
class DeviationReport:
    predicted: tuple[float, ...]
    observed: tuple[float, ...]
    relative_deviation: tuple[float, ...]
    tolerance: float
    passed: bool


def predicted_delays(
    arch: ArchitectureConfig, class_rates: Sequence[float], dist: ServiceDist
) -> list[float]:
    """Closed-form expected waits per class for this architecture."""
    rates = [float(r) for r in class_rates]
    if arch.kind == "od":
        lam = sum(rates) / arch.m
        return [fcfs_delay(lam, dist)] * len(rates)
    if arch.kind == "sms":
        if len(arch.partition) != len(rates):
            raise InvalidParameterError("partition length must match the class count")
        return [fcfs_delay(r / ml, dist) for r, ml in zip(rates, arch.partition)]
    if arch.kind == "pbs":
        return priority_delays([r / arch.m for r in rates], dist)
    # hybrid: class 1 dedicated, classes 2..L shared with priorities
    head = fcfs_delay(rates[0] / arch.m1, dist)
    return [head] + hybrid_delays([r / arch.m2 for r in rates[1:]], dist)


def _pools(arch: ArchitectureConfig, n_classes: int):
    """(pool id, priority within pool) per class, plus pool sizes."""
    if arch.kind in ("od", "pbs"):
        prio = [0] * n_classes if arch.kind == "od" else list(range(n_classes))
        return [0] * n_classes, prio, [arch.m]
    if arch.kind == "sms":
        return list(range(n_classes)), [0] * n_classes, list(arch.partition)
    if n_classes < 2:
        raise InvalidParameterError("hybrid needs at least two classes")
    return [0] + [1] * (n_classes - 1), [0] + list(range(n_classes - 1)), [arch.m1, arch.m2]


def _check_stability(arch, class_rates, dist):
    pool_of, _, sizes = _pools(arch, len(class_rates))
    per_pool = [0.0] * len(sizes)
    for c, r in enumerate(class_rates):
        per_pool[pool_of[c]] += r
    for rate, size in zip(per_pool, sizes):
        if rate / size >= 1.0:
            raise InstabilityError(
                f"pool load {rate / size:.4f} >= 1 for {arch.kind} architecture"
            )


def _draw_service(rng, dist: ServiceDist, n: int) -> np.ndarray:
    weights = np.array([w for w, _ in dist.branches])
    means = np.array([m for _, m in dist.branches])
    if len(dist.branches) == 1:
        return rng.exponential(means[0], n)
    branch = np.searchsorted(np.cumsum(weights), rng.random(n), side="right")
    branch = np.minimum(branch, len(means) - 1)
    return rng.exponential(means[branch])


def _serve_one_server(arr, svc, prio, n_prios):
    """Replay one non-preemptive server; jobs are in arrival order.

    Returns service-start times.  Priority 0 is served first; FCFS
    within a priority class.
    """
    n = arr.shape[0]
    starts = np.empty(n)
    queues = [deque() for _ in range(n_prios)]
    pending = 0
    free_at = 0.0
    i = 0
    while i < n or pending:
        next_arr = arr[i] if i < n else np.inf
        if pending and free_at <= next_arr:
            for q in queues:
                if q:
                    j = q.popleft()
                    break
            starts[j] = free_at
            free_at += svc[j]
            pending -= 1
        else:
            j = i
            i += 1
            if free_at <= arr[j]:
                starts[j] = arr[j]
                free_at = arr[j] + svc[j]
            else:
                queues[prio[j]].append(j)
                pending += 1
                if pending > QUEUE_GUARD:
                    raise RuntimeError("queue overflow: configuration effectively unstable")
    return starts


def _run_replication(arch, class_rates, dist, cfg, rep, trace_path=None):
    """One replication; returns per-class (mean wait, throughput, queue
    length, count) plus the utilization."""
    rng = np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=cfg.seed, spawn_key=(rep,)))
    )
    rates = np.asarray(class_rates, dtype=float)
    k = rates.size
    total = rates.sum()
    n = cfg.warmup_jobs + cfg.measured_jobs

    arrivals = np.cumsum(rng.exponential(1.0 / total, n))
    cls = np.searchsorted(np.cumsum(rates / total), rng.random(n), side="right")
    cls = np.minimum(cls, k - 1)
    svc = _draw_service(rng, dist, n)

    pool_of, prio_of, sizes = _pools(arch, k)
    pool = np.asarray(pool_of)[cls]
    prio = np.asarray(prio_of)[cls]

    server = np.empty(n, dtype=np.int64)
    offset = 0
    for pid, size in enumerate(sizes):
        mask = pool == pid
        count = int(mask.sum())
        if cfg.dispatch == "random":
            server[mask] = offset + rng.integers(0, size, count)
        else:
            server[mask] = offset + np.arange(count) % size
        offset += size

    n_prios = max(prio_of) + 1
    starts = np.empty(n)
    for s in range(offset):
        idx = np.nonzero(server == s)[0]
        if idx.size:
            starts[idx] = _serve_one_server(arrivals[idx], svc[idx], prio[idx], n_prios)

    waits = starts - arrivals
    w_start = arrivals[cfg.warmup_jobs] if cfg.warmup_jobs else arrivals[0]
    w_end = arrivals[-1]
    window = w_end - w_start
    measured = np.arange(n) >= cfg.warmup_jobs

    if trace_path is not None:
        cols = np.column_stack([arrivals, starts, cls, server])
        np.savetxt(
            trace_path, cols, delimiter=",", comments="",
            header="arrival,start,class,server", fmt=["%.9f", "%.9f", "%d", "%d"],
        )

    per_class = []
    for c in range(k):
        sel = measured & (cls == c)
        count = int(sel.sum())
        mean_wait = float(waits[sel].mean()) if count else np.nan
        done = sel & (starts + svc <= w_end)
        throughput = done.sum() / window
        # time-average number waiting: overlap of each waiting interval
        # with the measurement window
        csel = cls == c
        overlap = np.minimum(starts[csel], w_end) - np.maximum(arrivals[csel], w_start)
        qlen = float(overlap[overlap > 0].sum()) / window
        per_class.append((mean_wait, throughput, qlen, count))

    busy = np.minimum(starts + svc, w_end) - np.maximum(starts, w_start)
    utilization = float(busy[busy > 0].sum()) / (window * offset)
    return per_class, utilization


def _t_half_width(values: np.ndarray, level: float = 0.95) -> float:
    r = values.size
    if r < 2:
        return float("nan")
    crit = stats.t.ppf(0.5 + level / 2.0, r - 1)
    return float(crit * values.std(ddof=1) / np.sqrt(r))


def simulate(
    arch: ArchitectureConfig,
    class_rates: Sequence[float],
    dist: ServiceDist,
    cfg: SimConfig,
    trace_path: Optional[str] = None,
) -> SimReport:
    """Simulate the architecture and report per-class waiting statistics.

    Confidence intervals are Student-t over replication means.  A trace
    path, when given, dumps replication 0's per-job record.
    """
    if not class_rates or any(r <= 0 for r in class_rates):
        raise InvalidParameterError("class rates must be positive")
    _check_stability(arch, class_rates, dist)
    reps = []
    utils = []
    for rep in range(cfg.replications):
        per_class, util = _run_replication(
            arch, class_rates, dist, cfg, rep,
            trace_path=trace_path if rep == 0 else None,
        )
        reps.append(per_class)
        utils.append(util)
    k = len(class_rates)
    per_class_stats = []
    for c in range(k):
        means = np.array([r[c][0] for r in reps])
        per_class_stats.append(
            ClassStats(
                mean_wait=float(means.mean()),
                ci_half_width=_t_half_width(means),
                throughput=float(np.mean([r[c][1] for r in reps])),
                mean_queue_length=float(np.mean([r[c][2] for r in reps])),
                jobs=int(sum(r[c][3] for r in reps)),
            )
        )
    utils = np.array(utils)
    return SimReport(
        per_class=tuple(per_class_stats),
        utilization=float(utils.mean()),
        utilization_ci=_t_half_width(utils),
        jobs_simulated=cfg.replications * (cfg.warmup_jobs + cfg.measured_jobs),
        replications=cfg.replications,
    )


def validate_formulas(
    arch: ArchitectureConfig,
    class_rates: Sequence[float],
    dist: ServiceDist,
    cfg: SimConfig,
    predicted: Optional[Sequence[float]] = None,
    tolerance: float = 0.03,
) -> DeviationReport:
    """Compare simulated per-class mean waits against the closed forms
    (or explicit predictions); pass iff every relative deviation is
    within tolerance."""
    if predicted is None:
        predicted = predicted_delays(arch, class_rates, dist)
    predicted = tuple(float(x) for x in predicted)
    report = simulate(arch, class_rates, dist, cfg)
    observed = tuple(c.mean_wait for c in report.per_class)
    rel = tuple(abs(o - p) / p for o, p in zip(observed, predicted))
    return DeviationReport(
        predicted=predicted,
        observed=observed,
        relative_deviation=rel,
        tolerance=tolerance,
        passed=all(r <= tolerance for r in rel),
    )

"""Revenue optimization over serving architectures, plus closed-form bounds.

The exact search enumerates every server partition and every market cut
(the candidate spaces from the configuration algorithm) and keeps the
revenue maximizer with a deterministic lexicographic tie-break, so
results are reproducible and independent of worker count.  For L >= 4
the exact space is intractable and a deterministic multi-start local
search takes over, flagged as best-effort.
"""

from __future__ import annotations

import itertools
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
import dataclasses
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import queueing
from .errors import InvalidParameterError, NoFeasibleCandidateError
from .mechanism import Segmentation, SlaMenu, arrival_rates, optimal_prices, revenue
from .model import TypePopulation, WtpModel, wtp, zero_value_delay
from .queueing import (
    ServiceDist,
    fcfs_delay,
    hybrid_delays,
    od_max_load,
    priority_delays,
    required_servers_fractional,
    residual_term,
)

#: Actual-delay ties below this resolution violate the strict SLA ordering.
DELAY_TIE_TOL = 1e-12

_STAB = 1.0 - queueing.STABILITY_MARGIN


@dataclass(frozen=True)
class ArchitectureConfig:
    """Server arrangement fulfilling the menu.

    kind 'sms': ``partition`` holds per-SLA module sizes; 'pbs'/'od':
    ``m`` shared servers; 'hybrid': ``m1`` FCFS servers for SLA 1 and
    ``m2`` priority-shared servers for SLAs 2..L.
    """

    kind: str
    dist: ServiceDist
    partition: tuple[int, ...] = ()
    m: int = 0
    m1: int = 0
    m2: int = 0

    def __post_init__(self):
        if self.kind == "sms":
            if not self.partition or any(v < 1 for v in self.partition):
                raise InvalidParameterError("sms partition needs positive module sizes")
        elif self.kind in ("pbs", "od"):
            if self.m < 1:
                raise InvalidParameterError(f"{self.kind} needs m >= 1")
        elif self.kind == "hybrid":
            if self.m1 < 1 or self.m2 < 1:
                raise InvalidParameterError("hybrid needs m1, m2 >= 1")
        else:
            raise InvalidParameterError(f"unknown architecture kind {self.kind!r}")

    @property
    def total_servers(self) -> int:
        if self.kind == "sms":
            return sum(self.partition)
        if self.kind == "hybrid":
            return self.m1 + self.m2
        return self.m


@dataclass(frozen=True)
class Infeasible:
    """A candidate rejected by the feasibility conditions."""

    reason: str

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class OptResult:
    menu: SlaMenu
    segmentation: Segmentation
    architecture: ArchitectureConfig
    rates: tuple[float, ...]
    revenue: float
    gamma: float
    exact: bool = True
    load: Optional[float] = None  # average per-server load, when swept

    def __bool__(self) -> bool:
        return True


def od_revenue(m: int, model: WtpModel, dist: ServiceDist) -> float:
    """Maximum on-demand revenue per unit time: ``m * p * T / (A + T)``."""
    if m < 1:
        raise InvalidParameterError("m must be >= 1")
    return m * model.p * od_max_load(model.T, dist)


def pbs_upper_bound(T: float, dist: ServiceDist) -> float:
    """Revenue of a priority-shared system over on-demand is at most
    ``1 + T/A``."""
    if T <= 0:
        raise InvalidParameterError("T must be positive")
    return 1.0 + T / residual_term(dist)


def sms_lower_bound(
    model: WtpModel,
    population: TypePopulation,
    alpha_split: float,
    phi2: float,
    dist: ServiceDist,
) -> float:
    """Two-SLA lower bound on the optimized split-module revenue ratio.

    Types with alpha above ``alpha_split`` get on-demand service, the
    rest an SLA with delay ``phi2``; each side is provisioned with the
    fractional server count meeting its delay exactly, and the result is
    the revenue relative to serving the same capacity on-demand.
    """
    if not population.alpha_min < alpha_split < population.alpha_max:
        raise InvalidParameterError("alpha_split must lie strictly inside the type range")
    if phi2 <= model.T:
        raise InvalidParameterError("phi2 must exceed the on-demand delay")
    lam_total = population.total_rate
    share1 = sum(q for t, q in zip(population.types, population.probs) if t.alpha > alpha_split)
    lam1 = lam_total * share1
    lam2 = lam_total - lam1
    if lam1 <= 0 or lam2 <= 0:
        raise InvalidParameterError("the split must leave both SLAs non-empty")
    m1 = required_servers_fractional(lam1, model.T, dist)
    m2 = required_servers_fractional(lam2, phi2, dist)
    a = residual_term(dist)
    g_sms = model.p * lam1 + wtp(model, alpha_split, phi2) * lam2
    return g_sms * (a + model.T) / ((m1 + m2) * model.p * model.T)


def sms_lower_bound_beta3(T: float, phi0_hat: float, dist: ServiceDist) -> float:
    """Closed form of the bound for the cubic WTP curve with a half/half
    split at zero-value delay ``phi0_hat``:
    ``1.875 * (1 + A/T) / (2 + A/T + 2*A/phi0_hat)``."""
    if not 0 < T < phi0_hat:
        raise InvalidParameterError("need phi0_hat > T > 0")
    a = residual_term(dist)
    return 1.875 * (1.0 + a / T) / (2.0 + a / T + 2.0 * a / phi0_hat)


# ---------------------------------------------------------------------------
# candidate spaces
# ---------------------------------------------------------------------------


def cut_space(n: int, L: int) -> list[tuple[int, ...]]:
    """Interior market cuts (i_2 < ... < i_L): type indices in [2, n-1],
    in lexicographic order.  Empty tuple for L = 1."""
    if L == 1:
        return [()]
    return list(itertools.combinations(range(2, n), L - 1))


def partition_space(m: int, L: int):
    """Server partitions (m_1, ..., m_L) of m into positive modules,
    lexicographic order."""
    if L == 1:
        yield (m,)
        return
    for splits in itertools.combinations(range(1, m), L - 1):
        bounds = (0,) + splits + (m,)
        yield tuple(b - a for a, b in zip(bounds, bounds[1:]))


def _full_cuts(cuts: Sequence[int], n: int) -> tuple[int, ...]:
    return (1,) + tuple(cuts) + (n + 1,)


def _segment_rates(population: TypePopulation, cuts: Sequence[int]) -> list[float]:
    # cumulative-sum formulation, kept bit-identical to the vectorized
    # scan so boundary candidates get the same feasibility verdict
    cum = [0.0]
    for q in population.probs:
        cum.append(cum[-1] + q)
    cum[-1] = 1.0
    full = _full_cuts(cuts, len(population))
    return [
        population.total_rate * (cum[full[l + 1] - 1] - cum[full[l] - 1])
        for l in range(len(full) - 1)
    ]


def _price_and_finish(
    model: WtpModel,
    population: TypePopulation,
    cuts: Sequence[int],
    rates: Sequence[float],
    delays: Sequence[float],
    architecture: ArchitectureConfig,
    exact: bool = True,
    load: Optional[float] = None,
):
    """Build the OptResult for a feasible delay vector."""
    n = len(population)
    seg = Segmentation(cut_indices=_full_cuts(cuts, n), n_types=n)
    prices = optimal_prices(model, seg.thresholds(population), delays)
    g = revenue(prices, rates, population.mean_service)
    try:
        menu = SlaMenu(delays=tuple(delays), prices=tuple(prices))
    except InvalidParameterError:
        # a WTP drop can underflow to zero at near-identical delays,
        # leaving two SLAs at the same price
        return Infeasible("degenerate menu: tied prices")
    g_od = od_revenue(architecture.total_servers, model, architecture.dist)
    return OptResult(
        menu=menu,
        segmentation=seg,
        architecture=architecture,
        rates=tuple(rates),
        revenue=g,
        gamma=g / g_od,
        exact=exact,
        load=load,
    )


# ---------------------------------------------------------------------------
# scalar candidate evaluation
# ---------------------------------------------------------------------------


def evaluate_sms(
    model: WtpModel,
    population: TypePopulation,
    partition: Sequence[int],
    cuts: Sequence[int],
    dist: ServiceDist,
):
    """Evaluate one split-module candidate; returns OptResult or Infeasible.

    Feasibility: every module stable, the first module's actual wait at
    most T, and T < t_2 < ... < t_L strictly (ties below 1e-12 count as
    violations).  SLA delays are set to the actual waits (slack never
    helps revenue).
    """
    partition = tuple(int(v) for v in partition)
    L = len(partition)
    if len(cuts) != L - 1:
        raise InvalidParameterError("need L-1 cuts for L modules")
    rates = _segment_rates(population, cuts)
    loads = [r / ml for r, ml in zip(rates, partition)]
    if any(lam >= _STAB for lam in loads):
        return Infeasible("module load >= 1")
    t = [fcfs_delay(lam, dist) for lam in loads]
    if t[0] > model.T:
        return Infeasible("first-SLA wait exceeds T")
    if L >= 2 and t[1] <= model.T:
        return Infeasible("second-SLA wait not above T")
    if any(b - a <= DELAY_TIE_TOL for a, b in zip(t[1:], t[2:])):
        return Infeasible("actual waits not strictly increasing")
    delays = [model.T] + t[1:]
    arch = ArchitectureConfig(kind="sms", dist=dist, partition=partition)
    return _price_and_finish(model, population, cuts, rates, delays, arch)


def evaluate_pbs(
    model: WtpModel,
    population: TypePopulation,
    m: int,
    cuts: Sequence[int],
    load: float,
    dist: ServiceDist,
):
    """Evaluate one priority-shared candidate at average per-server
    ``load``; all SLAs share the m servers as priority classes."""
    L = len(cuts) + 1
    seg = Segmentation(cut_indices=_full_cuts(cuts, len(population)), n_types=len(population))
    shares = [sum(population.probs[i - 1] for i in seg.members(l)) for l in range(1, L + 1)]
    class_lams = [load * s for s in shares]
    if sum(class_lams) >= _STAB:
        return Infeasible("total load >= 1")
    t = priority_delays(class_lams, dist)
    if t[0] > model.T:
        return Infeasible("first-SLA wait exceeds T")
    if L >= 2 and t[1] <= model.T:
        return Infeasible("second-SLA wait not above T")
    delays = [model.T] + t[1:]
    rates = [load * m * s for s in shares]
    pop = population.with_total_rate(load * m)
    arch = ArchitectureConfig(kind="pbs", dist=dist, m=m)
    return _price_and_finish(model, pop, cuts, rates, delays, arch, load=load)


def evaluate_hybrid(
    model: WtpModel,
    population: TypePopulation,
    m1: int,
    m2: int,
    cuts: Sequence[int],
    dist: ServiceDist,
):
    """Evaluate one hybrid candidate: SLA 1 on m1 FCFS servers, SLAs
    2..L as priority classes sharing m2 servers."""
    rates = _segment_rates(population, cuts)
    L = len(rates)
    if L < 2:
        raise InvalidParameterError("the hybrid architecture needs L >= 2")
    lam1 = rates[0] / m1
    if lam1 >= _STAB:
        return Infeasible("first-part load >= 1")
    t1 = fcfs_delay(lam1, dist)
    if t1 > model.T:
        return Infeasible("first-SLA wait exceeds T")
    part_lams = [r / m2 for r in rates[1:]]
    if sum(part_lams) >= _STAB:
        return Infeasible("second-part load >= 1")
    t_rest = hybrid_delays(part_lams, dist)
    if t_rest[0] <= model.T:
        return Infeasible("second-SLA wait not above T")
    if any(b - a <= DELAY_TIE_TOL for a, b in zip(t_rest, t_rest[1:])):
        return Infeasible("actual waits not strictly increasing")
    delays = [model.T] + t_rest
    arch = ArchitectureConfig(kind="hybrid", dist=dist, m1=m1, m2=m2)
    return _price_and_finish(model, population, cuts, rates, delays, arch)


# ---------------------------------------------------------------------------
# vectorized inner search (all cuts at once, per partition)
# ---------------------------------------------------------------------------


def _prepared_arrays(model: WtpModel, population: TypePopulation, L: int):
    n = len(population)
    alphas = np.asarray(population.alphas)
    cumprob = np.concatenate([[0.0], np.cumsum(population.probs)])
    cumprob[-1] = 1.0
    if L == 1:
        combos = np.empty((1, 0), dtype=np.int64)
    else:
        combos = np.asarray(cut_space(n, L), dtype=np.int64).reshape(-1, L - 1)
    full = np.empty((combos.shape[0], L + 1), dtype=np.int64)
    full[:, 0] = 1
    if L > 1:
        full[:, 1:-1] = combos
    full[:, -1] = n + 1
    shares = cumprob[full[:, 1:] - 1] - cumprob[full[:, :-1] - 1]  # (K, L)
    cut_alphas = alphas[full[:, :-1] - 1]  # alpha_hat_1..L per combo
    return combos, shares, cut_alphas


def _best_cuts_sms(partition, total_rate, shares, cut_alphas, p, T, beta, A):
    """Best (revenue, combo_row) over all cut combos for one partition.

    Returns (revenue, row_index) or None when nothing is feasible.
    """
    ms = np.asarray(partition, dtype=float)
    L = ms.size
    lam = (total_rate * shares) / ms  # (K, L)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = A * lam / (1.0 - lam)
    feas = np.all(lam < _STAB, axis=1) & (t[:, 0] <= T)
    if L >= 2:
        feas &= t[:, 1] > T
        if L >= 3:
            feas &= np.all(np.diff(t[:, 1:], axis=1) > DELAY_TIE_TOL, axis=1)
    idx = np.nonzero(feas)[0]
    if idx.size == 0:
        return None
    tf = t[idx]
    rates = total_rate * shares[idx]
    prices = np.full(idx.size, p)
    rev = prices * rates[:, 0]
    phi_prev = np.full(idx.size, T)
    ok = np.ones(idx.size, dtype=bool)
    for l in range(2, L + 1):
        a_hat = cut_alphas[idx, l - 1]
        phi_cur = tf[:, l - 1]
        # same arithmetic as optimal_prices, so boundary candidates get
        # the same verdict on both paths
        wtp_prev = p * (1.0 - (a_hat * (phi_prev - T)) ** beta)
        wtp_cur = p * (1.0 - (a_hat * (phi_cur - T)) ** beta)
        drop = wtp_prev - wtp_cur
        ok &= drop > 0.0  # tied prices make a degenerate menu
        prices = prices - drop
        rev = rev + prices * rates[:, l - 1]
        phi_prev = phi_cur
    if not ok.any():
        return None
    rev = np.where(ok, rev, -np.inf)
    best = int(np.argmax(rev))
    return float(rev[best]), int(idx[best])


def _sms_partition_scan(args):
    """Worker: scan a chunk of partitions, return the chunk's best
    (revenue, partition, cuts) or None."""
    partitions, total_rate, shares, cut_alphas, combos, p, T, beta, A = args
    best = None
    for part in partitions:
        hit = _best_cuts_sms(part, total_rate, shares, cut_alphas, p, T, beta, A)
        if hit is None:
            continue
        rev, row = hit
        key = (-rev, tuple(part), tuple(int(c) for c in combos[row]))
        if best is None or key < best:
            best = key
    return best


def optimize_sms(
    model: WtpModel,
    population: TypePopulation,
    m: int,
    L: int,
    dist: ServiceDist,
    workers: int = 1,
    best_effort: bool = False,
    seeds: Sequence[tuple[tuple[int, ...], tuple[int, ...]]] = (),
) -> OptResult:
    """Exact maximum over all partitions and cuts (or a best-effort
    local search when requested) at the population's arrival rate.

    Tie-break: lexicographically smallest (partition, cuts).  With
    ``workers > 1`` the partition space is chunked and reduced with the
    same key, so the result does not depend on the worker count.
    """
    if not 1 <= L <= m:
        raise InvalidParameterError("need m >= L >= 1")
    if best_effort:
        return _local_search_sms(model, population, m, L, dist, seeds)
    combos, shares, cut_alphas = _prepared_arrays(model, population, L)
    parts = list(partition_space(m, L))
    lam_total = population.total_rate
    A = residual_term(dist)
    if workers <= 1 or len(parts) < 2 * workers:
        best = _sms_partition_scan(
            (parts, lam_total, shares, cut_alphas, combos, model.p, model.T, model.beta, A)
        )
    else:
        chunks = [parts[i::workers] for i in range(workers)]
        payloads = [
            (chunk, lam_total, shares, cut_alphas, combos, model.p, model.T, model.beta, A)
            for chunk in chunks
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for r in pool.map(_sms_partition_scan, payloads) if r is not None]
        best = min(results) if results else None
    if best is None:
        raise NoFeasibleCandidateError(
            f"no feasible split-module configuration for m={m}, L={L}, "
            f"total rate {lam_total}"
        )
    _, part, cuts = best
    result = evaluate_sms(model, population, part, cuts, dist)
    assert isinstance(result, OptResult)
    _warn_nonpositive_prices(result)
    return result


def _warn_nonpositive_prices(result: OptResult) -> None:
    if any(p <= 0 for p in result.menu.prices):
        warnings.warn(
            "optimal configuration carries a non-positive SLA price; "
            "the market for that SLA is effectively priced out",
            stacklevel=3,
        )


# ---------------------------------------------------------------------------
# best-effort local search (L >= 4 scale)
# ---------------------------------------------------------------------------


def _seed_cut_patterns(n: int, L: int):
    """A few deterministic cut layouts: spread toward low, even, or
    high type indices."""
    patterns = []
    for power in (2.0, 1.0, 0.5):
        cuts = tuple(
            min(n - 1, max(2, 2 + round((n - 3) * (l / L) ** power)))
            for l in range(1, L)
        )
        cuts = tuple(sorted(set(cuts)))
        if len(cuts) == L - 1 and cuts not in patterns:
            patterns.append(cuts)
    if not patterns:
        patterns.append(tuple(range(2, L + 1)))
    return patterns


def _default_seeds(model, population, m: int, L: int, dist):
    """Deterministic, feasibility-aware starting points: the first
    module is sized so its load stays below the on-demand cap, the rest
    proportionally to the block arrival rates."""
    if L == 1:
        yield (m,), ()
        return
    lam_od = od_max_load(model.T, dist)
    for cuts in _seed_cut_patterns(len(population), L):
        rates = _segment_rates(population, cuts)
        m1 = max(1, math.ceil(rates[0] / lam_od - 1e-12))
        rest = m - m1
        if rest < L - 1:
            continue
        tail_total = sum(rates[1:]) or 1.0
        part = [max(1, int(rest * r / tail_total)) for r in rates[1:]]
        part[-1] += rest - sum(part)
        if part[-1] >= 1:
            yield (m1, *part), cuts
    # uniform fallback, in case every sized seed was impossible
    base = max(1, m // L)
    part = [base] * (L - 1) + [m - base * (L - 1)]
    if part[-1] >= 1:
        yield tuple(part), _seed_cut_patterns(len(population), L)[0]


def _neighbors_sms(part, cuts, m, n, steps=(1, 2, 5)):
    L = len(part)
    for i in range(L - 1):
        for s in steps:
            for d in (s, -s):
                new = list(part)
                new[i] += d
                new[i + 1] -= d
                if new[i] >= 1 and new[i + 1] >= 1:
                    yield tuple(new), cuts
    for j in range(len(cuts)):
        lo = cuts[j - 1] + 1 if j > 0 else 2
        hi = cuts[j + 1] - 1 if j + 1 < len(cuts) else n - 1
        for s in steps:
            for d in (s, -s):
                c = cuts[j] + d
                if lo <= c <= hi:
                    yield part, cuts[:j] + (c,) + cuts[j + 1 :]


def _local_search_sms(model, population, m, L, dist, seeds):
    n = len(population)

    def rev_of(part, cuts):
        r = evaluate_sms(model, population, part, cuts, dist)
        return r.revenue if isinstance(r, OptResult) else None

    starts = list(seeds) + list(_default_seeds(model, population, m, L, dist))
    best_key = None
    for part, cuts in starts:
        if len(part) != L or len(cuts) != L - 1 or sum(part) != m:
            continue
        g = rev_of(part, cuts)
        cur = (part, cuts, g)
        # hill-climb even from infeasible seeds: scan neighbors for any gain
        improved = True
        while improved:
            improved = False
            base = cur[2] if cur[2] is not None else -np.inf
            for np_part, np_cuts in _neighbors_sms(cur[0], cur[1], m, n):
                g2 = rev_of(np_part, np_cuts)
                if g2 is not None and g2 > base + 1e-15:
                    cur = (np_part, np_cuts, g2)
                    improved = True
                    break
        if cur[2] is not None:
            key = (-cur[2], cur[0], cur[1])
            if best_key is None or key < best_key:
                best_key = key
    if best_key is None:
        raise NoFeasibleCandidateError(
            f"best-effort search found no feasible configuration for m={m}, L={L}"
        )
    _, part, cuts = best_key
    result = evaluate_sms(model, population, part, cuts, dist)
    assert isinstance(result, OptResult)
    _warn_nonpositive_prices(result)
    return dataclasses.replace(result, exact=False)


# ---------------------------------------------------------------------------
# PBS and hybrid searches
# ---------------------------------------------------------------------------


def optimize_pbs(
    model: WtpModel,
    population: TypePopulation,
    m: int,
    L: int,
    dist: ServiceDist,
    load_grid: Sequence[float],
) -> OptResult:
    """Exact maximum of the priority-shared system over cuts and the
    given per-server load grid."""
    n = len(population)
    best = None
    for load in sorted(set(float(x) for x in load_grid)):
        if not 0.0 < load < 1.0:
            raise InvalidParameterError(f"load {load} outside (0, 1)")
        for cuts in cut_space(n, L):
            r = evaluate_pbs(model, population, m, cuts, load, dist)
            if isinstance(r, OptResult):
                key = (-r.revenue, load, cuts)
                if best is None or key < best[0]:
                    best = (key, r)
    if best is None:
        raise NoFeasibleCandidateError(f"no feasible priority-shared configuration (m={m}, L={L})")
    _warn_nonpositive_prices(best[1])
    return best[1]


def optimize_hybrid(
    model: WtpModel,
    population: TypePopulation,
    m: int,
    L: int,
    dist: ServiceDist,
    load_grid: Sequence[float],
    best_effort: bool = False,
) -> OptResult:
    """Maximum of the hybrid system over the first-part size, cuts and
    the load grid.  Exact unless ``best_effort`` (which climbs from
    deterministic seeds, for spaces too large to enumerate)."""
    if L < 2:
        raise InvalidParameterError("the hybrid architecture needs L >= 2")
    n = len(population)
    best = None
    loads = sorted(set(float(x) for x in load_grid))
    for load in loads:
        if not 0.0 < load < 1.0:
            raise InvalidParameterError(f"load {load} outside (0, 1)")
        pop = population.with_total_rate(load * m)
        if best_effort:
            hit = _local_search_hybrid(model, pop, m, L, dist)
        else:
            hit = _scan_hybrid(model, pop, m, L, dist)
        if hit is not None:
            key, r = hit
            key = (key[0], load) + key[1:]
            r = dataclasses.replace(r, load=load, exact=not best_effort)
            if best is None or key < best[0]:
                best = (key, r)
    if best is None:
        raise NoFeasibleCandidateError(f"no feasible hybrid configuration (m={m}, L={L})")
    _warn_nonpositive_prices(best[1])
    return best[1]


def _scan_hybrid(model, population, m, L, dist):
    best = None
    for m1 in range(1, m):
        for cuts in cut_space(len(population), L):
            r = evaluate_hybrid(model, population, m1, m - m1, cuts, dist)
            if isinstance(r, OptResult):
                key = (-r.revenue, m1, cuts)
                if best is None or key < best[0]:
                    best = (key, r)
    return best


def _local_search_hybrid(model, population, m, L, dist):
    n = len(population)

    def rev_of(m1, cuts):
        r = evaluate_hybrid(model, population, m1, m - m1, cuts, dist)
        return r if isinstance(r, OptResult) else None

    best = None
    lam_od = od_max_load(model.T, dist)
    starts = []
    for seed_cuts in _seed_cut_patterns(n, L):
        rate1 = _segment_rates(population, seed_cuts)[0]
        m1 = min(m - 1, max(1, math.ceil(rate1 / lam_od - 1e-12)))
        starts.append((m1, seed_cuts))
        starts.append((max(1, m // 2), seed_cuts))
    for cur in starts:
        cur_r = rev_of(*cur)
        improved = True
        while improved:
            improved = False
            base = cur_r.revenue if cur_r is not None else -np.inf
            for d_m1 in (0, 1, -1, 2, -2, 5, -5):
                m1 = cur[0] + d_m1
                if not 1 <= m1 <= m - 1:
                    continue
                neighbor_cut_sets = [cur[1]] if d_m1 != 0 else []
                for j in range(len(cur[1])):
                    lo = cur[1][j - 1] + 1 if j > 0 else 2
                    hi = cur[1][j + 1] - 1 if j + 1 < len(cur[1]) else n - 1
                    for s in (1, 2, 5):
                        for dd in (s, -s):
                            c = cur[1][j] + dd
                            if lo <= c <= hi:
                                neighbor_cut_sets.append(cur[1][:j] + (c,) + cur[1][j + 1 :])
                for cuts in neighbor_cut_sets:
                    r = rev_of(m1, cuts)
                    if r is not None and r.revenue > base + 1e-15:
                        cur, cur_r = (m1, cuts), r
                        improved = True
                        break
                if improved:
                    break
        if cur_r is not None:
            key = (-cur_r.revenue, cur[0], cur[1])
            if best is None or key < best[0]:
                best = (key, cur_r)
    return best


# ---------------------------------------------------------------------------
# load sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    load: float
    result: Optional[OptResult]  # None marks a gap (no feasible candidate)

    @property
    def gamma(self) -> Optional[float]:
        return self.result.gamma if self.result else None


def sweep_load(
    model: WtpModel,
    population_template: TypePopulation,
    m: int,
    L: int,
    dist: ServiceDist,
    load_grid: Sequence[float],
    arch: str = "sms",
    workers: int = 1,
    best_effort: bool = False,
) -> list[SweepRow]:
    """Run the architecture optimizer at each grid load (total rate
    ``load * m``); infeasible points become gap rows."""
    rows = []
    seeds: tuple = ()
    for load in load_grid:
        if not 0.0 < load < 1.0:
            raise InvalidParameterError(f"load {load} outside (0, 1)")
        pop = population_template.with_total_rate(load * m)
        try:
            if arch == "sms":
                res = optimize_sms(
                    model, pop, m, L, dist, workers=workers,
                    best_effort=best_effort, seeds=seeds,
                )
                if best_effort:
                    # reuse this point's winner to seed the next load
                    seeds = ((res.architecture.partition, res.segmentation.interior_cuts),)
            elif arch == "pbs":
                res = optimize_pbs(model, pop, m, L, dist, [load])
            elif arch == "hybrid":
                res = optimize_hybrid(model, pop, m, L, dist, [load], best_effort=best_effort)
            elif arch == "od":
                res = _evaluate_od(model, pop, m, dist, load)
            else:
                raise InvalidParameterError(f"unknown architecture {arch!r}")
        except NoFeasibleCandidateError:
            res = None
        if res is not None and not isinstance(res, OptResult):
            res = None
        rows.append(SweepRow(load=load, result=dataclasses.replace(res, load=load) if res else None))
    return rows


def _evaluate_od(model, population, m, dist, load):
    """A pure on-demand system at the given load: one SLA at (T, p)."""
    t = fcfs_delay(load, dist)
    if t > model.T:
        return None
    n = len(population)
    seg = Segmentation(cut_indices=(1, n + 1), n_types=n)
    menu = SlaMenu(delays=(model.T,), prices=(model.p,))
    arch = ArchitectureConfig(kind="od", dist=dist, m=m)
    g = model.p * load * m * population.mean_service
    return OptResult(
        menu=menu, segmentation=seg, architecture=arch,
        rates=(load * m,), revenue=g,
        gamma=g / od_revenue(m, model, dist), load=load,
    )


def cut_phi0(model: WtpModel, population: TypePopulation, seg: Segmentation) -> list[float]:
    """Zero-value delays of the threshold types (one per SLA)."""
    return [
        zero_value_delay(model, population.types[i - 1].alpha)
        for i in seg.cut_indices[:-1]
    ]

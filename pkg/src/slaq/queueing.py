"""Service-time distributions and closed-form M/G/1 waiting times.

All delays here are expected *waiting* times (arrival to service
start), for single-server FCFS queues, non-preemptive priority queues,
and the hybrid shared pool.  Servers are fed evenly so each behaves as
an independent M/G/1 queue; the residual-work constant
``A = 0.5 * E[x^2]`` shows up in every formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InstabilityError, InvalidParameterError

#: Loads this close to 1 are rejected: the waiting-time formulas blow up.
STABILITY_MARGIN = 1e-9

_WEIGHT_SUM_TOL = 1e-12
_MEAN_TOL = 1e-9


@dataclass(frozen=True)
class ServiceDist:
    """Exponential or hyperexponential service-time distribution.

    ``branches`` is a tuple of ``(weight, branch_mean)`` pairs: a job
    picks branch i with probability ``weight_i`` and then draws an
    exponential with mean ``branch_mean_i``.  A single branch is a plain
    exponential.  The overall mean must equal ``mean`` (normalized to 1
    in every paper-facing configuration).
    """

    branches: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.branches:
            raise InvalidParameterError("need at least one branch")
        if abs(sum(w for w, _ in self.branches) - 1.0) > _WEIGHT_SUM_TOL:
            raise InvalidParameterError("branch weights must sum to 1")
        if any(w <= 0 or m <= 0 for w, m in self.branches):
            raise InvalidParameterError("branch weights and means must be positive")

    @classmethod
    def exponential(cls, mean: float = 1.0) -> "ServiceDist":
        return cls(branches=((1.0, float(mean)),))

    @classmethod
    def hyperexponential(cls, branches) -> "ServiceDist":
        return cls(branches=tuple((float(w), float(m)) for w, m in branches))

    @classmethod
    def hyperexponential_from_rates(cls, branches) -> "ServiceDist":
        """Branches given as (weight, rate); converts rate -> mean."""
        return cls.hyperexponential((w, 1.0 / r) for w, r in branches)

    @property
    def is_exponential(self) -> bool:
        return len(self.branches) == 1

    @property
    def mean(self) -> float:
        return sum(w * m for w, m in self.branches)


def require_unit_mean(dist: ServiceDist, mean: float = 1.0) -> None:
    """Check the distribution mean against the configured population mean."""
    if abs(dist.mean - mean) > _MEAN_TOL:
        raise InvalidParameterError(
            f"distribution mean {dist.mean} does not match required {mean}"
        )


def second_moment(dist: ServiceDist) -> float:
    """``E[x^2]``: each exponential branch with mean m contributes 2*m^2."""
    return sum(2.0 * m * m * w for w, m in dist.branches)


def residual_term(dist: ServiceDist) -> float:
    """The residual-work constant ``A = 0.5 * E[x^2]``."""
    return 0.5 * second_moment(dist)


def sweep_branch_means(eta1: float, branch_mean1: float) -> ServiceDist:
    """Two-branch hyperexponential with unit mean: given the weight and
    mean of the first branch, the second branch mean is forced to
    ``(1 - eta1*m1) / (1 - eta1)``."""
    if not 0.0 < eta1 < 1.0:
        raise InvalidParameterError("eta1 must lie in (0, 1)")
    m2 = (1.0 - eta1 * branch_mean1) / (1.0 - eta1)
    if m2 <= 0:
        raise InvalidParameterError("first branch too heavy for a unit mean")
    return ServiceDist.hyperexponential([(eta1, branch_mean1), (1.0 - eta1, m2)])


def _check_stable(load: float) -> None:
    if load >= 1.0 - STABILITY_MARGIN:
        raise InstabilityError(f"per-server load {load} is not stable")
    if load < 0.0:
        raise InvalidParameterError(f"negative load {load}")


def fcfs_delay(lam: float, dist: ServiceDist) -> float:
    """M/G/1 FCFS expected waiting time ``A * lam / (1 - lam)`` at
    per-server load ``lam`` (mean service normalized to 1)."""
    _check_stable(lam)
    return residual_term(dist) * lam / (1.0 - lam)


def priority_delays(class_lambdas, dist: ServiceDist) -> list[float]:
    """Non-preemptive priority M/G/1 waiting times per class.

    Class l (1-based, lower index = higher priority) waits
    ``A * lam / ((1 - cum_{l-1}) * (1 - cum_l))`` where ``lam`` is the
    total per-server arrival rate and ``cum_l`` the cumulative rate of
    the first l classes.
    """
    rates = [float(r) for r in class_lambdas]
    if any(r < 0 for r in rates):
        raise InvalidParameterError("class rates must be non-negative")
    total = sum(rates)
    _check_stable(total)
    a = residual_term(dist)
    delays = []
    cum_prev = 0.0
    for r in rates:
        cum = cum_prev + r
        delays.append(a * total / ((1.0 - cum_prev) * (1.0 - cum)))
        cum_prev = cum
    return delays


def hybrid_delays(class_lambdas, dist: ServiceDist) -> list[float]:
    """Waiting times of SLAs 2..L in the hybrid shared pool.

    ``class_lambdas`` are the per-server rates of classes 2..L; the
    class-1 rate in this pool is zero, so class l waits
    ``A * total / ((1 - cum_{l-1}) * (1 - cum_l))`` with ``cum_1 = 0``.
    """
    return priority_delays(class_lambdas, dist)


def od_max_load(T: float, dist: ServiceDist) -> float:
    """Largest per-server load whose FCFS wait does not exceed ``T``:
    ``T / (A + T)``."""
    if T <= 0:
        raise InvalidParameterError("T must be positive")
    return T / (residual_term(dist) + T)


def required_servers_fractional(sla_rate: float, sla_delay: float, dist: ServiceDist) -> float:
    """Fractional server count so an SLA with aggregate rate ``sla_rate``
    meets waiting time ``sla_delay``: ``rate * (delay + A) / delay``."""
    if sla_rate <= 0 or sla_delay <= 0:
        raise InvalidParameterError("sla_rate and sla_delay must be positive")
    a = residual_term(dist)
    return sla_rate * (sla_delay + a) / sla_delay

"""SLA menus, market segmentation, truthful pricing and its verifier.

Given delays ``T = phi_1 < phi_2 < ... < phi_L`` the market splits into
contiguous blocks of types, most delay-sensitive first.  The revenue-
maximal prices leave each threshold type exactly indifferent between
its SLA and the previous one; under those prices truthful reporting is
a dominant strategy, which ``verify_dsic`` checks by brute force.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidParameterError, SegmentationError
from .model import TypePopulation, WtpModel, wtp

#: Surplus comparisons treat differences within this as exact ties.
SURPLUS_TOL = 1e-12


@dataclass(frozen=True)
class SlaMenu:
    """L SLAs: strictly increasing delays starting at the on-demand
    delay, strictly decreasing prices starting at the on-demand price."""

    delays: tuple[float, ...]
    prices: tuple[float, ...]

    def __post_init__(self):
        if len(self.delays) != len(self.prices) or not self.delays:
            raise InvalidParameterError("delays and prices must be non-empty and equal-length")
        if any(b <= a for a, b in zip(self.delays, self.delays[1:])):
            raise InvalidParameterError("SLA delays must be strictly increasing")
        if any(b >= a for a, b in zip(self.prices, self.prices[1:])):
            raise InvalidParameterError("SLA prices must be strictly decreasing")

    @property
    def L(self) -> int:
        return len(self.delays)


@dataclass(frozen=True)
class Segmentation:
    """Cut structure of a menu over an ordered type list.

    ``cut_indices`` is ``(i_1, ..., i_{L+1})`` with ``i_1 = 1`` and
    ``i_{L+1} = n + 1`` (1-based, half-open): SLA l serves types
    ``i_l .. i_{l+1} - 1``.  The threshold type of SLA l is type ``i_l``
    (the most delay-sensitive type it serves).
    """

    cut_indices: tuple[int, ...]
    n_types: int

    def __post_init__(self):
        cuts = self.cut_indices
        if cuts[0] != 1 or cuts[-1] != self.n_types + 1:
            raise InvalidParameterError("cut indices must start at 1 and end at n+1")
        if any(b < a for a, b in zip(cuts, cuts[1:])):
            raise InvalidParameterError("cut indices must be non-decreasing")

    @property
    def L(self) -> int:
        return len(self.cut_indices) - 1

    @property
    def interior_cuts(self) -> tuple[int, ...]:
        """The decision cuts (i_2, ..., i_L)."""
        return self.cut_indices[1:-1]

    def members(self, l: int) -> range:
        """1-based type indices served by SLA ``l`` (1-based)."""
        return range(self.cut_indices[l - 1], self.cut_indices[l])

    def thresholds(self, population: TypePopulation) -> tuple[float, ...]:
        """``(alpha_hat_1, ..., alpha_hat_{L+1})``: alpha of each block's
        most sensitive type, closed by the population extremes."""
        alphas = population.alphas
        head = tuple(alphas[i - 1] for i in self.cut_indices[:-1])
        return head + (population.alpha_min,)


def surplus(model: WtpModel, alpha: float, menu: SlaMenu, l: int) -> float:
    """WTP minus price of the l-th SLA (1-based)."""
    if not 1 <= l <= menu.L:
        raise IndexError(f"SLA index {l} out of range 1..{menu.L}")
    return wtp(model, alpha, menu.delays[l - 1]) - menu.prices[l - 1]


def assign_sla(model: WtpModel, alpha: float, menu: SlaMenu) -> int:
    """The surplus-maximizing SLA for type ``alpha``; ties go to the
    largest index."""
    best_l = 1
    best_s = surplus(model, alpha, menu, 1)
    for l in range(2, menu.L + 1):
        s = surplus(model, alpha, menu, l)
        if s > best_s - SURPLUS_TOL:  # strictly better, or a tie (later index wins)
            best_l = l
            best_s = max(best_s, s)
    return best_l


def segment(model: WtpModel, population: TypePopulation, menu: SlaMenu) -> Segmentation:
    """Assign every type of the population and return the cut structure.

    Raises ``SegmentationError`` if the assignment is not monotone
    (i.e. the blocks are not contiguous in alpha order), which signals a
    menu outside the model's preconditions.
    """
    assignment = [assign_sla(model, t.alpha, menu) for t in population.types]
    if any(b < a for a, b in zip(assignment, assignment[1:])):
        raise SegmentationError(f"non-contiguous SLA assignment: {assignment}")
    n = len(population)
    cuts = [1]
    for l in range(2, menu.L + 1):
        # first type (1-based) assigned to an SLA >= l
        i = next((j + 1 for j, a in enumerate(assignment) if a >= l), n + 1)
        cuts.append(i)
    cuts.append(n + 1)
    return Segmentation(cut_indices=tuple(cuts), n_types=n)


def arrival_rates(population: TypePopulation, seg: Segmentation) -> list[float]:
    """Aggregate job arrival rate of each SLA: total rate times the
    probability mass of the block."""
    lam = population.total_rate
    return [
        lam * sum(population.probs[i - 1] for i in seg.members(l))
        for l in range(1, seg.L + 1)
    ]


def optimal_prices(model: WtpModel, thresholds, delays) -> list[float]:
    """Revenue-maximal truthful prices for given thresholds and delays.

    ``thresholds`` is ``(alpha_hat_1, ..., alpha_hat_{L+1})`` (only the
    interior entries are used); price l is price l-1 minus the WTP drop
    of the threshold type between the two delays.  May return
    non-positive prices for extreme delays; callers decide whether such
    menus are acceptable.
    """
    thresholds = tuple(thresholds)
    delays = tuple(delays)
    L = len(delays)
    if len(thresholds) != L + 1:
        raise InvalidParameterError("need L+1 thresholds for L delays")
    if abs(delays[0] - model.T) > 0:
        raise InvalidParameterError("the first SLA delay must equal T")
    if any(b <= a for a, b in zip(delays, delays[1:])):
        raise InvalidParameterError("delays must be strictly increasing")
    if any(b >= a for a, b in zip(thresholds[:-1], thresholds[1:-1])):
        raise InvalidParameterError("interior thresholds must be strictly decreasing")
    prices = [model.p]
    for l in range(2, L + 1):
        a_hat = thresholds[l - 1]
        drop = wtp(model, a_hat, delays[l - 2]) - wtp(model, a_hat, delays[l - 1])
        prices.append(prices[-1] - drop)
    return prices


def revenue(prices, rates, mean_service: float = 1.0) -> float:
    """Revenue per unit time: sum of price times processed workload."""
    prices = list(prices)
    rates = list(rates)
    if len(prices) != len(rates):
        raise InvalidParameterError("prices and rates must be equal-length")
    return sum(p * r * mean_service for p, r in zip(prices, rates))


@dataclass(frozen=True)
class DsicReport:
    """Result of the exhaustive misreport scan."""

    truthful: bool
    worst_violation: float
    violations: tuple[tuple[float, float, float], ...]  # (true alpha, reported alpha, gain)
    pairs_checked: int


def verify_dsic(
    model: WtpModel,
    population: TypePopulation,
    menu: SlaMenu,
    seg: "Segmentation | None" = None,
    tol: float = SURPLUS_TOL,
) -> DsicReport:
    """Scan every (true type, reported type) pair over the population.

    The CSP assigns the SLA of the *reported* type's block in the
    intended segmentation ``seg`` (derived from the menu when omitted).
    A violation is a pair whose misreport yields strictly more surplus
    for the true type than truthful reporting does; opting out entirely
    (surplus 0) is always available and is recorded as reported alpha
    0.0.
    """
    if seg is None:
        seg = segment(model, population, menu)
    alphas = population.alphas
    sla_of = [None] * len(alphas)
    for l in range(1, seg.L + 1):
        for i in seg.members(l):
            sla_of[i - 1] = l
    worst = 0.0
    violations = []
    for i, a in enumerate(alphas):
        truthful_s = surplus(model, a, menu, sla_of[i])
        if -truthful_s > tol:  # opting out beats participating
            violations.append((a, 0.0, -truthful_s))
            worst = max(worst, -truthful_s)
        for j, a_rep in enumerate(alphas):
            gain = surplus(model, a, menu, sla_of[j]) - truthful_s
            if gain > tol:
                violations.append((a, a_rep, gain))
                worst = max(worst, gain)
    return DsicReport(
        truthful=not violations,
        worst_violation=worst,
        violations=tuple(violations),
        pairs_checked=len(alphas) ** 2,
    )

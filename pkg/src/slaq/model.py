"""Willingness-to-pay curves and delay-cost type populations.

A customer of delay-cost type ``alpha`` values service at price
``p * (1 - (alpha * (phi - T))**beta)`` when its request waits ``phi``
before starting; ``p`` and ``T`` are the on-demand price and delay.
Larger ``alpha`` means the customer is more delay-sensitive and its
value hits zero at a smaller delay ``phi0 = 1/alpha + T``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import InvalidParameterError

#: Default exponent of the WTP curve; configurable per scenario.
DEFAULT_BETA = 3.0

#: Zero-value offset of the most delay-sensitive grid type ("arbitrarily
#: small" but nonzero so alpha = 1/offset stays finite).
DEFAULT_EPSILON = 1e-6


@dataclass(frozen=True)
class WtpModel:
    """The concave willingness-to-pay family, parameterized by the
    on-demand price ``p``, the on-demand delay ``T``, and the common
    exponent ``beta >= 2``."""

    p: float = 1.0
    T: float = 0.05
    beta: float = DEFAULT_BETA

    def __post_init__(self):
        if self.p <= 0 or self.T <= 0:
            raise InvalidParameterError("p and T must be positive")
        if self.beta < 2:
            raise InvalidParameterError("beta must be >= 2")


def wtp(model: WtpModel, alpha: float, phi: float) -> float:
    """Willingness-to-pay of type ``alpha`` at delay ``phi``.

    Returns ``p * (1 - (alpha*(phi-T))**beta)``.  The value is not
    clamped: a non-positive result means the customer refuses service;
    interpreting that is up to the caller (pricing differences use the
    raw values).
    """
    if alpha <= 0:
        raise InvalidParameterError(f"alpha must be positive, got {alpha}")
    if phi < model.T:
        raise InvalidParameterError(f"delay {phi} below the on-demand delay {model.T}")
    return model.p * (1.0 - (alpha * (phi - model.T)) ** model.beta)


def zero_value_delay(model: WtpModel, alpha: float) -> float:
    """The delay at which type ``alpha``'s WTP reaches zero: ``1/alpha + T``."""
    if alpha <= 0:
        raise InvalidParameterError(f"alpha must be positive, got {alpha}")
    return 1.0 / alpha + model.T


@dataclass(frozen=True)
class CustomerType:
    """A single delay-cost type; ``phi0_prime`` is its zero-value delay
    measured from ``T`` (so ``phi0 = phi0_prime + T`` and ``alpha = 1/phi0_prime``)."""

    alpha: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise InvalidParameterError("alpha must be positive")

    @property
    def phi0_prime(self) -> float:
        return 1.0 / self.alpha

    def phi0(self, model: WtpModel) -> float:
        return zero_value_delay(model, self.alpha)


_PROB_SUM_TOL = 1e-12


@dataclass(frozen=True)
class TypePopulation:
    """A finite customer market: types ordered by increasing zero-value
    delay (decreasing ``alpha``), their probabilities, the total job
    arrival rate ``total_rate`` and the mean service time (normalized to 1)."""

    types: tuple[CustomerType, ...]
    probs: tuple[float, ...]
    total_rate: float
    mean_service: float = 1.0

    def __post_init__(self):
        if len(self.types) != len(self.probs) or not self.types:
            raise InvalidParameterError("types and probs must be non-empty and equal-length")
        if abs(sum(self.probs) - 1.0) > _PROB_SUM_TOL:
            raise InvalidParameterError("type probabilities must sum to 1")
        if any(not (0.0 < q < 1.0) for q in self.probs):
            raise InvalidParameterError("each type probability must lie in (0, 1)")
        alphas = [t.alpha for t in self.types]
        if any(a2 >= a1 for a1, a2 in zip(alphas, alphas[1:])):
            raise InvalidParameterError("types must be strictly decreasing in alpha")
        if self.total_rate <= 0 or self.mean_service <= 0:
            raise InvalidParameterError("total_rate and mean_service must be positive")

    def __len__(self) -> int:
        return len(self.types)

    @property
    def alphas(self) -> tuple[float, ...]:
        return tuple(t.alpha for t in self.types)

    @property
    def alpha_max(self) -> float:
        return self.types[0].alpha

    @property
    def alpha_min(self) -> float:
        return self.types[-1].alpha

    def with_total_rate(self, total_rate: float) -> "TypePopulation":
        """Same market at a different aggregate arrival rate."""
        return replace(self, total_rate=total_rate)


def grid_population(
    n: int,
    delta: float,
    epsilon: float = DEFAULT_EPSILON,
    total_rate: float = 1.0,
) -> TypePopulation:
    """The uniform experimental market: ``n`` equiprobable types whose
    zero-value offsets are ``epsilon, delta, 2*delta, ..., (n-1)*delta``.

    Type 1 is effectively delay-intolerant (offset ``epsilon``); type i
    (i >= 2) has offset ``(i-1)*delta`` and ``alpha = 1/offset``.
    """
    if n < 2:
        raise InvalidParameterError("need at least two types")
    if delta <= 0 or epsilon <= 0 or total_rate <= 0:
        raise InvalidParameterError("delta, epsilon and total_rate must be positive")
    if epsilon >= delta:
        raise InvalidParameterError("epsilon must be smaller than delta")
    offsets = [epsilon] + [(i - 1) * delta for i in range(2, n + 1)]
    types = tuple(CustomerType(alpha=1.0 / w) for w in offsets)
    probs = tuple(1.0 / n for _ in range(n))
    return TypePopulation(types=types, probs=probs, total_rate=total_rate)

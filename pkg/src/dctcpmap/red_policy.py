"""RED marking: EWMA queue averaging and the piecewise-linear mark probability.

The DCTCP switch is the degenerate case ``q_min == q_max == K`` with the
averaging weight set to 1, so the decision is taken on the instantaneous
queue. :func:`threshold_policy` builds exactly that configuration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from dctcpmap.core_map import LinkParams


@dataclass(frozen=True, slots=True)
class RedParams:
    weight: float
    q_min: float
    q_max: float
    p_max: float

    def __post_init__(self) -> None:
        if not 0.0 < self.weight <= 1.0:
            raise ValueError(f"weight must be in (0, 1], got {self.weight}")
        if not 0.0 <= self.q_min <= self.q_max:
            raise ValueError(
                f"need 0 <= q_min <= q_max, got q_min={self.q_min}, q_max={self.q_max}"
            )
        if not 0.0 < self.p_max <= 1.0:
            raise ValueError(f"p_max must be in (0, 1], got {self.p_max}")


@dataclass(frozen=True, slots=True)
class RedState:
    avg_queue: float = 0.0

    def __post_init__(self) -> None:
        if not self.avg_queue >= 0.0:
            raise ValueError(f"avg_queue must be >= 0, got {self.avg_queue}")


def ewma_update(state: RedState, instantaneous_queue: float, params: RedParams) -> RedState:
    """Blend the new queue sample into the running average with weight ``w``."""
    if instantaneous_queue < 0:
        raise ValueError("instantaneous_queue must be >= 0")
    w = params.weight
    return RedState((1.0 - w) * state.avg_queue + w * instantaneous_queue)


def red_probability(avg_queue: float, params: RedParams) -> float:
    """Mark probability for an averaged queue length.

    Zero below ``q_min``, one above ``q_max``, linear up to ``p_max`` in
    between. With ``q_min == q_max`` the linear piece vanishes and the
    result is the hard threshold: 0 at or below, 1 strictly above.
    """
    q_min, q_max = params.q_min, params.q_max
    if q_min == q_max:
        return 1.0 if avg_queue > q_max else 0.0
    if avg_queue < q_min:
        return 0.0
    if avg_queue > q_max:
        return 1.0
    return (avg_queue - q_min) / (q_max - q_min) * params.p_max


def threshold_policy(link: LinkParams) -> RedParams:
    """RED settings that reproduce DCTCP marking at threshold ``K``."""
    k = link.threshold
    return RedParams(weight=1.0, q_min=k, q_max=k, p_max=1.0)

"""Discrete-time map of a D2TCP sender against a threshold-marking switch.

The system is sampled once per RTT. Its independent state is the window
``W`` (packets, real valued) and the congestion estimate ``alpha``; the
queue is a memoryless function of the previous window::

    q'     = clamp(W - C*d/M, 0, B)
    marked = q' > K
    W'     = (1 - alpha**gamma / 2) * W   if marked else W + 1
    alpha' = (1 - g) * alpha + g          if marked else (1 - g) * alpha

Both updates read the pre-step ``(W, alpha)``. ``gamma = 1`` is plain DCTCP.

Scalar functions (:func:`step`, :func:`orbit`) are the reference path.
:func:`iterate_batch` runs the same arithmetic over numpy arrays so a whole
parameter grid advances in lockstep; it produces bit-identical values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from dctcpmap.red_policy import RedParams, RedState, ewma_update, red_probability


@dataclass(frozen=True, slots=True)
class LinkParams:
    """Link and switch constants.

    Attributes:
        capacity: link rate in bits per second.
        prop_delay: round-trip propagation delay in seconds.
        packet_size: bits per packet.
        buffer: switch buffer in packets.
        threshold: marking threshold ``K`` in packets; must satisfy 0 < K < buffer.
    """

    capacity: float
    prop_delay: float
    packet_size: float
    buffer: float
    threshold: float

    def __post_init__(self) -> None:
        if not self.capacity > 0:
            raise ValueError(f"capacity must be > 0, got {self.capacity}")
        if not self.prop_delay >= 0:
            raise ValueError(f"prop_delay must be >= 0, got {self.prop_delay}")
        if not self.packet_size > 0:
            raise ValueError(f"packet_size must be > 0, got {self.packet_size}")
        if not self.buffer > 0:
            raise ValueError(f"buffer must be > 0, got {self.buffer}")
        if not 0 < self.threshold < self.buffer:
            raise ValueError(
                f"threshold must satisfy 0 < threshold < buffer, "
                f"got threshold={self.threshold}, buffer={self.buffer}"
            )


@dataclass(frozen=True, slots=True)
class SenderParams:
    g: float
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if not 0 < self.g < 1:
            raise ValueError(f"g must be in (0, 1), got {self.g}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")


@dataclass(frozen=True, slots=True)
class MapState:
    window: float = 1.0
    alpha: float = 0.0

    def __post_init__(self) -> None:
        if not self.window > 0:
            raise ValueError(f"window must be > 0, got {self.window}")
        if not 0 <= self.alpha <= 1:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")


@dataclass(frozen=True, slots=True)
class StepRecord:
    """Observables for one sampling interval.

    ``window`` and ``alpha`` are the pre-step state; ``queue``, ``marked``
    and ``rtt`` describe the interval that state produces.
    """

    k: int
    window: float
    alpha: float
    queue: float
    marked: bool
    rtt: float


def bandwidth_delay_product(link: LinkParams) -> float:
    """Packets in flight on the wire before any queue builds, ``C*d/M``."""
    return link.capacity * link.prop_delay / link.packet_size


def border(link: LinkParams) -> float:
    """Window value ``K* = K + C*d/M`` at which marking switches on."""
    return link.threshold + bandwidth_delay_product(link)


def queue_next(window: float, link: LinkParams) -> float:
    return min(max(window - bandwidth_delay_product(link), 0.0), link.buffer)


def mark(queue: float, link: LinkParams) -> bool:
    return queue > link.threshold


def _rtt(queue: float, link: LinkParams) -> float:
    return link.prop_delay + queue * link.packet_size / link.capacity


def _apply(state: MapState, sender: SenderParams, marked: bool, p: float = 1.0) -> MapState:
    w, a, g = state.window, state.alpha, sender.g
    if marked:
        return MapState((1.0 - a**sender.gamma / 2.0) * w, (1.0 - g) * a + g * p)
    return MapState(w + 1.0, (1.0 - g) * a)


def step(
    state: MapState, link: LinkParams, sender: SenderParams, k: int = 0
) -> tuple[MapState, StepRecord]:
    """Advance the map one RTT under hard-threshold marking."""
    q = queue_next(state.window, link)
    marked = mark(q, link)
    record = StepRecord(k, state.window, state.alpha, q, marked, _rtt(q, link))
    return _apply(state, sender, marked), record


def red_step(
    state: MapState,
    red_state: RedState,
    link: LinkParams,
    sender: SenderParams,
    red: RedParams,
    k: int = 0,
) -> tuple[MapState, RedState, StepRecord]:
    """Advance one RTT with general RED marking in place of the hard threshold.

    Experimental mode: the fractional mark probability is fed to the
    ``alpha`` update as the marked fraction, and the window is cut whenever
    that probability is positive. With :func:`threshold_policy` settings
    this coincides bit for bit with :func:`step`.
    """
    q = queue_next(state.window, link)
    red_state = ewma_update(red_state, q, red)
    p = red_probability(red_state.avg_queue, red)
    marked = p > 0.0
    record = StepRecord(k, state.window, state.alpha, q, marked, _rtt(q, link))
    return _apply(state, sender, marked, p), red_state, record


def orbit(
    initial: MapState,
    link: LinkParams,
    sender: SenderParams,
    transient: int,
    samples: int,
    red: RedParams | None = None,
) -> list[StepRecord]:
    """Iterate ``transient + samples`` times and keep the last ``samples`` records.

    ``red`` switches from hard-threshold marking to :func:`red_step`; the
    EWMA starts from an empty queue.
    """
    if transient < 0:
        raise ValueError("transient must be >= 0")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    state = initial
    red_state = RedState(0.0)
    records: list[StepRecord] = []
    for k in range(transient + samples):
        if red is None:
            state, record = step(state, link, sender, k)
        else:
            state, red_state, record = red_step(state, red_state, link, sender, red, k)
        if k >= transient:
            records.append(record)
    return records


class BatchOrbit(NamedTuple):
    """Per-step arrays of shape ``(samples, n)`` from :func:`iterate_batch`."""

    window: np.ndarray
    alpha: np.ndarray
    queue: np.ndarray
    marked: np.ndarray


def iterate_batch(
    window,
    alpha,
    *,
    capacity,
    prop_delay,
    packet_size,
    buffer,
    threshold,
    g,
    gamma,
    transient: int,
    samples: int,
    red: RedParams | None = None,
) -> BatchOrbit:
    """Run many independent orbits at once.

    Every argument except the counts and ``red`` may be a scalar or a 1-D
    array; they broadcast to a common length ``n``. Parameters are not
    validated here, callers build :class:`LinkParams` / :class:`SenderParams`
    first. Recorded rows use the same pre-step convention as :func:`orbit`.
    """
    w, a, cap, dly, msz, buf, k_thr, g_, gam = np.broadcast_arrays(
        *(np.asarray(x, dtype=np.float64) for x in
          (window, alpha, capacity, prop_delay, packet_size, buffer, threshold, g, gamma))
    )
    w = w.astype(np.float64, copy=True).reshape(-1)
    a = a.astype(np.float64, copy=True).reshape(-1)
    cap, dly, msz, buf, k_thr, g_, gam = (
        x.reshape(-1) for x in (cap, dly, msz, buf, k_thr, g_, gam)
    )
    bdp = cap * dly / msz
    one_minus_g = 1.0 - g_
    unit_gamma = bool(np.all(gam == 1.0))
    avg = np.zeros_like(w)

    n = w.shape[0]
    out_w = np.empty((samples, n))
    out_a = np.empty((samples, n))
    out_q = np.empty((samples, n))
    out_m = np.empty((samples, n), dtype=bool)

    for k in range(transient + samples):
        q = np.minimum(np.maximum(w - bdp, 0.0), buf)
        if red is None:
            marked = q > k_thr
            p = 1.0
        else:
            avg = (1.0 - red.weight) * avg + red.weight * q
            p = _red_probability_array(avg, red)
            marked = p > 0.0
        if k >= transient:
            i = k - transient
            out_w[i], out_a[i], out_q[i], out_m[i] = w, a, q, marked
        a_pow = a if unit_gamma else _libm_pow(a, gam)
        w, a = (
            np.where(marked, (1.0 - a_pow / 2.0) * w, w + 1.0),
            np.where(marked, one_minus_g * a + g_ * p, one_minus_g * a),
        )
    return BatchOrbit(out_w, out_a, out_q, out_m)


# numpy's vectorised pow is not correctly rounded in the same way as the C
# library pow that float.__pow__ uses; going through the latter keeps batch
# and scalar orbits bit-identical.
_pow_ufunc = np.frompyfunc(pow, 2, 1)


def _libm_pow(base: np.ndarray, exponent: np.ndarray) -> np.ndarray:
    return _pow_ufunc(base, exponent).astype(np.float64)


def _red_probability_array(avg: np.ndarray, red: RedParams) -> np.ndarray:
    if red.q_min == red.q_max:
        return np.where(avg > red.q_max, 1.0, 0.0)
    mid = (avg - red.q_min) / (red.q_max - red.q_min) * red.p_max
    return np.where(avg < red.q_min, 0.0, np.where(avg > red.q_max, 1.0, mid))

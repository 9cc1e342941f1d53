"""Nonlinear-dynamics tooling over map orbits.

Bifurcation sweeps, turning-point extraction, period detection, return
maps, cobweb segments, frozen-variable map graphs and a two-orbit
Lyapunov estimate.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from dctcpmap.core_map import MapState, iterate_batch, orbit, step
from dctcpmap.scenario import OBSERVABLES, SWEEP_PARAMETERS, Scenario

DEFAULT_TOLERANCE = 1e-6
DEFAULT_MAX_PERIOD = 32
DEFAULT_SEPARATION = 1e-8


class Extremum(NamedTuple):
    index: int
    value: float
    kind: str  # "max" or "min"


class BifurcationPoint(NamedTuple):
    param_value: float
    observable_value: float
    kind: str


@dataclass(frozen=True)
class PeriodResult:
    period: int | None
    tolerance: float


@dataclass(frozen=True)
class SweepSpec:
    """A one-parameter grid plus the run lengths used at every grid point.

    The linear grid is ``start + i*step`` for every ``i`` that stays within
    ``stop``. With ``log_grid`` the same number of points is spread
    geometrically between ``start`` and the last linear point.
    """

    parameter: str
    start: float
    stop: float
    step: float
    observable: str = "queue"
    transient: int = 5000
    samples: int = 1000
    log_grid: bool = False

    def __post_init__(self) -> None:
        if self.parameter not in SWEEP_PARAMETERS:
            raise ValueError(f"invalid sweep parameter {self.parameter!r}")
        if self.observable not in OBSERVABLES:
            raise ValueError(f"invalid observable {self.observable!r}")
        if not self.start < self.stop:
            raise ValueError("sweep start must be < stop")
        if not self.step > 0:
            raise ValueError("sweep step must be > 0")
        if self.transient < 0:
            raise ValueError("transient must be >= 0")
        if self.samples < 3:
            raise ValueError("samples must be >= 3")
        if self.log_grid and not self.start > 0:
            raise ValueError("log grid needs start > 0")
        if self.size < 2:
            raise ValueError("sweep grid must contain at least 2 points")

    @property
    def size(self) -> int:
        # Small slack so that `stop` lands on the grid despite rounding.
        return int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1

    def grid(self) -> np.ndarray:
        i = np.arange(self.size, dtype=np.float64)
        linear = self.start + i * self.step
        if not self.log_grid:
            return linear
        last = linear[-1]
        return self.start * (last / self.start) ** (i / (self.size - 1))

    @classmethod
    def from_scenario(cls, scenario: Scenario, *, observable: str | None = None,
                      log_grid: bool = False) -> SweepSpec:
        sw = scenario.sweep
        if sw is None:
            raise ValueError("scenario has no sweep section")
        return cls(sw.parameter, sw.start, sw.stop, sw.step, observable or sw.observable,
                   scenario.transient, scenario.samples, log_grid)


def observable_series(records, name: str) -> np.ndarray:
    if name not in OBSERVABLES:
        raise ValueError(f"invalid observable {name!r}")
    return np.fromiter((getattr(r, name) for r in records), dtype=np.float64)


def local_extrema(series: Sequence[float]) -> list[Extremum]:
    """Strict interior turning points of ``series``.

    Runs of equal values are collapsed first; a run that is a turning point
    is reported once, at its first index. A constant series yields its
    value once as a max and once as a min.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1 or x.size < 3:
        raise ValueError("insufficient series: need at least 3 values")
    starts = np.concatenate(([0], np.flatnonzero(np.diff(x) != 0) + 1))
    vals = x[starts]
    if vals.size == 1:
        return [Extremum(0, float(vals[0]), "max"), Extremum(0, float(vals[0]), "min")]
    mid, left, right = vals[1:-1], vals[:-2], vals[2:]
    is_max = (mid > left) & (mid > right)
    is_min = (mid < left) & (mid < right)
    out = []
    for j in np.flatnonzero(is_max | is_min):
        out.append(Extremum(int(starts[j + 1]), float(mid[j]), "max" if is_max[j] else "min"))
    return out


def distinct_values(values: Sequence[float], tolerance: float = DEFAULT_TOLERANCE) -> np.ndarray:
    """Sorted representatives of ``values`` after merging gaps no larger than ``tolerance``."""
    v = np.sort(np.asarray(values, dtype=np.float64))
    if v.size == 0:
        return v
    keep = np.concatenate(([True], np.diff(v) > tolerance))
    return v[keep]


def _sweep_columns(spec: SweepSpec, base: Scenario, values: np.ndarray) -> np.ndarray:
    # Constructing the scenarios validates every grid point (e.g. K < B).
    scenarios = [base.with_parameter(spec.parameter, float(v)) for v in values]
    link = [s.link for s in scenarios]
    sender = [s.sender for s in scenarios]
    run = iterate_batch(
        base.initial.window,
        base.initial.alpha,
        capacity=np.array([l.capacity for l in link]),
        prop_delay=np.array([l.prop_delay for l in link]),
        packet_size=np.array([l.packet_size for l in link]),
        buffer=np.array([l.buffer for l in link]),
        threshold=np.array([l.threshold for l in link]),
        g=np.array([s.g for s in sender]),
        gamma=np.array([s.gamma for s in sender]),
        transient=spec.transient,
        samples=spec.samples,
        red=base.red,
    )
    return getattr(run, spec.observable)


def sweep_bifurcation(spec: SweepSpec, base: Scenario, workers: int = 1) -> list[BifurcationPoint]:
    """Turning points of the steady-state observable at every grid value.

    Each grid point restarts from ``base.initial``; nothing carries over
    between parameter values, so splitting the grid across ``workers``
    processes gives the same output as a serial run.
    """
    values = spec.grid()
    if workers > 1:
        chunks = [c for c in np.array_split(values, workers) if c.size]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_sweep_columns, [spec] * len(chunks), [base] * len(chunks), chunks))
        columns = np.concatenate(parts, axis=1)
    else:
        columns = _sweep_columns(spec, base, values)

    points: list[BifurcationPoint] = []
    for j, value in enumerate(values):
        for e in local_extrema(columns[:, j]):
            points.append(BifurcationPoint(float(value), e.value, e.kind))
    return points


def detect_period(series: Sequence[float], tolerance: float = DEFAULT_TOLERANCE,
                  max_period: int = DEFAULT_MAX_PERIOD) -> PeriodResult:
    """Smallest shift ``p <= max_period`` with ``|x[k+p] - x[k]| <= tolerance`` for all ``k``."""
    x = np.asarray(series, dtype=np.float64)
    if not tolerance > 0:
        raise ValueError("tolerance must be > 0")
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    if x.size < 2 * max_period:
        raise ValueError(f"series too short: need {2 * max_period} values for max_period={max_period}")
    for p in range(1, max_period + 1):
        if np.all(np.abs(x[p:] - x[:-p]) <= tolerance):
            return PeriodResult(p, tolerance)
    return PeriodResult(None, tolerance)


def return_map(series: Sequence[float], order: int = 1) -> list[tuple[float, float]]:
    if order < 1:
        raise ValueError("order must be >= 1")
    x = [float(v) for v in series]
    if len(x) <= order:
        raise ValueError(f"series too short for a return map of order {order}")
    return list(zip(x[:-order], x[order:]))


def cobweb(series: Sequence[float]) -> list[tuple[tuple[float, float], tuple[float, float]]]:
    """Staircase segments: up/down to the graph point, then across to the diagonal.

    For consecutive values ``a, b, c`` the pair ``(a, b)->(b, b)`` and
    ``(b, b)->(b, c)`` is emitted; ``n`` values give ``2*(n-2)`` segments.
    """
    x = [float(v) for v in series]
    if len(x) < 3:
        raise ValueError("cobweb needs at least 3 values")
    segments = []
    for a, b, c in zip(x, x[1:], x[2:]):
        segments.append(((a, b), (b, b)))
        segments.append(((b, b), (b, c)))
    return segments


def map_graph(observable: str, frozen_other: float, scenario: Scenario,
              domain_from: float, domain_to: float, resolution: int) -> list[tuple[float, float]]:
    """One-step image of ``window`` or ``alpha`` with the other state variable held fixed.

    Hard-threshold marking only: under RED the step also depends on the
    averaged queue, which has no single frozen value.
    """
    if observable not in ("window", "alpha"):
        raise ValueError("map_graph observable must be 'window' or 'alpha'")
    if not domain_from < domain_to:
        raise ValueError("domain_from must be < domain_to")
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    if scenario.red is not None:
        raise ValueError("map_graph requires threshold marking")
    out = []
    span = domain_to - domain_from
    for i in range(resolution):
        x = domain_from + i * span / (resolution - 1)
        state = MapState(x, frozen_other) if observable == "window" else MapState(frozen_other, x)
        nxt, _ = step(state, scenario.link, scenario.sender)
        out.append((x, getattr(nxt, observable)))
    return out


def _raw_step(w, a, avg, scenario):
    # Float-only twin of step/red_step, no state validation (perturbed
    # copies may leave the valid region by ~separation).
    link, sender, red = scenario.link, scenario.sender, scenario.red
    q = min(max(w - link.capacity * link.prop_delay / link.packet_size, 0.0), link.buffer)
    if red is None:
        p = 1.0 if q > link.threshold else 0.0
    else:
        avg = (1.0 - red.weight) * avg + red.weight * q
        if red.q_min == red.q_max:
            p = 1.0 if avg > red.q_max else 0.0
        elif avg < red.q_min:
            p = 0.0
        elif avg > red.q_max:
            p = 1.0
        else:
            p = (avg - red.q_min) / (red.q_max - red.q_min) * red.p_max
    g = sender.g
    if p > 0.0:
        return (1.0 - a**sender.gamma / 2.0) * w, (1.0 - g) * a + g * p, avg
    return w + 1.0, (1.0 - g) * a, avg


def lyapunov_estimate(scenario: Scenario, transient: int, iterations: int,
                      separation: float = DEFAULT_SEPARATION) -> float:
    """Largest Lyapunov exponent (per iteration) by twin-orbit renormalisation.

    A copy displaced by ``separation`` along (1, 1)/sqrt(2) in (window,
    alpha) is stepped alongside the reference (under RED the averaged queue
    is a third coordinate); the log growth of their
    distance is accumulated and the displacement rescaled back to
    ``separation`` after every step. Border crossings between the twins are
    not treated specially. If the twins merge exactly the alpha-direction
    rate ``log(1 - g)``, common to both branches, is returned.
    """
    if not separation > 0:
        raise ValueError("separation must be > 0")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    w, a, avg = scenario.initial.window, scenario.initial.alpha, 0.0
    for _ in range(transient):
        w, a, avg = _raw_step(w, a, avg, scenario)

    h = separation / math.sqrt(2.0)
    w2, a2, avg2 = w + h, a + h, avg
    total = 0.0
    for _ in range(iterations):
        w, a, avg = _raw_step(w, a, avg, scenario)
        w2, a2, avg2 = _raw_step(w2, a2, avg2, scenario)
        dw, da, dq = w2 - w, a2 - a, avg2 - avg
        dist = math.sqrt(dw * dw + da * da + dq * dq)
        if dist == 0.0:
            return math.log(1.0 - scenario.sender.g)
        total += math.log(dist / separation)
        scale = separation / dist
        w2, a2, avg2 = w + dw * scale, a + da * scale, avg + dq * scale
    return total / iterations


def scenario_orbit(scenario: Scenario, transient: int | None = None, samples: int | None = None):
    """:func:`orbit` with the scenario's initial state, marking and run lengths."""
    return orbit(
        scenario.initial,
        scenario.link,
        scenario.sender,
        scenario.transient if transient is None else transient,
        scenario.samples if samples is None else samples,
        red=scenario.red,
    )


__all__ = [
    "BifurcationPoint",
    "Extremum",
    "PeriodResult",
    "SweepSpec",
    "cobweb",
    "detect_period",
    "distinct_values",
    "local_extrema",
    "lyapunov_estimate",
    "map_graph",
    "observable_series",
    "return_map",
    "scenario_orbit",
    "sweep_bifurcation",
]

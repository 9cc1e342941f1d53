"""Scenario files: one JSON document describing a run or a sweep.

Key schema (SI units, spelled out in the key names)::

    {
      "link":    {"capacity_bps", "prop_delay_s", "packet_size_bits",
                  "buffer_packets", "threshold_packets"},
      "sender":  {"g", "gamma"},
      "marking": {"kind": "threshold" | "red",
                  "red": {"weight", "q_min_packets", "q_max_packets", "p_max"}},
      "initial": {"window_packets": 1.0, "alpha": 0.0},        # optional
      "run":     {"transient": 5000, "samples": 1000},         # optional
      "sweep":   {"parameter", "from", "to", "step", "observable"}   # optional
    }

Unknown keys anywhere are rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from dctcpmap.core_map import LinkParams, MapState, SenderParams
from dctcpmap.red_policy import RedParams

DEFAULT_TRANSIENT = 5000
DEFAULT_SAMPLES = 1000

SWEEP_PARAMETERS = ("g", "d", "K", "gamma")
OBSERVABLES = ("queue", "window", "alpha")


class ScenarioError(ValueError):
    """Raised for unreadable or invalid scenario documents."""


@dataclass(frozen=True)
class SweepConfig:
    parameter: str
    start: float
    stop: float
    step: float
    observable: str = "queue"


@dataclass(frozen=True)
class Scenario:
    link: LinkParams
    sender: SenderParams
    red: RedParams | None = None
    initial: MapState = MapState()
    transient: int = DEFAULT_TRANSIENT
    samples: int = DEFAULT_SAMPLES
    sweep: SweepConfig | None = None

    @property
    def marking(self) -> str:
        return "threshold" if self.red is None else "red"

    def with_parameter(self, name: str, value: float) -> Scenario:
        """Copy with one sweepable parameter replaced (and re-validated)."""
        link, sender = self.link, self.sender
        if name == "g":
            sender = SenderParams(value, sender.gamma)
        elif name == "gamma":
            sender = SenderParams(sender.g, value)
        elif name == "d":
            link = _replace_link(link, prop_delay=value)
        elif name == "K":
            link = _replace_link(link, threshold=value)
        else:
            raise ValueError(f"unknown sweep parameter {name!r}; expected one of {SWEEP_PARAMETERS}")
        return Scenario(link, sender, self.red, self.initial, self.transient, self.samples, self.sweep)


def _replace_link(link: LinkParams, **changes: float) -> LinkParams:
    fields = dict(
        capacity=link.capacity,
        prop_delay=link.prop_delay,
        packet_size=link.packet_size,
        buffer=link.buffer,
        threshold=link.threshold,
    )
    fields.update(changes)
    return LinkParams(**fields)


_SECTIONS = {
    "link": {"capacity_bps", "prop_delay_s", "packet_size_bits", "buffer_packets", "threshold_packets"},
    "sender": {"g", "gamma"},
    "marking": {"kind", "red"},
    "initial": {"window_packets", "alpha"},
    "run": {"transient", "samples"},
    "sweep": {"parameter", "from", "to", "step", "observable"},
}
_RED_KEYS = {"weight", "q_min_packets", "q_max_packets", "p_max"}
_REQUIRED = {"link", "sender", "marking"}


def _check_keys(where: str, got: dict, allowed: set[str], required: set[str] | None = None) -> None:
    if not isinstance(got, dict):
        raise ScenarioError(f"{where}: expected an object, got {type(got).__name__}")
    unknown = sorted(set(got) - allowed)
    if unknown:
        raise ScenarioError(f"{where}: unknown key(s) {', '.join(unknown)}")
    missing = sorted((allowed if required is None else required) - set(got))
    if missing:
        raise ScenarioError(f"{where}: missing key(s) {', '.join(missing)}")


def _number(where: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ScenarioError(f"{where}: must be finite")
    return float(value)


def _count(where: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{where}: expected an integer, got {value!r}")
    return value


def scenario_from_dict(doc: dict) -> Scenario:
    _check_keys("scenario", doc, set(_SECTIONS), _REQUIRED)

    lk = doc["link"]
    _check_keys("link", lk, _SECTIONS["link"])
    c = _number("link.capacity_bps", lk["capacity_bps"])
    d = _number("link.prop_delay_s", lk["prop_delay_s"])
    m = _number("link.packet_size_bits", lk["packet_size_bits"])
    b = _number("link.buffer_packets", lk["buffer_packets"])
    k = _number("link.threshold_packets", lk["threshold_packets"])
    if not c > 0:
        raise ScenarioError("link.capacity_bps must be > 0")
    if not d >= 0:
        raise ScenarioError("link.prop_delay_s must be >= 0")
    if not m > 0:
        raise ScenarioError("link.packet_size_bits must be > 0")
    if not b > 0:
        raise ScenarioError("link.buffer_packets must be > 0")
    if not k > 0:
        raise ScenarioError("link.threshold_packets must be > 0")
    if not k < b:
        raise ScenarioError("threshold_packets must be < buffer_packets")
    link = LinkParams(c, d, m, b, k)

    sd = doc["sender"]
    _check_keys("sender", sd, _SECTIONS["sender"])
    g = _number("sender.g", sd["g"])
    gamma = _number("sender.gamma", sd["gamma"])
    if not 0 < g < 1:
        raise ScenarioError("sender.g must be in (0, 1)")
    if not gamma > 0:
        raise ScenarioError("sender.gamma must be > 0")
    sender = SenderParams(g, gamma)

    mk = doc["marking"]
    _check_keys("marking", mk, _SECTIONS["marking"], {"kind"})
    red = None
    if mk["kind"] == "threshold":
        if "red" in mk:
            raise ScenarioError("marking.red is only allowed with kind 'red'")
    elif mk["kind"] == "red":
        if "red" not in mk:
            raise ScenarioError("marking.red is required with kind 'red'")
        rd = mk["red"]
        _check_keys("marking.red", rd, _RED_KEYS)
        try:
            red = RedParams(
                weight=_number("marking.red.weight", rd["weight"]),
                q_min=_number("marking.red.q_min_packets", rd["q_min_packets"]),
                q_max=_number("marking.red.q_max_packets", rd["q_max_packets"]),
                p_max=_number("marking.red.p_max", rd["p_max"]),
            )
        except ValueError as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(f"marking.red: {exc}") from None
    else:
        raise ScenarioError(f"marking.kind must be 'threshold' or 'red', got {mk['kind']!r}")

    init = doc.get("initial", {})
    _check_keys("initial", init, _SECTIONS["initial"], set())
    w0 = _number("initial.window_packets", init.get("window_packets", 1.0))
    a0 = _number("initial.alpha", init.get("alpha", 0.0))
    if not w0 > 0:
        raise ScenarioError("initial.window_packets must be > 0")
    if not 0 <= a0 <= 1:
        raise ScenarioError("initial.alpha must be in [0, 1]")

    run = doc.get("run", {})
    _check_keys("run", run, _SECTIONS["run"], set())
    transient = _count("run.transient", run.get("transient", DEFAULT_TRANSIENT))
    samples = _count("run.samples", run.get("samples", DEFAULT_SAMPLES))
    if transient < 0:
        raise ScenarioError("run.transient must be >= 0")
    if samples < 1:
        raise ScenarioError("run.samples must be >= 1")

    sweep = None
    if "sweep" in doc:
        sw = doc["sweep"]
        _check_keys("sweep", sw, _SECTIONS["sweep"], {"parameter", "from", "to", "step"})
        if sw["parameter"] not in SWEEP_PARAMETERS:
            raise ScenarioError(f"sweep.parameter must be one of {', '.join(SWEEP_PARAMETERS)}")
        observable = sw.get("observable", "queue")
        if observable not in OBSERVABLES:
            raise ScenarioError(f"sweep.observable must be one of {', '.join(OBSERVABLES)}")
        start = _number("sweep.from", sw["from"])
        stop = _number("sweep.to", sw["to"])
        step = _number("sweep.step", sw["step"])
        if not start < stop:
            raise ScenarioError("sweep.from must be < sweep.to")
        if not step > 0:
            raise ScenarioError("sweep.step must be > 0")
        if (stop - start) / step < 1:
            raise ScenarioError("sweep grid must contain at least 2 points")
        sweep = SweepConfig(sw["parameter"], start, stop, step, observable)

    return Scenario(link, sender, red, MapState(w0, a0), transient, samples, sweep)


def scenario_to_dict(scenario: Scenario) -> dict:
    lk, sd = scenario.link, scenario.sender
    doc: dict[str, Any] = {
        "link": {
            "capacity_bps": lk.capacity,
            "prop_delay_s": lk.prop_delay,
            "packet_size_bits": lk.packet_size,
            "buffer_packets": lk.buffer,
            "threshold_packets": lk.threshold,
        },
        "sender": {"g": sd.g, "gamma": sd.gamma},
        "marking": {"kind": scenario.marking},
        "initial": {"window_packets": scenario.initial.window, "alpha": scenario.initial.alpha},
        "run": {"transient": scenario.transient, "samples": scenario.samples},
    }
    if scenario.red is not None:
        r = scenario.red
        doc["marking"]["red"] = {
            "weight": r.weight,
            "q_min_packets": r.q_min,
            "q_max_packets": r.q_max,
            "p_max": r.p_max,
        }
    if scenario.sweep is not None:
        s = scenario.sweep
        doc["sweep"] = {
            "parameter": s.parameter,
            "from": s.start,
            "to": s.stop,
            "step": s.step,
            "observable": s.observable,
        }
    return doc


def dumps_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), indent=2) + "\n"


def loads_scenario(text: str, source: str = "<string>") -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        line = text.splitlines()[exc.lineno - 1] if 0 < exc.lineno <= len(text.splitlines()) else ""
        raise ScenarioError(
            f"{source}:{exc.lineno}:{exc.colno}: parse error: {exc.msg}\n    {line}"
        ) from None
    return scenario_from_dict(doc)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc.strerror}") from None
    return loads_scenario(text, str(path))

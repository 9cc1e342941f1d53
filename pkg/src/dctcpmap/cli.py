"""Command-line front end: ``dctcpmap <command> --scenario FILE --out PATH``.

Every command writes a CSV to ``--out`` (and an SVG next to it with
``--svg``) and prints a one-line summary on stdout.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from dctcpmap import analysis
from dctcpmap.core_map import border
from dctcpmap.output import write_csv, write_svg
from dctcpmap.red_policy import red_probability, threshold_policy
from dctcpmap.scenario import OBSERVABLES, Scenario, ScenarioError, load_scenario

log = logging.getLogger("dctcpmap")

COMMANDS = ("orbit", "bifurcate", "cobweb", "return-map", "map-graph", "red-curve", "period", "lyapunov")


def _svg_path(out: Path) -> Path:
    return out.with_suffix(".svg")


def cmd_orbit(sc: Scenario, args) -> str:
    recs = analysis.scenario_orbit(sc)
    rows = [(r.k, r.window, r.alpha, r.queue, r.marked, r.rtt) for r in recs]
    write_csv(args.out, ("k", "window", "alpha", "queue", "marked", "rtt_s"), rows)
    if args.svg:
        obs = args.observable or "queue"
        write_svg(_svg_path(args.out), title=f"{obs} time series", xlabel="k", ylabel=obs,
                  polyline=[(r.k, getattr(r, obs)) for r in recs])
    q = [r.queue for r in recs]
    return f"orbit: {len(recs)} samples, queue in [{min(q):.6g}, {max(q):.6g}]"


def cmd_bifurcate(sc: Scenario, args) -> str:
    if sc.sweep is None:
        raise ScenarioError("bifurcate needs a scenario with a sweep section")
    spec = analysis.SweepSpec.from_scenario(sc, observable=args.observable, log_grid=args.log_grid)
    pts = analysis.sweep_bifurcation(spec, sc, workers=args.workers)
    write_csv(args.out, ("param", "observable", "kind"), pts)
    if args.svg:
        write_svg(_svg_path(args.out), title=f"bifurcation diagram ({spec.observable})",
                  xlabel=spec.parameter, ylabel=spec.observable,
                  points=[(p.param_value, p.observable_value) for p in pts])
    return f"bifurcate: {len(pts)} extrema over {spec.size} values of {spec.parameter}"


def cmd_cobweb(sc: Scenario, args) -> str:
    obs = args.observable or "window"
    series = analysis.observable_series(analysis.scenario_orbit(sc), obs)
    segs = analysis.cobweb(series)
    write_csv(args.out, ("x1", "y1", "x2", "y2"), [(a[0], a[1], b[0], b[1]) for a, b in segs])
    if args.svg:
        write_svg(_svg_path(args.out), title=f"cobweb ({obs})", xlabel=f"{obs}_k",
                  ylabel=f"{obs}_k+1", segments=segs, diagonal=True)
    corners = analysis.distinct_values(series[1:-1], args.tolerance)
    return f"cobweb: {len(segs)} segments, {corners.size} distinct corners"


def cmd_return_map(sc: Scenario, args) -> str:
    obs = args.observable or "window"
    series = analysis.observable_series(analysis.scenario_orbit(sc), obs)
    pairs = analysis.return_map(series, args.order)
    write_csv(args.out, ("x", "y"), pairs)
    if args.svg:
        write_svg(_svg_path(args.out), title=f"return map of order {args.order} ({obs})",
                  xlabel=f"{obs}_k", ylabel=f"{obs}_k+{args.order}", points=pairs, diagonal=True)
    return f"return-map: order={args.order}, {len(pairs)} pairs"


def cmd_map_graph(sc: Scenario, args) -> str:
    obs = args.observable or "window"
    if obs == "window":
        frozen = sc.initial.alpha if args.frozen is None else args.frozen
        lo = 0.5 if args.domain_from is None else args.domain_from
        hi = 2.0 * border(sc.link) + 2.0 if args.domain_to is None else args.domain_to
    elif obs == "alpha":
        frozen = sc.initial.window if args.frozen is None else args.frozen
        lo = 0.0 if args.domain_from is None else args.domain_from
        hi = 1.0 if args.domain_to is None else args.domain_to
    else:
        raise ScenarioError("map-graph observable must be window or alpha")
    pairs = analysis.map_graph(obs, frozen, sc, lo, hi, args.resolution)
    write_csv(args.out, ("input", "output"), pairs)
    if args.svg:
        write_svg(_svg_path(args.out), title=f"one-step map of {obs}", xlabel=f"{obs}_k",
                  ylabel=f"{obs}_k+1", points=pairs, diagonal=True)
    return f"map-graph: {len(pairs)} points, {obs} with frozen {'alpha' if obs == 'window' else 'window'}={frozen:.6g}"


def cmd_red_curve(sc: Scenario, args) -> str:
    params = sc.red if sc.red is not None else threshold_policy(sc.link)
    qs = np.linspace(0.0, sc.link.buffer, args.resolution)
    rows = [(float(q), red_probability(float(q), params)) for q in qs]
    write_csv(args.out, ("avg_queue", "probability"), rows)
    if args.svg:
        write_svg(_svg_path(args.out), title=f"{sc.marking} marking probability",
                  xlabel="average queue (packets)", ylabel="probability", polyline=rows)
    return f"red-curve: {len(rows)} points, {sc.marking} marking"


def cmd_period(sc: Scenario, args) -> str:
    obs = args.observable or "queue"
    series = analysis.observable_series(analysis.scenario_orbit(sc), obs)
    res = analysis.detect_period(series, args.tolerance, args.max_period)
    write_csv(args.out, ("period", "tolerance"), [(res.period, res.tolerance)])
    if args.svg:
        write_svg(_svg_path(args.out), title=f"{obs} steady state", xlabel="sample",
                  ylabel=obs, polyline=list(enumerate(series.tolist())))
    return f"period={'none' if res.period is None else res.period}"


def cmd_lyapunov(sc: Scenario, args) -> str:
    lam = analysis.lyapunov_estimate(sc, sc.transient, args.iterations, args.separation)
    write_csv(args.out, ("exponent", "iterations"), [(lam, args.iterations)])
    sign = "positive" if lam > 0 else "non-positive"
    return f"exponent={lam:.6g} ({sign})"


HANDLERS = {
    "orbit": cmd_orbit,
    "bifurcate": cmd_bifurcate,
    "cobweb": cmd_cobweb,
    "return-map": cmd_return_map,
    "map-graph": cmd_map_graph,
    "red-curve": cmd_red_curve,
    "period": cmd_period,
    "lyapunov": cmd_lyapunov,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dctcpmap", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--scenario", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--svg", action="store_true", help="also write an SVG next to the CSV")
    p.add_argument("--tolerance", type=float, default=analysis.DEFAULT_TOLERANCE)
    p.add_argument("--max-period", type=int, default=analysis.DEFAULT_MAX_PERIOD)
    p.add_argument("--observable", choices=OBSERVABLES)
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--log-grid", action="store_true", help="geometric spacing for the sweep grid")
    p.add_argument("--workers", type=int, default=1, help="processes for bifurcate")
    p.add_argument("--iterations", type=int, default=10_000, help="lyapunov averaging length")
    p.add_argument("--separation", type=float, default=analysis.DEFAULT_SEPARATION)
    p.add_argument("--frozen", type=float, help="map-graph: value of the held state variable")
    p.add_argument("--domain-from", type=float)
    p.add_argument("--domain-to", type=float)
    p.add_argument("--resolution", type=int, default=1001)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        sc = load_scenario(args.scenario)
        log.debug("loaded %s (%s marking)", args.scenario, sc.marking)
        summary = HANDLERS[args.command](sc, args)
    except (ScenarioError, ValueError, OSError) as exc:
        print(f"dctcpmap {args.command}: error: {exc}", file=sys.stderr)
        return 1
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())

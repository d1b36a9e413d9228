"""Command-line interface.

Exit codes: 0 success, 1 I/O failure, 2 invalid input or contract error,
3 a theorem hypothesis fails for the selected cycle.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import AssumptionViolation, GlassError, OnThresholdError
from .graph import (
    Cycle,
    build_graph,
    cycle_from_domains,
    cycle_properties,
    export_dot,
    find_deterministic_cycles,
)
from .model import Network, load_network, parse_label, validate
from .return_map import certify
from .simulate import run, sample, samples_csv
from .tolerances import from_env

EXIT_OK, EXIT_IO, EXIT_INPUT, EXIT_ASSUMPTION = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"


def _load(path: str) -> Network:
    try:
        return load_network(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from None


def _select_cycle(net: Network, cycles: list[Cycle], ref: str | None) -> Cycle:
    if ref is None:
        if len(cycles) == 1:
            return cycles[0]
        if not cycles:
            raise CliError("no deterministic cycle in the transition graph")
        listing = ", ".join(f"{c.id} ({c.key})" for c in cycles)
        raise CliError(f"{len(cycles)} deterministic cycles; choose one with --cycle: {listing}")
    for c in cycles:
        if ref in (c.id, c.key):
            return c
    if "," in ref:
        try:
            wanted = cycle_from_domains(net, [parse_label(t, net.n) for t in ref.split(",")])
        except (ValueError, GlassError) as exc:
            raise CliError(f"bad cycle {ref!r}: {exc}") from None
        for c in cycles:
            if c.domains == wanted.domains:
                return c
    raise CliError(f"unknown cycle {ref!r}")


def cmd_validate(args) -> int:
    net = _load(args.model)
    report = validate(net, args.tol)
    if args.format == "json":
        sys.stdout.write(dumps(report.to_dict()))
    else:
        sys.stdout.write(report.to_text() + "\n")
    return EXIT_OK if report.ok else EXIT_INPUT


def cmd_graph(args) -> int:
    net = _load(args.model)
    g = build_graph(net)
    cycles = find_deterministic_cycles(g)
    highlight = _select_cycle(net, cycles, args.highlight) if args.highlight else None
    if args.format == "dot":
        sys.stdout.write(export_dot(g, highlight))
    else:
        data = g.to_dict()
        data["cycles"] = [c.to_dict() for c in cycles]
        sys.stdout.write(dumps(data))
    return EXIT_OK


def cmd_certify(args) -> int:
    net = _load(args.model)
    tol = args.tol if args.fp_tol is None else args.tol.replace(fixed_point=args.fp_tol)
    cycles = find_deterministic_cycles(build_graph(net))
    c = _select_cycle(net, cycles, args.cycle)
    analysis = certify(net, c, tol, samples=args.samples)
    sys.stdout.write(dumps(analysis.to_dict()))
    return EXIT_OK


def _parse_x0(text: str, n: int) -> np.ndarray:
    try:
        x0 = np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise CliError(f"--x0 must be {n} comma separated numbers") from None
    if x0.shape != (n,):
        raise CliError(f"--x0 has {x0.size} values, the model has {n} variables")
    return x0


def cmd_simulate(args) -> int:
    net = _load(args.model)
    x0 = _parse_x0(args.x0, net.n)
    traj = run(net, x0, args.t_max, max_events=args.max_events, tol=args.tol)
    text = samples_csv(sample(traj, net, args.dt), net.names)
    _write(args.out, text)
    if args.events:
        _write(args.events, traj.events_json() + "\n")
    print(f"{len(traj.events) - 1} events, terminal: {traj.terminal}", file=sys.stderr)
    return EXIT_OK


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror or exc}", EXIT_IO) from None


def analyze(net: Network, tol, samples: int = 200) -> dict:
    report = validate(net, tol)
    g = build_graph(net)
    cycles = find_deterministic_cycles(g)
    entries = []
    for c in cycles:
        entry = c.to_dict()
        entry["properties"] = cycle_properties(net, c, tol).to_dict()
        try:
            entry["analysis"] = certify(net, c, tol, samples=samples).to_dict()
        except GlassError as exc:
            entry["error"] = str(exc)
        entries.append(entry)
    return {
        "tool": {"name": "glasscert", "version": __version__},
        "model": {"digest": net.digest(), "variables": net.names, "shape": list(net.shape)},
        "validation": {"ok": report.ok, "messages": report.messages},
        "graph": {
            "nodes": len(g.nodes),
            "edges": len(g.edges),
            "walls": g.wall_counts(),
            "equilibria": [e for e in g.to_dict()["equilibria"]],
        },
        "cycles": entries,
        "tolerances": tol.as_dict(),
    }


def cmd_analyze(args) -> int:
    net = _load(args.model)
    sys.stdout.write(dumps(analyze(net, args.tol, args.samples)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="glasscert", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check genericity and box invariance")
    p.add_argument("model")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("graph", help="transition graph as DOT or JSON")
    p.add_argument("model")
    p.add_argument("--format", choices=("dot", "json"), default="dot")
    p.add_argument("--highlight", help="cycle id or comma separated domain labels")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("certify", help="return-map analysis of one cycle")
    p.add_argument("model")
    p.add_argument("--cycle", help="cycle id or comma separated domain labels")
    p.add_argument("--tol", dest="fp_tol", type=float, help="fixed-point tolerance")
    p.add_argument("--samples", type=int, default=200)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("simulate", help="exact event-driven simulation")
    p.add_argument("model")
    p.add_argument("--x0", required=True)
    p.add_argument("--t-max", type=float, required=True)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--out", help="CSV path (stdout if omitted)")
    p.add_argument("--events", help="JSON path for domain-entry events")
    p.add_argument("--max-events", type=int, default=100_000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="full report for every deterministic cycle")
    p.add_argument("model")
    p.add_argument("--samples", type=int, default=200)
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.tol = from_env()
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except AssumptionViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except OnThresholdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GlassError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""Command-line driver: ``prioloss analyze|simulate|compare CONFIG``.

Exit codes: 0 ok, 2 config error, 3 numeric breakdown, 4 usage error,
5 analytic loss probability outside a simulation CI (only with
``--fail-on-noncoverage``).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
from pathlib import Path

from . import __version__
from .analytic import AnalyticReport, GammaMode, NumericalError, analyze
from .comparison import ComparisonReport, compare
from .config import ConfigError, RunConfig, dump_record, load_config, model_to_dict
from .model import ModelError, Protocol
from .simulator import SimConfig, SimulationReport, run, write_replications_csv

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_USAGE, EXIT_COVERAGE = 0, 2, 3, 4, 5


class UsageError(Exception):
    pass


def _fmt(x: float | None, prob: bool = False) -> str:
    if x is None:
        return "-"
    if prob:
        x = min(max(x, 0.0), 1.0)
    return f"{x:.4g}"


def _table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[k]) for r in rows)) for k, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(lines)


def render_analytic(rep: AnalyticReport) -> str:
    header = ["i", "lambda", "b", "Lambda", "R", "g", "c", "q", "r", "gamma"]
    rows = []
    for i in range(len(rep.gamma)):
        rows.append([
            str(i + 1), _fmt(rep.rates[i]), _fmt(rep.means[i]), _fmt(rep.cum_rates[i]),
            _fmt(rep.cum_loads[i]), _fmt(rep.chain.g[i]), _fmt(rep.c[i], True),
            _fmt(rep.q[i], True), _fmt(rep.r[i], True), _fmt(rep.gamma[i], True),
        ])
    out = [f"analytic ({rep.protocol.value}, {rep.gamma_mode.value})", _table(header, rows)]
    out += [f"warning: {w}" for w in rep.warnings]
    return "\n".join(out)


def render_simulation(rep: SimulationReport) -> str:
    cfg = rep.config
    header = ["i", "q_hat", "+/-", "r_hat", "+/-", "gamma_hat", "+/-"]
    rows = [
        [str(i + 1), _fmt(rep.q_hat[i]), _fmt(rep.q_halfwidth[i]), _fmt(rep.r_hat[i]),
         _fmt(rep.r_halfwidth[i]), _fmt(rep.gamma_hat[i]), _fmt(rep.gamma_halfwidth[i])]
        for i in range(len(rep.gamma_hat))
    ]
    title = (
        f"simulation ({rep.protocol.value}, {cfg.replications} x {cfg.arrivals} arrivals, "
        f"warmup {cfg.warmup_arrivals}, seed {cfg.seed}, {cfg.confidence:g} CI)"
    )
    util = f"server utilisation {_fmt(rep.utilisation)} +/- {_fmt(rep.utilisation_halfwidth)}"
    return "\n".join([title, _table(header, rows), util])


def render_comparison(rep: ComparisonReport) -> str:
    header = ["metric", "i", "analytic", "simulated", "+/-", "delta", "rel", "in CI"]
    rows = [
        [r.metric, str(r.class_index), _fmt(r.analytic), _fmt(r.simulated), _fmt(r.halfwidth),
         f"{r.abs_delta:+.4g}", _fmt(r.rel_delta), "yes" if r.covered else "no"]
        for r in rep.rows
    ]
    return "comparison (delta = analytic - simulated)\n" + _table(header, rows)


def _model_for(cfg: RunConfig, args):
    model = cfg.model
    if getattr(args, "protocol_override", None):
        model = model.with_protocol(args.protocol_override)
    return model


def _sim_config(cfg: RunConfig, args) -> SimConfig:
    base = cfg.simulation or SimConfig()
    updates = {
        k: v
        for k, v in (
            ("arrivals", args.arrivals),
            ("replications", args.replications),
            ("seed", args.seed),
            ("warmup", args.warmup),
            ("confidence", args.confidence),
        )
        if v is not None
    }
    return dataclasses.replace(base, **updates)


def _record(command: str, model, started: float, **parts) -> dict:
    rec = {
        "tool": "prioloss",
        "version": __version__,
        "command": command,
        "model": model_to_dict(model),
        "timing": {"wall_seconds": time.perf_counter() - started},
    }
    for key, value in parts.items():
        if value is not None:
            rec[key] = value.to_dict()
    if "simulation" in parts:
        rec["seed"] = parts["simulation"].config.seed
    return rec


def _write(path: str | None, record: dict) -> None:
    if path:
        Path(path).write_text(dump_record(record))


def _simulate(model, cfg: RunConfig, args) -> SimulationReport:
    sim = _sim_config(cfg, args)
    if sim.replications < 2:
        raise UsageError("replications must be >= 2 to estimate a confidence interval")
    problems = sim.problems()
    if problems:
        raise ConfigError("; ".join(problems))
    return run(model, sim, workers=args.workers)


def cmd_analyze(args) -> int:
    started = time.perf_counter()
    cfg = load_config(args.config)
    model = _model_for(cfg, args)
    mode = GammaMode.parse(args.gamma_mode) if args.gamma_mode else cfg.gamma_mode
    rep = analyze(model, mode)
    print(render_analytic(rep))
    _write(args.json, _record("analyze", model, started, analytic=rep))
    return EXIT_OK


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    cfg = load_config(args.config)
    model = _model_for(cfg, args)
    rep = _simulate(model, cfg, args)
    print(render_simulation(rep))
    if args.csv:
        write_replications_csv(rep, args.csv)
    _write(args.json, _record("simulate", model, started, simulation=rep))
    return EXIT_OK


def cmd_compare(args) -> int:
    started = time.perf_counter()
    cfg = load_config(args.config)
    model = _model_for(cfg, args)
    mode = GammaMode.parse(args.gamma_mode) if args.gamma_mode else cfg.gamma_mode
    ana = analyze(model, mode)
    sim = _simulate(model, cfg, args)
    cmp = compare(ana, sim)
    print(render_analytic(ana))
    print()
    print(render_simulation(sim))
    print()
    print(render_comparison(cmp))
    if args.csv:
        write_replications_csv(sim, args.csv)
    _write(args.json, _record("compare", model, started, analytic=ana, simulation=sim, comparison=cmp))
    if args.fail_on_noncoverage and not cmp.all_covered("gamma"):
        print("error: analytic loss probability outside simulation CI", file=sys.stderr)
        return EXIT_COVERAGE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prioloss", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="JSON run configuration")
        p.add_argument("--protocol-override", choices=[p.value for p in Protocol])
        p.add_argument("--json", metavar="PATH", help="write the machine-readable record here")

    def analysis(p):
        p.add_argument("--gamma-mode", choices=[m.value for m in GammaMode])

    def simulation(p):
        p.add_argument("--arrivals", type=int)
        p.add_argument("--replications", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--warmup", type=int)
        p.add_argument("--confidence", type=float)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--csv", metavar="PATH", help="write per-replication counts here")

    p = sub.add_parser("analyze", help="approximate loss probabilities")
    common(p)
    analysis(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="simulate the exact system")
    common(p)
    simulation(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="analytic values against simulation")
    common(p)
    analysis(p)
    simulation(p)
    p.add_argument("--fail-on-noncoverage", action="store_true")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands: ``bound``, ``success``, ``simulate``, ``enumerate``, ``continuum``.
Every report carries a provenance block with the flag values and package
version, so identical flags (and seed) reproduce byte-identical output.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__, ccp, continuum, formats, inequalities, montecarlo, qsim
from .errors import BellccError, CapacityError

Z_TRIPWIRE = 6.0

BOUND_COLUMNS = ["n", "bound", "total_weight", "classical_max", "strategy"]
SUCCESS_COLUMNS = ["classical_max", "quantum", "advantage", "bell_lhs", "bound"]
SIMULATE_COLUMNS = ["rounds", "successes", "empirical_rate", "analytic_rate", "standard_error", "z_score"]
ENUMERATE_COLUMNS = [
    "mask", "factorable", "bound", "total_weight", "classical_max",
    "quantum_value", "quantum", "success_gap", "violated",
]
CONTINUUM_COLUMNS = ["n", "m", "lhs", "bound", "W", "classical_max", "quantum", "advantage"]


@dataclass(frozen=True)
class RunConfig:
    command: str
    family: str | None = None
    n: int | None = None
    mask: str | None = None
    g_file: str | None = None
    sign_file: str | None = None
    visibility: float = 1.0
    rounds: int = 100_000
    seed: int | None = None
    protocol: str = "quantum"
    m: int = 64
    restarts: int = 32
    opt_seed: int = 0
    lhv_cap: int = inequalities.LHV_CAP
    output: str | None = None
    format: str = "json"
    trace: str | None = None

    def provenance(self):
        flags = {k: v for k, v in self.__dict__.items() if k not in ("output",)}
        return {"version": __version__, "flags": flags}


def resolve_g(cfg):
    """Build the weight table from exactly one source in the config."""
    sources = [s for s in (cfg.family, cfg.g_file, cfg.sign_file) if s is not None]
    if len(sources) != 1:
        raise BellccError("give exactly one of --family, --g-file, --sign-file")
    if cfg.g_file is not None:
        return formats.load_gtable(cfg.g_file)
    if cfg.sign_file is not None:
        return inequalities.wwzb_g(formats.load_sign_function(cfg.sign_file))
    if cfg.n is None:
        raise BellccError(f"--family {cfg.family} needs --n")
    if cfg.family == "mermin":
        return inequalities.mermin_g(cfg.n)
    if cfg.family == "ardehali":
        return inequalities.ardehali_g(cfg.n)
    if cfg.family == "wwzb":
        if cfg.mask is None:
            raise BellccError("--family wwzb needs --mask")
        return inequalities.wwzb_g(inequalities.SignFunction.from_mask(cfg.n, int(cfg.mask, 16)))
    raise BellccError(f"unknown family {cfg.family!r}")


def _optimized_settings(cfg, g):
    state = qsim.ghz(g.n)
    result = inequalities.optimize_settings(state, g, restarts=cfg.restarts, seed=cfg.opt_seed)
    return state, result


def cmd_bound(cfg):
    g = resolve_g(cfg)
    bound, strategy = inequalities.lhv_bound(g, cap=cfg.lhv_cap)
    record = {
        "n": g.n,
        "bound": bound,
        "total_weight": g.total_weight,
        "classical_max": ccp.classical_max_success(g, cap=cfg.lhv_cap),
        "strategy": strategy.to_list(),
    }
    return [record], BOUND_COLUMNS, 0


def cmd_success(cfg):
    g = resolve_g(cfg)
    state, opt = _optimized_settings(cfg, g)
    E = qsim.correlation_tensor(state, opt.settings, cfg.visibility)
    report = ccp.analyze(g, E, cap=cfg.lhv_cap)
    record = report.to_dict()
    record["settings"] = opt.settings.vectors().tolist()
    record["optimizer_converged"] = opt.converged
    return [record], SUCCESS_COLUMNS, 0


def cmd_simulate(cfg):
    if cfg.seed is None:
        raise BellccError("simulate requires --seed")
    g = resolve_g(cfg)
    problem = ccp.build_problem(g)
    trace = open(cfg.trace, "w", encoding="utf-8") if cfg.trace else None
    try:
        if cfg.protocol == "classical":
            _, strategy = inequalities.lhv_bound(g, cap=cfg.lhv_cap)
            report = montecarlo.run_classical(problem, strategy, cfg.rounds, cfg.seed, trace=trace)
        else:
            state, opt = _optimized_settings(cfg, g)
            report = montecarlo.run_quantum(
                problem, state, opt.settings, cfg.visibility, cfg.rounds, cfg.seed, trace=trace
            )
    finally:
        if trace is not None:
            trace.close()
    code = 0 if abs(report.z_score) < Z_TRIPWIRE else 3
    return [report.to_dict()], SIMULATE_COLUMNS, code


def cmd_enumerate(cfg):
    if cfg.n is None:
        raise BellccError("enumerate needs --n")
    state = qsim.ghz(cfg.n)
    rows = []
    for sign, g, factorable in inequalities.enumerate_wwzb(cfg.n):
        bound, _ = inequalities.lhv_bound(g, cap=cfg.lhv_cap)
        opt = inequalities.optimize_settings(state, g, restarts=cfg.restarts, seed=cfg.opt_seed)
        E = qsim.correlation_tensor(state, opt.settings, cfg.visibility)
        report = ccp.analyze(g, E, cap=cfg.lhv_cap)
        rows.append({
            "mask": sign.hex(),
            "factorable": factorable,
            "bound": bound,
            "total_weight": g.total_weight,
            "classical_max": report.classical_max,
            "quantum_value": report.bell_lhs,
            "quantum": report.quantum,
            "success_gap": report.success_gap,
            "violated": report.advantage,
        })
    return rows, ENUMERATE_COLUMNS, 0


def cmd_continuum(cfg):
    if cfg.n is None:
        raise BellccError("continuum needs --n")
    scn = continuum.ContinuumScenario(cfg.n, cfg.m, visibility=cfg.visibility)
    return [continuum.continuum_success(scn).to_dict()], CONTINUUM_COLUMNS, 0


COMMANDS = {
    "bound": cmd_bound,
    "success": cmd_success,
    "simulate": cmd_simulate,
    "enumerate": cmd_enumerate,
    "continuum": cmd_continuum,
}


def _add_g_source(p):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--family", choices=["mermin", "ardehali", "wwzb"])
    src.add_argument("--g-file", help="JSON weight table {n, values}")
    src.add_argument("--sign-file", help="JSON sign function {n, mask}")
    p.add_argument("--mask", help="hex sign-function mask for --family wwzb")


def _add_common(p, n_required=False):
    p.add_argument("--n", type=int, required=n_required)
    p.add_argument("--lhv-cap", type=int, default=inequalities.LHV_CAP,
                   help="largest n for exhaustive LHV search (default %(default)s)")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--output", help="write the report here instead of stdout")


def _add_optimizer(p):
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--opt-seed", type=int, default=0, help="seed for optimizer restarts")


def build_parser():
    parser = argparse.ArgumentParser(prog="bellcc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="classical (LHV) bound and optimal classical success")
    _add_g_source(p)
    _add_common(p)

    p = sub.add_parser("success", help="quantum vs classical success with GHZ and optimized settings")
    _add_g_source(p)
    _add_common(p)
    _add_optimizer(p)
    p.add_argument("--visibility", type=float, default=1.0)

    p = sub.add_parser("simulate", help="Monte Carlo run of the protocol")
    _add_g_source(p)
    _add_common(p)
    _add_optimizer(p)
    p.add_argument("--protocol", choices=["quantum", "classical"], default="quantum")
    p.add_argument("--visibility", type=float, default=1.0)
    p.add_argument("--rounds", type=int, default=100_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--trace", help="write one JSON round trace per line to this file")

    p = sub.add_parser("enumerate", help="scan every WWZB sign function for n parties")
    _add_common(p, n_required=True)
    _add_optimizer(p)
    p.add_argument("--visibility", type=float, default=1.0)

    p = sub.add_parser("continuum", help="continuous-settings functional inequality")
    _add_common(p, n_required=True)
    p.add_argument("--m", type=int, default=64, help="grid points per dimension")
    p.add_argument("--visibility", type=float, default=1.0)
    return parser


def config_from_args(args):
    fields = RunConfig.__dataclass_fields__
    values = {k: v for k, v in vars(args).items() if k in fields}
    return RunConfig(**values)


def render(cfg, rows, columns):
    if cfg.format == "csv":
        return formats.to_csv(rows, columns)
    body = rows if cfg.command == "enumerate" else rows[0]
    return formats.to_json({"provenance": cfg.provenance(), "report": body})


def main(argv=None):
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    try:
        rows, columns, code = COMMANDS[cfg.command](cfg)
    except CapacityError as exc:
        print(f"bellcc: capacity exceeded: {exc}", file=sys.stderr)
        return 2
    except (BellccError, ValueError) as exc:
        print(f"bellcc: error: {exc}", file=sys.stderr)
        return 2
    text = render(cfg, rows, columns)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if code:
        print(f"bellcc: |z| >= {Z_TRIPWIRE}: simulation disagrees with the analytic rate", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())

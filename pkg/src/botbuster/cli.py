"""Command line entry point: ``botbuster <subcommand> ...``.

Subcommands
-----------
simulate    write a synthetic labelled trace
indicators  lambda_hat / rho_hat / alpha_hat of one subnet over a time grid
bic         pairwise botnet test of two subnets
detect      run the identification algorithm at one time
evaluate    Monte Carlo eta_bot / eta_nor curves
oracle      iterate the innovation-rate recursion

Simulation parameters come from an optional flat JSON config file (keys as
in :meth:`SimConfig.to_flat`); command line flags override it.  Every output
starts with ``#`` comment lines echoing the resolved configuration.  Errors
go to stderr as one line ``error: <category>: <message>`` with exit status 2.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .algorithm import botbuster
from .errors import BotBusterError, ConfigError
from .evaluation import evaluate
from .indicators import compute_indicators
from .oracles import RecursionParams, closed_form, recurse
from .rr import DEFAULT_EPSILON, bic_trace
from .synth import SimConfig
from .trace import Subnet, format_header, read_labels, read_trace, subnet_stats, write_labels, write_trace

# flag name -> flat config key
SIM_FLAGS = {
    "bot_count": ("--bot-count", int),
    "bot_scheduling": ("--bot-scheduling", str),
    "bot_rate": ("--bot-rate", float),
    "bot_alpha": ("--alpha", float),
    "bot_e0": ("--e0", int),
    "normal_count": ("--normal-count", int),
    "normal_rate": ("--normal-rate", float),
    "normal_private_rate": ("--private-rate", float),
    "normal_shared_rate": ("--shared-rate", float),
    "normal_p_share": ("--p-share", float),
    "normal_private_e0": ("--private-e0", int),
    "normal_shared_e0": ("--shared-e0", int),
    "horizon": ("--horizon", float),
    "seed": ("--seed", int),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"usage: {message}")


def parse_grid(spec: str) -> np.ndarray:
    """``"start:stop:step"`` (inclusive) or ``"t1,t2,..."``."""
    try:
        if ":" in spec:
            start, stop, step = (float(x) for x in spec.split(":"))
            if step <= 0:
                raise ConfigError("grid step must be positive")
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            grid = start + step * np.arange(max(n, 0))
        else:
            grid = np.array([float(x) for x in spec.split(",") if x.strip()])
    except ValueError:
        raise ConfigError(f"bad grid spec {spec!r}") from None
    if grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) < 0):
        raise ConfigError(f"grid {spec!r} must list increasing positive times")
    return grid


def _default_grid(trace, start: float, step: float) -> np.ndarray:
    end = float(trace.times[-1]) if len(trace) else start
    return parse_grid(f"{start}:{max(end, start)}:{step}")


def load_sim_config(args) -> SimConfig:
    flat = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                flat = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from None
        if not isinstance(flat, dict):
            raise ConfigError("config file must hold a flat JSON object")
    for key in SIM_FLAGS:
        value = getattr(args, key, None)
        if value is not None:
            flat[key] = value
    if getattr(args, "no_shuffle", False):
        flat["shuffle"] = False
    return SimConfig.from_flat(flat)


def _add_sim_flags(p):
    p.add_argument("--config", help="flat JSON file of simulation parameters")
    for key, (flag, typ) in SIM_FLAGS.items():
        p.add_argument(flag, dest=key, type=typ, default=None)
    p.add_argument("--no-shuffle", action="store_true",
                   help="keep bots at indices 0..B-1 instead of permuting users")


def _write(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_simulate(args) -> None:
    sim = load_sim_config(args)
    trace, labels = sim.generate()
    echo = format_header(sim.to_flat())
    write_trace(args.output, trace, echo)
    write_labels(args.labels or f"{args.output}.labels", labels, echo)


def cmd_indicators(args) -> None:
    trace = read_trace(args.trace)
    subnet = Subnet.parse(args.subnet)
    grid = parse_grid(args.grid) if args.grid else _default_grid(trace, args.start, args.step)
    lines = format_header({"trace": args.trace, "subnet": args.subnet})
    lines.append("t,lambda_hat,rho_hat,alpha_hat")
    for t in grid.tolist():
        ind = compute_indicators(subnet_stats(trace, subnet, t))
        lines.append(f"{t!r},{ind.lambda_hat!r},{ind.rho_hat!r},{ind.alpha_hat!r}")
    _write("\n".join(lines) + "\n", args.output)


def cmd_bic(args) -> None:
    trace = read_trace(args.trace)
    s1, s2 = Subnet.parse(args.s1), Subnet.parse(args.s2)
    echo = {"trace": args.trace, "s1": args.s1, "s2": args.s2, "epsilon": args.epsilon}
    if args.grid is not None or args.time is None:
        grid = parse_grid(args.grid) if args.grid else _default_grid(trace, args.start, args.step)
        lines = format_header(echo)
        lines.append("t,rho_union,rho_bot,rho_sum,gamma")
        for t in grid.tolist():
            _, rho_u, sol = bic_trace(trace, s1, s2, t, args.epsilon)
            nan = math.nan
            rb, rs, g = (sol.rho_bot, sol.rho_sum, sol.gamma) if sol else (nan, nan, nan)
            lines.append(f"{t!r},{rho_u!r},{rb!r},{rs!r},{g!r}")
        _write("\n".join(lines) + "\n", args.output)
        return
    decision, rho_u, sol = bic_trace(trace, s1, s2, args.time, args.epsilon)
    lines = format_header(dict(echo, time=args.time))
    lines.append(f"rho_union={rho_u!r}")
    if sol is not None:
        lines += [f"rho_bot={sol.rho_bot!r}", f"rho_sum={sol.rho_sum!r}", f"gamma={sol.gamma!r}",
                  f"alpha_prime={sol.alpha_prime!r}", f"delta_star={sol.delta_star!r}"]
    lines.append(f"decision={decision.value}")
    _write("\n".join(lines) + "\n", args.output)


def cmd_detect(args) -> None:
    trace = read_trace(args.trace)
    n_users = args.n_users if args.n_users is not None else trace.n_users
    est = botbuster(trace, n_users, args.time, args.epsilon)
    lines = format_header({"trace": args.trace, "n_users": n_users, "time": args.time,
                           "epsilon": args.epsilon})
    lines.append(f"# banned_count = {len(est.banned)}")
    for p in est.per_pivot:
        lines.append(f"# pivot={p.pivot} size={len(p.members)} best={'yes' if p.became_best else 'no'}")
    if args.labels:
        labels = read_labels(args.labels)
        bots = {u for u, lab in labels.items() if lab == "bot"}
        normals = {u for u, lab in labels.items() if lab == "normal"}
        if bots:
            lines.append(f"# eta_bot = {len(est.banned & bots) / len(bots)!r}")
        if normals:
            lines.append(f"# eta_nor = {len(est.banned & normals) / len(normals)!r}")
    lines.extend(str(u) for u in sorted(est.banned))
    _write("\n".join(lines) + "\n", args.output)


def cmd_evaluate(args) -> None:
    sim = load_sim_config(args)
    grid = parse_grid(args.grid)
    if args.horizon is None and grid[-1] > sim.horizon:
        sim = SimConfig.from_flat(dict(sim.to_flat(), horizon=float(grid[-1])))
    report = evaluate(sim, grid, args.epsilon, args.trials, args.jobs)
    _write(report.to_csv(), args.output)


def cmd_oracle(args) -> None:
    params = RecursionParams(args.a, args.b, args.c, args.f0, args.n_max)
    f = closed_form(params) if args.closed_form else recurse(params)
    n = np.arange(1, params.n_max + 1)
    keep = (n % args.every == 0) | (n == params.n_max)
    lines = format_header({"a": args.a, "b": args.b, "c": args.c, "f0": args.f0,
                           "n_max": args.n_max, "method": "closed_form" if args.closed_form else "recursion",
                           "limit": params.limit})
    lines.append("n,f_n,f_n/n")
    lines.extend(f"{k},{v!r},{v / k!r}" for k, v in zip(n[keep].tolist(), f[keep].tolist()))
    _write("\n".join(lines) + "\n", args.output)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="botbuster", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="write a synthetic labelled trace")
    _add_sim_flags(p)
    p.add_argument("-o", "--output", required=True, help="trace file to write")
    p.add_argument("--labels", help="label file (default: <output>.labels)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("indicators", help="indicators of one subnet over time")
    p.add_argument("trace")
    p.add_argument("--subnet", required=True, help="comma separated users, e.g. 0,2,5-9")
    p.add_argument("--grid", help="start:stop:step or t1,t2,...")
    p.add_argument("--start", type=float, default=1.0)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_indicators)

    p = sub.add_parser("bic", help="pairwise botnet test")
    p.add_argument("trace")
    p.add_argument("--s1", required=True)
    p.add_argument("--s2", required=True)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--time", type=float, help="single observation time")
    p.add_argument("--grid", help="emit a time series instead (start:stop:step or list)")
    p.add_argument("--start", type=float, default=1.0, help="first time of the default grid")
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bic)

    p = sub.add_parser("detect", help="identify the botnet at one time")
    p.add_argument("trace")
    p.add_argument("--n-users", type=int)
    p.add_argument("--time", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--labels", help="ground truth labels, adds eta_bot/eta_nor diagnostics")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="Monte Carlo eta_bot / eta_nor curves")
    _add_sim_flags(p)
    p.add_argument("--grid", required=True)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("oracle", help="iterate the innovation-rate recursion")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--f0", type=float, default=0.0)
    p.add_argument("--n-max", type=int, default=1000)
    p.add_argument("--every", type=int, default=1, help="print every k-th step")
    p.add_argument("--closed-form", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "every", 1) < 1:
            raise ConfigError("--every must be positive")
        args.func(args)
    except BotBusterError as exc:
        msg = " ".join(str(exc).split())
        print(f"error: {exc.category}: {msg}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands: ``ess``, ``sweep``, ``scenario``, ``verify``.  Exit codes: 0 ok,
1 verification failure, 2 usage or configuration error, 3 internal numeric
error.  Only the requested payload goes to stdout; diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__, _svg
from ._io import csv_text, dumps
from .model import S_MAX, S_MIN, CetParams, ModelParams, equilibrium, sweep
from .montecarlo import MIN_ACCEPTANCE_REPLICATES, simulate_power_lattice
from .numerics import NumericalError, ttest_power

log = logging.getLogger("esslab")

SWEEP_HEADER = ["vary", "ess", "sss", "power", "power_cet", "tpr", "ppv", "profit"]
DEFAULT_D_LATTICE = (0.0, 0.2, 0.5, 0.8, 1.2)
DEFAULT_S_LATTICE = (4, 10, 20, 64, 200)


class UsageError(Exception):
    pass


def _global_options(parser, suppress):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    g = parser.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=default(None), help="random seed")
    g.add_argument("--format", choices=["csv", "json", "svg"], default=default(None),
                   help="output format")
    g.add_argument("--out", default=default(None),
                   help="output path (scenario: path prefix for .csv/.json/.svg)")
    g.add_argument("--s-min", type=int, default=default(S_MIN), help="smallest sample size on the grid")
    g.add_argument("--s-max", type=int, default=default(S_MAX), help="largest sample size on the grid")
    g.add_argument("--alpha", type=float, default=default(None), help="type-1 error (default 0.05)")


def _cet_options(parser):
    parser.add_argument("--cet-delta", type=float, default=None, metavar="FRAC",
                        help="enable CET with equivalence bound FRAC * d")
    parser.add_argument("--alpha-cet", type=float, default=0.05, help="type-1 error of the equivalence test")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="esslab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"esslab {__version__}")
    _global_options(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ess", parents=[common], help="equilibrium sample size for one niche")
    p.add_argument("--b", type=float, required=True, help="base rate of true effects")
    p.add_argument("--d", type=float, required=True, help="effect size (Cohen's d)")
    p.add_argument("--if", dest="IF", type=float, required=True, help="income factor")
    _cet_options(p)

    p = sub.add_parser("sweep", parents=[common], help="ESS as one parameter varies")
    p.add_argument("--vary", choices=["b", "d", "if"], required=True)
    p.add_argument("--values", help="comma-separated values of the varied parameter")
    p.add_argument("--grid", help="start:stop:step (inclusive) for the varied parameter")
    p.add_argument("--b", type=float, default=0.5)
    p.add_argument("--d", type=float, default=0.5)
    p.add_argument("--if", dest="IF", type=float, default=200.0)
    _cet_options(p)

    p = sub.add_parser("scenario", parents=[common], help="sampled population of niches")
    p.add_argument("config", help="scenario JSON config")

    p = sub.add_parser("verify", parents=[common], help="Monte Carlo check of analytic power")
    p.add_argument("--replicates", type=int, default=1_000_000)
    p.add_argument("--d-values", default=",".join(map(str, DEFAULT_D_LATTICE)))
    p.add_argument("--s-values", default=",".join(map(str, DEFAULT_S_LATTICE)))
    return parser


def _floats(text, what):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"malformed {what}: {text!r}") from None
    if not vals:
        raise UsageError(f"{what} is empty")
    return vals


def _grid(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"malformed grid {text!r}; expected start:stop:step")
    try:
        start, stop, step = map(float, parts)
    except ValueError:
        raise UsageError(f"malformed grid {text!r}") from None
    if step <= 0 or stop < start:
        raise UsageError(f"malformed grid {text!r}; need step > 0 and stop >= start")
    n = int(round((stop - start) / step)) + 1
    return [round(start + i * step, 12) for i in range(n) if start + i * step <= stop + 1e-9 * step]


def _alpha(args):
    return 0.05 if args.alpha is None else args.alpha


def _cet(args):
    if args.cet_delta is None:
        return None
    return CetParams(args.cet_delta, args.alpha_cet)


def _emit(args, text):
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_ess(args):
    p = ModelParams(args.b, args.d, args.IF, _alpha(args), _cet(args))
    res = equilibrium(p, args.s_min, args.s_max)
    fmt = args.format or "json"
    if fmt == "json":
        out = {"b": p.b, "d": p.d, "IF": p.IF, "alpha": p.alpha}
        if p.cet is not None:
            out["cet"] = {"delta_frac": p.cet.delta_frac, "alpha_cet": p.cet.alpha_cet}
        out.update(res.to_dict())
        _emit(args, dumps(out))
    elif fmt == "csv":
        d = res.to_dict()
        _emit(args, csv_text(SWEEP_HEADER[1:], [[d[k] for k in SWEEP_HEADER[1:]]]))
    else:
        raise UsageError("ess supports --format json or csv")
    return 0


def cmd_sweep(args):
    if (args.values is None) == (args.grid is None):
        raise UsageError("sweep needs exactly one of --values or --grid")
    values = _floats(args.values, "--values") if args.values else _grid(args.grid)
    # the varied field's fixed value is overwritten per row
    base = ModelParams(args.b, args.d, args.IF, _alpha(args), _cet(args))
    rows = sweep(args.vary, values, base, args.s_min, args.s_max)
    fmt = args.format or "csv"
    if fmt == "csv":
        table = [[v, r.ess, r.sss, r.power_at_ess, r.power_cet_at_ess, r.tpr_at_ess,
                  r.ppv_at_ess, r.profit_at_ess] for v, r in rows]
        _emit(args, csv_text(SWEEP_HEADER, table))
    elif fmt == "json":
        _emit(args, dumps([{"vary": v, **r.to_dict()} for v, r in rows]))
    else:
        _emit(args, _svg.line([v for v, _ in rows], [r.ess for _, r in rows],
                              f"ESS vs {args.vary}", args.vary, "ESS"))
    return 0


def cmd_scenario(args):
    from .scenarios import ScenarioSpec, run_scenario

    try:
        raw = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from None
    if not isinstance(raw, dict):
        raise UsageError("config must be a JSON object")
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.alpha is not None:
        raw["alpha"] = args.alpha
    raw.setdefault("s_min", args.s_min)
    raw.setdefault("s_max", args.s_max)
    spec = ScenarioSpec.from_dict(raw)
    result = run_scenario(spec)
    log.info("scenario: %d draws, mean PPV %.4f", spec.draws, result.mean_ppv)
    svg = _svg.histogram(result.bin_edges.tolist(), result.power_histogram.tolist())
    if args.out:
        prefix = Path(args.out)
        prefix.with_name(prefix.name + ".csv").write_text(result.to_csv())
        prefix.with_name(prefix.name + ".json").write_text(result.summary_json())
        if args.format == "svg":
            prefix.with_name(prefix.name + ".svg").write_text(svg)
        return 0
    fmt = args.format or "csv"
    sys.stdout.write({"csv": result.to_csv(), "json": result.summary_json(), "svg": svg}[fmt])
    return 0


def verify_report(d_values, s_values, alpha, replicates, seed):
    """Run the power lattice and return ``(report, n_failed)``."""
    points = []
    for s in s_values:
        sims = simulate_power_lattice(d_values, s, alpha, replicates=replicates, seed=seed)
        for d, est in zip(d_values, sims):
            analytic = alpha if d == 0 else ttest_power(d, s, alpha)
            points.append({
                "d": d, "s": s, "analytic": analytic, "estimate": est.rate,
                "stderr": est.stderr, "replicates": est.replicates,
                "pass": est.agrees(analytic),
            })
    failed = sum(not p["pass"] for p in points)
    report = {
        "alpha": alpha, "replicates": replicates, "seed": seed,
        "rule": "|analytic - estimate| <= 3 * stderr",
        "points": points, "failed": failed, "total": len(points),
        "pass": failed <= 0.05 * len(points),
    }
    return report, failed


def cmd_verify(args):
    if args.replicates < MIN_ACCEPTANCE_REPLICATES:
        raise UsageError(f"replicates must be >= {MIN_ACCEPTANCE_REPLICATES} (got {args.replicates})")
    d_values = _floats(args.d_values, "--d-values")
    try:
        s_values = [int(v) for v in args.s_values.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"malformed --s-values {args.s_values!r}") from None
    if any(d < 0 for d in d_values) or any(s < 2 for s in s_values):
        raise UsageError("lattice needs d >= 0 and s >= 2")
    seed = 42 if args.seed is None else args.seed
    report, failed = verify_report(d_values, s_values, _alpha(args), args.replicates, seed)
    _emit(args, dumps(report))
    log.info("verify: %d/%d lattice points failed", failed, report["total"])
    return 0 if report["pass"] else 1


COMMANDS = {"ess": cmd_ess, "sweep": cmd_sweep, "scenario": cmd_scenario, "verify": cmd_verify}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError) as exc:
        print(f"esslab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, ArithmeticError) as exc:
        print(f"esslab {args.command}: internal numeric error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

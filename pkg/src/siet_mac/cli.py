"""Command-line front end.

Exit codes: 0 ok, 2 configuration/usage error, 3 infeasible demand,
4 unsupported K, 5 best-response dynamics hit an infeasible move, 6 a
``--check`` failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone

import numpy as np

from . import errors
from .equilibria import (
    SIC,
    TIME_SHARE,
    DecoderSpec,
    GameParams,
    best_response_dynamics,
    check_eta_ne,
    component_decoders,
    equilibrium_point,
    ne_region_samples,
    solve_beta_uniform,
)
from .model import (
    DEFAULT_TOL,
    b_coop,
    b_ind,
    check_demand,
    energy_max,
    is_feasible,
    load_config,
    parse_snr_option,
    regime,
)
from .regions import bsc_curve, region_boundary_samples
from .simulation import SimulationConfig, simulate_energy

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_UNSUPPORTED_K = 4
EXIT_NO_RESPONSE = 5
EXIT_CHECK = 6

_REGIME_TEXT = {
    "vacuous": "vacuous energy constraint",
    "binding": "binding",
    "infeasible": "infeasible",
}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _fmt(x) -> str:
    # shortest round-trip representation
    return repr(float(x))


def _floats(text: str, name: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise CliError(f"cannot parse {name} {text!r}", EXIT_CONFIG) from None


def _channel(args):
    if args.config and args.snr:
        raise CliError("give either --config or --snr, not both", EXIT_CONFIG)
    if args.snr:
        return parse_snr_option(args.snr)
    if args.config:
        return load_config(args.config)
    raise CliError("a channel is required: pass --config or --snr", EXIT_CONFIG)


def _emit(text: str, path: str | None, outputs: list[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    outputs.append(path)


def _json(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=True) + "\n"


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def cmd_feasibility(args, outputs):
    snr, _ = _channel(args)
    b = 0.0 if args.b is None else args.b
    low, top = b_ind(snr), b_coop(snr)
    reg = regime(b, snr, args.tol)
    report = {
        "b": b,
        "b_ind": low,
        "b_coop": top,
        "feasible": is_feasible(b, snr, args.tol),
        "regime": reg,
        "description": _REGIME_TEXT[reg],
    }
    _emit(_json(report), args.out, outputs)
    return EXIT_INFEASIBLE if reg == "infeasible" else EXIT_OK


def _region_decoders(args, k: int) -> list[DecoderSpec]:
    specs = [DecoderSpec.parse(t) for t in args.decoder] if args.decoder else [DecoderSpec.time_share()]
    out = []
    for spec in specs:
        spec.check_users(k)
        # a time-sharing region is the hull of its components: export those
        parts = component_decoders(k, spec) if spec.kind == TIME_SHARE else [spec]
        for d in parts:
            if d not in out:
                out.append(d)
    return out


def cmd_region(args, outputs):
    snr, _ = _channel(args)
    b = 0.0 if args.b is None else args.b
    k = snr.k
    if k > 3:
        raise errors.UnsupportedK(f"region export supports K <= 3, got K={k}")
    check_demand(b, snr, args.tol)
    betas = [f"beta_{i + 1}" for i in range(k)]
    rates = [f"R_{i + 1}" for i in range(k)]
    if args.ne:
        params = GameParams(b, args.eta)
        rows = []
        for dec in _region_decoders(args, k):
            for pt in ne_region_samples(snr, params, dec, args.samples, args.tol):
                rows.append(
                    [dec.label]
                    + [_fmt(v) for v in pt.split]
                    + [_fmt(v) for v in pt.rates.r]
                    + [_fmt(pt.rates.b_rate)]
                )
        _emit(_csv(["decoder"] + betas + rates + ["B"], rows), args.out, outputs)
        if args.capacity_out:
            _write_capacity(args, snr, b, betas, rates, args.capacity_out, outputs)
        return EXIT_OK
    _write_capacity(args, snr, b, betas, rates, args.out, outputs)
    return EXIT_OK


def _write_capacity(args, snr, b, betas, rates, path, outputs):
    rows = []
    for beta, pt in region_boundary_samples(snr, b, args.samples, n_energy=args.energy_levels, tol=args.tol):
        rows.append([_fmt(v) for v in beta] + [_fmt(v) for v in pt.r] + [_fmt(pt.b_rate)])
    _emit(_csv(betas + rates + ["B"], rows), path, outputs)


def cmd_dynamics(args, outputs):
    snr, _ = _channel(args)
    b = 0.0 if args.b is None else args.b
    params = GameParams(b, args.eta)
    decoder = DecoderSpec.parse(args.decoder)
    if decoder.kind == TIME_SHARE:
        raise errors.UnsupportedDecoder("dynamics need a SUD or SIC decoder")
    start = None if args.start is None else _floats(args.start, "--start")
    if start is None and not args.cooperative_init:
        raise CliError("give --start or --cooperative-init", EXIT_CONFIG)
    res = best_response_dynamics(
        snr, params, decoder, start, args.rounds, args.cooperative_init, args.tol
    )
    level = b if regime(b, snr, args.tol) == "binding" else None
    point = equilibrium_point(snr, res.terminal, decoder, b_rate=level)
    verdict = check_eta_ne(snr, params, point, args.tol)
    doc = {
        "decoder": decoder.kind,
        "b": b,
        "eta": args.eta,
        "converged": res.converged,
        "rounds": res.rounds,
        "trajectory": [t.tolist() for t in res.trajectory],
        "terminal": res.terminal.tolist(),
        "rates": point.rates.r.tolist(),
        "B": point.rates.b_rate,
        "E": energy_max(snr, res.terminal),
        "is_eta_ne": verdict.is_ne,
        "reason": verdict.reason,
    }
    if decoder.kind == SIC:
        doc["order"] = [u + 1 for u in decoder.order]
    _emit(_json(doc), args.out, outputs)
    return EXIT_OK


def cmd_simulate(args, outputs):
    snr, cfg = _channel(args)
    if args.beta is not None:
        beta = _floats(args.beta, "--beta")
    elif args.b is not None:
        beta = solve_beta_uniform(snr, args.b, DEFAULT_TOL)
    else:
        beta = np.ones(snr.k)
    sim = SimulationConfig(
        split=beta,
        n=args.n,
        trials=args.trials,
        epsilon=args.epsilon,
        seed=args.seed,
        target_B=args.target_b,
    )
    res = simulate_energy(cfg, sim)
    doc = {"config": cfg.to_dict(), "snr": snr.to_dict(), "beta": list(map(float, sim.split)),
           "n": sim.n, "trials": sim.trials, "seed": sim.seed}
    doc.update(res.to_dict(per_trial=args.per_trial))
    code = EXIT_OK
    if args.check:
        tol = 0.01 if args.tol_given is None else args.tol_given
        err = abs(res.mean_B - res.expected_B) / res.expected_B
        doc["check"] = {"relative_error": err, "tol": tol, "passed": bool(err <= tol)}
        if err > tol:
            code = EXIT_CHECK
    _emit(_json(doc), args.out, outputs)
    if args.csv:
        _emit(_csv(["trial", "B"], [[t, _fmt(v)] for t, v in enumerate(res.empirical_B)]), args.csv, outputs)
    return code


def cmd_bsc(args, outputs):
    p = 0.15 if args.p is None else args.p
    rows = [[_fmt(b), _fmt(r)] for b, r in bsc_curve(p, args.points)]
    _emit(_csv(["b", "rate"], rows), args.out, outputs)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON channel configuration")
    common.add_argument("--snr", help="direct SNRs 'snr1_1,..,snr1_K;snr2_1,..,snr2_K'")
    common.add_argument("--b", type=float, help="minimum energy rate")
    common.add_argument("--eta", type=float, default=1e-3, help="equilibrium slack in bits (default 1e-3)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--tol", type=float, default=None, help="numerical tolerance")
    common.add_argument("--manifest", help="write a run manifest JSON here")

    parser = argparse.ArgumentParser(prog="siet-mac", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("feasibility", parents=[common], help="classify an energy demand")
    p.set_defaults(func=cmd_feasibility)

    p = sub.add_parser("region", parents=[common], help="export region samples as CSV")
    p.add_argument("--samples", type=int, default=21)
    p.add_argument("--ne", action="store_true", help="export equilibrium sets instead")
    p.add_argument("--decoder", action="append", help="sud, sic:1,2,.. or ts (repeatable)")
    p.add_argument("--energy-levels", type=int, default=1)
    p.add_argument("--capacity-out", help="with --ne, also write capacity samples here")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("dynamics", parents=[common], help="run best-response dynamics")
    p.add_argument("--decoder", default="sud")
    p.add_argument("--start", help="comma-separated start split")
    p.add_argument("--rounds", type=int, default=100)
    p.add_argument("--cooperative-init", action="store_true")
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo energy-rate check")
    p.add_argument("--beta", help="comma-separated power split")
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--target-b", type=float)
    p.add_argument("--per-trial", action="store_true")
    p.add_argument("--csv", help="per-trial energy rates as CSV")
    p.add_argument("--check", action="store_true", help="exit 6 unless mean_B is within --tol of E(beta)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bsc", parents=[common], help="BSC information-energy curve")
    p.add_argument("--p", type=float, help="crossover probability (default 0.15)")
    p.add_argument("--points", type=int, default=200)
    p.set_defaults(func=cmd_bsc)
    return parser


def _code_for(exc: BaseException) -> int:
    if isinstance(exc, CliError):
        return exc.code
    if isinstance(exc, errors.InfeasibleDemand):
        return EXIT_INFEASIBLE
    if isinstance(exc, errors.UnsupportedK):
        return EXIT_UNSUPPORTED_K
    if isinstance(exc, errors.NoFeasibleResponse):
        return EXIT_NO_RESPONSE
    return EXIT_CONFIG


def _manifest(args, argv, outputs, code, started):
    from . import __version__

    resolved = {k: v for k, v in vars(args).items() if k != "func"}
    doc = {
        "command": args.command,
        "argv": list(argv),
        "config": resolved,
        "version": __version__,
        "seed": args.seed,
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(),
        "outputs": outputs,
        "exit_code": code,
    }
    with open(args.manifest, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_json(doc))


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.tol_given = args.tol
    if args.tol is None:
        args.tol = DEFAULT_TOL
    started = datetime.now(timezone.utc).isoformat()
    outputs: list[str] = []
    try:
        code = args.func(args, outputs)
    except (errors.SietError, ValueError, OSError, CliError) as exc:
        code = _code_for(exc)
        print(f"siet-mac {args.command}: {exc}", file=sys.stderr)
    if args.manifest:
        _manifest(args, argv, outputs, code, started)
    return code


if __name__ == "__main__":
    sys.exit(main())

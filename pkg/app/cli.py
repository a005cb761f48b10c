"""Command line entry point: python -m app.cli <command> [options]

Exit codes: 0 on success, 1 on configuration errors, 2 on runtime errors.
"""

import argparse
import os
import sys

import numpy as np
from dotenv import dotenv_values

from app.models.geometry_model import BlockGeometry
from app.models.noise_model import NoiseCovariance
from app.models.observation_model import ObservationSet, Seed
from app.utils import harness
from app.utils.errors import ConfigError, SpecvError
from app.utils.logger import logger
from app.utils.settings import DEFAULT_OUTPUT_DIR
from app.utils.simulation import simulate_observations

CSV_OPTIONS = {"index": False, "float_format": "%.17g", "lineterminator": "\n"}


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage problems as ConfigError instead of exiting"""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}", {"argv": message})


def _model_options(parser):
    parser.add_argument("--preset", help="parametric_s4, timevarying_s4, their _small variants, or custom")
    parser.add_argument("--n", type=int, help="number of increments")
    parser.add_argument("--h-inv", dest="h_inv", type=int, help="number of blocks 1/h")
    parser.add_argument("--model-tag", dest="model_tag", choices=("E0", "E3"))
    parser.add_argument("--eta-x", dest="eta_x", type=float)
    parser.add_argument("--eta-y", dest="eta_y", type=float)
    parser.add_argument("--eta-xy", dest="eta_xy", type=float)
    parser.add_argument("--sigma-x", dest="sigma_x", type=float)
    parser.add_argument("--sigma-y", dest="sigma_y", type=float)
    parser.add_argument("--rho", type=float)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--config", help="flat KEY=value experiment config")
    common.add_argument("--out", help=f"output directory (default {DEFAULT_OUTPUT_DIR})")

    parser = _Parser(prog="specv", description="Localized spectral covolatility estimation")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    simulate = commands.add_parser("simulate", parents=[common], help="simulate one noisy observation set")
    _model_options(simulate)
    simulate.add_argument("--stream", type=int, default=0, help="replication stream of the seed")
    simulate.add_argument("--file", default="observations.csv", help="output file name inside --out")

    estimate = commands.add_parser("estimate", parents=[common], help="run one estimator")
    _model_options(estimate)
    estimate.add_argument("--in", dest="input", help="observation CSV written by simulate")
    estimate.add_argument("--mode", default="specv_adaptive", help="estimator name")
    estimate.add_argument("--J", type=int, help="spectral cut-off")
    estimate.add_argument("--noise-source", dest="noise_source_cli", choices=("known", "estimated"))
    estimate.add_argument("--stream", type=int, default=0)

    mc = commands.add_parser("mc", parents=[common], help="run a Monte Carlo experiment")
    mc.add_argument("--workers", type=int, help="worker processes")
    mc.add_argument("--replications", type=int)

    avar = commands.add_parser("avar", parents=[common], help="asymptotic variance curves over rho")
    avar.add_argument("--rho-min", type=float, default=-0.95)
    avar.add_argument("--rho-max", type=float, default=0.95)
    avar.add_argument("--points", type=int, default=39)
    avar.add_argument("--sigma-x", dest="sigma_x", type=float, default=1.0)
    avar.add_argument("--sigma-y", dest="sigma_y", type=float, default=1.0)
    avar.add_argument("--eta-x", dest="eta_x", type=float, default=0.1)
    avar.add_argument("--eta-y", dest="eta_y", type=float, default=0.1)
    avar.add_argument("--eta-xy", dest="eta_xy", type=float, default=0.0)
    avar.add_argument("--time-varying", action="store_true", help="use the time-varying volatility design")
    avar.add_argument("--constants", help="N,D,C of an MSRC-type variance curve")

    check = commands.add_parser("check", parents=[common], help="residuals of the exact identities")
    check.add_argument("--samples", type=int, default=100)
    return parser


def _config_pairs(args, keys):
    if args.config and not os.path.isfile(args.config):
        raise ConfigError("config file not found", {"config": args.config})
    pairs = dict(dotenv_values(args.config)) if args.config else {}
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            pairs[key] = str(value)
    if args.seed is not None:
        pairs["master_seed"] = str(args.seed)
    if args.out is not None:
        pairs["outputs"] = args.out
    return pairs


MODEL_KEYS = ("preset", "n", "h_inv", "model_tag", "eta_x", "eta_y", "eta_xy", "sigma_x", "sigma_y", "rho")


def _output_dir(args, cfg=None):
    if args.out:
        return args.out
    return cfg.outputs if cfg is not None else DEFAULT_OUTPUT_DIR


def cmd_simulate(args):
    cfg = harness.parse_config(_config_pairs(args, MODEL_KEYS))
    spec = harness.build_model(cfg)
    obs = simulate_observations(spec, cfg.n, Seed(cfg.master_seed, args.stream), h_inv=cfg.h_inv)
    path = os.path.join(_output_dir(args, cfg), args.file)
    obs.write_csv(path)
    print(path)
    return 0


def cmd_estimate(args):
    pairs = _config_pairs(args, MODEL_KEYS + ("J",))
    if args.input:
        obs = ObservationSet.read_csv(args.input)
        pairs["n"] = str(obs.n)
        if obs.meta.preset and "preset" not in pairs:
            pairs["preset"] = obs.meta.preset
        if "h_inv" not in pairs:
            pairs["h_inv"] = str(obs.meta.h_inv or BlockGeometry.default(obs.n).h_inv)
        cfg = harness.parse_config(pairs)
    else:
        cfg = harness.parse_config(pairs)
        obs = simulate_observations(harness.build_model(cfg), cfg.n, Seed(cfg.master_seed, args.stream), h_inv=cfg.h_inv)
    if args.mode not in harness.ESTIMATORS:
        raise ConfigError("unknown estimator", {"mode": args.mode})

    source = args.noise_source_cli or cfg.source_for(args.mode)
    report = harness.run_estimator(args.mode, obs, harness.estimation_context(cfg), source)
    frame = report.to_frame()
    out = _output_dir(args, cfg)
    os.makedirs(out, exist_ok=True)
    frame.to_csv(os.path.join(out, "estimate.csv"), **CSV_OPTIONS)
    print(frame.to_csv(**CSV_OPTIONS), end="")
    return 0


def cmd_mc(args):
    pairs = _config_pairs(args, ("replications", "workers"))
    cfg = harness.parse_config(pairs)
    report = harness.run_experiment(cfg)
    out = _output_dir(args, cfg)
    harness.write_outputs(report, out)
    print(report.summary.to_string(index=False))
    for message in report.warnings:
        print(f"warning: {message}", file=sys.stderr)
    return 0


def _constants(raw):
    if raw is None:
        return None
    try:
        N, D, C = (float(part) for part in raw.split(","))
    except ValueError as e:
        raise ConfigError("constants must be three comma separated numbers", {"constants": raw}) from e
    return N, D, C


def cmd_avar(args):
    if args.points < 1:
        raise ConfigError("need at least one grid point", {"points": str(args.points)})
    grid = np.linspace(args.rho_min, args.rho_max, args.points)
    if np.any(np.abs(grid) >= 1.0):
        raise ConfigError("correlations must lie in (-1, 1)", {"rho": f"[{args.rho_min}, {args.rho_max}]"})
    noise = NoiseCovariance.from_levels(args.eta_x, args.eta_y, args.eta_xy)
    frame = harness.variance_curves(grid, args.sigma_x, args.sigma_y, noise, _constants(args.constants), args.time_varying)
    out = _output_dir(args)
    os.makedirs(out, exist_ok=True)
    frame.to_csv(os.path.join(out, "avar.csv"), **CSV_OPTIONS)
    print(frame.to_string(index=False))
    return 0


def cmd_check(args):
    report = harness.run_identity_checks(samples=args.samples, seed=args.seed or 0)
    for row in report.itertuples():
        status = "ok" if row.passed else "FAILED"
        print(f"{row.identity:<22} {row.parameter:<20} {row.residual:.3e}  {status}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        report.to_csv(os.path.join(args.out, "check.csv"), **CSV_OPTIONS)
    return 0 if report["passed"].all() else 2


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "mc": cmd_mc,
    "avar": cmd_avar,
    "check": cmd_check,
}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (SpecvError, OSError) as e:
        logger.error(f"Runtime error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

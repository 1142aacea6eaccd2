"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numeric or solver error,
4 file I/O error.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import FORMATS, MODES, POLICIES, ConfigError, RunConfig, config_from_mapping, load_config
from .errors import ReceiverError
from .experiments import (
    ENGINES,
    _jsonable,
    amplitude_sweep,
    beta_sweep,
    crossover_find,
    gamma_sweep,
    optimal_displacement,
)
from .models import DisplacementSetup
from .pulse_sim import generate_pulse_log
from .receivers import displacement_error, homodyne_error_model
from .solver import optimal_beta, optimal_transmittance

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

# flag name -> config key
_OVERRIDES = {
    "alpha2": "alpha2", "eta": "eta", "nu": "nu", "xi": "xi", "eta_hd": "eta_hd",
    "excess_noise": "excess_noise", "gamma2": "gamma2", "beta": "beta",
    "transmittance": "transmittance", "policy": "policy", "engine": "engine",
    "trials": "trials", "seed": "seed", "workers": "workers", "mode": "mode",
    "out": "out", "format": "format", "receivers": "receivers",
}


def provenance(command: str) -> dict:
    return {
        "command": command,
        "package": "coherent_receivers",
        "version": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def document(command: str, cfg: RunConfig, result: dict) -> dict:
    return {"provenance": provenance(command), "config": cfg.to_dict(), "result": _jsonable(result)}


def _dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _emit_sweep(command, cfg, result):
    doc = document(command, cfg, result.to_dict())
    if cfg.out:
        base = Path(cfg.out)
        _write(base.with_suffix(".csv"), result.to_csv())
        _write(base.with_suffix(".json"), _dump_json(doc))
    else:
        sys.stdout.write(result.to_csv() if cfg.format == "csv" else _dump_json(doc))
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)


def _emit_report(command, cfg, report: dict, lines: list[str]):
    doc = document(command, cfg, report)
    if cfg.out:
        _write(Path(cfg.out).with_suffix(".json"), _dump_json(doc))
    if cfg.format == "json":
        sys.stdout.write(_dump_json(doc))
    else:
        print("\n".join(lines))


def cmd_compare(cfg: RunConfig) -> int:
    if cfg.policy == "fixed_beta":
        raise ConfigError("policy: 'fixed_beta' has no meaning across an amplitude sweep")
    result = amplitude_sweep(
        cfg.grid("alpha2_grid"), cfg.detector, cfg.homodyne, cfg.receivers,
        engine=cfg.engine, mode=cfg.mode, transmittance=cfg.transmittance,
        gamma2=cfg.sweep_gamma2, trials=cfg.trials, seed=cfg.seed, workers=cfg.workers,
    )
    _emit_sweep("compare", cfg, result)
    return EXIT_OK


def cmd_sweep_beta(cfg: RunConfig) -> int:
    result = beta_sweep(
        cfg.problem, cfg.detector, cfg.grid("beta2_grid"), transmittance=cfg.transmittance,
        gamma2=cfg.sweep_gamma2, engine=cfg.engine, trials=cfg.trials, seed=cfg.seed,
        workers=cfg.workers,
    )
    _emit_sweep("sweep-beta", cfg, result)
    return EXIT_OK


def cmd_sweep_gamma(cfg: RunConfig) -> int:
    result = gamma_sweep(cfg.problem, cfg.detector, cfg.grid("gamma2_grid"))
    _emit_sweep("sweep-gamma", cfg, result)
    return EXIT_OK


def cmd_optimize(cfg: RunConfig) -> int:
    problem, det = cfg.problem, cfg.detector
    res = optimal_beta(problem, det, cfg.transmittance)
    p = displacement_error(problem, det, DisplacementSetup(cfg.transmittance, res.root))
    report = {
        "alpha2": problem.alpha2,
        "fixed_transmittance": {
            "transmittance": cfg.transmittance, "beta": res.root, "beta2": res.root**2,
            "residual": res.residual, "iterations": res.iterations, "error": p,
        },
    }
    lines = [
        f"alpha2       = {problem.alpha2:.6g}",
        f"T (fixed)    = {cfg.transmittance:.6g}",
        f"beta*        = {res.root:.10g}  (beta*^2 = {res.root**2:.10g})",
        f"residual     = {res.residual:.3e}  ({res.iterations} iterations)",
        f"error        = {p:.10g}",
    ]
    if cfg.policy == "fixed_gamma":
        gamma = cfg.gamma2**0.5
        t_res = optimal_transmittance(problem, det, gamma)
        setup = DisplacementSetup.from_gamma(gamma, t_res.root)
        p_t = displacement_error(problem, det, setup)
        report["fixed_gamma"] = {
            "gamma2": cfg.gamma2, "transmittance": t_res.root, "beta": setup.beta,
            "beta2": setup.beta**2, "residual": t_res.residual,
            "iterations": t_res.iterations, "error": p_t,
        }
        lines += [
            f"gamma2       = {cfg.gamma2:.6g}",
            f"T*           = {t_res.root:.10g}  (beta = {setup.beta:.10g})",
            f"residual     = {t_res.residual:.3e}  ({t_res.iterations} iterations)",
            f"error        = {p_t:.10g}",
        ]
    elif cfg.policy == "fixed_beta":
        setup = DisplacementSetup(cfg.transmittance, cfg.beta)
        report["fixed_beta"] = {"transmittance": cfg.transmittance, "beta": cfg.beta,
                                "error": displacement_error(problem, det, setup)}
        lines.append(f"error at fixed beta={cfg.beta:.6g}: {report['fixed_beta']['error']:.10g}")
    _emit_report("optimize", cfg, report, lines)
    return EXIT_OK


def simulation_setup(cfg: RunConfig) -> DisplacementSetup:
    if cfg.policy == "fixed_beta":
        return DisplacementSetup(cfg.transmittance, cfg.beta)
    return optimal_displacement(cfg.problem, cfg.detector, cfg.transmittance, cfg.sweep_gamma2)


def cmd_simulate(cfg: RunConfig) -> int:
    if cfg.seed is None:
        raise ConfigError("seed: required for simulate")
    problem, det, hd = cfg.problem, cfg.detector, cfg.homodyne
    setup = simulation_setup(cfg)
    log = generate_pulse_log(problem, det, setup, hd, cfg.trials, cfg.seed, workers=cfg.workers)
    apd, hom = log.summary()
    summary = {
        "setup": {"transmittance": setup.transmittance, "beta": setup.beta},
        "apd": {**vars(apd), "analytic": displacement_error(problem, det, setup)},
        "homodyne": {**vars(hom), "analytic": homodyne_error_model(problem, hd)},
    }
    doc = document("simulate", cfg, summary)
    if cfg.out:
        base = Path(cfg.out)
        _write(base.with_suffix(".csv"), log.to_csv())
        _write(base.with_suffix(".summary.json"), _dump_json(doc))
        sys.stdout.write(_dump_json(doc))
    else:
        sys.stdout.write(log.to_csv())
        sys.stderr.write(_dump_json(doc))
    return EXIT_OK


def cmd_crossover(cfg: RunConfig) -> int:
    a, b = cfg.crossover_pair
    x = crossover_find(a, b, tuple(cfg.crossover_bracket))
    report = {"receivers": [a, b], "bracket": cfg.crossover_bracket, "alpha2": x}
    _emit_report("crossover", cfg, report, [f"{a} = {b} at alpha2 = {x:.9f}"])
    return EXIT_OK


COMMANDS = {
    "compare": cmd_compare,
    "sweep-beta": cmd_sweep_beta,
    "sweep-gamma": cmd_sweep_gamma,
    "optimize": cmd_optimize,
    "simulate": cmd_simulate,
    "crossover": cmd_crossover,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON configuration file")
    common.add_argument("--alpha2", type=float, help="signal mean photon number |alpha|^2")
    common.add_argument("--grid", type=float, nargs=3, metavar=("START", "STOP", "N"),
                        help="evenly spaced |alpha|^2 grid for compare")
    common.add_argument("--eta", type=float, help="on/off detection efficiency")
    common.add_argument("--nu", type=float, help="dark counts per gate")
    common.add_argument("--xi", type=float, help="interference visibility")
    common.add_argument("--eta-hd", type=float, dest="eta_hd", help="homodyne efficiency")
    common.add_argument("--excess-noise", type=float, dest="excess_noise",
                        help="homodyne excess noise in shot-noise units")
    common.add_argument("--gamma2", type=float, help="auxiliary oscillator power |gamma|^2")
    common.add_argument("--beta", type=float, help="displacement for policy fixed_beta")
    common.add_argument("--transmittance", type=float, help="beam-splitter transmittance T")
    common.add_argument("--policy", choices=POLICIES)
    common.add_argument("--engine", choices=ENGINES)
    common.add_argument("--receivers", nargs="+")
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--mode", choices=MODES)
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--format", choices=FORMATS)

    parser = argparse.ArgumentParser(
        prog="coherent-receivers",
        description="Error rates of binary coherent-state receivers.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {key: getattr(args, flag) for flag, key in _OVERRIDES.items()
                 if getattr(args, flag) is not None}
    if args.grid is not None:
        start, stop, n = args.grid
        if n != int(n):
            raise ConfigError("grid: N must be an integer")
        overrides["alpha2_grid"] = {"start": start, "stop": stop, "points": int(n)}
    cfg = config_from_mapping(overrides, base=cfg).validate()
    if cfg.needs_seed() and cfg.seed is None:
        raise ConfigError("seed: required when the Monte Carlo engine is selected")
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ReceiverError as exc:
        print(f"{args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: run / sweep / validate.

Exit codes: 0 success, 1 validation failures, 2 invalid configuration,
3 a requested quantity is divergent (the offending functional is named on
stderr).  Reports are byte-identical for identical configurations
regardless of --threads.
"""
from __future__ import annotations

import argparse
import itertools
import multiprocessing
import sys

import numpy as np

from . import __version__, _core
from .config import ConfigError, ExperimentConfig
from .influence import (FUNCTIONAL_NAMES, DivergentFunctionalError,
                        compute_influence)
from .observables import duality_report, meter_distribution, optimal_epsilon
from .reporting import (duality_block, influence_block, stable_json,
                        sweep_header, sweep_row)
from .validation import run_validation

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_CONFIG = 2
EXIT_DIVERGENT = 3


def _axis_values(ax):
    if ax.scale == "log":
        return np.geomspace(ax.min, ax.max, ax.points)
    return np.linspace(ax.min, ax.max, ax.points)


def _compute_point(cfg: ExperimentConfig, overrides):
    setup = cfg.setup(overrides)
    spec = cfg.quadrature_spec()
    outputs = cfg.outputs()
    infl = compute_influence(setup, spec, include=outputs,
                             diagnostics=False)
    eps2 = setup.meter_epsilon2
    sigma2 = None
    rep = None
    if all(getattr(infl, n) is not None for n in FUNCTIONAL_NAMES):
        sigma2 = meter_distribution(infl, eps2, +1).variance
        rep = duality_report(setup, infl)
    elif infl.gamma_B is not None and infl.g_R_BB is not None:
        sigma2 = meter_distribution(infl, eps2, +1).variance
    return infl, eps2, sigma2, rep


_WORKER_CFG = None


def _init_worker(raw):
    global _WORKER_CFG
    _WORKER_CFG = ExperimentConfig.parse(raw)


def _sweep_worker(item):
    idx, overrides, values = item
    infl, eps2, sigma2, rep = _compute_point(_WORKER_CFG, overrides)
    return idx, sweep_row(values, infl, eps2, sigma2, rep)


def cmd_run(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    setup = cfg.setup()
    infl, eps2, sigma2, rep = _compute_point(cfg, {})
    fld = setup.resolved_field()
    doc = {
        "tool": {"name": "ctpfield", "version": __version__,
                 "kernel_backend": _core.BACKEND_NAME},
        "config": cfg.to_dict(),
        "field_resolved": {"mass": fld.m, "uv_cutoff": fld.uv_cutoff,
                           "smearing_radius": fld.smearing_radius},
        "protocols": {
            "alice": {"segments": [list(s) for s in setup.protocol_A.segments],
                      "past_plateau": setup.protocol_A.past_plateau},
            "bob": {"segments": [list(s) for s in setup.protocol_B.segments],
                    "past_plateau": setup.protocol_B.past_plateau},
        },
        "influence": influence_block(infl),
        "meter": None,
        "duality": None,
    }
    if sigma2 is not None:
        opt = optimal_epsilon(infl)
        doc["meter"] = {
            "epsilon2": eps2,
            "sigma2": sigma2,
            "mean_plus": infl.chi_bar_B,
            "mean_minus": -infl.chi_bar_B,
            "eps2_optimal": opt.eps2_opt,
            "sigma2_optimal": opt.sigma2_opt,
            "optimal_degenerate": opt.degenerate,
        }
    if rep is not None:
        doc["duality"] = duality_block(rep)
    text = stable_json(doc)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    axes = cfg.sweep_axes()
    if not axes:
        raise ConfigError("sweep", "at least one sweep axis is required")
    grids = [_axis_values(ax) for ax in axes]
    items = []
    for idx, combo in enumerate(itertools.product(*grids)):
        overrides = {ax.parameter: float(v) for ax, v in zip(axes, combo)}
        items.append((idx, overrides, [float(v) for v in combo]))
    header = ",".join(sweep_header(axes))
    rows = [None] * len(items)
    if args.threads > 1:
        with multiprocessing.Pool(args.threads, initializer=_init_worker,
                                  initargs=(cfg.to_dict(),)) as pool:
            for idx, row in pool.imap_unordered(_sweep_worker, items):
                rows[idx] = row
    else:
        _init_worker(cfg.to_dict())
        for item in items:
            idx, row = _sweep_worker(item)
            rows[idx] = row
    text = "\n".join([header] + rows) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_validate(args) -> int:
    results = run_validation(seed=args.seed, quick=args.quick)
    for res in results:
        print(res.line())
    n_fail = sum(0 if r.passed else 1 for r in results)
    if args.out:
        doc = {"seed": args.seed,
               "checks": [{"name": r.name, "tolerance": r.tolerance,
                           "observed": r.observed, "passed": r.passed,
                           "detail": r.detail} for r in results]}
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(stable_json(doc))
    if n_fail:
        print(f"{n_fail} check(s) failed", file=sys.stderr)
        return EXIT_CHECK_FAILED
    print(f"all {len(results)} checks passed")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(
        prog="ctpfield",
        description="Two-detector scalar-field decoherence and duality")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="single experiment -> JSON report")
    run_p.add_argument("--config", required=True)
    run_p.add_argument("--out", default=None)
    run_p.set_defaults(func=cmd_run)

    sweep_p = sub.add_parser("sweep", help="parameter sweep -> CSV")
    sweep_p.add_argument("--config", required=True)
    sweep_p.add_argument("--out", default=None)
    sweep_p.add_argument("--threads", type=int, default=1)
    sweep_p.set_defaults(func=cmd_sweep)

    val_p = sub.add_parser("validate",
                           help="oracle-vs-closed-form battery")
    val_p.add_argument("--out", default=None)
    val_p.add_argument("--seed", type=int, default=0)
    val_p.add_argument("--quick", action="store_true",
                       help="reduced sample counts")
    val_p.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error at {exc.path}: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except FileNotFoundError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except DivergentFunctionalError as exc:
        print(f"divergent functional {exc.functional}: {exc.cause}",
              file=sys.stderr)
        return EXIT_DIVERGENT
    except ValueError as exc:
        # setup realisation errors (protocol/field constraints)
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG


if __name__ == "__main__":
    sys.exit(main())

"""Command line interface: generate instances, solve them, run sweeps,
annotate grid CSVs with reference lines.

Exit codes: 0 success, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import (
    SOLVER_KEYS,
    SweepSpec,
    alpha_min,
    read_rows_csv,
    run_sweep,
    write_rows_csv,
)
from .model import GenerationConfig, UniformGainPrior, generate_instance, load_instance
from .solver import SolverConfig, run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

DEFAULT_INFLATION = 1.1


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _read_text(path):
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as err:
        raise CliError(f"cannot read {path}: {err}", EXIT_IO) from err


def _read_json(path):
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as err:
        raise CliError(f"invalid JSON in {path}: {err}", EXIT_CONFIG) from err


def _solver_config_from_instance(instance, overrides):
    if instance.config is None:
        raise CliError(
            "instance carries no generation config; cannot derive assumed priors", EXIT_CONFIG
        )
    opts = dict(overrides)
    unknown = set(opts) - set(SOLVER_KEYS)
    if unknown:
        raise CliError(f"unknown solver keys: {sorted(unknown)}", EXIT_CONFIG)
    inflation = float(opts.pop("inflation_factor", DEFAULT_INFLATION))
    gain_mode = opts.pop("gain_mode", "blind")
    gen = instance.config
    try:
        return SolverConfig(
            assumed_signal_prior=gen.signal_prior,
            assumed_gain_prior=UniformGainPrior(
                center=gen.gain_prior.center,
                variance=inflation * gen.gain_prior.variance,
            ),
            gain_mode=gain_mode,
            **opts,
        )
    except (TypeError, ValueError) as err:
        raise CliError(f"invalid solver configuration: {err}", EXIT_CONFIG) from err


def cmd_generate(args):
    data = _read_json(args.config)
    try:
        config = GenerationConfig.from_dict(data)
        if args.seed is not None:
            config = GenerationConfig.from_dict({**config.to_dict(), "seed": args.seed})
    except (KeyError, TypeError, ValueError) as err:
        raise CliError(f"invalid generation config: {err}", EXIT_CONFIG) from err
    instance = generate_instance(config)
    try:
        instance.save(args.out)
    except OSError as err:
        raise CliError(f"cannot write {args.out}: {err}", EXIT_IO) from err
    print(f"wrote instance N={config.N} M={config.M} P={config.P} to {args.out}")
    return EXIT_OK


def cmd_solve(args):
    try:
        instance = load_instance(args.instance)
    except OSError as err:
        raise CliError(f"cannot read {args.instance}: {err}", EXIT_IO) from err
    except (KeyError, ValueError) as err:
        raise CliError(f"malformed instance file: {err}", EXIT_CONFIG) from err
    overrides = _read_json(args.solver) if args.solver else {}
    config = _solver_config_from_instance(instance, overrides)
    result = run(instance, config)
    text = result.to_json()
    print(text)
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(text + "\n")
        except OSError as err:
            raise CliError(f"cannot write {args.out}: {err}", EXIT_IO) from err
    if args.trace:
        try:
            with open(args.trace, "w") as fh:
                fh.write("iteration,crit\n")
                for i, crit in enumerate(result.crit_trace, start=1):
                    fh.write(f"{i},{format(crit, '.17g')}\n")
        except OSError as err:
            raise CliError(f"cannot write {args.trace}: {err}", EXIT_IO) from err
    return EXIT_OK


def cmd_sweep(args):
    data = _read_json(args.spec)
    try:
        spec = SweepSpec.from_dict(data)
        if args.seed is not None:
            spec = SweepSpec.from_dict({**spec.to_dict(), "base_seed": args.seed})
    except (KeyError, TypeError, ValueError) as err:
        raise CliError(f"invalid sweep spec: {err}", EXIT_CONFIG) from err
    result = run_sweep(spec, threads=args.threads)
    try:
        write_rows_csv(result.rows, args.out)
    except OSError as err:
        raise CliError(f"cannot write {args.out}: {err}", EXIT_IO) from err
    print(f"wrote {len(result.rows)} rows to {args.out}")
    return EXIT_OK


def _parse_refs(pairs):
    refs = []
    for pair in pairs or ():
        label, sep, value = pair.partition("=")
        if not sep or not label:
            raise CliError(f"reference lines take the form label=value, got {pair!r}", EXIT_CONFIG)
        try:
            refs.append((label, float(value)))
        except ValueError as err:
            raise CliError(f"reference value for {label!r} is not a number: {value!r}", EXIT_CONFIG) from err
    return refs


def cmd_annotate(args):
    try:
        rows = read_rows_csv(args.csv)
    except OSError as err:
        raise CliError(f"cannot read {args.csv}: {err}", EXIT_IO) from err
    except ValueError as err:
        raise CliError(str(err), EXIT_CONFIG) from err
    refs = _parse_refs(args.ref)
    try:
        import csv as _csv

        with open(args.out, "w", newline="") as fh:
            writer = _csv.writer(fh)
            writer.writerow(
                ["alpha", "rho", "P", "sigma2", "N", "seed", "mse_corr", "iterations",
                 "converged", "alpha_min", *[label for label, _ in refs]]
            )
            for r in rows:
                writer.writerow(
                    [format(r.alpha, ".17g"), format(r.rho, ".17g"), r.P,
                     format(r.sigma2, ".17g"), r.N, r.seed, format(r.mse_corr, ".17g"),
                     r.iterations, r.status, format(alpha_min(r.P, r.rho), ".17g"),
                     *[format(v, ".17g") for _, v in refs]]
                )
    except OSError as err:
        raise CliError(f"cannot write {args.out}: {err}", EXIT_IO) from err
    print(f"annotated {len(rows)} rows into {args.out}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="calamp",
        description="Blind calibration for compressed sensing: instances, solver, sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="draw a problem instance and save it")
    p.add_argument("--config", required=True, help="generation config JSON file")
    p.add_argument("--out", required=True, help="output instance file (.npz)")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="solve one saved instance, print result JSON")
    p.add_argument("--instance", required=True, help="instance file from `generate`")
    p.add_argument("--solver", default=None, help="solver override JSON file")
    p.add_argument("--out", default=None, help="also write the result JSON here")
    p.add_argument("--trace", default=None, help="write the per-iteration crit trace CSV here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="run a sweep spec, write one CSV row per replicate")
    p.add_argument("--spec", required=True, help="sweep spec JSON file")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--threads", type=int, default=1, help="worker threads")
    p.add_argument("--seed", type=int, default=None, help="override the base seed")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("annotate", help="append alpha_min and reference columns to a grid CSV")
    p.add_argument("--csv", required=True, help="grid CSV from `sweep`")
    p.add_argument("--out", required=True, help="annotated CSV path")
    p.add_argument(
        "--ref", action="append", default=[], metavar="LABEL=VALUE",
        help="constant reference line, repeatable",
    )
    p.set_defaults(func=cmd_annotate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: render fuzzy fractals, run check suites, decompose.

Exit status contract: 0 when everything passed, 1 when a check or run
failed, 2 for usage and configuration errors.
"""

import argparse
import sys

from .config import ConfigError, load_config
from .fuzzy import FuzzyError, delta
from .oracle import OracleError, generate_instances
from .pgm import PgmError, save_fuzzy
from .picard import ClassMembershipError, decompose, picard_limit
from .report import (certificate_figure, check_figure, decomposition_figure,
                     write_certificate_report, write_check_report,
                     write_decomposition_report)
from .spaces import ConvergenceError, GridSpace, SpaceError
from .verify import (check_fixture, failures, load_fixture, run_finite_suite,
                     run_grid_suite)


def _parse_seed_point(text, space):
    """A --seed override names one point: 'col,row' on grids, a label else."""
    if isinstance(space, GridSpace):
        parts = text.split(",")
        if len(parts) != 2:
            raise ConfigError(f"grid seed point must be 'col,row', got {text!r}")
        try:
            return (int(parts[0]), int(parts[1]))
        except ValueError:
            raise ConfigError(f"grid seed point must be integers, got {text!r}")
    if not space.contains(text):
        raise ConfigError(f"seed point {text!r} is not in the space")
    return text


def _load_runspec(args):
    if not args.config:
        raise ConfigError("--config is required for this command")
    spec = load_config(args.config)
    if args.eps is not None:
        spec.eps = args.eps
    if args.budget is not None:
        spec.budget = args.budget
    if args.seed is not None:
        point = _parse_seed_point(args.seed, spec.system.space)
        spec.seed = delta(spec.system.space, point, spec.system.levels)
    return spec


def cmd_render(args) -> int:
    spec = _load_runspec(args)
    if not isinstance(spec.system.space, GridSpace):
        raise ConfigError("render needs a grid-space config (finite spaces "
                          "have no image; use decompose for tables)")
    limit, cert = picard_limit(spec.system, spec.seed, eps=spec.eps,
                               budget=spec.budget)
    save_fuzzy(args.out, limit)
    report = args.report or args.out + ".cert.tsv"
    write_certificate_report(report, cert, label=args.out)
    certificate_figure(report + ".png", cert, label=args.out)
    print(f"wrote {args.out} ({limit.space.width}x{limit.space.height}, "
          f"max level {limit.max_tick()})")
    print(f"wrote {report} (terminal {cert.terminal}, {cert.steps} steps)")
    return 0


def cmd_verify(args) -> int:
    results = []
    if args.fixture:
        inst, expected = load_fixture(args.fixture)
        results += check_fixture(inst, expected)
        results += run_finite_suite([inst])
    else:
        instances = generate_instances(args.seed, args.count, mode="orbital")
        instances += generate_instances(args.seed + 1, 1, mode="targeted")
        results += run_finite_suite(instances)
        if args.grid_size:
            results += run_grid_suite(args.grid_size)
    if args.only:
        results = [r for r in results if args.only in r.name]
        if not results:
            raise ConfigError(f"no check matches --only {args.only!r}")
    report = args.report or args.out or "verify-report.tsv"
    meta = {"mode": "fixture" if args.fixture else "generated",
            "seed": args.fixture or args.seed}
    write_check_report(report, results, meta)
    check_figure(report + ".png", results)
    bad = failures(results)
    for r in bad:
        print(r.line())
    print(f"{len(results) - len(bad)}/{len(results)} checks passed; "
          f"report at {report}")
    return 1 if bad else 0


def cmd_decompose(args) -> int:
    spec = _load_runspec(args)
    dec = decompose(spec.system, spec.seed, eps=spec.eps, budget=spec.budget)
    out = args.out
    grid = isinstance(spec.system.space, GridSpace)
    if grid:
        save_fuzzy(out + ".whole.pgm", dec.whole)
        save_fuzzy(out + ".envelope.pgm", dec.envelope)
        reps = sorted(dec.distinct_parts)
        for i, rep in enumerate(reps):
            save_fuzzy(f"{out}.part{i}.pgm", dec.distinct_parts[rep])
        print(f"wrote {out}.whole.pgm, {out}.envelope.pgm and "
              f"{len(reps)} part image(s)")
    else:
        _write_part_table(out + ".parts.tsv", dec)
        print(f"wrote {out}.parts.tsv")
    report = args.report or out + ".gaps.tsv"
    write_decomposition_report(report, dec, label=out)
    decomposition_figure(report + ".png", dec)
    print(f"envelope gap {dec.gap:.6g}, core envelope gap {dec.core_gap:.6g}; "
          f"report at {report}")
    return 0


def _write_part_table(path, dec) -> None:
    """Finite-space decomposition as a membership table, one row per point."""
    space = dec.whole.space
    reps = sorted(dec.distinct_parts)
    header = ["point", "whole", "envelope"] + [f"part@{r}" for r in reps]
    lines = ["\t".join(header)]
    for p in space.labels:
        row = [str(p), str(dec.whole.tick(p)), str(dec.envelope.tick(p))]
        row += [str(dec.distinct_parts[r].tick(p)) for r in reps]
        lines.append("\t".join(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fuzzyfractal",
        description="Iterate orbital fuzzy function systems to their fuzzy "
                    "fractals, render them as grayscale images, and check "
                    "the structural identities they satisfy.")
    sub = parser.add_subparsers(dest="command", required=True)

    render = sub.add_parser("render", help="iterate a configured system and "
                            "write the limit as a PGM image")
    render.add_argument("--config", required=True)
    render.add_argument("--out", required=True, help="output image path")
    render.add_argument("--seed", default=None,
                        help="replace the configured seed with a single "
                             "full-membership point ('col,row')")
    render.add_argument("--eps", type=float, default=None)
    render.add_argument("--budget", type=int, default=None)
    render.add_argument("--report", default=None,
                        help="certificate path (default: OUT.cert.tsv)")
    render.set_defaults(func=cmd_render)

    verify = sub.add_parser("verify", help="run the structural check suite "
                            "and write a delimited report")
    verify.add_argument("--seed", type=int, default=7,
                        help="generator seed for random instances")
    verify.add_argument("--count", type=int, default=20,
                        help="number of generated instances")
    verify.add_argument("--fixture", default=None,
                        help="check a frozen instance file instead of "
                             "generating instances")
    verify.add_argument("--only", default=None,
                        help="keep only checks whose name contains this")
    verify.add_argument("--grid-size", type=int, default=65,
                        help="grid scenario size, 0 to skip grid checks")
    verify.add_argument("--out", default=None, help="report path")
    verify.add_argument("--report", default=None,
                        help="alias for --out (takes precedence)")
    verify.set_defaults(func=cmd_verify)

    dec = sub.add_parser("decompose", help="split the fuzzy fractal into "
                         "per-point parts and report envelope gaps")
    dec.add_argument("--config", required=True)
    dec.add_argument("--out", required=True,
                     help="output prefix for images or tables")
    dec.add_argument("--seed", default=None,
                     help="replace the configured seed with a single "
                          "full-membership point")
    dec.add_argument("--eps", type=float, default=None)
    dec.add_argument("--budget", type=int, default=None)
    dec.add_argument("--report", default=None,
                     help="gap report path (default: OUT.gaps.tsv)")
    dec.set_defaults(func=cmd_decompose)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ClassMembershipError, SpaceError,
            FuzzyError, PgmError, OracleError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

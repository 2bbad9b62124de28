"""Command-line front end.

Exit status: 0 when every suite passes, 1 when some suite fails, 2 for
usage and configuration errors.
"""
from __future__ import annotations

import argparse
import difflib
import json
import sys
from pathlib import Path

from .errors import ConfigError, SplitCantorError
from .experiment import (
    config_from_echo,
    dumps,
    format_step,
    fuzz_number_lemma,
    load_config,
    prepare,
    report_passed,
    run_experiment,
    strip_timing,
    with_seed,
)


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_gen_space(args) -> int:
    config = with_seed(load_config(args.config), args.seed)
    setup = prepare(config)
    space = setup.space
    doc = {
        "n": space.n,
        "lambda": space.lam,
        "M": space.M,
        "seed": config.seed,
        "points": len(space),
        "codes": list(space.codes),
        "twin_groups": [[list(g.alpha), list(g.beta), g.shared] for g in setup.layout],
        "script": [format_step(s) for s in setup.script],
    }
    _emit(dumps(doc), args.out)
    return 0


def cmd_run(args) -> int:
    config = with_seed(load_config(args.config), args.seed)
    report = run_experiment(config, parallel=args.parallel, timing=args.timing)
    _emit(dumps(report), args.out)
    for suite in report["suites"]:
        print(f"{suite['name']}: {suite['status']}", file=sys.stderr)
    return 0 if report_passed(report) else 1


def cmd_fuzz(args) -> int:
    try:
        n_range = tuple(int(x) for x in args.n.split(","))
    except ValueError as exc:
        raise ConfigError(f"--n expects comma-separated integers, got {args.n!r}") from exc
    if any(n < 2 for n in n_range):
        raise ConfigError("--n values must be >= 2")
    summary = fuzz_number_lemma(args.count, args.seed, n_range, parallel=args.parallel)
    _emit(dumps(summary), args.out)
    print(f"instances={summary['instances']} failures={summary['failure_count']} "
          f"discarded={summary['discarded']}", file=sys.stderr)
    return 0 if summary["failure_count"] == 0 else 1


def cmd_verify_report(args) -> int:
    """Re-run the experiment echoed in a report and compare the output byte for byte."""
    try:
        stored = json.loads(Path(args.report).read_text())
        config = config_from_echo(stored["config"])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot read report {args.report}: {exc}") from exc
    expected = dumps(strip_timing(stored))
    actual = dumps(run_experiment(config, parallel=args.parallel))
    if expected == actual:
        print("report reproduced", file=sys.stderr)
        return 0
    diff = difflib.unified_diff(expected.splitlines(), actual.splitlines(), "stored", "rerun", lineterm="", n=1)
    print("\n".join(list(diff)[:40]), file=sys.stderr)
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="splitcantor", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--seed", type=int, default=None if config else 0, help="override the seed")
        p.add_argument("--out", help="write JSON here instead of stdout")

    p = sub.add_parser("gen-space", help="materialize codes, twin groups and the chain script")
    common(p)
    p.set_defaults(func=cmd_gen_space)

    p = sub.add_parser("run", help="run the configured suites and write a report")
    common(p)
    p.add_argument("--parallel", action="store_true", help="run suites on a thread pool")
    p.add_argument("--timing", action="store_true", help="record duration_ms per suite")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("fuzz-number-lemma", help="fuzz the pair lemma against the enumeration oracle")
    common(p, config=False)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--n", default="2,3,4", help="comma-separated values of n")
    p.add_argument("--parallel", action="store_true")
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("verify-report", help="re-run a report's config and compare")
    p.add_argument("report")
    p.add_argument("--parallel", action="store_true")
    p.set_defaults(func=cmd_verify_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SplitCantorError as exc:
        # the script cannot be executed on this space (e.g. an unrealizable pattern)
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())

"""Experiment configs, suite execution and deterministic JSON reports."""
from __future__ import annotations

import json
import random
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

from . import __version__
from .analysis import (
    PatternSpec,
    agreement_depth,
    left_separation_entries,
    number_lemma_pair,
    oracle_pairs,
    refute_left_separation,
    verify_pattern,
)
from .cantor import Ground, Space, SpaceConfig, Split, make_space
from .errors import ConfigError, SplitCantorError
from .family import SplittingFamily, derive_family, residue_sweep, verify_balanced, verify_splitting
from .forcing import AddIndex, Chain, Complete, Deepen, RealizePattern, Step, build_chain
from .generators import TwinGroup, number_lemma_instance, random_codes, twin_block_codes, twin_pattern_steps
from .measures import check_biorthogonal, discrete_witness, property6_system

SUITES = ("splitting", "balanced", "biorthogonal", "discrete", "residue", "patterns", "number-lemma-fuzz")
WITNESS_CAP = 20


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    lam: int
    M: int
    seed: int = 0
    codes: Optional[tuple[str, ...]] = None  # None means the twin-blocks generator
    block_size: int = 2
    prefix_len: int = 1
    fillers: str = "random"
    script: Optional[tuple[Step, ...]] = None
    suites: tuple[str, ...] = SUITES
    fuzz_count: int = 1000
    fuzz_n: tuple[int, ...] = (2, 3, 4)

    @property
    def mode(self) -> str:
        return "twin-blocks" if self.codes is None else "explicit"

    def validate(self) -> None:
        if self.n < 2:
            raise ConfigError(f"n must be >= 2 (got {self.n})")
        if self.lam < 1 or self.M < 1:
            raise ConfigError("lambda and M must be positive")
        if self.lam > 2**self.M:
            raise ConfigError(f"lambda={self.lam} > 2^M={2 ** self.M}: codes cannot be distinct")
        if self.codes is not None and len(self.codes) != self.lam:
            raise ConfigError(f"{len(self.codes)} codes given for lambda={self.lam}")
        if self.codes is None and not 0 <= self.prefix_len < self.M:
            raise ConfigError(f"twin-block prefix_len must lie in [0, M) (got {self.prefix_len})")
        if self.fillers not in ("default", "random"):
            raise ConfigError(f"fillers must be 'default' or 'random' (got {self.fillers!r})")
        unknown = [s for s in self.suites if s not in SUITES]
        if unknown:
            raise ConfigError(f"unknown suites: {', '.join(unknown)}")
        if "number-lemma-fuzz" in self.suites and self.fuzz_count < 1:
            raise ConfigError("fuzz_count must be >= 1")
        if any(m < 2 for m in self.fuzz_n):
            raise ConfigError("fuzz_n values must be >= 2")


# config text format


def _ints(text: str, sep: str = ",") -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(sep) if x.strip())
    except ValueError as exc:
        raise ConfigError(f"expected integers separated by {sep!r}: {text!r}") from exc


def parse_step(line: str) -> Step:
    word, *args = line.split()
    word = word.upper()
    try:
        if word == "DEEPEN" and len(args) == 1:
            return Deepen(int(args[0]))
        if word == "ADD" and len(args) == 1:
            return AddIndex(int(args[0]))
        if word == "COMPLETE" and not args:
            return Complete()
        if word == "PATTERN" and len(args) == 4:
            eps = tuple(_ints(row) for row in args[2].split(";"))
            return RealizePattern(_ints(args[0]), _ints(args[1]), eps, _ints(args[3]))
    except ValueError as exc:
        raise ConfigError(f"bad step {line!r}: {exc}") from exc
    raise ConfigError(f"bad step {line!r}; expected DEEPEN k | ADD xi | PATTERN a b eps delta | COMPLETE")


def format_step(step: Step) -> str:
    join = lambda xs: ",".join(map(str, xs))  # noqa: E731
    if isinstance(step, Deepen):
        return f"DEEPEN {step.k}"
    if isinstance(step, AddIndex):
        return f"ADD {step.xi}"
    if isinstance(step, Complete):
        return "COMPLETE"
    eps = ";".join(join(row) for row in step.eps)
    return f"PATTERN {join(step.alpha)} {join(step.beta)} {eps} {join(step.delta)}"


_INT_KEYS = {"n": "n", "lambda": "lam", "M": "M", "seed": "seed", "block_size": "block_size",
             "prefix_len": "prefix_len", "fuzz_count": "fuzz_count"}


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key = value`` lines and an optional ``[script]`` section."""
    values: dict[str, Any] = {}
    script: Optional[list[Step]] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.lower() == "[script]":
            script = []
            continue
        if script is not None:
            script.append(parse_step(line))
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in _INT_KEYS:
            try:
                values[_INT_KEYS[key]] = int(value)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: {key} must be an integer") from exc
        elif key == "codes":
            if value != "twin-blocks":
                values["codes"] = tuple(c.strip() for c in value.split(",") if c.strip())
        elif key == "fillers":
            values["fillers"] = value
        elif key == "suites":
            values["suites"] = tuple(s.strip() for s in value.split(",") if s.strip())
        elif key == "fuzz_n":
            values["fuzz_n"] = _ints(value)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    missing = [k for k in ("n", "lam", "M") if k not in values]
    if missing:
        raise ConfigError(f"missing keys: {', '.join('lambda' if k == 'lam' else k for k in missing)}")
    if script is not None:
        values["script"] = tuple(script)
    config = ExperimentConfig(**values)
    config.validate()
    return config


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def config_echo(config: ExperimentConfig) -> dict:
    return {
        "n": config.n,
        "lambda": config.lam,
        "M": config.M,
        "seed": config.seed,
        "codes": "twin-blocks" if config.codes is None else list(config.codes),
        "block_size": config.block_size,
        "prefix_len": config.prefix_len,
        "fillers": config.fillers,
        "script": None if config.script is None else [format_step(s) for s in config.script],
        "suites": list(config.suites),
        "fuzz_count": config.fuzz_count,
        "fuzz_n": list(config.fuzz_n),
    }


def config_from_echo(echo: dict) -> ExperimentConfig:
    config = ExperimentConfig(
        n=echo["n"],
        lam=echo["lambda"],
        M=echo["M"],
        seed=echo["seed"],
        codes=None if echo["codes"] == "twin-blocks" else tuple(echo["codes"]),
        block_size=echo["block_size"],
        prefix_len=echo["prefix_len"],
        fillers=echo["fillers"],
        script=None if echo["script"] is None else tuple(parse_step(s) for s in echo["script"]),
        suites=tuple(echo["suites"]),
        fuzz_count=echo["fuzz_count"],
        fuzz_n=tuple(echo["fuzz_n"]),
    )
    config.validate()
    return config


# serialization


def to_jsonable(obj: Any) -> Any:
    """Points become a code string or [xi, i]; rationals become "p/q"."""
    if isinstance(obj, Ground):
        return obj.code
    if isinstance(obj, Split):
        return [obj.xi, obj.i]
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (set, frozenset)):
        return sorted((to_jsonable(x) for x in obj), key=lambda x: json.dumps(x))
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(report: dict) -> str:
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2) + "\n"


# experiment


@dataclass
class Setup:
    space: Space
    layout: list[TwinGroup]
    script: tuple[Step, ...]
    chain: Chain
    family: SplittingFamily


def build_space(config: ExperimentConfig) -> tuple[Space, list[TwinGroup], random.Random]:
    config.validate()
    rng = random.Random(config.seed)
    if config.codes is None:
        codes, layout = twin_block_codes(config.lam, config.M, config.block_size, config.prefix_len, rng)
    else:
        codes, layout = config.codes, []
    return make_space(SpaceConfig(n=config.n, M=config.M, codes=tuple(codes))), layout, rng


def prepare(config: ExperimentConfig) -> Setup:
    space, layout, rng = build_space(config)
    if config.script is not None:
        script = tuple(config.script)
    elif layout:
        script = (*twin_pattern_steps(config.n, layout, rng), Complete())
    else:
        script = (Complete(),)
    chain = build_chain(space, script, config.seed, config.fillers)
    return Setup(space, layout, script, chain, derive_family(space, chain))


@dataclass
class SuiteResult:
    name: str
    passed: bool
    witnesses: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    duration_ms: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "status": "pass" if self.passed else "fail",
            "witnesses": self.witnesses,
            "summary": self.summary,
            "duration_ms": self.duration_ms,
        }


def _report_suite(name: str, report) -> SuiteResult:
    witnesses = []
    for clause, failures in sorted(report.failures.items()):
        witnesses.extend({"clause": clause, **w} for w in failures[:WITNESS_CAP])
    counts = {c: {"checked": report.checked.get(c, 0), "failed": len(report.failures[c])}
              for c in sorted(report.failures)}
    return SuiteResult(name, report.ok, witnesses, counts)


def suite_splitting(setup: Setup, config: ExperimentConfig) -> SuiteResult:
    return _report_suite("splitting", verify_splitting(setup.family))


def suite_balanced(setup: Setup, config: ExperimentConfig) -> SuiteResult:
    return _report_suite("balanced", verify_balanced(setup.family))


def suite_biorthogonal(setup: Setup, config: ExperimentConfig) -> SuiteResult:
    result = check_biorthogonal(property6_system(setup.family))
    witnesses = [] if result.ok else [{"i": result.witness[0], "j": result.witness[1], "value": result.witness[2]}]
    return SuiteResult("biorthogonal", result.ok, witnesses, {"pairs": setup.space.lam**2})


def suite_discrete(setup: Setup, config: ExperimentConfig) -> SuiteResult:
    report = discrete_witness(setup.family)
    witnesses = [{"xi": xi, "eta": eta} for xi, eta in report.exceptions[:WITNESS_CAP]]
    summary = {"inside": report.inside, "outside": report.outside, "exceptions": len(report.exceptions),
               "branches": list(report.branches)}
    return SuiteResult("discrete", report.ok, witnesses, summary)


def suite_residue(setup: Setup, config: ExperimentConfig) -> SuiteResult:
    bad = residue_sweep(setup.family)
    witnesses = [{"alpha": a, "k": k} for a, k in bad[:WITNESS_CAP]]
    summary = {"checked": setup.space.lam * (setup.space.M + 1), "failed": len(bad)}
    return SuiteResult("residue", not bad, witnesses, summary)


def pattern_coordinates(spec: PatternSpec, n: int) -> list[tuple[int, int]]:
    """Up to n coordinates (i, l) with eps(i, l) = l, taken round-robin over the rows."""
    fixed = [[l for l, v in enumerate(row, start=1) if v == l] for row in spec.eps]
    coords: list[tuple[int, int]] = []
    depth = 0
    while len(coords) < n and any(depth < len(f) for f in fixed):
        for i, f in enumerate(fixed, start=1):
            if depth < len(f) and len(coords) < n:
                coords.append((i, f[depth]))
        depth += 1
    return coords


def check_realized_pattern(family: SplittingFamily, step: RealizePattern) -> dict:
    space = family.space
    spec = PatternSpec((tuple(step.alpha), tuple(step.beta)), tuple(step.eps), tuple(step.delta))
    verdict = verify_pattern(family, spec, 0, 1)
    coords = pattern_coordinates(spec, space.n)
    out = {"alpha": list(step.alpha), "beta": list(step.beta), "contained": verdict.ok,
           "failures": list(verdict.witness or ())[:WITNESS_CAP], "coordinates": coords}
    if coords:
        m = agreement_depth(space, step.alpha, step.beta)
        out["box_depth"] = m
        out["left_separation_witness"] = refute_left_separation(left_separation_entries(family, spec, coords, m))
    else:
        out["box_depth"] = None
        out["left_separation_witness"] = None
    out["ok"] = verdict.ok and out["left_separation_witness"] is not None
    return out


def suite_patterns(setup: Setup, config: ExperimentConfig) -> SuiteResult:
    checks = [check_realized_pattern(setup.family, c.pattern) for c in setup.chain.certificates]
    failed = [c for c in checks if not c["ok"]]
    return SuiteResult("patterns", not failed, failed[:WITNESS_CAP],
                       {"realized": len(checks), "failed": len(failed)})


def suite_fuzz(setup: Optional[Setup], config: ExperimentConfig) -> SuiteResult:
    summary = fuzz_number_lemma(config.fuzz_count, config.seed, config.fuzz_n)
    witnesses = summary.pop("failures")
    return SuiteResult("number-lemma-fuzz", not witnesses, witnesses, summary)


SUITE_FUNCTIONS: dict[str, Callable[[Setup, ExperimentConfig], SuiteResult]] = {
    "splitting": suite_splitting,
    "balanced": suite_balanced,
    "biorthogonal": suite_biorthogonal,
    "discrete": suite_discrete,
    "residue": suite_residue,
    "patterns": suite_patterns,
    "number-lemma-fuzz": suite_fuzz,
}


def _timed(fn, setup, config, timing: bool) -> SuiteResult:
    start = time.perf_counter()
    try:
        result = fn(setup, config)
    except SplitCantorError as exc:
        name = next(k for k, v in SUITE_FUNCTIONS.items() if v is fn)
        result = SuiteResult(name, False, [{"error": type(exc).__name__, "message": str(exc)}])
    if timing:
        result.duration_ms = round((time.perf_counter() - start) * 1000, 3)
    return result


def run_experiment(config: ExperimentConfig, parallel: bool = False, timing: bool = False) -> dict:
    """Build the model, run every requested suite and return the report dict.

    Suite failures are recorded, never raised.  ``duration_ms`` stays null
    unless ``timing`` is set, so reports are byte-stable by default.
    """
    setup = prepare(config)
    fns = [SUITE_FUNCTIONS[name] for name in config.suites]
    if parallel and len(fns) > 1:
        with ThreadPoolExecutor() as pool:
            results = list(pool.map(lambda fn: _timed(fn, setup, config, timing), fns))
    else:
        results = [_timed(fn, setup, config, timing) for fn in fns]
    return {
        "config": config_echo(config),
        "seed": config.seed,
        "version": __version__,
        "space": {"points": len(setup.space), "codes": list(setup.space.codes),
                  "twin_groups": [[list(g.alpha), list(g.beta), g.shared] for g in setup.layout]},
        "chain": {"conditions": len(setup.chain.steps), "script": [format_step(s) for s in setup.script],
                  "certificates": [
                      {"step": c.step, "depth": c.depth,
                       "values": [[xi, s, list(a.phi), a.eta] for xi, s, a in c.values]}
                      for c in setup.chain.certificates
                  ]},
        "suites": [r.as_dict() for r in results],
    }


def report_passed(report: dict) -> bool:
    return all(s["status"] == "pass" for s in report["suites"])


def strip_timing(report: dict) -> dict:
    out = dict(report)
    out["suites"] = [{**s, "duration_ms": None} for s in report["suites"]]
    return out


# number-lemma fuzzing


def _fuzz_one(seed: int, index: int, n_range: Sequence[int]) -> tuple:
    rng = random.Random(f"{seed}:{index}")
    n = rng.choice(tuple(n_range))
    inst = number_lemma_instance(rng, n)
    oracle = oracle_pairs(inst.theta, inst.rho, inst.r)
    try:
        got: Optional[tuple[int, int]] = number_lemma_pair(inst.theta, inst.rho, inst.r)
        error = None
    except (SplitCantorError, AssertionError) as exc:
        got, error = None, str(exc)
    ok = bool(oracle) and got == oracle[0]
    return n, inst, got, oracle, ok, error


def fuzz_number_lemma(count: int, seed: int, n_range: Sequence[int] = (2, 3, 4), parallel: bool = False) -> dict:
    """Run number_lemma_pair on ``count`` seeded instances and check each against the oracle.

    Instance ``index`` uses its own generator seeded by (seed, index), so the
    summary does not depend on evaluation order.
    """
    if count < 1:
        raise ConfigError("count must be >= 1")
    if parallel:
        with ThreadPoolExecutor() as pool:
            rows = list(pool.map(lambda i: _fuzz_one(seed, i, n_range), range(count)))
    else:
        rows = [_fuzz_one(seed, i, n_range) for i in range(count)]
    pairs: Counter = Counter()
    per_n: Counter = Counter()
    failures = []
    discarded = 0
    for index, (n, inst, got, oracle, ok, error) in enumerate(rows):
        per_n[n] += 1
        discarded += inst.discarded
        if got is not None:
            pairs[f"{got[0]},{got[1]}"] += 1
        if not ok and len(failures) < WITNESS_CAP:
            failures.append({"index": index, "n": n, "theta": inst.theta, "rho": inst.rho, "r": list(inst.r),
                             "returned": got, "oracle_first": oracle[0] if oracle else None, "error": error})
    failure_count = sum(1 for row in rows if not row[4])
    return {
        "instances": count,
        "failure_count": failure_count,
        "failures": failures,
        "discarded": discarded,
        "per_n": {str(k): per_n[k] for k in sorted(per_n)},
        "pair_distribution": {k: pairs[k] for k in sorted(pairs, key=lambda s: tuple(map(int, s.split(","))))},
        "seed": seed,
        "n_range": list(n_range),
    }


def with_seed(config: ExperimentConfig, seed: Optional[int]) -> ExperimentConfig:
    return config if seed is None else replace(config, seed=seed)

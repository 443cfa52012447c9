"""Command-line entry point.

Exit codes: 0 success, 2 spec or usage error, 3 runtime error. Data goes to ``--out``
or standard output; progress and summaries go to standard error when standard output
carries data.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional

from . import __version__
from .bounds import check_thm31_conditions, coexistence_lower_bound
from .engine import StopRule, run, sample_weights, stream_seed
from .events import scenario_classify, strangulation_check, survived_to_level
from .families import FamilyError, LadderSpec, MultiSpineSpec, build, predicted_region
from .harness import (HarnessError, SweepPlan, canonical_scenarios, stderr_progress, sweep,
                      verdicts_to_csv)
from .specdoc import SpecDocument, SpecError, load_document

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 2, 3


class UsageError(Exception):
    pass


def _load(ref: str) -> SpecDocument:
    try:
        return load_document(ref)
    except SpecError as exc:
        raise UsageError(str(exc)) from None


def _seed(doc: SpecDocument, flag: Optional[int]) -> int:
    if flag is not None:
        return flag
    env = os.environ.get("RICHARDSON_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"RICHARDSON_SEED must be an integer, got {env!r}") from None
    return doc.seed


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _info(args, msg: str):
    # summaries share stdout only when data is going to a file
    print(msg, file=sys.stdout if args.out else sys.stderr)


def _spec(doc: SpecDocument, strict: bool = True):
    try:
        return doc.family_spec(strict)
    except SpecError as exc:
        raise UsageError(str(exc)) from None


def cmd_generate(args) -> int:
    doc = _load(args.spec)
    spec = _spec(doc)
    g, lm = build(spec)
    if args.out:
        Path(args.out).write_text(g.dump())
        Path(args.out + ".landmarks.json").write_text(json.dumps(lm.to_dict()) + "\n")
    print(f"vertices={g.num_vertices} edges={g.num_edges} max_degree={g.max_degree}")
    print(f"predicted region: {predicted_region(spec)}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    doc = _load(args.spec)
    lam = args.lam if args.lam is not None else doc.lambdas[0]
    if not lam > 0:
        raise UsageError("lambda must be positive")
    spec = _spec(doc)
    seed = _seed(doc, args.seed)
    g, lm = build(spec)
    scenarios = canonical_scenarios(lm)
    if not 0 <= args.scenario < len(scenarios):
        raise UsageError(f"scenario index must lie in 0..{len(scenarios) - 1}")
    sc = scenarios[args.scenario]
    w = sample_weights(g, stream_seed(seed, 0, 0))
    stop = StopRule.landmarks({1: lm.targets() | set(lm.boundary)})
    out = run(g, w, lam, sc.init, stop)
    _emit(out.to_csv(g), args.out)
    _info(args, f"verdict: lambda={lam!r} scenario_init={sc.name} survived_to_level="
                f"{survived_to_level(out, lm, sc.start_level)} strangled={strangulation_check(out)} "
                f"scenario={scenario_classify(out, lm)} events={out.events}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    doc = _load(args.spec)
    spec = _spec(doc)
    lams = [args.lam] if args.lam is not None else list(doc.lambdas)
    plan = SweepPlan(spec, [float(x) for x in lams], args.reps or doc.reps, _seed(doc, args.seed),
                     args.levels or doc.levels, args.threads or doc.threads or (os.cpu_count() or 1),
                     coupled=not args.uncoupled)
    try:
        res = sweep(plan, progress=None if args.quiet else stderr_progress)
    except HarnessError as exc:
        raise UsageError(str(exc)) from None
    _emit(res.curve.to_csv(), args.out)
    if args.verdicts:
        Path(args.verdicts).write_text(verdicts_to_csv(res.verdicts))
    return EXIT_OK


def cmd_bounds(args) -> int:
    doc = _load(args.spec)
    spec = _spec(doc)
    if not isinstance(spec, LadderSpec):
        raise UsageError("bounds are defined for ladder families only")
    lam = args.lam if args.lam is not None else doc.lambdas[0]
    if not lam > 0:
        raise UsageError("lambda must be positive")
    rep = coexistence_lower_bound(spec, lam)
    if args.strict and not rep.valid:
        print(f"error: {rep.note}", file=sys.stderr)
        return EXIT_USAGE
    _emit(rep.to_csv(), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    doc = _load(args.spec)
    spec = _spec(doc, strict=False)
    if not isinstance(spec, MultiSpineSpec):
        raise UsageError("verify applies to multispine families only")
    rep = check_thm31_conditions(spec, _seed(doc, args.seed), args.samples)
    _emit(rep.to_csv(), args.out)
    print(f"note: {rep.note}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="richardson", description="Two-type Richardson competition on engineered graphs")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("spec", help="JSON spec document or preset (prop21, prop22, interval:a,b, points:a1,...)")
        sp.add_argument("--out", help="output path (default: standard output)")
        sp.set_defaults(func=fn)
        return sp

    add("generate", cmd_generate, "build the graph, write dump and landmarks")
    sp = add("simulate", cmd_simulate, "one run: outcome CSV plus verdict line")
    sp.add_argument("--lambda", dest="lam", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--scenario", type=int, default=0, help="index of the canonical initial configuration")
    sp = add("sweep", cmd_sweep, "coexistence curve over the lambda grid")
    sp.add_argument("--lambda", dest="lam", type=float, help="single rate instead of the spec grid")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--reps", type=int)
    sp.add_argument("--levels", type=lambda s: [int(x) for x in s.split(",")])
    sp.add_argument("--threads", type=int)
    sp.add_argument("--uncoupled", action="store_true", help="fresh clocks for every rate")
    sp.add_argument("--verdicts", help="also write per-replication verdict CSV here")
    sp.add_argument("--quiet", action="store_true")
    sp = add("bounds", cmd_bounds, "Chebyshev bounds and the coexistence lower bound")
    sp.add_argument("--lambda", dest="lam", type=float)
    sp.add_argument("--strict", action="store_true", help="exit 2 when lambda is outside the predicted region")
    sp = add("verify", cmd_verify, "check the multi-spine growth conditions level by level")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--samples", type=int, default=10_000)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, FamilyError, HarnessError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

"""Command line: ``coolba run`` for one execution, ``coolba sweep`` for many.

Exit codes: 0 when every flag holds, 1 on a flag failure or an invariant
violation, 2 on bad usage.
"""

import argparse
import json
import math
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor

from . import metrics
from .engine import run_ba, run_ba_committee, run_bb
from .errors import ConfigurationError, InvariantViolation
from .params import derive
from .scenarios import parse_input_spec
from .simnet.attacks import STRATEGIES, SplitLeader, make_strategy

MODES = ("ba", "bb", "ba-committee")
SPLIT_LEADER = "split-leader"


class UsageError(Exception):
    pass


def _ids(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()] if text else []
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _seed(value):
    if value is not None:
        return value
    env = os.environ.get("COOL_SEED")
    if env is None:
        return 0
    try:
        return int(env, 0)
    except ValueError:
        raise UsageError(f"COOL_SEED is not an integer: {env!r}") from None


def build_adversary(name):
    """Registry name, or ``split-leader[+inner]`` for a two-faced BB leader."""
    if name == SPLIT_LEADER or name.startswith(SPLIT_LEADER + "+"):
        _, _, inner = name.partition("+")
        return SplitLeader(make_strategy(inner or "silent"))
    return make_strategy(name)


def execute(mode, n, t, ell, adversary, input_spec, seed, faulty=None, leader=None,
            committee_seed=None, record=False):
    """Run one configuration; returns a RunRecord."""
    params = derive(n, t, ell)
    split_leader = adversary.startswith(SPLIT_LEADER)
    if split_leader and mode != "bb":
        raise ConfigurationError("split-leader strategies only apply to --mode bb")
    if faulty is None:
        faulty = list(range(n - t + 1, n + 1))
    faulty = frozenset(faulty)
    adv = build_adversary(adversary)
    rng = random.Random(seed)
    honest = [i for i in range(1, n + 1) if i not in faulty]
    if mode == "bb":
        if leader is None:
            leader = max(faulty) if split_leader and faulty else min(honest or [1])
        if split_leader and leader not in faulty:
            raise ConfigurationError("split-leader needs a faulty leader")
        inputs = parse_input_spec(input_spec or "all-equal", params, [leader], rng)
        return run_bb(leader, inputs[leader], adv, params, faulty=faulty, seed=seed, record=record)
    if input_spec is None:
        input_spec = "split" if adversary == "consistency" else "random"
    if mode == "ba":
        inputs = parse_input_spec(input_spec, params, honest, rng)
        return run_ba(inputs, adv, params, faulty=faulty, seed=seed, record=record)
    inputs = parse_input_spec(input_spec, params, honest, rng)
    return run_ba_committee(inputs, adv, params, faulty=faulty, seed=seed,
                            committee_seed=committee_seed, record=record)


def cmd_run(args):
    seed = _seed(args.seed)
    faulty = _ids(args.faulty) if args.faulty is not None else None
    try:
        rec = execute(args.mode, args.n, args.t, args.l, args.adversary, args.input, seed,
                      faulty=faulty, leader=args.leader, committee_seed=args.committee_seed,
                      record=bool(args.transcript))
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 1
    text = rec.to_json() + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.transcript:
        rec.transcript.write(args.transcript)
    return 0 if rec.passed else 1


def sweep_schedule(ns, alpha, delta):
    """(n, t, l) triples with ``l = ceil(n^alpha)`` and ``t ~ n^delta / 3``."""
    out = []
    for n in ns:
        t = min(math.floor(n ** delta / 3), (n - 1) // 3)
        out.append((n, max(t, 0), max(1, math.ceil(n ** alpha))))
    return out


def _sweep_one(job):
    mode, n, t, ell, strategy, seed, input_spec = job
    try:
        return execute(mode, n, t, ell, strategy, input_spec, seed), None
    except InvariantViolation as exc:
        return None, f"n={n} strategy={strategy} seed={seed}: {exc}"


def cmd_sweep(args):
    ns = _ids(args.ns)
    if not ns:
        raise UsageError("empty sweep schedule (give --ns)")
    if args.strategies == "all":
        strategies = list(STRATEGIES)
    else:
        strategies = [s for s in args.strategies.split(",") if s]
    if not strategies:
        raise UsageError("no strategies given")
    for s in strategies:
        build_adversary(s)
    seeds = _ids(args.seeds)
    if "," not in args.seeds and seeds:
        seeds = list(range(seeds[0]))  # a bare number is a count
    if not seeds:
        raise UsageError("no seeds given")
    jobs = [(args.mode, n, t, ell, s, seed, args.input)
            for n, t, ell in sweep_schedule(ns, args.alpha, args.delta)
            for s in strategies for seed in seeds]
    for _, n, t, ell, *_ in jobs:
        derive(n, t, ell)
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            results = list(pool.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(j) for j in jobs]
    errors = [e for _, e in results if e]
    records = [r for r, _ in results if r is not None]
    if args.out:
        with open(args.out, "w", newline="") as fh:
            metrics.write_csv(records, fh)
    else:
        metrics.write_csv(records, sys.stdout)
    summary = {"runs": len(jobs), "passed": sum(r.passed for r in records),
               "invariant_violations": errors}
    if len({r.n for r in records}) >= 2:
        summary["exponent"] = metrics.estimate_exponent(records, args.alpha, args.delta).to_dict()
        summary["target_exponent"] = max(1 + args.alpha, 1 + args.delta)
        ks, spread = metrics.bound_constants(records)
        summary["bound_constant_max"] = max(ks)
        summary["bound_constant_spread"] = spread
        summary["round_constant"] = metrics.round_constant(records)
    text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(text)
    else:
        sys.stderr.write(text)
    return 0 if not errors and summary["passed"] == len(jobs) else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="coolba", description="Coded Byzantine agreement simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="one execution, JSON record out")
    run.add_argument("--mode", choices=MODES, default="ba")
    run.add_argument("--n", type=int, required=True)
    run.add_argument("--t", type=int, required=True)
    run.add_argument("--l", type=int, required=True, help="message length in bits")
    run.add_argument("--adversary", default="silent",
                     help=f"one of {', '.join(STRATEGIES)}, or {SPLIT_LEADER}[+inner] for bb")
    run.add_argument("--input", default=None,
                     help="all-equal[:HEX] | split[:HEX[:IDS]] | random")
    run.add_argument("--seed", type=int, default=None, help="defaults to $COOL_SEED, then 0")
    run.add_argument("--faulty", default=None, help="comma-separated ids (default: the last t)")
    run.add_argument("--leader", type=int, default=None)
    run.add_argument("--committee-seed", type=int, default=None)
    run.add_argument("--out", default=None, help="JSON path (default stdout)")
    run.add_argument("--transcript", default=None, help="write line-delimited audit records here")
    run.set_defaults(func=cmd_run)

    sw = sub.add_parser("sweep", help="many executions, CSV rows plus a JSON summary")
    sw.add_argument("--mode", choices=MODES, default="ba")
    sw.add_argument("--alpha", type=float, default=1.0, help="l = ceil(n^alpha)")
    sw.add_argument("--delta", type=float, default=1.0, help="t = floor(n^delta / 3)")
    sw.add_argument("--ns", default="", help="comma-separated network sizes")
    sw.add_argument("--strategies", default="silent", help="comma list or 'all'")
    sw.add_argument("--seeds", default="1", help="count, or a comma list of seeds")
    sw.add_argument("--input", default="all-equal")
    sw.add_argument("--workers", type=int, default=1, help="worker processes")
    sw.add_argument("--out", default=None, help="CSV path (default stdout)")
    sw.add_argument("--summary", default=None, help="JSON path (default stderr)")
    sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigurationError) as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

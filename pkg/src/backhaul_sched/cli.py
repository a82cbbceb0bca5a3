"""Command line entry point: sweeps, oracle gap study, schedule dumps, validation."""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import replace
from pathlib import Path as FsPath

import numpy as np

from .baselines import (Scheme, backhaul_only_paths, mqis_priority, random_relay_paths,
                        stdma_schedule)
from .harness import (DEFAULT_BETAS, DEFAULT_SIGMAS, SweepSpec, load_config, rep_seed,
                      run_experiment, run_scheme, write_outputs)
from .model import Scenario, make_scenario
from .oracle import MAX_FLOWS, MAX_SLOTS, gap_summary, oracle_gap
from .relay_selection import select_relays
from .scheduler import feasibility_check, run_schedule, schedule_flows

OUT_DIR_ENV = "BACKHAUL_SCHED_OUT_DIR"


class CliError(Exception):
    pass


def _out_path(name: str) -> FsPath:
    """Relative output paths resolve against the env override when set."""
    p = FsPath(name)
    base = os.environ.get(OUT_DIR_ENV)
    if base and not p.is_absolute():
        p = FsPath(base) / p
    return p


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _floats(grid):
    def parse(text: str) -> tuple[float, ...]:
        if text == "grid":
            return grid
        try:
            return tuple(float(t) for t in text.split(","))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected comma-separated numbers or 'grid', got {text!r}")
    return parse


def _schemes(text: str) -> tuple[str, ...]:
    if text == "all":
        return tuple(s.value for s in Scheme)
    out = tuple(text.split(","))
    for s in out:
        try:
            Scheme(s)
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"unknown scheme {s!r} (choose from {', '.join(x.value for x in Scheme)} or all)")
    return out


def _base_spec(args) -> SweepSpec:
    return load_config(args.config) if args.config else SweepSpec()


def cmd_run(args) -> int:
    spec = _base_spec(args)
    overrides = {}
    for name, attr in (("scheme", "schemes"), ("blocked", "blocked_counts"),
                       ("sigma", "sigma_values"), ("beta", "beta_values"),
                       ("reps", "repetitions"), ("seed", "master_seed")):
        v = getattr(args, name)
        if v is not None:
            overrides[attr] = v
    spec = replace(spec, **overrides)
    rows = run_experiment(spec)
    out, agg = write_outputs(rows, _out_path(args.out))
    print(f"wrote {len(rows)} rows to {out} and {agg}")
    return 0


def cmd_oracle_gap(args) -> int:
    if args.max_flows > MAX_FLOWS or args.max_slots > MAX_SLOTS:
        raise CliError(f"oracle limited to {MAX_FLOWS} flows and {MAX_SLOTS} slots")
    recs = oracle_gap(args.instances, args.seed, args.max_flows, args.max_slots, args.sigma, args.beta)
    summary = gap_summary(recs)
    print(json.dumps(summary, indent=2))
    if args.out:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("seed", "flows", "slots", "oracle_completed", "heuristic_completed", "gap"))
        for r in recs:
            w.writerow((r.seed, r.n_flows, r.n_slots, r.oracle_completed, r.heuristic_completed, r.gap))
        _write(_out_path(args.out), buf.getvalue())
    return 0 if summary["heuristic_above_oracle"] == 0 else 1


def _scenario_for(args) -> Scenario:
    if args.scenario:
        try:
            return Scenario.load(args.scenario)
        except (OSError, KeyError, ValueError, TypeError) as e:
            raise CliError(f"cannot load scenario {args.scenario}: {e}")
    return make_scenario(args.seed, args.blocked, _base_spec(args).base)


def cmd_dump_schedule(args) -> int:
    scenario = _scenario_for(args)
    if args.save_scenario:
        _write(_out_path(args.save_scenario), json.dumps(scenario.to_dict(), indent=2))
    edges = []

    def log(i, graph, active, chosen):
        edges.append((i, graph.edges, list(active), list(chosen)))

    result = _run_with_log(scenario, args.scheme, args.sigma, args.beta, log)
    F = len(scenario.flows)
    header = ["slot"] + [f"state_{f}" for f in range(F)] + [f"hop_{f}" for f in range(F)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for i, row in enumerate(result.matrix.rows()):
        w.writerow((i, *row))
    summary = json.dumps({"paths": {f: str(p) for f, p in result.paths.items()},
                          **result.metrics.to_dict()}, indent=2)
    if args.out:
        _write(_out_path(args.out), buf.getvalue())
        print(summary)
    else:
        sys.stdout.write(buf.getvalue())
        print(summary, file=sys.stderr)
    if args.graph_log:
        lines = [json.dumps({"slot": i, "edges": es, "ongoing": a, "chosen": c}) + "\n"
                 for i, es, a, c in edges]
        _write(_out_path(args.graph_log), "".join(lines))
    return 0


def _write(path: FsPath, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as e:
        raise CliError(f"cannot write {path}: {e.strerror}")


def _run_with_log(scenario, scheme, sigma, beta, log):
    """Like run_scheme, but reports each contention graph rebuild to ``log``."""
    scheme = Scheme(scheme)
    if scheme is Scheme.STDMA:
        return stdma_schedule(scenario, sigma)
    if scheme is Scheme.MQIS:
        return schedule_flows(scenario, backhaul_only_paths(scenario.flows), sigma, mqis_priority,
                              on_rebuild=log)
    if scheme is Scheme.RAQS:
        paths = select_relays(scenario.channel, scenario.topology, scenario.flows, beta)
    else:
        seed = int(np.random.SeedSequence([scenario.seed, 1]).generate_state(1)[0])
        paths = random_relay_paths(seed, scenario.topology, scenario.flows)
    return run_schedule(scenario, paths, sigma, on_rebuild=log)


def cmd_validate(args) -> int:
    base = _base_spec(args).base
    schemes = args.scheme or tuple(s.value for s in Scheme)
    bad = 0
    runs = 0
    for k in range(args.seeds):
        seed = rep_seed(args.seed, k)
        blocked = k % (base.n_flows + 1)
        scenario = make_scenario(seed, blocked, base)
        for s in schemes:
            res = run_scheme(scenario, s, args.sigma, args.beta)
            rep = feasibility_check(res.matrix, res.paths, scenario.flows)
            runs += 1
            if not rep.ok:
                bad += 1
                for v in rep.violations:
                    print(f"seed {seed} blocked {blocked} {s}: {v}")
    print(f"{runs} schedules checked, {bad} infeasible")
    return 1 if bad else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="backhaul-sched", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="Monte Carlo sweep to CSV")
    r.add_argument("--config", help="JSON config; absent keys keep the defaults")
    r.add_argument("--scheme", type=_schemes, help="comma list of schemes or 'all'")
    r.add_argument("--blocked", type=_ints, help="comma list of blocked counts")
    r.add_argument("--sigma", type=_floats(DEFAULT_SIGMAS), help="comma list (mW) or 'grid'")
    r.add_argument("--beta", type=_floats(DEFAULT_BETAS), help="comma list or 'grid'")
    r.add_argument("--reps", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--out", default="results.csv")
    r.set_defaults(func=cmd_run)

    o = sub.add_parser("oracle-gap", help="heuristic vs exhaustive optimum on tiny instances")
    o.add_argument("--instances", type=int, default=200)
    o.add_argument("--max-flows", type=int, default=MAX_FLOWS)
    o.add_argument("--max-slots", type=int, default=MAX_SLOTS)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--sigma", type=float, default=0.01)
    o.add_argument("--beta", type=float, default=0.53)
    o.add_argument("--out", help="optional per-instance CSV")
    o.set_defaults(func=cmd_oracle_gap)

    d = sub.add_parser("dump-schedule", help="per-slot schedule matrix of one scenario")
    d.add_argument("--config")
    d.add_argument("--scenario", help="scenario JSON; otherwise generated from --seed/--blocked")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--blocked", type=int, default=0)
    d.add_argument("--scheme", type=Scheme, default=Scheme.RAQS)
    d.add_argument("--sigma", type=float, default=0.01)
    d.add_argument("--beta", type=float, default=0.53)
    d.add_argument("--out", help="CSV path (default stdout)")
    d.add_argument("--graph-log", help="JSON lines of contention-graph edges per rebuild")
    d.add_argument("--save-scenario", help="write the scenario JSON here")
    d.set_defaults(func=cmd_dump_schedule)

    v = sub.add_parser("validate", help="feasibility check over seeded scenarios")
    v.add_argument("--config")
    v.add_argument("--seeds", type=int, default=100)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--scheme", type=_schemes)
    v.add_argument("--sigma", type=float, default=0.01)
    v.add_argument("--beta", type=float, default=0.53)
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Monte Carlo sweeps over blocked count, sigma and beta with CSV output."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path as FsPath

import numpy as np

from .baselines import Scheme, mqis_schedule, random_relay_paths, stdma_schedule
from .channel import ChannelParams
from .model import FrameConfig, Scenario, ScenarioParams, make_scenario
from .relay_selection import select_relays
from .scheduler import ScheduleResult, run_schedule

DEFAULT_SIGMAS = tuple(float(10.0 ** e) for e in np.arange(-4.0, 2.01, 0.5))
DEFAULT_BETAS = (0.9, 0.8, 0.7, 0.6, 0.55, 0.53, 0.5, 0.45, 0.4, 0.35, 0.3)

LONG_COLUMNS = ("scheme", "blocked", "sigma", "beta", "seed", "completed", "throughput_bps")
AGG_COLUMNS = ("scheme", "blocked", "sigma", "beta", "n", "completed_mean", "completed_stderr",
               "throughput_mean", "throughput_stderr")


def rep_seed(master_seed: int, rep: int) -> int:
    return int(np.random.SeedSequence([master_seed, rep]).generate_state(1)[0])


def run_scheme(scenario: Scenario, scheme: Scheme | str, sigma: float, beta: float) -> ScheduleResult:
    scheme = Scheme(scheme)
    if scheme is Scheme.RAQS:
        paths = select_relays(scenario.channel, scenario.topology, scenario.flows, beta)
        return run_schedule(scenario, paths, sigma)
    if scheme is Scheme.RANDOM_RELAY:
        seed = int(np.random.SeedSequence([scenario.seed, 1]).generate_state(1)[0])
        paths = random_relay_paths(seed, scenario.topology, scenario.flows)
        return run_schedule(scenario, paths, sigma)
    if scheme is Scheme.MQIS:
        return mqis_schedule(scenario, sigma)
    return stdma_schedule(scenario, sigma)


@dataclass(frozen=True)
class SweepSpec:
    schemes: tuple[str, ...] = tuple(s.value for s in Scheme)
    blocked_counts: tuple[int, ...] = tuple(range(11))
    sigma_values: tuple[float, ...] = (0.01,)
    beta_values: tuple[float, ...] = (0.53,)
    repetitions: int = 100
    base: ScenarioParams = field(default_factory=ScenarioParams)
    master_seed: int = 0

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        for b in self.blocked_counts:
            if not 0 <= b <= self.base.n_flows:
                raise ValueError(f"blocked > flows ({b} > {self.base.n_flows})")
        for s in self.schemes:
            Scheme(s)


@dataclass(frozen=True)
class Row:
    scheme: str
    blocked: int
    sigma: float
    beta: float
    seed: int
    completed: int
    throughput_bps: float


def iter_rows(spec: SweepSpec):
    """Rows in a fixed order: blocked, repetition, sigma, beta, scheme.

    Every scheme at a grid point sees the same scenario (paired seeds).
    """
    for blocked, rep in product(spec.blocked_counts, range(spec.repetitions)):
        seed = rep_seed(spec.master_seed, rep)
        scenario = make_scenario(seed, blocked, spec.base)
        for sigma, beta, scheme in product(spec.sigma_values, spec.beta_values, spec.schemes):
            m = run_scheme(scenario, scheme, sigma, beta).metrics
            yield Row(scheme, blocked, sigma, beta, seed, m.completed_count, m.system_throughput_bps)


def run_experiment(spec: SweepSpec) -> list[Row]:
    return list(iter_rows(spec))


def aggregate(rows) -> list[dict]:
    groups: dict[tuple, list[Row]] = {}
    for r in rows:
        groups.setdefault((r.scheme, r.blocked, r.sigma, r.beta), []).append(r)
    out = []
    for key in sorted(groups, key=lambda k: (k[1], k[2], k[3], k[0])):
        rs = groups[key]
        c = np.array([r.completed for r in rs], dtype=float)
        t = np.array([r.throughput_bps for r in rs], dtype=float)
        out.append(dict(zip(AGG_COLUMNS, (*key, len(rs), float(c.mean()), _stderr(c), float(t.mean()), _stderr(t)))))
    return out


def _stderr(x: np.ndarray) -> float:
    return float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(LONG_COLUMNS)
    for r in rows:
        w.writerow([r.scheme, r.blocked, repr(r.sigma), repr(r.beta), r.seed, r.completed,
                    repr(r.throughput_bps)])
    return buf.getvalue()


def aggregate_to_csv(agg) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(AGG_COLUMNS)
    for a in agg:
        w.writerow([repr(a[c]) if isinstance(a[c], float) else a[c] for c in AGG_COLUMNS])
    return buf.getvalue()


def write_outputs(rows, out: str | FsPath) -> tuple[FsPath, FsPath]:
    out = FsPath(out)
    agg_path = out.with_name(out.stem + "_agg" + (out.suffix or ".csv"))
    try:
        out.write_text(rows_to_csv(rows))
        agg_path.write_text(aggregate_to_csv(aggregate(rows)))
    except OSError as e:
        raise OSError(f"cannot write results to {e.filename or out}: {e.strerror}") from e
    return out, agg_path


_SCENARIO_KEYS = {"n_bs", "relay_mean", "area_side", "n_flows", "qos_range", "frame", "channel"}
_SWEEP_KEYS = {"schemes", "blocked_counts", "sigma_values", "beta_values", "repetitions",
               "master_seed"}


def spec_from_config(doc: dict) -> SweepSpec:
    """Build a sweep from a config mapping; absent keys keep the defaults."""
    unknown = set(doc) - _SCENARIO_KEYS - _SWEEP_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    base = {k: doc[k] for k in _SCENARIO_KEYS & set(doc)}
    if "frame" in base:
        fr = base["frame"]
        base["frame"] = FrameConfig(int(fr.get("K", 3000)), float(fr.get("slot_us", 18.0)),
                                    float(fr.get("sched_us", 850.0)))
    if "channel" in base:
        base["channel"] = ChannelParams(**base["channel"])
    if "qos_range" in base:
        base["qos_range"] = tuple(float(q) for q in base["qos_range"])
    sweep = {k: doc[k] for k in _SWEEP_KEYS & set(doc)}
    for k in ("schemes", "blocked_counts", "sigma_values", "beta_values"):
        if k in sweep:
            sweep[k] = tuple(sweep[k])
    return SweepSpec(base=ScenarioParams(**base), **sweep)


def load_config(path: str | FsPath) -> SweepSpec:
    path = FsPath(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as e:
        raise ValueError(f"cannot read config {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise ValueError(f"malformed config {path}: {e}") from e
    if not isinstance(doc, dict):
        raise ValueError(f"malformed config {path}: expected a JSON object")
    return spec_from_config(doc)

"""Give-and-take: improve a multi-LSP routing plan through pairwise re-routing.

Each iteration re-solves every two-vehicle subproblem, turns each changed
result (and its depot-preserving swap) into an action with exact per-LSP
profit changes, lets the combiner pick the best vehicle-disjoint set that
keeps every LSP at or above its stand-alone profit, and applies it.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, TextIO

from gatx import combiner
from gatx.model import Instance, Solution, VehicleSchedule, lsp_profits, social_welfare
from gatx.pdptw import DEFAULT_PAIR_TIME_LIMIT, VrpRequest, initial_solution, solve

PAIR = "pair"
SWAPPED = "swapped-pair"


@dataclass(frozen=True)
class Action:
    kind: str
    vehicles: tuple[int, int]
    new_schedules: tuple[VehicleSchedule, VehicleSchedule]
    delta_profit: dict = field(hash=False)
    delta_total: int = 0


@dataclass(frozen=True)
class GatConfig:
    max_iterations: int = 5
    pair_time_limit: float = DEFAULT_PAIR_TIME_LIMIT
    seed: int = 0
    threads: int = 1
    initial_time_limit: float = 30.0
    node_limit: int = combiner.DEFAULT_NODE_LIMIT

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not self.pair_time_limit > 0:
            raise ValueError("pair_time_limit must be positive")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    welfare: Optional[float]
    total_profit: int
    lsp_profits: tuple[int, ...]
    actions: int = 0
    selected: int = 0
    seconds: float = 0.0
    detail: dict = field(default_factory=dict, hash=False)


@dataclass(frozen=True)
class RunResult:
    initial: Solution
    final: Solution
    history: tuple[IterationRecord, ...]
    init_seconds: float
    seconds: float


def candidate_vehicles(solution: Solution, instance: Instance) -> list[int]:
    """Busy vehicles plus one representative of each interchangeable idle group.

    Idle vehicles with the same owner, depot and capacity are indistinguishable,
    so trying more than one of them only repeats work.
    """
    seen = set()
    out = []
    for s in solution.schedules:
        if s.stops:
            out.append(s.vehicle)
            continue
        v = instance.vehicles[s.vehicle]
        key = (v.lspid, v.depot, v.cap)
        if key not in seen:
            seen.add(key)
            out.append(s.vehicle)
    return out


def _pair_actions(instance: Instance, i: int, j: int, stops_i, stops_j, time_limit, seed):
    """Actions from one pair solve, plus whether the swap was dropped as infeasible."""
    net = instance.network
    orders = tuple(sorted({c >> 1 for c in stops_i} | {c >> 1 for c in stops_j}))
    res = solve(VrpRequest(instance, orders, (i, j), time_limit, seed, (stops_i, stops_j)))
    if res.unassigned:
        return (), False
    new_i, new_j = res.schedules[0].stops, res.schedules[1].stops
    old = (stops_i, stops_j)
    li, lj = net.vlsp[i], net.vlsp[j]
    base_i, base_j = net.profit(i, stops_i), net.profit(j, stops_j)

    def make(kind, a, b):
        di, dj = net.profit(i, a) - base_i, net.profit(j, b) - base_j
        delta = {li: di} if li == lj else {li: di, lj: dj}
        if li == lj:
            delta[li] += dj
        return Action(kind, (i, j), (VehicleSchedule(i, a), VehicleSchedule(j, b)), delta, di + dj)

    out = []
    if (new_i, new_j) != old:
        out.append(make(PAIR, new_i, new_j))
    swap_dropped = False
    swapped = (new_j, new_i)
    if swapped != old and swapped != (new_i, new_j):
        if net.evaluate(i, new_j)[0] and net.evaluate(j, new_i)[0]:
            out.append(make(SWAPPED, new_j, new_i))
        else:
            swap_dropped = True
    return tuple(out), swap_dropped


_worker_instance: Optional[Instance] = None


def _init_worker(instance):
    global _worker_instance
    _worker_instance = instance


def _solve_chunk(jobs):
    return [_pair_actions(_worker_instance, *job) for job in jobs]


def generate_actions(
    solution: Solution,
    instance: Instance,
    cfg: GatConfig,
    cache: Optional[dict] = None,
    stats: Optional[dict] = None,
    pool: Optional[ProcessPoolExecutor] = None,
) -> list[Action]:
    """Solve every useful vehicle pair and collect the resulting actions.

    ``cache`` maps (i, j, stops_i, stops_j) to a previous pair result; the
    pair solver is deterministic, so an unchanged pair gives the same answer.
    """
    cache = {} if cache is None else cache
    stats = {} if stats is None else stats
    sched = solution.schedules
    cands = candidate_vehicles(solution, instance)
    jobs, keys = [], []
    counts = dict(pairs=0, skipped_idle=0, cached=0, solved=0, swaps_infeasible=0)
    for a, i in enumerate(cands):
        for j in cands[a + 1:]:
            si, sj = sched[i].stops, sched[j].stops
            if not si and not sj:
                counts["skipped_idle"] += 1
                continue
            counts["pairs"] += 1
            key = (i, j, si, sj)
            keys.append(key)
            if key in cache:
                counts["cached"] += 1
            else:
                jobs.append((i, j, si, sj, cfg.pair_time_limit, cfg.seed))
    if pool is not None and len(jobs) > 1:
        n = max(1, len(jobs) // (4 * cfg.threads))
        chunks = [jobs[k:k + n] for k in range(0, len(jobs), n)]
        results = [r for part in pool.map(_solve_chunk, chunks) for r in part]
    else:
        results = [_pair_actions(instance, *job) for job in jobs]
    for job, res in zip(jobs, results):
        cache[job[:4]] = res
    counts["solved"] = len(jobs)
    actions = []
    for key in keys:
        acts, dropped = cache[key]
        counts["swaps_infeasible"] += dropped
        actions.extend(acts)
    stats.update(counts)
    return actions


def apply_plan(solution: Solution, plan: combiner.ExchangePlan) -> Solution:
    used = set()
    for act in plan.actions:
        if used & set(act.vehicles):
            raise AssertionError(f"plan touches vehicles {sorted(used & set(act.vehicles))} twice")
        used |= set(act.vehicles)
    return solution.replace(s for act in plan.actions for s in act.new_schedules)


def _slack(solution: Solution, instance: Instance, profits) -> dict:
    return {k: p - init for k, (p, init) in enumerate(zip(profits, solution.baseline))}


def run(
    instance: Instance,
    cfg: GatConfig = GatConfig(),
    initial: Optional[Solution] = None,
    diagnostics: Optional[TextIO] = None,
) -> RunResult:
    t0 = time.perf_counter()
    if initial is None:
        initial = initial_solution(instance, cfg.initial_time_limit, cfg.seed)
    init_seconds = time.perf_counter() - t0
    t0 = time.perf_counter()
    profits = lsp_profits(initial, instance)
    history = [IterationRecord(0, social_welfare(initial, instance), sum(profits), tuple(profits))]
    current = initial
    cache: dict = {}
    pool = None
    if cfg.threads > 1:
        pool = ProcessPoolExecutor(cfg.threads, initializer=_init_worker, initargs=(instance,))
    try:
        for it in range(1, cfg.max_iterations + 1):
            t_it = time.perf_counter()
            stats: dict = {}
            actions = generate_actions(current, instance, cfg, cache, stats, pool)
            problem = combiner.SelectionProblem(tuple(actions), _slack(current, instance, profits))
            plan = combiner.select(problem, cfg.node_limit)
            current = apply_plan(current, plan)
            profits = lsp_profits(current, instance)
            stats.update(plan_optimal=plan.optimal, plan_nodes=plan.nodes)
            rec = IterationRecord(
                it,
                social_welfare(current, instance),
                sum(profits),
                tuple(profits),
                len(actions),
                len(plan.selected),
                time.perf_counter() - t_it,
                stats,
            )
            history.append(rec)
            if diagnostics is not None:
                write_diagnostics(diagnostics, "gat", rec)
            if not plan.selected:
                break
    finally:
        if pool is not None:
            pool.shutdown()
    return RunResult(initial, current, tuple(history), init_seconds, time.perf_counter() - t0)


def write_diagnostics(stream: TextIO, algo: str, rec: IterationRecord):
    line = {
        "algo": algo,
        "iteration": rec.iteration,
        "actions": rec.actions,
        "selected": rec.selected,
        "welfare": rec.welfare,
        "lsp_profits": list(rec.lsp_profits),
        "seconds": round(rec.seconds, 6),
        **rec.detail,
    }
    stream.write(json.dumps(line, sort_keys=True) + "\n")
    stream.flush()


def default_threads() -> int:
    env = os.environ.get("GATX_THREADS")
    return max(1, int(env)) if env else 1

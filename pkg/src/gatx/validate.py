"""Independent re-check of solutions.

Deliberately shares no code with the routing kernels: it walks the
materialized ``Waypoint`` objects against the raw matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

from gatx.model import Instance, Solution, VehicleSchedule


@dataclass(frozen=True)
class Walk:
    feasible: bool
    reason: str
    distance: int
    cost: int
    revenue: int


def walk_schedule(instance: Instance, schedule: VehicleSchedule) -> Walk:
    vehicle = instance.vehicles[schedule.vehicle]
    lsp = instance.lsps[vehicle.lspid]
    wps = schedule.waypoints(instance)
    T = instance.matrix.times
    D = instance.matrix.distances
    problems = []
    if wps[0] != vehicle.depot or wps[-1] != vehicle.depot:
        problems.append("schedule must start and end at the depot")
    position = {}
    for idx, wp in enumerate(wps[1:-1], start=1):
        key = (wp.order, wp.vol > 0)
        if key in position:
            problems.append(f"waypoint of order {wp.order} repeated")
        position[key] = idx
    for (order, is_pick), idx in position.items():
        other = position.get((order, not is_pick))
        if other is None:
            problems.append(f"order {order} incomplete")
        elif is_pick and other < idx:
            problems.append(f"order {order}: drop-off precedes pickup")
    t = int(vehicle.depot.st)
    load = 0
    dist = 0
    for prev, wp in zip(wps, wps[1:]):
        t = max(t + int(prev.service) + int(T[prev.loc, wp.loc]), int(wp.st))
        dist += int(D[prev.loc, wp.loc])
        if t > wp.et:
            problems.append(f"time window violated at location {wp.loc}")
        load += wp.vol
        if load > vehicle.cap or load < 0:
            problems.append(f"load {load} out of range at location {wp.loc}")
    orders = {wp.order for wp in wps[1:-1]}
    revenue = sum(instance.orders[o].rev for o in orders)
    cost = lsp.beta + lsp.alpha * dist if orders else 0
    return Walk(not problems, "; ".join(problems), dist, cost, revenue)


def validate_solution(instance: Instance, solution: Solution, check_ir: bool = True) -> list[str]:
    """Human-readable list of violations; empty means valid."""
    errors = []
    if len(solution.schedules) != len(instance.vehicles):
        return [f"{len(solution.schedules)} schedules for {len(instance.vehicles)} vehicles"]
    seen: dict[int, int] = {}
    profits = [0] * len(instance.lsps)
    for k, s in enumerate(solution.schedules):
        if s.vehicle != k:
            errors.append(f"schedule {k} belongs to vehicle {s.vehicle}")
            continue
        w = walk_schedule(instance, s)
        if not w.feasible:
            errors.append(f"vehicle {k}: {w.reason}")
        for o in s.orders:
            if o in seen:
                errors.append(f"order {o} served by vehicles {seen[o]} and {k}")
            seen[o] = k
        profits[instance.vehicles[k].lspid] += w.revenue - w.cost
    missing = set(range(len(instance.orders))) - set(seen)
    if missing:
        errors.append(f"orders never served: {sorted(missing)}")
    if check_ir:
        for lsp, (p, init) in enumerate(zip(profits, solution.baseline)):
            if p < init:
                errors.append(f"LSP {lsp}: profit {p} below baseline {init}")
    return errors

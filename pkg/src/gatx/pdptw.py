"""k-vehicle pickup-and-delivery solver with time windows and capacities.

Requests with at most ``EXACT_MAX_ORDERS`` orders are solved exactly by
enumerating every route.  Larger ones use cheapest-insertion construction
(starting from any seed schedules the caller supplies) followed by
first-improvement local search over three moves: relocating an order to
another vehicle, reinserting it in its own vehicle, and exchanging two
orders between vehicles.  When those stall, routes short enough for
enumeration are reordered optimally.  The objective is total cost; revenue does not
enter.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from gatx._routing import best_insertion, insert_pair, insertion_lower_bound, remove_order
from gatx.model import (
    InfeasibleInstanceError,
    Instance,
    Solution,
    StructuralError,
    VehicleSchedule,
    lsp_profits,
    total_distance,
)

DEFAULT_PAIR_TIME_LIMIT = 0.5
EXACT_MAX_ORDERS = 4


@dataclass(frozen=True)
class VrpRequest:
    instance: Instance
    orders: tuple[int, ...]
    vehicles: tuple[int, ...]
    time_limit: float = DEFAULT_PAIR_TIME_LIMIT
    seed: int = 0
    # optional starting routes, one per entry of ``vehicles``
    seed_schedules: Optional[tuple[tuple[int, ...], ...]] = None


@dataclass(frozen=True)
class VrpResult:
    schedules: tuple[VehicleSchedule, ...]
    unassigned: frozenset[int]
    total_cost: int
    seed_cost: Optional[int] = None
    trace: tuple[int, ...] = field(default=(), compare=False)
    timed_out: bool = field(default=False, compare=False)


def solve(req: VrpRequest) -> VrpResult:
    if not req.time_limit > 0:
        raise ValueError(f"time_limit must be positive, got {req.time_limit}")
    if not req.vehicles:
        raise StructuralError("VRP request needs at least one vehicle")
    net = req.instance.network
    vehicles = list(req.vehicles)
    n_veh = len(vehicles)
    wanted = set(req.orders)
    if len(wanted) != len(req.orders):
        raise StructuralError("duplicate orders in request")
    for o in wanted:
        if not 0 <= o < net.n_orders:
            raise StructuralError(f"unknown order {o}")

    routes: list[tuple[int, ...]] = [()] * n_veh
    placed: set[int] = set()
    if req.seed_schedules is not None:
        if len(req.seed_schedules) != n_veh:
            raise StructuralError("seed_schedules must align with vehicles")
        for k, stops in enumerate(req.seed_schedules):
            stops = tuple(stops)
            orders_here = {c >> 1 for c in stops}
            if not orders_here <= wanted or orders_here & placed:
                raise StructuralError("seed schedules must partition a subset of the request's orders")
            placed |= orders_here
            routes[k] = stops
    seed_cost = None
    if placed:
        seed_cost = 0
        for k in range(n_veh):
            ok, dist = net.evaluate(vehicles[k], routes[k])
            if not ok:
                raise StructuralError(f"seed schedule of vehicle {vehicles[k]} is infeasible")
            seed_cost += net.cost(vehicles[k], routes[k], dist)
    elif req.seed_schedules is not None:
        seed_cost = 0

    if len(wanted) <= EXACT_MAX_ORDERS:
        exact = _solve_exact(net, vehicles, sorted(wanted))
        if exact is not None:
            schedules = tuple(VehicleSchedule(v, r) for v, r in zip(vehicles, exact))
            cost = _total_cost(net, vehicles, exact)
            return VrpResult(schedules, frozenset(), cost, seed_cost, (cost,))

    deadline = time.perf_counter() + req.time_limit
    rng = random.Random(req.seed)
    todo = sorted(wanted - placed, key=lambda o: (net.st[2 * o], net.et[2 * o], o))
    unassigned = _construct(net, vehicles, routes, todo)
    trace = [_total_cost(net, vehicles, routes)]
    timed_out = _local_search(net, vehicles, routes, rng, deadline, trace)
    # local search can open room for orders construction could not place
    while unassigned:
        left = _construct(net, vehicles, routes, sorted(unassigned))
        if len(left) == len(unassigned):
            break
        unassigned = left
        trace.append(_total_cost(net, vehicles, routes))
        if timed_out:
            break
        timed_out = _local_search(net, vehicles, routes, rng, deadline, trace)
    schedules = tuple(VehicleSchedule(vehicles[k], routes[k]) for k in range(n_veh))
    return VrpResult(schedules, frozenset(unassigned), trace[-1], seed_cost, tuple(trace), timed_out)


def _vehicle_routes(net, v, orders):
    """Cheapest feasible route of ``v`` for every subset of ``orders``, as {mask: (cost, stops)}."""
    T, D, loc, st, et, svc, vol = net.T, net.D, net.loc, net.st, net.et, net.svc, net.vol
    bit = {o: 1 << k for k, o in enumerate(orders)}
    cap, home = net.cap[v], net.vloc[v]
    best = {0: (0, ())}
    stops = []

    def extend(prev, t, s_prev, load, dist, done, open_):
        if not open_ and done:
            back = t + s_prev + T[prev][home]
            if back <= net.vet[v]:
                cost = net.cost(v, stops, dist + D[prev][home])
                cur = best.get(done)
                if cur is None or cost < cur[0]:
                    best[done] = (cost, tuple(stops))
        for o in orders:
            b = bit[o]
            if open_ & b:
                c = 2 * o + 1
            elif done & b:
                continue
            else:
                c = 2 * o
            arrive = max(t + s_prev + T[prev][loc[c]], st[c])
            if arrive > et[c] or load + vol[c] > cap:
                continue
            stops.append(c)
            if c & 1:
                extend(loc[c], arrive, svc[c], load + vol[c], dist + D[prev][loc[c]], done, open_ & ~b)
            else:
                extend(loc[c], arrive, svc[c], load + vol[c], dist + D[prev][loc[c]], done | b, open_ | b)
            stops.pop()

    extend(home, net.vst[v], net.vsvc[v], 0, 0, 0, 0)
    return best


def _solve_exact(net, vehicles, orders):
    """Optimal routes serving all ``orders``, or None if they cannot all be served."""
    full = (1 << len(orders)) - 1
    table = {0: (0, ())}  # mask -> (cost, routes of the vehicles so far)
    for v in vehicles:
        routes = _vehicle_routes(net, v, orders)
        nxt = {}
        for mask, (cost, chosen) in table.items():
            for sub, (c, stops) in routes.items():
                if mask & sub:
                    continue
                key = mask | sub
                cand = (cost + c, chosen + (stops,))
                if key not in nxt or cand < nxt[key]:
                    nxt[key] = cand
        table = nxt
    if full not in table:
        return None
    return list(table[full][1])


def _total_cost(net, vehicles, routes):
    total = 0
    for v, stops in zip(vehicles, routes):
        ok, dist = net.evaluate(v, stops)
        total += net.cost(v, stops, dist)
    return total


def _construct(net, vehicles, routes, todo):
    """Sequential cheapest insertion; returns the orders that fit nowhere."""
    auxes = [net.aux(v, r) for v, r in zip(vehicles, routes)]
    left = []
    for o in todo:
        best = None
        for k, aux in enumerate(auxes):
            limit = best[0] if best else float("inf")
            ins = best_insertion(net, aux, o, limit)
            if ins is not None:
                best = (ins[0], k, ins[1], ins[2])
        if best is None:
            left.append(o)
            continue
        _, k, i, j = best
        routes[k] = insert_pair(routes[k], o, i, j)
        auxes[k] = net.aux(vehicles[k], routes[k])
    return left


def _local_search(net, vehicles, routes, rng, deadline, trace):
    """First-improvement descent; returns True if stopped by the deadline."""
    n_veh = len(vehicles)
    polished: set = set()
    while True:
        improved = False
        where = {}
        for k, r in enumerate(routes):
            for c in r:
                if not c & 1:
                    where[c >> 1] = k
        orders = sorted(where)
        rng.shuffle(orders)
        auxes = [net.aux(v, r) for v, r in zip(vehicles, routes)]

        # relocate / intra-route reinsertion
        for o in orders:
            if time.perf_counter() > deadline:
                return True
            k = where[o]
            aux_k = auxes[k]
            reduced = remove_order(routes[k], o)
            aux_red = net.aux(vehicles[k], reduced)
            if aux_red is None:
                continue
            gain = aux_k.cost - aux_red.cost
            best = None
            for m in range(n_veh):
                target = aux_red if m == k else auxes[m]
                limit = best[0] if best else gain
                ins = best_insertion(net, target, o, limit)
                if ins is not None:
                    best = (ins[0], m, ins[1], ins[2])
            if best is None:
                continue
            delta, m, i, j = best
            if m == k:
                routes[k] = insert_pair(reduced, o, i, j)
            else:
                routes[k] = reduced
                routes[m] = insert_pair(routes[m], o, i, j)
                auxes[m] = net.aux(vehicles[m], routes[m])
                where[o] = m
            auxes[k] = net.aux(vehicles[k], routes[k])
            trace.append(trace[-1] - gain + delta)
            improved = True

        # exchange two orders between different vehicles
        for a in orders:
            if time.perf_counter() > deadline:
                return True
            ka = where[a]
            red_a = remove_order(routes[ka], a)
            aux_ra = net.aux(vehicles[ka], red_a)
            if aux_ra is None:
                continue
            gain_a = auxes[ka].cost - aux_ra.cost
            done = False
            for b in orders:
                kb = where[b]
                if kb <= ka:
                    continue
                red_b = remove_order(routes[kb], b)
                aux_rb = net.aux(vehicles[kb], red_b)
                if aux_rb is None:
                    continue
                gain = gain_a + auxes[kb].cost - aux_rb.cost
                lb_b = insertion_lower_bound(net, aux_ra, b)
                ins_a = best_insertion(net, aux_rb, a, gain - lb_b)
                if ins_a is None:
                    continue
                ins_b = best_insertion(net, aux_ra, b, gain - ins_a[0])
                if ins_b is None:
                    continue
                routes[ka] = insert_pair(red_a, b, ins_b[1], ins_b[2])
                routes[kb] = insert_pair(red_b, a, ins_a[1], ins_a[2])
                auxes[ka] = net.aux(vehicles[ka], routes[ka])
                auxes[kb] = net.aux(vehicles[kb], routes[kb])
                where[a], where[b] = kb, ka
                trace.append(trace[-1] - gain + ins_a[0] + ins_b[0])
                improved = True
                done = True
                break
            if done:
                continue
        if not improved:
            improved = _polish_routes(net, vehicles, routes, polished, trace)
        if not improved:
            return False


def _polish_routes(net, vehicles, routes, polished, trace):
    """Reorder each short route optimally; True if any route got cheaper."""
    improved = False
    for k, (v, r) in enumerate(zip(vehicles, routes)):
        if not 0 < len(r) <= 2 * EXACT_MAX_ORDERS or (v, r) in polished:
            continue
        orders = sorted(c >> 1 for c in r if not c & 1)
        cost, stops = _vehicle_routes(net, v, orders)[(1 << len(orders)) - 1]
        ok, dist = net.evaluate(v, r)
        old = net.cost(v, r, dist)
        if cost < old:
            routes[k] = stops
            trace.append(trace[-1] - old + cost)
            improved = True
        polished.add((v, routes[k]))
    return improved


def initial_solution(
    instance: Instance, time_limit: float = 30.0, seed: int = 0
) -> Solution:
    """Each LSP routes its own orders with its own fleet; this is the baseline."""
    schedules: list[VehicleSchedule] = [VehicleSchedule(v.id) for v in instance.vehicles]
    for lsp in instance.lsps:
        orders = instance.orders_of(lsp.id)
        if not orders:
            continue
        if not lsp.fleet:
            raise InfeasibleInstanceError(f"LSP {lsp.id} has orders but no vehicles")
        res = solve(VrpRequest(instance, orders, lsp.fleet, time_limit, seed))
        if res.unassigned:
            raise InfeasibleInstanceError(
                f"LSP {lsp.id} cannot serve orders {sorted(res.unassigned)} with its own fleet"
            )
        for s in res.schedules:
            schedules[s.vehicle] = s
    tmp = Solution(tuple(schedules), (), 0)
    return Solution(tuple(schedules), tuple(lsp_profits(tmp, instance)), total_distance(tmp, instance))


def route_cost(instance: Instance, vehicle: int, stops: Sequence[int]) -> int:
    net = instance.network
    ok, dist = net.evaluate(vehicle, tuple(stops))
    return net.cost(vehicle, tuple(stops), dist)

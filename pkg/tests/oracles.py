"""Slow, obviously-correct reference implementations used only by the tests."""

from __future__ import annotations

import itertools
import random

import numpy as np

from gatx.model import Instance, LspParams, Order, TimeDistanceMatrix, Vehicle, Waypoint


def make_instance(points, orders, vehicles, lsps, name="t"):
    """Build an Instance from plain tuples.

    points:   [(x, y)]                 rounded Euclidean metric, time = distance
    orders:   [(owner, p_loc, p_win, d_loc, d_win, vol, rev)]
    vehicles: [(lsp, depot_loc, cap, (st, et))]
    lsps:     [(alpha, beta)]
    """
    xy = np.asarray(points, dtype=float)
    d = np.rint(np.hypot(*(xy[:, None, :] - xy[None, :, :]).transpose(2, 0, 1))).astype(np.int64)
    matrix = TimeDistanceMatrix(d, d)
    ords = []
    for k, (owner, pl, pw, dl, dw, vol, rev) in enumerate(orders):
        ords.append(Order(k, Waypoint(pl, pw[0], pw[1], 0, vol, k), Waypoint(dl, dw[0], dw[1], 0, -vol, k), rev, owner))
    vehs = [Vehicle(k, cap, l, Waypoint(loc, w[0], w[1])) for k, (l, loc, cap, w) in enumerate(vehicles)]
    ls = [LspParams(k, a, b, tuple(v.id for v in vehs if v.lspid == k)) for k, (a, b) in enumerate(lsps)]
    return Instance(matrix, tuple(ords), tuple(ls), tuple(vehs), tuple(map(tuple, points)), name)


def route_walk(inst: Instance, vehicle: int, stops):
    """(feasible, distance) for a stop-code sequence, straight from the raw data."""
    v = inst.vehicles[vehicle]
    T, D = inst.matrix.times, inst.matrix.distances
    wps = [v.depot]
    for c in stops:
        o = inst.orders[c // 2]
        wps.append(o.dropoff if c % 2 else o.pickup)
    wps.append(v.depot)
    t, load, dist, seen = v.depot.st, 0, 0, set()
    for a, b in zip(wps, wps[1:]):
        t = max(t + a.service + int(T[a.loc, b.loc]), b.st)
        dist += int(D[a.loc, b.loc])
        if t > b.et:
            return False, dist
        load += b.vol
        if load > v.cap:
            return False, dist
    for c in stops:
        if c % 2 and c - 1 not in seen:
            return False, dist
        seen.add(c)
    return True, dist


def route_cost(inst, vehicle, stops, dist):
    if not stops:
        return 0
    lsp = inst.lsps[inst.vehicles[vehicle].lspid]
    return lsp.beta + lsp.alpha * dist


def interleavings(orders):
    """Every stop sequence serving ``orders`` with each pickup before its drop-off."""
    codes = [c for o in orders for c in (2 * o, 2 * o + 1)]
    for perm in itertools.permutations(codes):
        pos = {c: i for i, c in enumerate(perm)}
        if all(pos[2 * o] < pos[2 * o + 1] for o in orders):
            yield perm


def best_route(inst, vehicle, orders):
    best = None
    for perm in interleavings(orders):
        ok, dist = route_walk(inst, vehicle, perm)
        if ok:
            c = route_cost(inst, vehicle, perm, dist)
            if best is None or c < best:
                best = c
    return best


def exhaustive_min_cost(inst, orders, vehicles):
    """Minimum total cost serving all ``orders`` with ``vehicles``; None if impossible."""
    best = None
    for assign in itertools.product(range(len(vehicles)), repeat=len(orders)):
        total = 0
        for k, v in enumerate(vehicles):
            mine = [o for o, a in zip(orders, assign) if a == k]
            c = best_route(inst, v, mine)
            if c is None:
                total = None
                break
            total += c
        if total is not None and (best is None or total < best):
            best = total
    return best


def random_small_instance(rng: random.Random, n_orders=None, n_vehicles=None):
    n_orders = n_orders if n_orders is not None else rng.randint(1, 4)
    n_vehicles = n_vehicles if n_vehicles is not None else rng.randint(1, 2)
    n_lsp = rng.randint(1, n_vehicles)
    points = [(rng.randint(0, 60), rng.randint(0, 60)) for _ in range(n_vehicles + 2 * n_orders)]
    horizon = 400
    vehicles = [(k % n_lsp, k, rng.randint(2, 5), (0, horizon)) for k in range(n_vehicles)]
    orders = []
    for o in range(n_orders):
        p, d = n_vehicles + 2 * o, n_vehicles + 2 * o + 1
        if rng.random() < 0.5:
            pw = (0, horizon)
            dw = (0, horizon)
        else:
            s = rng.randint(0, 150)
            pw = (s, s + rng.randint(30, 120))
            dw = (s, pw[1] + rng.randint(30, 150))
        orders.append((rng.randrange(n_lsp), p, pw, d, dw, rng.randint(1, 2), rng.randint(0, 50)))
    lsps = [(rng.randint(1, 3), rng.randint(0, 20)) for _ in range(n_lsp)]
    return make_instance(points, orders, vehicles, lsps)

"""Domain types for the multi-LSP pickup-and-delivery marketplace.

All money, time and distance quantities are integers (fixed-point in whatever
unit the instance chooses), so profit comparisons are exact.

A vehicle schedule stores only its interior stops as *stop codes*:
``2 * order_id`` is the pickup of an order and ``2 * order_id + 1`` its
drop-off.  The depot at both ends is implied by the vehicle.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional

import numpy as np


class StructuralError(ValueError):
    """Malformed input (bad ids, unknown locations), as opposed to infeasible."""


class InfeasibleInstanceError(RuntimeError):
    """Some order cannot be served by its owner's own fleet."""


def pickup_code(order_id: int) -> int:
    return 2 * order_id


def dropoff_code(order_id: int) -> int:
    return 2 * order_id + 1


def order_of(code: int) -> int:
    return code >> 1


def is_pickup(code: int) -> bool:
    return code & 1 == 0


@dataclass(frozen=True)
class Waypoint:
    loc: int
    st: int
    et: int
    service: int = 0
    vol: int = 0
    order: Optional[int] = None


@dataclass(frozen=True)
class Order:
    id: int
    pickup: Waypoint
    dropoff: Waypoint
    rev: int
    owner: int


@dataclass(frozen=True)
class Vehicle:
    id: int
    cap: int
    lspid: int
    depot: Waypoint


@dataclass(frozen=True)
class LspParams:
    id: int
    alpha: int
    beta: int
    fleet: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class TimeDistanceMatrix:
    """Pairwise travel times and distances; asymmetric matrices are fine."""

    times: np.ndarray
    distances: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=np.int64)
        distances = np.array(self.distances, dtype=np.int64)
        if times.ndim != 2 or times.shape[0] != times.shape[1]:
            raise StructuralError(f"time matrix must be square, got {times.shape}")
        if distances.shape != times.shape:
            raise StructuralError("time and distance matrices differ in shape")
        if (times < 0).any() or (distances < 0).any():
            raise StructuralError("negative travel time or distance")
        if np.diagonal(times).any() or np.diagonal(distances).any():
            raise StructuralError("matrix diagonal must be zero")
        times.setflags(write=False)
        distances.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "distances", distances)

    @property
    def size(self) -> int:
        return self.times.shape[0]

    def __eq__(self, other):
        if not isinstance(other, TimeDistanceMatrix):
            return NotImplemented
        return np.array_equal(self.times, other.times) and np.array_equal(
            self.distances, other.distances
        )

    __hash__ = None


@dataclass(frozen=True)
class VehicleSchedule:
    vehicle: int
    stops: tuple[int, ...] = ()

    @property
    def orders(self) -> frozenset[int]:
        return frozenset(c >> 1 for c in self.stops)

    @property
    def is_empty(self) -> bool:
        return not self.stops

    def waypoints(self, instance: "Instance") -> list[Waypoint]:
        """Full waypoint list, depot first and last."""
        depot = instance.vehicles[self.vehicle].depot
        out = [depot]
        for code in self.stops:
            order = instance.orders[code >> 1]
            out.append(order.dropoff if code & 1 else order.pickup)
        out.append(depot)
        return out


@dataclass(frozen=True)
class ScheduleEval:
    feasible: bool
    distance: int
    cost: int
    revenue: int
    times: tuple[int, ...]
    reason: Optional[str] = None

    @property
    def profit(self) -> int:
        return self.revenue - self.cost


@dataclass(frozen=True, eq=False)
class Instance:
    matrix: TimeDistanceMatrix
    orders: tuple[Order, ...]
    lsps: tuple[LspParams, ...]
    vehicles: tuple[Vehicle, ...]
    locations: Optional[tuple[tuple[float, float], ...]] = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "orders", tuple(self.orders))
        object.__setattr__(self, "lsps", tuple(self.lsps))
        object.__setattr__(self, "vehicles", tuple(self.vehicles))
        if self.locations is not None:
            object.__setattr__(
                self, "locations", tuple((float(x), float(y)) for x, y in self.locations)
            )
        _validate_instance(self)

    @cached_property
    def network(self):
        from gatx._routing import Network

        return Network(self)

    @property
    def zero_revenue(self) -> bool:
        return all(o.rev == 0 for o in self.orders)

    def orders_of(self, lsp: int) -> tuple[int, ...]:
        return tuple(o.id for o in self.orders if o.owner == lsp)


def _check_int(value, what):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise StructuralError(f"{what} must be an integer, got {value!r}")


def _check_waypoint(wp: Waypoint, n_loc: int, what: str):
    for name in ("loc", "st", "et", "service", "vol"):
        _check_int(getattr(wp, name), f"{what}.{name}")
    if not 0 <= wp.loc < n_loc:
        raise StructuralError(f"{what}: location {wp.loc} outside matrix of size {n_loc}")
    if wp.st > wp.et:
        raise StructuralError(f"{what}: window start {wp.st} after end {wp.et}")
    if wp.service < 0:
        raise StructuralError(f"{what}: negative service time")


def _validate_instance(inst: Instance):
    n_loc = inst.matrix.size
    for k, lsp in enumerate(inst.lsps):
        if lsp.id != k:
            raise StructuralError(f"LSP ids must be 0..n-1 in order; position {k} has {lsp.id}")
        _check_int(lsp.alpha, "alpha")
        _check_int(lsp.beta, "beta")
        if lsp.alpha < 0 or lsp.beta < 0:
            raise StructuralError(f"LSP {k}: alpha and beta must be >= 0")
    for k, v in enumerate(inst.vehicles):
        if v.id != k:
            raise StructuralError(f"vehicle ids must be 0..n-1 in order; position {k} has {v.id}")
        _check_int(v.cap, "cap")
        if v.cap <= 0:
            raise StructuralError(f"vehicle {k}: capacity must be > 0")
        if not 0 <= v.lspid < len(inst.lsps):
            raise StructuralError(f"vehicle {k}: unknown LSP {v.lspid}")
        _check_waypoint(v.depot, n_loc, f"vehicle {k} depot")
        if v.depot.vol != 0 or v.depot.order is not None:
            raise StructuralError(f"vehicle {k}: depot must carry no order and no volume")
    for lsp in inst.lsps:
        fleet = tuple(v.id for v in inst.vehicles if v.lspid == lsp.id)
        if tuple(lsp.fleet) != fleet:
            raise StructuralError(f"LSP {lsp.id}: fleet {lsp.fleet} does not match vehicles {fleet}")
    for k, o in enumerate(inst.orders):
        if o.id != k:
            raise StructuralError(f"order ids must be 0..n-1 in order; position {k} has {o.id}")
        _check_int(o.rev, "rev")
        if o.rev < 0:
            raise StructuralError(f"order {k}: negative revenue")
        if not 0 <= o.owner < len(inst.lsps):
            raise StructuralError(f"order {k}: unknown owner {o.owner}")
        _check_waypoint(o.pickup, n_loc, f"order {k} pickup")
        _check_waypoint(o.dropoff, n_loc, f"order {k} dropoff")
        if o.pickup.vol <= 0 or o.dropoff.vol != -o.pickup.vol:
            raise StructuralError(f"order {k}: pickup volume must be > 0 and drop-off its negation")
        if o.pickup.order != k or o.dropoff.order != k:
            raise StructuralError(f"order {k}: waypoints must reference the order")


@dataclass(frozen=True)
class Solution:
    """One schedule per vehicle plus the no-collaboration baseline.

    ``baseline`` holds Init per LSP; ``baseline_distance`` the total distance
    of the baseline routes (used for distance-based welfare).
    """

    schedules: tuple[VehicleSchedule, ...]
    baseline: tuple[int, ...]
    baseline_distance: int

    def replace(self, new_schedules: Iterable[VehicleSchedule]) -> "Solution":
        scheds = list(self.schedules)
        for s in new_schedules:
            scheds[s.vehicle] = s
        return Solution(tuple(scheds), self.baseline, self.baseline_distance)


def evaluate_schedule(schedule: VehicleSchedule, instance: Instance) -> ScheduleEval:
    """Walk the schedule once: times (early arrivals wait), load, cost, revenue.

    Raises StructuralError for unknown vehicles or stop codes; every other
    problem yields ``feasible=False`` with a reason.
    """
    net = instance.network
    if not 0 <= schedule.vehicle < len(instance.vehicles):
        raise StructuralError(f"unknown vehicle {schedule.vehicle}")
    n_codes = 2 * len(instance.orders)
    for c in schedule.stops:
        if isinstance(c, bool) or not isinstance(c, (int, np.integer)) or not 0 <= c < n_codes:
            raise StructuralError(f"unknown stop code {c!r}")
    return net.full_eval(schedule.vehicle, schedule.stops)


def schedule_profit(schedule: VehicleSchedule, instance: Instance) -> int:
    ev = evaluate_schedule(schedule, instance)
    return ev.revenue - ev.cost


def lsp_profits(solution: Solution, instance: Instance) -> list[int]:
    profits = [0] * len(instance.lsps)
    for s in solution.schedules:
        ev = evaluate_schedule(s, instance)
        profits[instance.vehicles[s.vehicle].lspid] += ev.revenue - ev.cost
    return profits


def lsp_profit(solution: Solution, instance: Instance, lsp: int) -> int:
    """Sum of revenue minus cost over the LSP's fleet."""
    if not 0 <= lsp < len(instance.lsps):
        raise KeyError(f"unknown LSP {lsp}")
    total = 0
    for vid in instance.lsps[lsp].fleet:
        ev = evaluate_schedule(solution.schedules[vid], instance)
        total += ev.revenue - ev.cost
    return total


def total_distance(solution: Solution, instance: Instance) -> int:
    return sum(evaluate_schedule(s, instance).distance for s in solution.schedules)


def total_profit(solution: Solution, instance: Instance) -> int:
    return sum(lsp_profits(solution, instance))


def social_welfare(solution: Solution, instance: Instance) -> Optional[float]:
    """Percent improvement over the baseline; None when the baseline is zero.

    Zero-revenue instances measure total distance, all others total profit.
    """
    if instance.zero_revenue:
        d0 = solution.baseline_distance
        if d0 == 0:
            return None
        return 100.0 * (d0 - total_distance(solution, instance)) / d0
    p0 = sum(solution.baseline)
    if p0 == 0:
        return None
    return 100.0 * (total_profit(solution, instance) - p0) / abs(p0)

"""Benchmark instances: Li & Lim files, offset merges, mock markets, the toy.

Coordinates are turned into integer matrices by scaling Euclidean distance
by ``SCALE`` and rounding; travel time equals distance.  Time windows and
service times are scaled by the same factor so they stay commensurate.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from gatx.model import (
    Instance,
    LspParams,
    Order,
    TimeDistanceMatrix,
    Vehicle,
    Waypoint,
)

SCALE = 100
REVENUE_MODES = ("zero", "fixed", "per-distance")


class LiLimParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class LiLimRow:
    id: int
    x: float
    y: float
    demand: int
    earliest: int
    latest: int
    service: int
    pickup_ref: int
    delivery_ref: int


@dataclass(frozen=True)
class LiLimInstance:
    vehicle_count: int
    capacity: int
    speed: float
    rows: tuple[LiLimRow, ...]
    name: str = ""

    @property
    def pairs(self) -> list[tuple[int, int]]:
        """(pickup row, delivery row) for every request, by pickup row id."""
        return [(r.id, r.delivery_ref) for r in self.rows[1:] if r.demand > 0]


def parse_li_lim(text: str, name: str = "") -> LiLimInstance:
    lines = [(n, ln.split()) for n, ln in enumerate(text.splitlines(), start=1)]
    lines = [(n, parts) for n, parts in lines if parts]
    if not lines:
        raise LiLimParseError(1, "empty file")
    n0, head = lines[0]
    if len(head) != 3:
        raise LiLimParseError(n0, f"header needs 3 fields (vehicles capacity speed), got {len(head)}")
    try:
        vehicles, capacity, speed = int(head[0]), int(head[1]), float(head[2])
    except ValueError as exc:
        raise LiLimParseError(n0, f"bad header: {exc}") from None
    if vehicles <= 0 or capacity <= 0:
        raise LiLimParseError(n0, "vehicle count and capacity must be positive")

    rows: list[LiLimRow] = []
    line_of = {}
    for n, parts in lines[1:]:
        if len(parts) != 9:
            raise LiLimParseError(n, f"expected 9 fields, got {len(parts)}")
        try:
            rid = int(parts[0])
            x, y = float(parts[1]), float(parts[2])
            ints = [int(p) for p in parts[3:]]
        except ValueError as exc:
            raise LiLimParseError(n, f"malformed row: {exc}") from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise LiLimParseError(n, "coordinates must be finite")
        if rid != len(rows):
            raise LiLimParseError(n, f"row id {rid} out of sequence, expected {len(rows)}")
        row = LiLimRow(rid, x, y, *ints)
        if row.earliest > row.latest:
            raise LiLimParseError(n, "time window opens after it closes")
        if row.service < 0:
            raise LiLimParseError(n, "negative service time")
        rows.append(row)
        line_of[rid] = n
    if not rows:
        raise LiLimParseError(n0, "no depot row")
    if rows[0].demand != 0:
        raise LiLimParseError(line_of[0], "depot row must have zero demand")

    for r in rows[1:]:
        n = line_of[r.id]
        if r.demand > 0:
            if r.pickup_ref != 0 or not 0 < r.delivery_ref < len(rows):
                raise LiLimParseError(n, f"pickup {r.id} has dangling delivery reference {r.delivery_ref}")
            d = rows[r.delivery_ref]
            if d.pickup_ref != r.id:
                raise LiLimParseError(n, f"delivery {d.id} does not point back to pickup {r.id}")
            if d.demand + r.demand != 0:
                raise LiLimParseError(n, f"pair {r.id}/{d.id} demands {r.demand}, {d.demand} do not cancel")
        elif r.demand < 0:
            if r.delivery_ref != 0 or not 0 < r.pickup_ref < len(rows):
                raise LiLimParseError(n, f"delivery {r.id} has dangling pickup reference {r.pickup_ref}")
            if rows[r.pickup_ref].delivery_ref != r.id:
                raise LiLimParseError(n, f"pickup {r.pickup_ref} does not point to delivery {r.id}")
        else:
            raise LiLimParseError(n, f"customer {r.id} has zero demand")
    return LiLimInstance(vehicles, capacity, speed, tuple(rows), name)


def format_li_lim(inst: LiLimInstance) -> str:
    def num(v):
        return str(int(v)) if float(v).is_integer() else repr(float(v))

    speed = num(inst.speed)
    out = [f"{inst.vehicle_count}\t{inst.capacity}\t{speed}"]
    for r in inst.rows:
        out.append(
            "\t".join(
                [str(r.id), num(r.x), num(r.y)]
                + [str(v) for v in (r.demand, r.earliest, r.latest, r.service, r.pickup_ref, r.delivery_ref)]
            )
        )
    return "\n".join(out) + "\n"


def bundled_names() -> list[str]:
    files = resources.files("gatx") / "data"
    return sorted(p.name[:-4] for p in files.iterdir() if p.name.endswith(".txt"))


def load_li_lim(ref: str) -> LiLimInstance:
    """Load a bundled instance by name (e.g. ``LC1_2_2``) or a file path."""
    path = Path(ref)
    if path.suffix == ".txt" and path.exists():
        return parse_li_lim(path.read_text(), path.stem)
    res = resources.files("gatx") / "data" / f"{ref}.txt"
    if not res.is_file():
        raise FileNotFoundError(f"no bundled instance or file named {ref!r}")
    return parse_li_lim(res.read_text(), ref)


def euclidean_matrix(points: Sequence[tuple[float, float]]) -> TimeDistanceMatrix:
    """Scaled, rounded Euclidean distances; travel time equals distance."""
    xy = np.asarray(points, dtype=float).reshape(-1, 2)
    diff = xy[:, None, :] - xy[None, :, :]
    dist = np.rint(np.hypot(diff[..., 0], diff[..., 1]) * SCALE).astype(np.int64)
    return TimeDistanceMatrix(dist, dist)


@dataclass(frozen=True)
class MergeSpec:
    """Two Li & Lim files, the second shifted by ``offset``; one LSP each."""

    file_a: str
    file_b: str
    offset: tuple[float, float] = (0.0, 0.0)
    alpha: tuple[int, int] = (1, 1)
    beta: tuple[int, int] = (0, 0)
    revenue_mode: str = "zero"
    # fixed: revenue per order; per-distance: revenue per unit of direct distance
    revenue: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "offset", tuple(float(v) for v in self.offset))
        object.__setattr__(self, "alpha", tuple(int(v) for v in self.alpha))
        object.__setattr__(self, "beta", tuple(int(v) for v in self.beta))
        if len(self.offset) != 2 or not all(math.isfinite(v) for v in self.offset):
            raise ValueError(f"offset must be two finite numbers, got {self.offset}")
        if len(self.alpha) != 2 or len(self.beta) != 2:
            raise ValueError("alpha and beta need one value per LSP")
        if self.revenue_mode not in REVENUE_MODES:
            raise ValueError(f"revenue_mode must be one of {REVENUE_MODES}")

    @property
    def name(self) -> str:
        dx, dy = (int(v) if v.is_integer() else v for v in self.offset)
        return f"{self.file_a}+{self.file_b}({dx},{dy})"

    @classmethod
    def from_dict(cls, d: dict) -> "MergeSpec":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown MergeSpec fields: {sorted(extra)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return {
            "file_a": self.file_a,
            "file_b": self.file_b,
            "offset": list(self.offset),
            "alpha": list(self.alpha),
            "beta": list(self.beta),
            "revenue_mode": self.revenue_mode,
            "revenue": self.revenue,
        }


MERGE_CONFIGS = tuple(
    MergeSpec(a, b, off)
    for a, b, off in [
        ("LC1_2_2", "LC1_2_6", (42, -42)),
        ("LC1_2_2", "LC1_2_7", (-32, -32)),
        ("LC1_2_4", "LC1_2_7", (-30, 0)),
        ("LC1_2_4", "LC1_2_8", (-30, 0)),
        ("LC1_2_10", "LC1_2_4", (30, 0)),
        ("LR1_2_3", "LR1_2_8", (0, 30)),
        ("LR1_2_5", "LR1_2_8", (0, 30)),
        ("LR1_2_8", "LR1_2_9", (0, -30)),
        ("LR1_2_10", "LR1_2_3", (0, -30)),
        ("LR1_2_10", "LR1_2_8", (0, 30)),
    ]
)


@dataclass
class _Builder:
    """Accumulates locations, orders and fleets, then freezes an Instance."""

    points: list = field(default_factory=list)
    orders: list = field(default_factory=list)
    vehicles: list = field(default_factory=list)
    costs: list = field(default_factory=list)

    def point(self, x: float, y: float) -> int:
        self.points.append((float(x), float(y)))
        return len(self.points) - 1

    def add_lsp(self, alpha: int, beta: int) -> int:
        self.costs.append((alpha, beta))
        return len(self.costs) - 1

    def add_vehicles(self, lsp: int, count: int, cap: int, depot_loc: int, st: int, et: int):
        for _ in range(count):
            depot = Waypoint(depot_loc, st, et)
            self.vehicles.append(Vehicle(len(self.vehicles), cap, lsp, depot))

    def add_order(self, owner, p_loc, p_win, d_loc, d_win, vol, rev=0, p_svc=0, d_svc=0):
        oid = len(self.orders)
        pick = Waypoint(p_loc, p_win[0], p_win[1], p_svc, vol, oid)
        drop = Waypoint(d_loc, d_win[0], d_win[1], d_svc, -vol, oid)
        self.orders.append(Order(oid, pick, drop, rev, owner))
        return oid

    def build(self, name: str = "", revenue=None) -> Instance:
        matrix = euclidean_matrix(self.points)
        orders = self.orders
        if revenue is not None:
            D = matrix.distances
            orders = [
                Order(o.id, o.pickup, o.dropoff, revenue(o, int(D[o.pickup.loc, o.dropoff.loc])), o.owner)
                for o in orders
            ]
        lsps = [
            LspParams(k, a, b, tuple(v.id for v in self.vehicles if v.lspid == k))
            for k, (a, b) in enumerate(self.costs)
        ]
        return Instance(matrix, tuple(orders), tuple(lsps), tuple(self.vehicles), tuple(self.points), name)


def _add_li_lim(b: _Builder, li: LiLimInstance, lsp: int, dx: float, dy: float):
    loc = [b.point(r.x + dx, r.y + dy) for r in li.rows]
    dep = li.rows[0]
    b.add_vehicles(lsp, li.vehicle_count, li.capacity, loc[0], dep.earliest * SCALE, dep.latest * SCALE)
    for p, d in li.pairs:
        rp, rd = li.rows[p], li.rows[d]
        b.add_order(
            lsp,
            loc[p], (rp.earliest * SCALE, rp.latest * SCALE),
            loc[d], (rd.earliest * SCALE, rd.latest * SCALE),
            rp.demand,
            p_svc=rp.service * SCALE,
            d_svc=rd.service * SCALE,
        )


def offset_merge(spec: MergeSpec) -> Instance:
    a = load_li_lim(spec.file_a)
    bb = load_li_lim(spec.file_b)
    b = _Builder()
    for k in range(2):
        b.add_lsp(spec.alpha[k], spec.beta[k])
    _add_li_lim(b, a, 0, 0.0, 0.0)
    _add_li_lim(b, bb, 1, *spec.offset)
    return b.build(spec.name, _revenue_rule(spec.revenue_mode, spec.revenue))


def li_lim_instance(li: LiLimInstance, alpha: int = 1, beta: int = 0, max_orders: Optional[int] = None,
                    max_vehicles: Optional[int] = None) -> Instance:
    """Single-LSP instance from one file, optionally truncated."""
    if max_orders is not None or max_vehicles is not None:
        pairs = li.pairs[:max_orders] if max_orders is not None else li.pairs
        keep = sorted({0} | {i for pd in pairs for i in pd})
        new_id = {old: new for new, old in enumerate(keep)}
        rows = []
        for old in keep:
            r = li.rows[old]
            rows.append(
                LiLimRow(new_id[old], r.x, r.y, r.demand, r.earliest, r.latest, r.service,
                         new_id.get(r.pickup_ref, 0), new_id.get(r.delivery_ref, 0))
            )
        li = LiLimInstance(max_vehicles or li.vehicle_count, li.capacity, li.speed, tuple(rows), li.name)
    b = _Builder()
    b.add_lsp(alpha, beta)
    _add_li_lim(b, li, 0, 0.0, 0.0)
    return b.build(li.name)


def _revenue_rule(mode: str, amount: float):
    if mode == "zero":
        return lambda o, direct: 0
    if mode == "fixed":
        return lambda o, direct: int(round(amount))
    return lambda o, direct: int(round(amount * direct))


def generate_mock_small(seed: int, lsps: int = 6, vehicles_per_lsp: int = 10, orders: int = 40) -> Instance:
    """Random market with more vehicles than orders, priced so profits are positive.

    Every order is reachable from its owner's depot within its windows, so the
    no-collaboration baseline always exists.
    """
    if lsps <= 0 or vehicles_per_lsp <= 0 or orders <= 0:
        raise ValueError("lsps, vehicles_per_lsp and orders must be positive")
    rng = random.Random(seed)
    side, horizon, cap = 100.0, 1000, 10
    b = _Builder()
    depots = []
    for k in range(lsps):
        b.add_lsp(1, 30 * SCALE)
        depots.append(b.point(rng.uniform(0, side), rng.uniform(0, side)))
    for k in range(lsps):
        b.add_vehicles(k, vehicles_per_lsp, cap, depots[k], 0, horizon * SCALE)

    def dist(p, q):
        return round(math.hypot(p[0] - q[0], p[1] - q[1]) * SCALE)

    for n in range(orders):
        owner = n % lsps
        home = b.points[depots[owner]]
        while True:
            p = (rng.uniform(0, side), rng.uniform(0, side))
            ang, rad = rng.uniform(0, 2 * math.pi), rng.uniform(5, 30)
            d = (min(max(p[0] + rad * math.cos(ang), 0.0), side), min(max(p[1] + rad * math.sin(ang), 0.0), side))
            p_st = rng.randrange(0, horizon // 2) * SCALE
            p_et = p_st + rng.randrange(100, 300) * SCALE
            svc = 5 * SCALE
            t = max(dist(home, p), p_st)
            if t > p_et:
                continue
            t_d = t + svc + dist(p, d)
            d_st = p_st
            d_et = max(p_et, t_d) + rng.randrange(100, 300) * SCALE
            if t_d + svc + dist(d, home) > horizon * SCALE:
                continue
            break
        b.add_order(owner, b.point(*p), (p_st, p_et), b.point(*d), (d_st, d_et),
                    rng.randint(1, 3), p_svc=svc, d_svc=svc)
    return b.build(f"mock-small-{seed}", lambda o, direct: 2 * direct + 60 * SCALE)


def toy_instance() -> Instance:
    """Two LSPs with one vehicle each; each LSP owns an order lying in the other's area.

    Routing alone, each vehicle makes a long detour for its stray order.
    Swapping the stray orders removes both detours.  Every single-order
    transfer costs the receiving LSP extra distance, so a transfer can never
    pass individual rationality without a matching transfer back.
    """
    b = _Builder()
    for _ in range(2):
        b.add_lsp(1, 0)
    horizon = 10**6
    depot1, depot2 = b.point(0, 0), b.point(200, 0)
    b.add_vehicles(0, 1, 10, depot1, 0, horizon)
    b.add_vehicles(1, 1, 10, depot2, 0, horizon)
    win = (0, horizon)
    # orders 0, 1 belong to LSP 0; orders 2, 3 to LSP 1 (the toy's o1..o4)
    b.add_order(0, b.point(10, 0), win, b.point(20, 0), win, 1)
    b.add_order(0, b.point(180, 20), win, b.point(190, 20), win, 1)
    b.add_order(1, b.point(190, 0), win, b.point(180, 0), win, 1)
    b.add_order(1, b.point(20, 20), win, b.point(10, 20), win, 1)
    return b.build("toy")

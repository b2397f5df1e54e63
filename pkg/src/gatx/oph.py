"""Order-package exchange baseline.

A package is a run of consecutive stops that contains both ends of every
order it touches, so it can be cut out of its route as a unit.  Each
package is priced against every other vehicle as a one-to-one exchange.
A combination step then picks exchanges so that every vehicle either
donates (possibly several packages) or receives (at most one), never both,
and every LSP stays individually rational on the estimated deltas.
Routes are then rebuilt for real, and exchanges are dropped until the
rebuilt plan is feasible and individually rational.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional, TextIO

from gatx import combiner
from gatx._routing import best_block_insertion, best_insertion, insert_pair
from gatx.gat import IterationRecord, RunResult, candidate_vehicles, write_diagnostics
from gatx.model import Instance, Solution, VehicleSchedule, lsp_profits, social_welfare
from gatx.pdptw import initial_solution

# Exchange selection under tight individual rationality can need millions of
# nodes to prove optimality, so the baseline searches on a fixed node budget
# and reports whether the optimum was proved.
SELECTION_NODE_LIMIT = 5_000


@dataclass(frozen=True)
class OrderPackage:
    source_vehicle: int
    orders: frozenset
    span: tuple[int, int]  # stops[span[0]:span[1]]


@dataclass(frozen=True)
class OneToOneExchange:
    package: OrderPackage
    receiver: int
    donor_delta: int
    receiver_delta: int
    receiver_stops: tuple[int, ...]

    @property
    def total(self) -> int:
        return self.donor_delta + self.receiver_delta


@dataclass(frozen=True)
class OphConfig:
    max_iterations: int = 1
    seed: int = 0
    initial_time_limit: float = 30.0
    node_limit: int = SELECTION_NODE_LIMIT

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")


def enumerate_packages(schedule: VehicleSchedule) -> list[OrderPackage]:
    stops = schedule.stops
    out = []
    for s in range(len(stops)):
        if stops[s] & 1:
            continue
        pending = set()
        orders = set()
        for e in range(s, len(stops)):
            c = stops[e]
            if c & 1:
                if c >> 1 not in pending:
                    break  # its pickup lies before the block
                pending.discard(c >> 1)
            else:
                pending.add(c >> 1)
                orders.add(c >> 1)
            if not pending:
                out.append(OrderPackage(schedule.vehicle, frozenset(orders), (s, e + 1)))
    return out


def _compatible(net, pkg_block, receiver, peak) -> bool:
    """Cheap screen: load fits, and the block can start and finish within the depot day."""
    if peak > net.cap[receiver]:
        return False
    first, last = pkg_block[0], pkg_block[-1]
    dl = net.vloc[receiver]
    if net.vst[receiver] + net.vsvc[receiver] + net.T[dl][net.loc[first]] > net.et[first]:
        return False
    earliest_last = max(net.st[last], net.st[first])
    return earliest_last + net.svc[last] + net.T[net.loc[last]][dl] <= net.vet[receiver]


def generate_exchanges(solution: Solution, instance: Instance, stats: Optional[dict] = None) -> list[OneToOneExchange]:
    """Price every package against every other (non-redundant) vehicle.

    The donor side assumes only this package leaves the route; the receiver
    side is the cheapest insertion, keeping the package's own stop order.
    """
    net = instance.network
    sched = solution.schedules
    receivers = candidate_vehicles(solution, instance)
    auxes = {v: net.aux(v, sched[v].stops) for v in receivers}
    profit_now = {v: net.profit(v, sched[v].stops) for v in receivers}
    out = []
    screened = 0
    for donor in receivers:
        stops = sched[donor].stops
        for pkg in enumerate_packages(sched[donor]):
            a, b = pkg.span
            block = stops[a:b]
            reduced = stops[:a] + stops[b:]
            ok, dist = net.evaluate(donor, reduced)
            if not ok:
                continue
            donor_delta = net.revenue(reduced) - net.cost(donor, reduced, dist) - profit_now[donor]
            rev = net.revenue(block)
            load = peak = 0
            for c in block:
                load += net.vol[c]
                peak = max(peak, load)
            for r in receivers:
                if r == donor or not _compatible(net, block, r, peak):
                    screened += 1
                    continue
                aux = auxes[r]
                if aux is None:
                    continue
                if len(pkg.orders) == 1:
                    ins = best_insertion(net, aux, block[0] >> 1, float("inf"))
                    if ins is None:
                        continue
                    delta, i, j = ins
                    new = insert_pair(sched[r].stops, block[0] >> 1, i, j)
                else:
                    ins = best_block_insertion(net, aux, block, float("inf"))
                    if ins is None:
                        continue
                    delta, i = ins
                    new = sched[r].stops[:i] + block + sched[r].stops[i:]
                out.append(OneToOneExchange(pkg, r, donor_delta, rev - delta, new))
    if stats is not None:
        stats.update(exchanges=len(out), screened=screened)
    return out


def _lsp_deltas(net, ex: OneToOneExchange) -> dict:
    ld, lr = net.vlsp[ex.package.source_vehicle], net.vlsp[ex.receiver]
    if ld == lr:
        return {ld: ex.donor_delta + ex.receiver_delta}
    return {ld: ex.donor_delta, lr: ex.receiver_delta}


def select_exchanges(exchanges, lsp_slack, instance, node_limit=SELECTION_NODE_LIMIT):
    """Best full exchange on estimated deltas; (chosen indices, proved optimal)."""
    net = instance.network
    rows: dict = {}
    for k, ex in enumerate(exchanges):
        rows.setdefault(("recv", ex.receiver), []).append(k)
        for o in ex.package.orders:
            rows.setdefault(("order", o), []).append(k)
    by_receiver = {key[1]: ks for key, ks in rows.items() if key[0] == "recv"}
    for k, ex in enumerate(exchanges):
        # a donor cannot also receive: {k} plus everything received by its source is a clique
        recv = by_receiver.get(ex.package.source_vehicle)
        if recv:
            rows[("role", k)] = [k] + recv
    row_list = [rows[key] for key in sorted(rows, key=repr)]
    conflicts = combiner.conflicts_from_rows(len(exchanges), row_list)
    chosen, optimal, _ = combiner.pack(
        [ex.total for ex in exchanges],
        [_lsp_deltas(net, ex) for ex in exchanges],
        conflicts,
        row_list,
        lsp_slack,
        node_limit,
    )
    return list(chosen), optimal


def realize(solution: Solution, instance: Instance, exchanges, chosen):
    """Rebuild the touched routes; returns (new solution, offending indices).

    Offenders are exchanges whose donor route became infeasible or whose LSPs
    fell below their baseline; if the plan lowers total profit, all of them.
    """
    net = instance.network
    sched = solution.schedules
    leaving: dict = {}
    for k in chosen:
        leaving.setdefault(exchanges[k].package.source_vehicle, set()).update(exchanges[k].package.orders)
    new = {}
    bad_vehicles = set()
    for donor, orders in leaving.items():
        stops = tuple(c for c in sched[donor].stops if c >> 1 not in orders)
        if not net.evaluate(donor, stops)[0]:
            bad_vehicles.add(donor)
        new[donor] = VehicleSchedule(donor, stops)
    for k in chosen:
        r = exchanges[k].receiver
        new[r] = VehicleSchedule(r, exchanges[k].receiver_stops)
    result = solution.replace(new.values())
    profits = lsp_profits(result, instance)
    bad_lsps = {l for l, (p, init) in enumerate(zip(profits, solution.baseline)) if p < init}
    if sum(profits) < sum(lsp_profits(solution, instance)):
        # estimates were too rosy overall; every kept exchange is a suspect
        return result, list(chosen)
    offending = [
        k for k in chosen
        if exchanges[k].package.source_vehicle in bad_vehicles
        or net.vlsp[exchanges[k].package.source_vehicle] in bad_lsps
        or net.vlsp[exchanges[k].receiver] in bad_lsps
    ]
    return result, offending


def combine_full_exchange(solution: Solution, instance: Instance, exchanges, lsp_slack,
                          node_limit=SELECTION_NODE_LIMIT):
    """Select, rebuild, and back off until the rebuilt plan is valid.

    Returns (kept exchange indices, new solution, estimate proved optimal).
    """
    chosen, optimal = select_exchanges(exchanges, lsp_slack, instance, node_limit)
    while chosen:
        result, offending = realize(solution, instance, exchanges, chosen)
        if not offending:
            return sorted(chosen), result, optimal
        worst = min(offending, key=lambda k: (exchanges[k].total, k))
        chosen.remove(worst)
    return [], solution, optimal


def run(
    instance: Instance,
    cfg: OphConfig = OphConfig(),
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
    for it in range(1, cfg.max_iterations + 1):
        t_it = time.perf_counter()
        stats: dict = {}
        exchanges = generate_exchanges(current, instance, stats)
        slack = {k: p - init for k, (p, init) in enumerate(zip(profits, current.baseline))}
        kept, current, optimal = combine_full_exchange(current, instance, exchanges, slack, cfg.node_limit)
        profits = lsp_profits(current, instance)
        stats.update(plan_optimal=optimal)
        rec = IterationRecord(
            it,
            social_welfare(current, instance),
            sum(profits),
            tuple(profits),
            len(exchanges),
            len(kept),
            time.perf_counter() - t_it,
            stats,
        )
        history.append(rec)
        if diagnostics is not None:
            write_diagnostics(diagnostics, "oph", rec)
        if not kept:
            break
    return RunResult(initial, current, tuple(history), init_seconds, time.perf_counter() - t0)

"""Choose the best compatible subset of candidate actions.

Each action touches some vehicles and changes each LSP's profit by a known
amount.  A plan may use every vehicle at most once and must leave every LSP
at or above its baseline: ``sum(deltas of l) + slack[l] >= 0``.  Among plans
with the largest total change, fewer actions win, then the lexicographically
smallest sorted index tuple.

The search is a depth-first branch and bound over actions sorted by
decreasing value, including each candidate before skipping it.  Small
problems are bounded by the positive tail sum; larger ones additionally by a
warm-started LP relaxation (clique rows per shared resource plus one row per
LSP) that is re-solved as items are fixed in or out.
"""

from __future__ import annotations

import heapq
import math
import sys
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix

BRUTEFORCE_LIMIT = 20
SMALL_PROBLEM = 40
DEFAULT_NODE_LIMIT = 2_000_000


@dataclass(frozen=True)
class SelectionProblem:
    """``actions`` need ``.vehicles`` (tuple) and ``.delta_profit`` (LSP -> int)."""

    actions: tuple
    lsp_slack: Mapping[int, int]
    vehicles: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        for lsp, s in self.lsp_slack.items():
            if s < 0:
                raise ValueError(f"negative slack {s} for LSP {lsp}")
        if self.vehicles:
            for a in self.actions:
                if not set(a.vehicles) <= set(self.vehicles):
                    raise ValueError(f"action touches vehicles outside the universe: {a.vehicles}")


@dataclass(frozen=True)
class ExchangePlan:
    selected: tuple[int, ...]
    actions: tuple = ()
    total_delta: int = 0
    per_lsp_delta: Mapping[int, int] = field(default_factory=dict)
    optimal: bool = True
    nodes: int = field(default=0, compare=False)


def _delta_total(action) -> int:
    return sum(action.delta_profit.values())


def _plan(problem: SelectionProblem, chosen: Sequence[int], optimal=True, nodes=0) -> ExchangePlan:
    chosen = tuple(sorted(chosen))
    per_lsp: dict[int, int] = {}
    for k in chosen:
        for lsp, d in problem.actions[k].delta_profit.items():
            per_lsp[lsp] = per_lsp.get(lsp, 0) + d
    picked = tuple(problem.actions[k] for k in chosen)
    return ExchangePlan(chosen, picked, sum(per_lsp.values()), per_lsp, optimal, nodes)


def select(problem: SelectionProblem, node_limit: int = DEFAULT_NODE_LIMIT) -> ExchangePlan:
    actions = problem.actions
    rows_by_vehicle: dict = {}
    for k, a in enumerate(actions):
        for v in set(a.vehicles):
            rows_by_vehicle.setdefault(v, []).append(k)
    rows = [rows_by_vehicle[v] for v in sorted(rows_by_vehicle)]
    conflicts = conflicts_from_rows(len(actions), rows)
    chosen, optimal, nodes = pack(
        [_delta_total(a) for a in actions],
        [a.delta_profit for a in actions],
        conflicts,
        rows,
        problem.lsp_slack,
        node_limit,
    )
    plan = _plan(problem, chosen, optimal, nodes)
    _check_plan(problem, plan)
    return plan


def _check_plan(problem: SelectionProblem, plan: ExchangePlan):
    used = set()
    for k in plan.selected:
        vs = set(problem.actions[k].vehicles)
        if used & vs:
            raise AssertionError(f"plan reuses vehicles {sorted(used & vs)}")
        used |= vs
    for lsp, d in plan.per_lsp_delta.items():
        if d + problem.lsp_slack.get(lsp, 0) < 0:
            raise AssertionError(f"plan breaks individual rationality for LSP {lsp}")


def select_bruteforce(problem: SelectionProblem) -> ExchangePlan:
    """Enumerate every vehicle-disjoint subset; reference for ``select``."""
    actions = problem.actions
    n = len(actions)
    if n > BRUTEFORCE_LIMIT:
        raise ValueError(f"brute force refuses {n} > {BRUTEFORCE_LIMIT} actions")
    vsets = [frozenset(a.vehicles) for a in actions]
    totals = [_delta_total(a) for a in actions]
    slack = problem.lsp_slack
    best = [(0, 0, ())]

    def feasible_ir(chosen):
        acc: dict = {}
        for k in chosen:
            for lsp, d in actions[k].delta_profit.items():
                acc[lsp] = acc.get(lsp, 0) + d
        return all(d + slack.get(lsp, 0) >= 0 for lsp, d in acc.items())

    def visit(k, used, chosen):
        if k == n:
            if not feasible_ir(chosen):
                return
            total = sum(totals[c] for c in chosen)
            bt, bc, bs = best[0]
            key = tuple(chosen)
            if total > bt or (total == bt and (len(key) < bc or (len(key) == bc and key < bs))):
                best[0] = (total, len(key), key)
            return
        visit(k + 1, used, chosen)
        if not used & vsets[k]:
            chosen.append(k)
            visit(k + 1, used | vsets[k], chosen)
            chosen.pop()

    visit(0, frozenset(), [])
    return _plan(problem, best[0][2])


def conflicts_from_rows(n: int, rows: Sequence[Sequence[int]]) -> list[int]:
    """Bitmask per item of the items sharing at least one row with it."""
    masks = [0] * n
    for row in rows:
        m = 0
        for k in row:
            m |= 1 << k
        for k in row:
            masks[k] |= m
    return [masks[k] & ~(1 << k) for k in range(n)]


def pack(
    weights: Sequence[int],
    deltas: Sequence[Mapping[int, int]],
    conflicts: Sequence[int],
    rows: Sequence[Sequence[int]],
    slack: Mapping[int, int],
    node_limit: int = DEFAULT_NODE_LIMIT,
):
    """Exact conflict-free, IR-feasible subset maximizing total weight.

    ``conflicts[k]`` is a bitmask over item indices that exclude item k.
    ``rows`` are cliques (sets of mutually exclusive items).  They only feed
    the LP bound, so they must be valid cliques; the bound is tightest when
    every conflict is covered by some row.

    Returns (sorted chosen indices, proved_optimal, nodes).
    """
    n = len(weights)
    lsps = sorted(set(slack) | {l for d in deltas for l in d})
    lidx = {l: i for i, l in enumerate(lsps)}
    n_l = len(lsps)
    slack_vec = [int(slack.get(l, 0)) for l in lsps]

    # an item with no positive LSP component never belongs to the best plan
    keep = [a for a in range(n) if any(v > 0 for v in deltas[a].values())]
    order = sorted(keep, key=lambda a: (-weights[a], a))
    m = len(order)
    if m == 0:
        return (), True, 0
    W = [int(weights[a]) for a in order]
    DL = []
    for a in order:
        vec = [0] * n_l
        for l, d in deltas[a].items():
            vec[lidx[l]] = int(d)
        DL.append(vec)

    cum_pos = [0] * (m + 1)
    for t in range(m):
        cum_pos[t + 1] = cum_pos[t] + max(W[t], 0)
    suf_pos_l = [[0] * n_l for _ in range(m + 1)]
    for t in range(m - 1, -1, -1):
        nxt, cur = suf_pos_l[t + 1], suf_pos_l[t]
        for i in range(n_l):
            x = DL[t][i]
            cur[i] = nxt[i] + (x if x > 0 else 0)
    suf_min_idx = [0] * (m + 1)
    suf_min_idx[m] = n
    for t in range(m - 1, -1, -1):
        suf_min_idx[t] = min(order[t], suf_min_idx[t + 1])

    lp = None
    if m > SMALL_PROBLEM:
        pos_of = {a: t for t, a in enumerate(order)}
        lp_rows = [[pos_of[a] for a in row if a in pos_of] for row in rows]
        lp = _NodeLP(W, DL, [r for r in lp_rows if len(r) > 1], slack_vec)

    best_total, best_count, best_sel = 0, 0, ()
    nodes = 0
    aborted = False

    def offer(total, count, key):
        nonlocal best_total, best_count, best_sel
        if total > best_total or (
            total == best_total and (count < best_count or (count == best_count and key < best_sel))
        ):
            best_total, best_count, best_sel = total, count, key

    def dfs(pos, total, count, sel, forbidden, residual):
        nonlocal nodes, aborted
        nodes += 1
        if nodes > node_limit:
            aborted = True
            return
        if total >= best_total and all(x >= 0 for x in residual):
            offer(total, count, tuple(sorted(sel)))
        dropped = []
        frontier = pos
        for k in range(pos, m):
            a = order[k]
            if forbidden >> a & 1:
                continue
            if lp is None:
                s = 0
                for t in range(k, m):
                    if W[t] <= 0:
                        break
                    if not forbidden >> order[t] & 1:
                        s += W[t]
                ub = total + s
            else:
                ub = total + cum_pos[m] - cum_pos[k]
            if ub < best_total:
                break
            if any(residual[i] + suf_pos_l[k][i] < 0 for i in range(n_l)):
                break
            if lp is not None:
                # positions pos..k-1 are decided "out" at this point
                for t in range(frontier, k):
                    lp.exclude(t)
                    dropped.append(t)
                frontier = k
                res = lp.solve()
                if res is None:
                    break
                lp_ub, integral = res
                if integral is not None and _ir_ok(integral, DL, slack_vec):
                    chosen = [order[t] for t in integral]
                    if not any(conflicts[a] >> b & 1 for a in chosen for b in chosen):
                        offer(sum(W[t] for t in integral), len(chosen), tuple(sorted(chosen)))
                if lp_ub < ub:
                    ub = lp_ub
                if ub < best_total:
                    break
            if ub == best_total:
                need = best_total - total
                r = bisect_left(cum_pos, cum_pos[k] + need, lo=k) - k if need > 0 else 0
                r = max(r, 1)
                if k + r > m or count + r > best_count:
                    break
                if count + r == best_count:
                    if r == 1:
                        smallest = (suf_min_idx[k],)
                    else:
                        smallest = tuple(heapq.nsmallest(r, order[k:]))
                    if tuple(sorted(sel + list(smallest))) >= best_sel:
                        break
            vec = DL[k]
            sel.append(a)
            if lp is not None:
                lp.fix(k)
            dfs(
                k + 1,
                total + W[k],
                count + 1,
                sel,
                forbidden | conflicts[a],
                [residual[i] + vec[i] for i in range(n_l)],
            )
            sel.pop()
            if lp is not None:
                lp.exclude(k)
                dropped.append(k)
                frontier = k + 1
            if aborted:
                break
        if lp is not None:
            for t in dropped:
                lp.include(t)

    if lp is not None:
        found = _dive(lp, m, W, DL, slack_vec)
        if found:
            chosen = [order[t] for t in found]
            if not any(conflicts[a] >> b & 1 for a in chosen for b in chosen):
                offer(sum(W[t] for t in found), len(chosen), tuple(sorted(chosen)))

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 4 * m + 1000))
    try:
        dfs(0, 0, 0, [], 0, list(slack_vec))
    finally:
        sys.setrecursionlimit(old_limit)
    return best_sel, not aborted, nodes


def _dive(lp, m, W, DL, slack_vec):
    """Starting incumbent: fix the largest fractional item to 1 and re-solve.

    When the relaxation turns infeasible the most recent fix is undone and
    that item excluded instead.  Only seeds the search; bounds are restored
    before returning.
    """
    touched = []
    stack = []
    found = None
    try:
        for _ in range(2 * m):
            res = lp.solve()
            if res is None or lp.x is None:
                if not stack:
                    break
                lp.exclude(stack.pop())
                continue
            _, integral = res
            if integral is not None:
                if _ir_ok(integral, DL, slack_vec):
                    found = integral
                break
            x = lp.x
            free = [t for t in range(m) if lp.lb[t] < 0.5 < lp.ub[t] and x[t] > 1e-9]
            if not free:
                break
            t = max(free, key=lambda t: (x[t], W[t], -t))
            lp.fix(t)
            stack.append(t)
            touched.append(t)
    finally:
        for t in touched:
            lp.include(t)
    return found


def _ir_ok(positions, DL, slack_vec) -> bool:
    acc = list(slack_vec)
    for t in positions:
        for i, d in enumerate(DL[t]):
            acc[i] += d
    return all(x >= 0 for x in acc)


class _NodeLP:
    """Fractional relaxation kept warm across branch-and-bound nodes.

    Columns are item positions; rows are the cliques (<= 1) and one
    individual-rationality row per LSP.  Bounds are changed lazily and the
    relaxation is re-solved on demand.  The returned bound is recomputed from
    the row duals, so it stays valid even if the solver stops short.
    """

    def __init__(self, W, DL, rows, slack_vec):
        import highspy

        m = len(W)
        self.m = m
        self.w = np.asarray(W, dtype=float)
        self.lb = np.zeros(m)
        self.ub = np.ones(m)
        self.pending: dict = {}
        data, ri, ci = [], [], []
        for r, row in enumerate(rows):
            for t in row:
                data.append(1.0)
                ri.append(r)
                ci.append(t)
        n_r = len(rows)
        for t, vec in enumerate(DL):
            for i, d in enumerate(vec):
                if d:
                    data.append(-float(d))
                    ri.append(n_r + i)
                    ci.append(t)
        n_rows = n_r + len(slack_vec)
        A = coo_matrix((data, (ri, ci)), shape=(n_rows, m)).tocsc()
        self.A = A
        self.AT = A.T.tocsr()
        self.b = np.concatenate([np.ones(n_r), np.asarray(slack_vec, dtype=float)])
        self.scale = 1.0 + float(np.abs(self.w).sum())

        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("presolve", "off")
        lp = highspy.HighsLp()
        lp.num_col_ = m
        lp.num_row_ = n_rows
        lp.col_cost_ = self.w
        lp.col_lower_ = self.lb
        lp.col_upper_ = self.ub
        lp.row_lower_ = np.full(n_rows, -highspy.kHighsInf)
        lp.row_upper_ = self.b
        lp.sense_ = highspy.ObjSense.kMaximize
        lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
        lp.a_matrix_.start_ = A.indptr
        lp.a_matrix_.index_ = A.indices
        lp.a_matrix_.value_ = A.data
        h.passModel(lp)
        self.h = h
        self._optimal = highspy.HighsModelStatus.kOptimal
        self._infeasible = highspy.HighsModelStatus.kInfeasible

    def _set(self, t, lo, hi):
        self.lb[t], self.ub[t] = lo, hi
        self.pending[t] = (lo, hi)

    def exclude(self, t):
        self._set(t, 0.0, 0.0)

    def include(self, t):
        self._set(t, 0.0, 1.0)

    def fix(self, t):
        self._set(t, 1.0, 1.0)

    def solve(self):
        """(integer upper bound, integral support or None); None if infeasible."""
        if self.pending:
            idx = np.fromiter(self.pending, dtype=np.int32)
            lo = np.array([self.pending[t][0] for t in idx])
            hi = np.array([self.pending[t][1] for t in idx])
            self.h.changeColsBounds(len(idx), idx, lo, hi)
            self.pending.clear()
        self.h.run()
        status = self.h.getModelStatus()
        if status == self._infeasible:
            return None
        sol = self.h.getSolution()
        y = np.maximum(np.asarray(sol.row_dual), 0.0)
        if not sol.dual_valid or y.shape[0] != self.b.shape[0]:
            y = np.zeros_like(self.b)
        # weak duality: for any y >= 0 the Lagrangian maximum bounds the LP
        rc = self.w - self.AT @ y
        val = float(self.b @ y) + float(np.where(rc > 0, rc * self.ub, rc * self.lb).sum())
        bound = math.floor(val + 1e-9 * self.scale)
        integral = None
        self.x = None
        if status == self._optimal and sol.value_valid:
            x = self.x = np.asarray(sol.col_value)
            if np.all(np.minimum(np.abs(x), np.abs(1.0 - x)) < 1e-9):
                integral = [int(t) for t in np.flatnonzero(x > 0.5)]
        return bound, integral

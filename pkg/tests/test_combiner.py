import random
from dataclasses import dataclass, field

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import Bounds, LinearConstraint, milp

from gatx import combiner
from gatx.combiner import SelectionProblem, pack, select, select_bruteforce


@dataclass(frozen=True)
class Act:
    vehicles: tuple
    delta_profit: dict = field(hash=False)


def random_problem(rng, n_actions, n_vehicles=8, n_lsps=3):
    acts = []
    for _ in range(n_actions):
        i, j = sorted(rng.sample(range(n_vehicles), 2))
        li, lj = rng.randrange(n_lsps), rng.randrange(n_lsps)
        d = {li: rng.randint(-20, 20)}
        d[lj] = d.get(lj, 0) + rng.randint(-20, 20)
        acts.append(Act((i, j), d))
    slack = {l: rng.choice([0, 0, rng.randint(0, 15)]) for l in range(n_lsps)}
    return SelectionProblem(tuple(acts), slack)


def test_no_actions_gives_empty_plan():
    plan = select(SelectionProblem((), {}))
    assert plan.selected == () and plan.total_delta == 0


def test_shared_vehicle_keeps_the_better_action():
    p = SelectionProblem((Act((1, 2), {0: 10}), Act((2, 3), {0: 8})), {0: 0})
    assert select(p).selected == (0,)
    assert select_bruteforce(p).selected == (0,)


def test_individual_rationality_overrides_total_gain():
    p = SelectionProblem((Act((1, 2), {0: 5, 1: -3}),), {0: 0, 1: 0})
    assert select(p).selected == ()
    assert select_bruteforce(p).selected == ()


def test_slack_lets_a_loss_through():
    p = SelectionProblem((Act((1, 2), {0: 5, 1: -3}),), {0: 0, 1: 3})
    assert select(p).selected == (0,)


def test_ties_prefer_fewer_actions_then_smaller_indices():
    # {0, 1} and {2} both total 6; action 2 shares a vehicle with each of 0 and 1
    acts = (Act((1, 2), {0: 3}), Act((3, 4), {0: 3}), Act((2, 3), {0: 6}))
    assert select(SelectionProblem(acts, {0: 0})).selected == (2,)
    # two equal singletons on one vehicle: the smaller index wins
    acts = (Act((1, 3), {0: 6}), Act((1, 2), {0: 6}))
    assert select(SelectionProblem(acts, {0: 0})).selected == (0,)
    # a zero-value action is never added
    zero = (Act((1, 2), {0: 0}), Act((3, 4), {0: 4}))
    assert select(SelectionProblem(zero, {0: 0})).selected == (1,)


def test_balancing_actions_are_taken_together():
    acts = (Act((1, 2), {0: 7, 1: -4}), Act((3, 4), {0: -3, 1: 5}))
    assert select(SelectionProblem(acts, {0: 0, 1: 0})).selected == (0, 1)


def test_negative_slack_rejected():
    with pytest.raises(ValueError):
        SelectionProblem((), {0: -1})


def test_vehicle_universe_checked():
    with pytest.raises(ValueError):
        SelectionProblem((Act((1, 9), {0: 1}),), {0: 0}, frozenset({1, 2}))


def test_bruteforce_refuses_large_problems():
    p = random_problem(random.Random(0), combiner.BRUTEFORCE_LIMIT + 1)
    with pytest.raises(ValueError):
        select_bruteforce(p)


@pytest.mark.parametrize("small_threshold", [combiner.SMALL_PROBLEM, 0])
def test_matches_bruteforce_on_random_problems(monkeypatch, small_threshold):
    # threshold 0 forces the relaxation-bounded search on every problem
    monkeypatch.setattr(combiner, "SMALL_PROBLEM", small_threshold)
    rng = random.Random(11)
    for _ in range(150):
        p = random_problem(rng, rng.randint(0, 20), rng.randint(2, 10), rng.randint(1, 4))
        a, b = select(p), select_bruteforce(p)
        assert (a.selected, a.total_delta) == (b.selected, b.total_delta)


action_lists = st.lists(
    st.tuples(
        st.integers(0, 6),
        st.integers(0, 6),
        st.dictionaries(st.integers(0, 2), st.integers(-30, 30), min_size=1, max_size=3),
    ).filter(lambda t: t[0] != t[1]),
    max_size=14,
)


@settings(max_examples=150, deadline=None)
@given(action_lists, st.dictionaries(st.integers(0, 2), st.integers(0, 20)))
def test_plan_invariants(raw, slack):
    p = SelectionProblem(tuple(Act((i, j), d) for i, j, d in raw), slack)
    plan = select(p)
    assert plan.total_delta >= 0
    used = [v for k in plan.selected for v in p.actions[k].vehicles]
    assert len(used) == len(set(used))
    for lsp, d in plan.per_lsp_delta.items():
        assert d + slack.get(lsp, 0) >= 0
    ref = select_bruteforce(p)
    assert (plan.selected, plan.total_delta) == (ref.selected, ref.total_delta)


def milp_optimum(weights, deltas, rows, slack):
    """Objective value from a general MILP solver, for problems too big to enumerate."""
    n = len(weights)
    lsps = sorted(slack)
    A, lo, hi = [], [], []
    for row in rows:
        r = np.zeros(n)
        r[list(row)] = 1
        A.append(r), lo.append(-np.inf), hi.append(1)
    for l in lsps:
        A.append(np.array([d.get(l, 0) for d in deltas], float)), lo.append(-slack[l]), hi.append(np.inf)
    res = milp(-np.asarray(weights, float), constraints=LinearConstraint(np.array(A), lo, hi),
               integrality=np.ones(n), bounds=Bounds(0, 1))
    assert res.success
    return round(-res.fun)


@pytest.mark.parametrize("seed", range(4))
def test_large_problems_reach_the_milp_optimum(seed):
    rng = random.Random(100 + seed)
    p = random_problem(rng, 120, n_vehicles=30, n_lsps=4)
    plan = select(p)
    rows = {}
    for k, a in enumerate(p.actions):
        for v in a.vehicles:
            rows.setdefault(v, []).append(k)
    weights = [sum(a.delta_profit.values()) for a in p.actions]
    assert plan.optimal
    assert plan.total_delta == milp_optimum(weights, [a.delta_profit for a in p.actions], rows.values(), p.lsp_slack)


def test_node_limit_returns_a_valid_plan():
    p = random_problem(random.Random(5), 200, n_vehicles=40, n_lsps=4)
    plan = select(p, node_limit=3)
    assert not plan.optimal
    for lsp, d in plan.per_lsp_delta.items():
        assert d + p.lsp_slack.get(lsp, 0) >= 0


def test_pack_respects_explicit_conflicts():
    # items 0 and 1 share a row; 2 is free
    rows = [[0, 1]]
    conf = combiner.conflicts_from_rows(3, rows)
    chosen, optimal, _ = pack([5, 4, 1], [{0: 5}, {0: 4}, {0: 1}], conf, rows, {0: 0})
    assert chosen == (0, 2) and optimal

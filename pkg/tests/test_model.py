import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gatx.model import (
    LspParams,
    Solution,
    StructuralError,
    TimeDistanceMatrix,
    VehicleSchedule,
    evaluate_schedule,
    lsp_profit,
    lsp_profits,
    social_welfare,
    total_distance,
    total_profit,
)
from gatx.validate import validate_solution, walk_schedule

from oracles import make_instance, random_small_instance, route_walk


def line_instance(alpha=2, beta=7, rev=(30, 40), pick_win=(0, 1000)):
    # depot at 0; order 0: 10 -> 20, order 1: 30 -> 40 on a straight line
    pts = [(0, 0), (10, 0), (20, 0), (30, 0), (40, 0)]
    orders = [(0, 1, pick_win, 2, (0, 1000), 1, rev[0]), (0, 3, (0, 1000), 4, (0, 1000), 1, rev[1])]
    return make_instance(pts, orders, [(0, 0, 2, (0, 1000)), (0, 0, 2, (0, 1000))], [(alpha, beta)])


def test_cost_is_fixed_plus_distance_rate():
    inst = line_instance()
    ev = evaluate_schedule(VehicleSchedule(0, (0, 1, 2, 3)), inst)
    assert ev.feasible and ev.distance == 80
    assert ev.cost == 7 + 2 * 80
    assert ev.revenue == 70 and ev.profit == 70 - 167


def test_empty_vehicle_costs_nothing():
    inst = line_instance()
    ev = evaluate_schedule(VehicleSchedule(1), inst)
    assert ev.feasible and ev.cost == 0 and ev.distance == 0


def test_early_arrival_waits():
    inst = line_instance(pick_win=(50, 1000))
    ev = evaluate_schedule(VehicleSchedule(0, (0, 1)), inst)
    assert ev.feasible
    assert ev.times[:3] == (0, 50, 60)


def test_late_arrival_is_infeasible():
    inst = line_instance(pick_win=(0, 5))
    ev = evaluate_schedule(VehicleSchedule(0, (0, 1)), inst)
    assert not ev.feasible and ev.reason


@pytest.mark.parametrize("stops", [(1, 0), (0,), (0, 0, 1, 1)])
def test_malformed_sequences_are_infeasible(stops):
    assert not evaluate_schedule(VehicleSchedule(0, stops), line_instance()).feasible


def test_capacity_checked():
    inst = line_instance()
    inst = make_instance([(0, 0), (10, 0), (20, 0), (30, 0), (40, 0)],
                         [(0, 1, (0, 1000), 4, (0, 1000), 2, 0), (0, 2, (0, 1000), 3, (0, 1000), 1, 0)],
                         [(0, 0, 2, (0, 1000))], [(1, 0)])
    assert not evaluate_schedule(VehicleSchedule(0, (0, 2, 3, 1)), inst).feasible
    assert evaluate_schedule(VehicleSchedule(0, (0, 1, 2, 3)), inst).feasible


def test_unknown_codes_raise():
    with pytest.raises(StructuralError):
        evaluate_schedule(VehicleSchedule(0, (9,)), line_instance())
    with pytest.raises(StructuralError):
        evaluate_schedule(VehicleSchedule(5, ()), line_instance())


def test_profits_and_welfare():
    inst = line_instance()
    base = (VehicleSchedule(0, (0, 1)), VehicleSchedule(1, (2, 3)))
    sol = Solution(base, (0,), 0)
    p0 = lsp_profits(sol, inst)
    sol = Solution(base, tuple(p0), total_distance(sol, inst))
    assert social_welfare(sol, inst) == 0.0
    merged = sol.replace([VehicleSchedule(0, (0, 1, 2, 3)), VehicleSchedule(1)])
    gain = total_profit(merged, inst) - sum(p0)
    assert social_welfare(merged, inst) == pytest.approx(100 * gain / abs(sum(p0)))
    assert lsp_profit(merged, inst, 0) == total_profit(merged, inst)
    with pytest.raises(KeyError):
        lsp_profit(merged, inst, 3)


def test_zero_revenue_welfare_is_distance_based():
    inst = line_instance(rev=(0, 0))
    base = (VehicleSchedule(0, (0, 1)), VehicleSchedule(1, (2, 3)))
    sol = Solution(base, (0,), 0)
    d0 = total_distance(sol, inst)
    sol = Solution(base, tuple(lsp_profits(sol, inst)), d0)
    merged = sol.replace([VehicleSchedule(0, (0, 1, 2, 3)), VehicleSchedule(1)])
    assert social_welfare(merged, inst) == pytest.approx(100 * (d0 - 80) / d0)


def test_zero_baseline_gives_no_welfare():
    inst = line_instance(rev=(0, 0))
    sol = Solution((VehicleSchedule(0), VehicleSchedule(1)), (0,), 0)
    assert social_welfare(sol, inst) is None


@pytest.mark.parametrize("bad", [
    dict(times=[[0, 1], [1, 0]], distances=[[0, 1]]),
    dict(times=[[0, -1], [1, 0]], distances=[[0, 1], [1, 0]]),
    dict(times=[[1, 1], [1, 0]], distances=[[0, 1], [1, 0]]),
])
def test_matrix_validation(bad):
    with pytest.raises(StructuralError):
        TimeDistanceMatrix(np.array(bad["times"]), np.array(bad["distances"]))


def test_instance_validation():
    with pytest.raises(StructuralError):
        make_instance([(0, 0), (1, 0), (2, 0)], [(0, 1, (5, 1), 2, (0, 9), 1, 0)], [(0, 0, 1, (0, 9))], [(1, 0)])
    with pytest.raises(StructuralError):
        make_instance([(0, 0), (1, 0), (2, 0)], [(3, 1, (0, 9), 2, (0, 9), 1, 0)], [(0, 0, 1, (0, 9))], [(1, 0)])
    with pytest.raises(StructuralError):
        make_instance([(0, 0), (1, 0), (2, 0)], [(0, 1, (0, 9), 7, (0, 9), 1, 0)], [(0, 0, 1, (0, 9))], [(1, 0)])
    with pytest.raises(StructuralError):
        make_instance([(0, 0), (1, 0), (2, 0)], [(0, 1, (0, 9), 2, (0, 9), 1, 0)], [(0, 0, 1, (0, 9))], [(1, -1)])


def test_validator_flags_ir_and_coverage():
    inst = line_instance()
    sol = Solution((VehicleSchedule(0, (0, 1)), VehicleSchedule(1)), (0,), 0)
    errors = validate_solution(inst, sol)
    assert any("never served" in e for e in errors)
    assert any("below baseline" in e for e in errors)
    dup = Solution((VehicleSchedule(0, (0, 1, 2, 3)), VehicleSchedule(1, (2, 3))), (-10**9,), 0)
    assert any("served by vehicles" in e for e in validate_solution(inst, dup))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6), st.permutations(range(4)))
def test_three_evaluators_agree(seed, perm):
    import random

    inst = random_small_instance(random.Random(seed), n_orders=2, n_vehicles=1)
    stops = tuple(perm)
    ev = evaluate_schedule(VehicleSchedule(0, stops), inst)
    walk = walk_schedule(inst, VehicleSchedule(0, stops))
    ok, dist = route_walk(inst, 0, stops)
    assert ev.feasible == walk.feasible == ok
    assert ev.distance == walk.distance
    assert ev.cost == walk.cost and ev.revenue == walk.revenue
    if ok:
        assert dist == ev.distance

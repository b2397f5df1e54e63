import pytest

from gatx import combiner, gat
from gatx.bench import generate_mock_small, toy_instance
from gatx.gat import PAIR, SWAPPED, GatConfig, apply_plan, candidate_vehicles, generate_actions
from gatx.model import Solution, VehicleSchedule, lsp_profits
from gatx.pdptw import initial_solution
from gatx.validate import validate_solution

from oracles import exhaustive_min_cost, make_instance, route_walk


def test_toy_one_iteration_reaches_the_joint_optimum():
    inst = toy_instance()
    res = gat.run(inst, GatConfig(max_iterations=1))
    base = res.initial.baseline_distance
    best = exhaustive_min_cost(inst, (0, 1, 2, 3), (0, 1))
    assert res.history[-1].welfare == pytest.approx(100 * (base - best) / base)
    assert round(res.history[-1].welfare, 2) == 81.07
    assert all(p >= i for p, i in zip(lsp_profits(res.final, inst), res.initial.baseline))


def test_idle_twins_collapse_to_one_candidate():
    pts = [(0, 0), (5, 0), (9, 0)]
    inst = make_instance(pts, [(0, 1, (0, 99), 2, (0, 99), 1, 0)],
                         [(0, 0, 3, (0, 99)), (0, 0, 3, (0, 99)), (0, 0, 3, (0, 99)), (0, 0, 4, (0, 99))],
                         [(1, 0)])
    sol = Solution((VehicleSchedule(0, (0, 1)), VehicleSchedule(1), VehicleSchedule(2), VehicleSchedule(3)), (0,), 0)
    assert candidate_vehicles(sol, inst) == [0, 1, 3]


def test_actions_are_consistent_and_swaps_keep_depots():
    inst = generate_mock_small(2)
    init = initial_solution(inst)
    stats = {}
    actions = generate_actions(init, inst, GatConfig(), {}, stats)
    assert actions and stats["pairs"] > 0
    net = inst.network
    base = lsp_profits(init, inst)
    for a in actions:
        assert a.kind in (PAIR, SWAPPED)
        after = init.replace(a.new_schedules)
        got = lsp_profits(after, inst)
        change = {l: got[l] - base[l] for l in range(len(base)) if got[l] != base[l]}
        assert {l: d for l, d in a.delta_profit.items() if d} == change
        assert a.delta_total == sum(a.delta_profit.values())
        for s in a.new_schedules:
            assert s.vehicle in a.vehicles
            assert route_walk(inst, s.vehicle, s.stops)[0]
        moved = set().union(*(init.schedules[v].orders for v in a.vehicles))
        assert set().union(*(s.orders for s in a.new_schedules)) == moved


def test_pair_cache_is_reused():
    inst = generate_mock_small(0)
    init = initial_solution(inst)
    cache, s1, s2 = {}, {}, {}
    first = generate_actions(init, inst, GatConfig(), cache, s1)
    second = generate_actions(init, inst, GatConfig(), cache, s2)
    assert first == second
    assert s2["solved"] == 0 and s2["cached"] == s1["pairs"]


def test_apply_plan_rejects_overlap():
    inst = toy_instance()
    init = initial_solution(inst)
    acts = generate_actions(init, inst, GatConfig())
    plan = combiner.ExchangePlan((0, 1), (acts[0], acts[0]))
    with pytest.raises(AssertionError):
        apply_plan(init, plan)


@pytest.mark.parametrize("seed", [1, 4])
def test_mock_run_valid_and_monotone(seed):
    inst = generate_mock_small(seed)
    res = gat.run(inst, GatConfig(max_iterations=3))
    assert validate_solution(inst, res.final) == []
    w = [h.welfare for h in res.history]
    assert w == sorted(w) and len(res.history) <= 4


def test_worker_pool_gives_identical_results():
    inst = generate_mock_small(5)
    init = initial_solution(inst)
    one = gat.run(inst, GatConfig(max_iterations=2), init)
    two = gat.run(inst, GatConfig(max_iterations=2, threads=2), init)
    assert one.final == two.final
    assert [h.lsp_profits for h in one.history] == [h.lsp_profits for h in two.history]


def test_threads_env_fallback(monkeypatch):
    monkeypatch.setenv("GATX_THREADS", "3")
    assert gat.default_threads() == 3
    monkeypatch.delenv("GATX_THREADS")
    assert gat.default_threads() == 1


@pytest.mark.parametrize("kw", [dict(max_iterations=0), dict(pair_time_limit=0), dict(threads=0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        GatConfig(**kw)


def test_diagnostics_lines(tmp_path):
    import io
    import json

    buf = io.StringIO()
    gat.run(toy_instance(), GatConfig(max_iterations=2), diagnostics=buf)
    lines = [json.loads(x) for x in buf.getvalue().splitlines()]
    assert lines[0]["algo"] == "gat" and lines[0]["iteration"] == 1
    assert {"actions", "selected", "welfare", "lsp_profits", "seconds"} <= set(lines[0])

import numpy as np
import pytest

from divturbo.divturbo1 import DivTurboConfig
from divturbo.exceptions import InsufficientBudget
from divturbo.meta import MetaConfig, budget_rule, run_int, run_seq
from divturbo.objectives import ObjectiveFunction


def sphere(dim=2):
    return ObjectiveFunction.create("sphere", dim)


def test_budget_rule_numbers():
    assert budget_rule(3) == 1300
    assert budget_rule(20) == 3000
    assert MetaConfig(1300, 1.0).run_budget == 130
    assert MetaConfig(budget_rule(10), 1.0).phase_budget == 20 + 2 * 10
    assert MetaConfig(1305, 1.0).run_budget == 130  # remainder discarded


def test_seq_run_budgets_and_accounting():
    res = run_seq(sphere(3), MetaConfig(3 * 45 + 2, 1.0, m=3))
    assert [s.evals_used for s in res.summaries] == [45, 45, 45]
    assert res.evals_used == 135 == len(res.evaluator.log)
    assert len(res.elites) == 3


def test_single_run_returns_global_best():
    res = run_seq(sphere(), MetaConfig(60, 1.0, m=1))
    assert res.elites.values[0] == min(res.states[0].fX)
    assert res.elites.flags == (True,)


def test_zero_tau_is_always_feasible():
    res = run_seq(sphere(), MetaConfig(90, 0.0, m=3))
    assert all(res.elites.flags) and res.elites.is_feasible


def test_feasible_elites_are_tau_separated():
    res = run_seq(sphere(), MetaConfig(240, 1.0, m=4, base_seed=3))
    assert all(res.elites.flags)
    assert res.elites.is_feasible


def test_first_elite_is_best_on_sphere():
    for seed in range(20):
        res = run_seq(sphere(), MetaConfig(90, 1.0, m=3, base_seed=seed))
        assert res.elites.values[0] == min(res.elites.values)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_single_phase_int_equals_seq(seed):
    obj = ObjectiveFunction.create("rastrigin", 2)
    cfg = MetaConfig(150, 1.0, m=3, max_phases=1, base_seed=seed)
    a, b = run_seq(obj, cfg), run_int(obj, cfg)
    for pa, pb in zip(a.elites.points, b.elites.points):
        assert pa.tobytes() == pb.tobytes()
    for sa, sb in zip(a.states, b.states):
        assert sa.archive_x.tobytes() == sb.archive_x.tobytes()


def test_int_phase_budgets_and_unconditional_replacement():
    cfg = MetaConfig(3 * 3 * 20, 1.0, m=3, max_phases=3, base_seed=4)
    res = run_int(sphere(), cfg)
    assert res.evals_used == 180
    assert [s.evals_used for s in res.summaries] == [20] * 9
    assert [(s.run, s.phase) for s in res.summaries[3:6]] == [(0, 2), (1, 2), (2, 2)]
    assert all(s.replaced for s in res.summaries)
    final = {s.run: s for s in res.summaries}
    for i, s in final.items():
        assert res.elites.values[i] == s.value


def test_guarded_replacement_improves_or_repairs():
    for seed in range(3):
        cfg = MetaConfig(4 * 3 * 16, 2.0, m=4, max_phases=3, base_seed=seed, guarded_replacement=True)
        res = run_int(sphere(), cfg)
        slot_value = {}
        slot_flag = {}
        for s in res.summaries:
            if s.phase == 1:
                slot_value[s.run], slot_flag[s.run] = s.value, s.feasible
                continue
            if s.replaced:
                assert s.value <= slot_value[s.run] or not slot_flag[s.run]
                slot_value[s.run], slot_flag[s.run] = s.value, s.feasible
        assert [slot_value[i] for i in range(4)] == list(res.elites.values)


def test_insufficient_budget():
    with pytest.raises(InsufficientBudget):
        run_seq(sphere(3), MetaConfig(50, 1.0, m=10))
    with pytest.raises(InsufficientBudget):
        run_int(sphere(10), MetaConfig(budget_rule(10), 1.0, m=10, max_phases=100))


def test_explicit_seeds_and_validation():
    seeds = [11, 12]
    a = run_seq(sphere(), MetaConfig(40, 1.0, m=2, seeds=seeds))
    b = run_seq(sphere(), MetaConfig(40, 1.0, m=2, seeds=seeds, base_seed=99))
    assert a.elites.values == b.elites.values
    with pytest.raises(ValueError):
        MetaConfig(40, 1.0, m=2, seeds=[1])
    with pytest.raises(ValueError):
        MetaConfig(40, 1.0, m=0)


def test_custom_inner_config():
    cfg = MetaConfig(60, 1.0, m=2, turbo=DivTurboConfig(n_init=3, n_batch=2))
    res = run_seq(sphere(), cfg)
    assert res.evals_used == 60 and np.isfinite(res.mean_value)

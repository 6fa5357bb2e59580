import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from divturbo.exceptions import BudgetExhausted, DimensionMismatch, OutOfDomain
from divturbo.objectives import (
    BudgetedEvaluator,
    Domain,
    ObjectiveFunction,
    catalogue,
    evaluate,
    format_log_line,
    sample_uniform,
)

REQUIRED = [
    "sphere", "ellipsoid", "rastrigin", "buche-rastrigin", "linear-slope", "attractive-sector",
    "rosenbrock", "ackley", "griewank-rosenbrock", "different-powers", "sharp-ridge",
    "weierstrass", "schaffers-f7", "katsuura", "lunacek-bi-rastrigin",
]


def evaluator(fid, dim=2, budget=10, **kw):
    return BudgetedEvaluator(ObjectiveFunction.create(fid, dim, **kw), budget)


def test_catalogue_contains_required_functions():
    cat = catalogue()
    for fid in REQUIRED:
        assert fid in cat


def test_sphere_at_origin():
    assert evaluate(evaluator("sphere"), [0.0, 0.0]) == 0.0


def test_rosenbrock_at_ones():
    assert evaluate(evaluator("rosenbrock"), [1.0, 1.0]) == 0.0


def test_rastrigin_hand_value():
    # 10*2 + 2 * (0.25 - 10 cos(pi)) = 20 + 2 * 10.25
    expected = 10 * 2 + 2 * (0.5**2 - 10 * math.cos(2 * math.pi * 0.5))
    assert expected == pytest.approx(40.5)
    assert evaluate(evaluator("rastrigin"), [0.5, 0.5]) == pytest.approx(40.5, abs=1e-12)


@pytest.mark.parametrize("fid", catalogue())
@pytest.mark.parametrize("dim", [2, 3, 10])
def test_value_at_optimum_equals_offset(fid, dim):
    rng = np.random.default_rng(dim)
    shift = None if fid == "linear-slope" else rng.uniform(-3, 3, dim)
    obj = ObjectiveFunction.create(fid, dim, shift=shift, f_offset=-7.25)
    assert obj.domain.contains(obj.optimum_location)
    assert obj(obj.optimum_location) == pytest.approx(obj.known_optimum_value, abs=1e-12)


@pytest.mark.parametrize("fid", catalogue())
def test_optimum_is_not_beaten_by_random_points(fid):
    obj = ObjectiveFunction.create(fid, 3)
    X = sample_uniform(obj.domain, 2000, np.random.default_rng(1))
    assert np.all(obj(X) >= obj.known_optimum_value - 1e-12)


@pytest.mark.parametrize("fid", catalogue())
def test_shift_equivariance(fid):
    rng = np.random.default_rng(7)
    dim = 4
    s = rng.uniform(-2, 2, dim)
    shifted = ObjectiveFunction(fid, Domain.box(dim, -50, 50), shift=s)
    plain = ObjectiveFunction(fid, Domain.box(dim, -50, 50))
    X = rng.uniform(-5, 5, (100, dim))
    np.testing.assert_allclose(shifted(X), plain(X - s), rtol=0, atol=1e-12)


@pytest.mark.parametrize("fid", catalogue())
def test_batched_and_single_evaluation_agree(fid):
    obj = ObjectiveFunction.create(fid, 5)
    X = sample_uniform(obj.domain, 20, np.random.default_rng(3))
    batch = obj(X)
    assert batch.shape == (20,)
    np.testing.assert_allclose([obj(x) for x in X], batch, rtol=1e-13, atol=1e-12)


def test_budget_accounting_and_log():
    ev = evaluator("sphere", budget=3)
    for x in ([1, 1], [0, 2], [3, 0]):
        ev.evaluate(x)
    assert ev.used == 3 and len(ev.log) == 3
    assert [r.index for r in ev.log] == [0, 1, 2]
    assert ev.log[1].value == 4.0
    with pytest.raises(BudgetExhausted):
        ev.evaluate([0, 0])
    assert ev.used == 3


def test_batch_beyond_budget_is_rejected_before_spending():
    ev = evaluator("sphere", budget=2)
    with pytest.raises(BudgetExhausted):
        ev.evaluate_batch(np.zeros((3, 2)))
    assert ev.used == 0


def test_out_of_domain_is_an_error_not_a_clamp():
    ev = evaluator("sphere")
    with pytest.raises(OutOfDomain):
        ev.evaluate([5.0000001, 0.0])
    assert ev.used == 0
    assert ev.evaluate([5.0, -5.0]) == 50.0


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        evaluator("sphere").evaluate([0.0, 0.0, 0.0])


def test_audit_log_streaming_format():
    buf = io.StringIO()
    ev = BudgetedEvaluator(ObjectiveFunction.create("sphere", 2), 5, stream=buf)
    ev.evaluate([0.1, 0.2])
    line = buf.getvalue().strip()
    assert line == format_log_line(0, "sphere", [0.1, 0.2], 0.1**2 + 0.2**2)
    parts = line.split(",")
    assert parts[:3] == ["0", "sphere", "2"]
    assert float(parts[3]) == 0.1 and float(parts[4]) == 0.2
    assert float(parts[5]) == 0.1**2 + 0.2**2  # 17 significant digits round-trip


def test_sample_uniform_degenerate_box():
    d = Domain(np.zeros(2), np.zeros(2))
    np.testing.assert_array_equal(sample_uniform(d, 1, np.random.default_rng(0)), [[0.0, 0.0]])


def test_sample_uniform_golden_seed_42():
    got = sample_uniform(Domain.box(2), 3, np.random.default_rng(42))
    golden = np.array([
        [2.73956049, -0.6112156],
        [3.5859792, 1.97368029],
        [-4.05822652, 4.75622352],
    ])
    np.testing.assert_allclose(got, golden, atol=1e-8)
    again = sample_uniform(Domain.box(2), 3, np.random.default_rng(42))
    np.testing.assert_array_equal(got, again)


def test_sample_uniform_mean_clt():
    x = sample_uniform(Domain.box(1), 10_000, np.random.default_rng(5))
    assert abs(x.mean()) < 0.15
    assert x.min() >= -5 and x.max() <= 5


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_unit_cube_round_trip(x):
    d = Domain.box(3)
    np.testing.assert_allclose(d.from_unit(d.to_unit(x)), x, atol=1e-12)

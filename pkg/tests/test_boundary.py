import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blackbox_uap import (
    LabeledDataset,
    LinearModel,
    ObjectiveSpec,
    SearchParams,
    distance_all,
    distance_all_local,
    distance_single,
    evaluate,
    find_initial_direction,
    is_unreachable,
    misclassifies_all,
)
from conftest import half_plane_model, reachable_instance
from _oracles import brute_force_all, crossing_distance

TOL = 1e-5


class RecordingModel(LinearModel):
    """Linear model that remembers every queried point."""

    def __init__(self, *args):
        super().__init__(*args)
        self.seen = []

    def classify(self, x):
        self.seen.append(np.array(x, dtype=float))
        return super().classify(x)


def test_misclassifies_all(half_plane, two_points):
    theta = [-1.0, 0.0]
    assert misclassifies_all(half_plane, two_points, theta, 4.0)
    assert not misclassifies_all(half_plane, two_points, theta, 2.0)
    assert not misclassifies_all(half_plane, two_points, theta, 0.0)


def test_misclassifies_all_short_circuits(half_plane, two_points):
    misclassifies_all(half_plane, two_points, [-1.0, 0.0], 2.0)
    assert half_plane.queries == 2
    half_plane.counter._total = 0
    misclassifies_all(half_plane, two_points, [1.0, 0.0], 2.0)
    assert half_plane.queries == 1


def test_distance_all_half_plane(half_plane, two_points):
    ev = distance_all(half_plane, two_points, [-1.0, 0.0])
    assert ev.value == pytest.approx(3.0, abs=TOL)
    assert ev.value > 3.0  # the tie at exactly 3 keeps label 0
    lo, hi = ev.bracket
    assert hi - lo <= TOL and hi == ev.value


def test_distance_all_parallel_direction(half_plane, two_points):
    ev = distance_all(half_plane, two_points, [0.0, 1.0])
    assert is_unreachable(ev.value) and not ev.reachable
    assert ev.bracket is None
    assert ev.queries_used == SearchParams().grid_steps  # first point never fooled


def test_distance_all_matches_grid_oracle():
    rng = np.random.default_rng(99)
    for _ in range(15):
        model, ds, theta = reachable_instance(rng, n=20, d=2, k=3)
        params = SearchParams().resolve(ds.max_norm())
        ev = distance_all(model, ds, theta, params)
        ref = brute_force_all(model.weights, model.biases, ds.X, ds.y,
                              theta / np.linalg.norm(theta), params.lambda_max)
        if math.isinf(ref):
            assert not ev.reachable
        else:
            assert ev.value == pytest.approx(ref, abs=1e-3)


def test_local_expansion_trace():
    model = RecordingModel([[1.0, 0.0], [-1.0, 0.0]], [0.0, 0.0])
    ds = LabeledDataset(np.array([[1.015, 0.0]]), np.array([0]), 2)
    ev = distance_all_local(model, ds, [-1.0, 0.0], 1.0, SearchParams(alpha=0.01))
    steps = [1.015 - x[0] for x in model.seen]
    np.testing.assert_allclose(steps[:3], [1.0, 1.01, 1.0201], atol=1e-12)
    assert ev.expansion_steps == 3
    assert ev.initial_width == pytest.approx(1.0201 - 1.01)
    assert ev.value == pytest.approx(1.015, abs=TOL)
    lo, hi = ev.bracket
    assert 1.01 <= lo < hi <= 1.0201


def test_local_immediate_bracket(half_plane):
    ds = LabeledDataset(np.array([[1.0, 0.0]]), np.array([0]), 2)
    prev = 1.0 + 1e-6
    ev = distance_all_local(half_plane, ds, [-1.0, 0.0], prev)
    assert ev.expansion_steps == 2  # check at prev, then at (1 - alpha) * prev
    assert abs(ev.value - prev) <= TOL


def test_local_contraction(half_plane):
    ds = LabeledDataset(np.array([[1.0, 0.0]]), np.array([0]), 2)
    ev = distance_all_local(half_plane, ds, [-1.0, 0.0], 1.5)
    assert ev.value == pytest.approx(1.0, abs=TOL)


def test_local_unreachable(half_plane, two_points):
    ev = distance_all_local(half_plane, two_points, [0.0, 1.0], 3.0)
    assert not ev.reachable


def test_local_rejects_nonpositive_start(half_plane, two_points):
    with pytest.raises(ValueError):
        distance_all_local(half_plane, two_points, [-1.0, 0.0], 0.0)


def test_distance_single_examples(half_plane):
    assert distance_single(half_plane, [2.0, 0.0], 0, [-1.0, 0.0]).value == pytest.approx(2.0, abs=TOL)
    assert not distance_single(half_plane, [2.0, 0.0], 0, [1.0, 0.0]).reachable


def test_distance_single_warm_start_agrees(rng):
    for _ in range(50):
        W, b = rng.standard_normal((3, 4)), rng.standard_normal(3)
        model = LinearModel(W, b)
        x, theta = rng.standard_normal(4), rng.standard_normal(4)
        y = model.classify(x)
        cold = distance_single(model, x, y, theta)
        if not cold.reachable:
            continue
        warm = distance_single(model, x, y, theta, previous_v=cold.value * 1.3)
        assert warm.value == pytest.approx(cold.value, abs=2 * TOL)


def test_distance_single_closed_form(rng):
    misses = 0
    for _ in range(200):
        W, b = rng.standard_normal((3, 2)), rng.standard_normal(3)
        model = LinearModel(W, b)
        x, theta = rng.standard_normal(2), rng.standard_normal(2)
        y = model.classify(x)
        params = SearchParams().resolve(np.linalg.norm(x))
        ev = distance_single(model, x, y, theta, params)
        ref = crossing_distance(W, b, x, y, theta / np.linalg.norm(theta), params.lambda_max)
        if math.isinf(ref) != (not ev.reachable) or (ev.reachable and abs(ev.value - ref) > TOL):
            misses += 1
    assert misses == 0


def test_bracketing_recheck(rng):
    for _ in range(20):
        model, ds, theta = reachable_instance(rng, n=10, d=3, k=4)
        ev = distance_all(model, ds, theta)
        if not ev.reachable:
            continue
        lo, hi = ev.bracket
        assert misclassifies_all(model, ds, theta, hi)
        assert not misclassifies_all(model, ds, theta, lo)


def test_query_bound_and_bisection_count(rng):
    for _ in range(30):
        model, ds, theta = reachable_instance(rng, n=10, d=3, k=3)
        before = model.queries
        ev = distance_all(model, ds, theta)
        assert model.queries - before == ev.queries_used
        assert ev.queries_used <= len(ds) * (ev.grid_evals + ev.expansion_steps + ev.bisection_iters)
        if ev.reachable:
            ratio = math.log2(ev.initial_width / TOL)
            if abs(ratio - round(ratio)) > 1e-9:
                assert ev.bisection_iters == math.ceil(ratio)


def test_initial_direction_single_candidate(half_plane, two_points):
    spec = ObjectiveSpec("all")
    theta, val, queries = find_initial_direction(half_plane, two_points, spec, 1, 3)
    expected = np.random.default_rng(3).standard_normal(2)
    np.testing.assert_array_equal(theta, expected)
    assert val.value == evaluate(half_plane, two_points, expected, spec).value
    assert queries == val.queries_used


def test_initial_direction_prefers_finite(half_plane, two_points):
    spec = ObjectiveSpec("all")
    theta, val, _ = find_initial_direction(half_plane, two_points, spec, 10, 0)
    draws = np.random.default_rng(0).standard_normal((10, 2))
    values = [evaluate(half_plane, two_points, d, spec).value for d in draws]
    assert any(math.isinf(v) for v in values) and any(math.isfinite(v) for v in values)
    assert val.value == min(values)
    assert theta[0] < 0


def test_initial_direction_all_unreachable(two_points):
    # class 1 never wins: nothing can be fooled
    model = LinearModel([[1.0, 0.0], [1.0, 0.0]], [1.0, 0.0])
    theta, val, _ = find_initial_direction(model, two_points, ObjectiveSpec("all"), 4, 1)
    assert not val.reachable
    np.testing.assert_array_equal(theta, np.random.default_rng(1).standard_normal((4, 2))[-1])


def test_initial_direction_deterministic(half_plane, two_points):
    a = find_initial_direction(half_plane, two_points, ObjectiveSpec("norm"), 5, 42)
    b = find_initial_direction(half_plane, two_points, ObjectiveSpec("norm"), 5, 42)
    np.testing.assert_array_equal(a[0], b[0])
    assert a[1].value == b[1].value


@settings(max_examples=60, deadline=None)
@given(
    angle=st.floats(0.6 * math.pi, 1.4 * math.pi),
    scale=st.floats(1e-3, 1e3),
    x1=st.floats(0.1, 5.0),
)
def test_scale_invariance(angle, scale, x1):
    model = half_plane_model()
    theta = np.array([math.cos(angle), math.sin(angle)])
    a = distance_single(model, [x1, 0.5], 0, theta)
    b = distance_single(model, [x1, 0.5], 0, scale * theta)
    assert a.value == b.value or (not a.reachable and not b.reachable)


def test_params_validation():
    for kwargs in ({"alpha": 0}, {"alpha": 1}, {"tol": 0}, {"lambda_max": -1}, {"grid_steps": 1}):
        with pytest.raises(ValueError):
            SearchParams(**kwargs)
    assert SearchParams().resolve(3.0).lambda_max == 30.0
    assert SearchParams(lambda_max=7.0).resolve(3.0).lambda_max == 7.0

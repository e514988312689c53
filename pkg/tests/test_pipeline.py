import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linear_sum_assignment

from igbss import (FitConfig, evaluate, gen_mixing, gen_timeseries, match_permutation, minmax_rows,
                   mix, rmse, separate, snr_db)


@pytest.fixture(scope="module")
def ts_fixture():
    Z = gen_timeseries(60)
    X = mix(Z, gen_mixing(3, 3, 1, 0.5, 2.0, seed=0))
    return Z, X


def test_result_shapes(ts_fixture):
    Z, X = ts_fixture
    r = separate(X, 3, 1, "minmax")
    assert r.recovered.shape == Z.shape
    assert r.report.converged
    np.testing.assert_allclose(r.unit.min(axis=1), 0)
    np.testing.assert_allclose(r.unit.max(axis=1), 1)
    assert r.recovered.min() == pytest.approx(X.min())
    assert r.recovered.max() == pytest.approx(X.max())
    assert len(r.mixing_params) == 9
    assert r.space.N == 3
    entry = r.mixing_params_json()[0]
    assert entry["state"] == "a(0,0)" and entry["sources"] == [0] and entry["order"] == 1


def test_deterministic_across_inits(ts_fixture):
    _, X = ts_fixture
    a = separate(X, 3, 1, "minmax", FitConfig(init="random", seed=1))
    b = separate(X, 3, 1, "minmax", FitConfig(init="random", seed=2))
    assert np.abs(a.unit - b.unit).max() <= 1e-4


def test_zero_init_is_bitwise_reproducible(ts_fixture):
    _, X = ts_fixture
    assert np.array_equal(separate(X, 3, scheme="exp").recovered, separate(X, 3, scheme="exp").recovered)


def test_sum_scheme_scale_invariant(ts_fixture):
    _, X = ts_fixture
    Xp = X - X.min() + 1.0
    a = separate(Xp, 3, 1, "sum")
    b = separate(4.0 * Xp, 3, 1, "sum")
    np.testing.assert_array_equal(a.unit, b.unit)


def test_single_source_follows_connected_row():
    # with one source, z(0, m) only reaches x(1, m); its fitted mass equals p(x(1, m))
    X = np.array([[1.0, 2.0, 5.0], [3.0, 1.0, 4.0]])
    r = separate(X, 1, 1, "sum", FitConfig(max_iter=200))
    np.testing.assert_allclose(r.unit[0], minmax_rows(X[1:])[0], atol=1e-12)
    assert not r.report.converged


def test_identical_rows_give_identical_signals():
    X = np.tile([1.0, 2.0, 5.0, 3.0], (3, 1))
    r = separate(X, 3, 1, "sum")
    assert r.report.converged
    np.testing.assert_allclose(r.unit, r.unit[[0, 0, 0]], atol=1e-8)


def test_second_order_runs():
    Z = gen_timeseries(30)
    X = mix(Z, gen_mixing(3, 3, 2, 0.5, 2.0, seed=1))
    r = separate(X, 3, 2, "minmax")
    assert r.report.converged
    assert sum(1 for s in r.mixing_params if s.order == 2) == 9


def test_bad_input():
    with pytest.raises(ValueError):
        separate(np.ones(4), 2)


# matching and metrics ----------------------------------------------------

def test_permutation_recovered():
    Z = np.random.default_rng(0).normal(size=(4, 12))
    perm, signs, matched = match_permutation(Z[[2, 0, 3, 1]], Z)
    assert perm == (1, 3, 0, 2)
    assert (signs == 1).all()
    np.testing.assert_array_equal(matched, Z)


def test_sign_flip_recovered():
    Z = np.random.default_rng(1).normal(size=(3, 8))
    perm, signs, matched = match_permutation(-Z, Z, allow_sign=True)
    assert perm == (0, 1, 2)
    assert (signs == -1).all()
    np.testing.assert_array_equal(matched, Z)


def _assignment_oracle(Zhat, Z):
    cost = np.linalg.norm(Zhat[:, None, :] - Z[None, :, :], axis=2)
    rows, cols = linear_sum_assignment(cost)
    return cost[rows, cols].sum()


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 5))
def test_matching_is_optimal(seed, n):
    rng = np.random.default_rng(seed)
    Zhat, Z = rng.normal(size=(n, 10)), rng.normal(size=(n, 10))
    perm, _, matched = match_permutation(Zhat, Z)
    assert sorted(perm) == list(range(n))
    total = np.linalg.norm(matched - Z, axis=1).sum()
    assert total == pytest.approx(_assignment_oracle(Zhat, Z), rel=1e-12, abs=1e-12)


def test_matching_limit():
    with pytest.raises(ValueError):
        match_permutation(np.zeros((9, 2)), np.zeros((9, 2)))
    with pytest.raises(ValueError):
        match_permutation(np.zeros((2, 3)), np.zeros((2, 4)))


def test_metric_examples():
    Z = np.array([[1.0, 0.0]])
    assert rmse(Z, Z) == 0.0
    assert snr_db(Z, Z) == math.inf
    Zhat = np.array([[0.0, 1.0]])
    assert rmse(Zhat, Z) == 1.0
    assert snr_db(Zhat, Z) == pytest.approx(20 * math.log10(1 / math.sqrt(2)), abs=1e-12)
    assert snr_db(Zhat, Z) == pytest.approx(-3.0103, abs=1e-4)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_metrics_match_formulas(seed):
    rng = np.random.default_rng(seed)
    Zhat, Z = rng.normal(size=(3, 7)), rng.normal(size=(3, 7))
    d = (Zhat - Z).ravel()
    assert rmse(Zhat, Z) == pytest.approx(math.sqrt(sum(v * v for v in d) / d.size), abs=1e-12)
    num = math.sqrt(sum(v * v for v in Z.ravel()))
    den = math.sqrt(sum(v * v for v in d))
    assert snr_db(Zhat, Z) == pytest.approx(20 * math.log10(num / den), abs=1e-12)


def test_evaluate_scales_both_sides():
    Z = np.array([[0.0, 1.0, 2.0], [5.0, 3.0, 4.0]])
    Zhat = np.array([[14.0, 12.0, 13.0], [0.0, 1.0, 2.0]]) * 7 + 3
    m = evaluate(Zhat, Z)
    assert m["permutation"] == [1, 0]
    assert m["rmse"] == 0.0
    assert m["per_signal"][0]["pearson"] == pytest.approx(1.0)


def test_evaluate_sign_as_reflection():
    Z = np.array([[0.0, 1.0, 3.0], [2.0, 0.0, 1.0]])
    m = evaluate(-Z, Z, allow_sign=True)
    assert m["signs"] == [-1, -1]
    assert m["rmse"] == pytest.approx(0.0, abs=1e-15)
    flipped = evaluate(-Z, Z, allow_sign=False)
    assert flipped["rmse"] > 0.3


def test_minmax_rows_constant():
    np.testing.assert_array_equal(minmax_rows(np.array([[2.0, 2.0], [1.0, 3.0]])), [[0, 0], [0, 1]])


def test_evaluate_report_structure(ts_fixture):
    Z, X = ts_fixture
    m = evaluate(separate(X, 3, 1, "minmax").recovered, Z)
    assert len(m["per_signal"]) == 3
    assert all(-1 <= s["pearson"] <= 1 for s in m["per_signal"])
    assert sorted(m["permutation"]) == [0, 1, 2]
    assert [s["recovered"] for s in m["per_signal"]] == m["permutation"]

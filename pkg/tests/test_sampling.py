import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gtcentrality import fixtures
from gtcentrality.errors import CapacityError, ValidationError
from gtcentrality.exact import Partition, exact_banzhaf, exact_banzhaf_owen, exact_owen, exact_shapley
from gtcentrality.games import Game, contribution_range_bound
from gtcentrality.sampling import (
    ErrorBudget,
    EstimatorConfig,
    Method,
    VarianceConvention,
    _random_compatible_permutations,
    banzhaf_error_bound,
    banzhaf_sample_size,
    bzo_variance_prediction,
    derive_seed,
    estimate,
    replicate,
)

import _oracle
from conftest import raw, unions_of

# two-sided 0.001 critical value of the standard normal
T_CRIT = 3.2905


def _config(method, **kw):
    return EstimatorConfig(method=Method(method), **kw)


def test_config_validation():
    with pytest.raises(ValidationError):
        _config("banzhaf", ell=1)
    with pytest.raises(ValidationError):
        _config("banzhaf-owen", ell_r=0)
    with pytest.raises(ValidationError):
        _config("shapley", seed=-1)
    with pytest.raises(ValueError):
        _config("nonsense")


def test_partition_required(tri):
    with pytest.raises(ValidationError):
        estimate(Game(tri), _config("owen"))
    with pytest.raises(ValidationError):
        estimate(Game(tri), _config("banzhaf-owen"), Partition.singletons(4))


def test_cap_records_effective_sizes(tri):
    game = Game(tri)
    est = estimate(game, _config("banzhaf", ell=1000))
    assert est.effective_ell.tolist() == [4, 4, 4]
    est = estimate(game, _config("banzhaf", ell=1000, cap=False))
    assert est.effective_ell.tolist() == [1000] * 3
    est = estimate(game, _config("banzhaf-owen", ell_r=100, ell_s=10), fixtures.tri_partition())
    assert est.effective_ell.tolist() == [2, 2, 2]
    assert est.effective_ell_s.tolist() == [2, 2, 1]


@pytest.mark.parametrize("method", [m.value for m in Method])
def test_deterministic_across_threads(method):
    net = fixtures.random_network(9, 4)
    part = fixtures.random_partition(9, 3, 4)
    game = Game(net)
    cfg = _config(method, ell=5000, ell_r=300, ell_s=7, seed=11, cap=False)
    base = estimate(game, cfg, part, threads=1)
    for threads in (2, 4):
        other = estimate(game, cfg, part, threads=threads)
        np.testing.assert_array_equal(other.values, base.values)
        np.testing.assert_array_equal(other.std_error, base.std_error)
    changed = estimate(game, _config(method, ell=5000, ell_r=300, ell_s=7, seed=12, cap=False), part)
    assert not np.array_equal(changed.values, base.values)


@settings(max_examples=15, deadline=None)
@given(n=st.integers(2, 9), seed=st.integers(0, 10**6), ell=st.integers(2, 300))
def test_permutation_estimates_are_efficient(n, seed, ell):
    net = fixtures.random_network(n, seed)
    game = Game(net)
    grand = game.value(net.full_mask)
    part = fixtures.random_partition(n, max(1, n // 2), seed)
    for method in ("shapley", "owen"):
        est = estimate(game, _config(method, ell=ell, seed=seed), part)
        assert est.values.sum() == pytest.approx(grand, rel=1e-9)


@pytest.mark.parametrize("method", ["banzhaf", "banzhaf-owen", "shapley", "owen"])
def test_unbiased_on_tri(tri, method):
    game = Game(tri)
    part = fixtures.tri_partition()
    exact = {
        "banzhaf": exact_banzhaf(game),
        "banzhaf-owen": exact_banzhaf_owen(game, part),
        "shapley": exact_shapley(game),
        "owen": exact_owen(game, part),
    }[method]
    cfg = _config(method, ell=100, ell_r=10, ell_s=10, seed=7, cap=False)
    mat = replicate(game, cfg, 2000, part).matrix()
    se = mat.std(axis=0, ddof=1) / math.sqrt(mat.shape[0])
    dev = np.abs(mat.mean(axis=0) - exact)
    assert np.all(dev <= T_CRIT * se + 1e-12), (dev, se)


def test_banzhaf_owen_singletons_match_banzhaf_in_expectation():
    net = fixtures.random_network(6, 21)
    game = Game(net)
    cfg_b = _config("banzhaf", ell=200_000, seed=3, cap=False)
    cfg_o = _config("banzhaf-owen", ell_r=200_000, ell_s=1, seed=4, cap=False)
    b = estimate(game, cfg_b)
    o = estimate(game, cfg_o, Partition.singletons(6))
    se = np.sqrt(b.std_error**2 + o.std_error**2)
    assert np.all(np.abs(b.values - o.values) <= 3 * se + 1e-12)


def test_hoeffding_coverage_on_tri(tri):
    game = Game(tri)
    r = contribution_range_bound(tri)
    budget = ErrorBudget(0.5, 0.1, r)
    ell = banzhaf_sample_size(budget)
    mat = replicate(game, _config("banzhaf", ell=ell, seed=5, cap=False), 500).matrix()
    miss = (np.abs(mat - exact_banzhaf(game)) > budget.epsilon).mean(axis=0)
    slack = 3 * math.sqrt(0.1 * 0.9 / 500)
    assert np.all(miss <= 0.1 + slack)


def test_owen_sampler_is_uniform_over_compatible_orders():
    part = Partition.from_index([1, 1, 2, 2, 2])
    rng = np.random.default_rng(0)
    perms = _random_compatible_permutations(rng, 24_000, part)
    counts = Counter(map(tuple, perms.tolist()))
    assert len(counts) == 2 * 2 * 6
    expected = 24_000 / 24
    chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
    assert chi2 < 49.7  # 0.001 upper quantile of chi-square with 23 df


@pytest.mark.parametrize(
    "eps, alpha, r", [(0.5, 0.1, 1.0), (1.0, 0.05, 300.0), (0.01, 0.5, 2.0), (3.0, 0.01, 12.0)]
)
def test_sample_size_matches_oracle(eps, alpha, r):
    ell = banzhaf_sample_size(ErrorBudget(eps, alpha, r))
    assert ell == _oracle.hoeffding_ell(eps, alpha, r)
    assert banzhaf_error_bound(ell, alpha, r) <= eps + 1e-12


def test_sample_size_example():
    assert banzhaf_sample_size(ErrorBudget(0.5, 0.1, 1.0)) == 6


def test_error_bound_table():
    r = math.sqrt(1200)
    got = [round(banzhaf_error_bound(ell, a, r), 5) for ell in (10**3, 10**6) for a in (0.1, 0.05, 0.01)]
    assert got == [1.34069, 1.48773, 1.78297, 0.04240, 0.04705, 0.05638]


@settings(max_examples=50, deadline=None)
@given(
    eps=st.floats(0.01, 10), alpha=st.floats(0.001, 0.999), r=st.floats(0.0, 500)
)
def test_bound_and_size_are_inverse(eps, alpha, r):
    ell = banzhaf_sample_size(ErrorBudget(eps, alpha, r))
    assert banzhaf_error_bound(ell, alpha, r) <= eps * (1 + 1e-12)
    if ell > 1:
        assert banzhaf_error_bound(ell - 1, alpha, r) > eps * (1 - 1e-12)


def test_budget_validation():
    for args in ((0, 0.1, 1), (1, 0, 1), (1, 1, 1), (1, 0.1, -1)):
        with pytest.raises(ValidationError):
            ErrorBudget(*args)


def test_derived_seeds_distinct():
    seeds = {derive_seed(1, r) for r in range(1000)}
    assert len(seeds) == 1000
    assert derive_seed(1, 0) == derive_seed(1, 0)


def test_variance_prediction_tri(tri, tri_golden):
    game = Game(tri)
    part = fixtures.tri_partition()
    pred = bzo_variance_prediction(game, part, 2, ell_r=100, ell_s=10)
    assert (pred.theta_a_sq, pred.theta_b_sq) == tuple(tri_golden["theta_c"])
    assert (pred.ell_r, pred.ell_s) == (2, 1)
    assert pred.predicted_variance == pytest.approx(3.125)
    pred = bzo_variance_prediction(game, part, 0, ell_r=2, ell_s=2)
    assert (pred.theta_a_sq, pred.theta_b_sq) == tuple(tri_golden["theta_a"])
    assert pred.predicted_variance == pytest.approx((0.25 + 2.25 / 2) / 2)
    with pytest.raises(ValidationError):
        bzo_variance_prediction(game, part, 2, 2, 2, VarianceConvention.MINUS_ONE)
    minus_one = bzo_variance_prediction(game, part, 0, 2, 2, "minus-one")
    assert minus_one.theta_a_sq == pytest.approx(0.5)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_variance_components_match_oracle(seed):
    net = fixtures.random_network(7, seed)
    part = fixtures.random_partition(7, 3, seed)
    w, e = raw(net)
    for i in range(7):
        pred = bzo_variance_prediction(Game(net), part, i, 1, 1)
        ta, tb = _oracle.banzhaf_owen_components(w, e, unions_of(part), i)
        assert pred.theta_a_sq == pytest.approx(ta, rel=1e-9, abs=1e-9)
        assert pred.theta_b_sq == pytest.approx(tb, rel=1e-9, abs=1e-9)


def test_variance_prediction_capacity():
    net = fixtures.random_network(30, 1, edge_prob=0.1)
    part = Partition.from_index([1] * 25 + [2, 3, 4, 5, 6])
    with pytest.raises(CapacityError):
        bzo_variance_prediction(Game(net), part, 0, 2, 2)

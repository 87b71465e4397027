import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gtcentrality import fixtures
from gtcentrality.errors import ValidationError
from gtcentrality.games import (
    Game,
    GameKind,
    contribution_range_bound,
    effectiveness,
    permutation_marginals,
    value_table,
)
from gtcentrality.network import WeightedNetwork, is_connected, members

import _oracle
from conftest import raw

KINDS = [GameKind.MWCONN, GameKind.AWCONN]


def test_tri_values_match_golden(tri, tri_golden):
    for kind in KINDS:
        game = Game(tri, kind)
        expected = tri_golden["values_by_mask"][kind.value]
        assert [game.value(m) for m in range(8)] == expected
        assert game.table.tolist() == expected


def test_effectiveness(tri):
    assert effectiveness(tri, 0b010) == 2
    assert effectiveness(tri, 0b111) == 12
    with pytest.raises(ValidationError):
        effectiveness(tri, 0b101)
    with pytest.raises(ValidationError):
        effectiveness(tri, 0)


def test_marginal_rejects_member(tri):
    game = Game(tri)
    assert game.marginal(0, 0b110) == 3
    with pytest.raises(ValidationError):
        game.marginal(1, 0b010)
    with pytest.raises(ValidationError):
        game.value(0b1000)


def test_range_bound(tri):
    assert contribution_range_bound(tri) == 12
    edgeless = WeightedNetwork(("x", "y"), (1.5, 4.0), {})
    assert contribution_range_bound(edgeless) == 4.0
    assert Game(edgeless).value(0b11) == 4.0
    assert Game(edgeless, "awconn").value(0b11) == 5.5


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 8), seed=st.integers(0, 10**6), kind=st.sampled_from(KINDS))
def test_values_match_oracle(n, seed, kind):
    net = fixtures.random_network(n, seed)
    w, e = raw(net)
    game = Game(net, kind)
    for mask in range(1 << n):
        expected = _oracle.value(w, e, members(mask), kind.value)
        assert game.value(mask) == pytest.approx(expected, rel=1e-12, abs=1e-12)
        assert game.table[mask] == pytest.approx(expected, rel=1e-12, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 12), seed=st.integers(0, 10**6), kind=st.sampled_from(KINDS))
def test_table_agrees_with_scalar_path(n, seed, kind):
    game = Game(fixtures.random_network(n, seed, edge_prob=0.3), kind)
    table = value_table(game)
    scalar = np.array([game.value(m) for m in range(1 << n)])
    np.testing.assert_allclose(table, scalar, rtol=1e-12, atol=0)


@settings(max_examples=20, deadline=None)
@given(n=st.integers(1, 10), seed=st.integers(0, 10**6), kind=st.sampled_from(KINDS))
def test_monotone_and_bounded_marginals(n, seed, kind):
    # edge weights of at least 1, as produced by relation weights plus one
    net = fixtures.random_network(n, seed, integer_weights=True)
    game = Game(net, kind)
    table = game.table
    r = contribution_range_bound(net)
    masks = np.arange(1 << n)
    for i in range(n):
        without = masks[(masks >> i) & 1 == 0]
        marg = table[without | (1 << i)] - table[without]
        assert marg.min() >= 0
        assert marg.max() <= r + 1e-9


@settings(max_examples=20, deadline=None)
@given(n=st.integers(1, 10), seed=st.integers(0, 10**6))
def test_awconn_dominates_mwconn(n, seed):
    net = fixtures.random_network(n, seed)
    mw, aw = Game(net, "mwconn").table, Game(net, "awconn").table
    assert np.all(aw >= mw - 1e-12)
    for mask in range(1 << n):
        if is_connected(net, mask):
            assert aw[mask] == mw[mask]


@settings(max_examples=20, deadline=None)
@given(n=st.integers(2, 9), seed=st.integers(0, 10**6), data=st.data())
def test_value_depends_only_on_induced_subgraph(n, seed, data):
    net = fixtures.random_network(n, seed)
    mask = data.draw(st.integers(0, (1 << n) - 1))
    outside = [i for i in range(n) if not mask >> i & 1]
    weights = list(net.weights)
    for i in outside:
        weights[i] += 7.0
    edges = {
        p: (k + 3.0 if not (mask >> p[0] & 1 and mask >> p[1] & 1) else k)
        for p, k in net.edges.items()
    }
    other = WeightedNetwork(net.labels, tuple(weights), edges)
    for kind in KINDS:
        assert Game(other, kind).value(mask) == Game(net, kind).value(mask)


def test_permutation_marginals_sum_to_grand_value():
    net = fixtures.random_network(7, 3)
    game = Game(net)
    rng = np.random.default_rng(0)
    perms = np.argsort(rng.random((50, 7)), axis=1)
    marg = permutation_marginals(game, perms)
    np.testing.assert_allclose(marg.sum(axis=1), game.value(net.full_mask), rtol=1e-12)
    i, perm = 3, perms[0].tolist()
    before = perm[: perm.index(i)]
    assert marg[0, i] == pytest.approx(game.marginal(i, sum(1 << j for j in before)))


def test_large_network_uses_scalar_path():
    net, _ = fixtures.synthetic_cell_network()
    game = Game(net)
    masks = np.array([0, 1, 0b111, net.full_mask], dtype=np.uint64)
    np.testing.assert_array_equal(game.values(masks), [game.value(int(m)) for m in masks])

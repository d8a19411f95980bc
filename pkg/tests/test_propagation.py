import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from devrank.graph import HeteroNetwork
from devrank.oracle import commit_matrices, follow_matrix
from devrank.propagation import (
    ContractViolation,
    apply_binary_dev_to_proj,
    apply_binary_proj_to_dev,
    apply_dev_to_proj,
    apply_follow,
    apply_proj_to_dev,
    build_commit_propagation,
    build_follow_transition,
)

from conftest import random_network


def test_two_cycle_swaps_scores(backend):
    t = build_follow_transition(HeteroNetwork.build(2, 0, follows=[(0, 1), (1, 0)]))
    assert apply_follow(t, [0.3, 0.7]).tolist() == [0.7, 0.3]
    assert apply_follow(t, [0.5, 0.5]).tolist() == [0.5, 0.5]


def test_all_dangling_spreads_uniformly(backend):
    t = build_follow_transition(HeteroNetwork.build(4, 0))
    out = apply_follow(t, [0.1, 0.2, 0.3, 0.4])
    assert np.allclose(out, 0.25, atol=1e-15)


def test_follow_flows_to_followee():
    # 0 follows 1 and 2: 0's score is split between them
    t = build_follow_transition(HeteroNetwork.build(3, 0, follows=[(0, 1), (0, 2)]))
    out = apply_follow(t, [0.6, 0.0, 0.0])
    assert out.tolist() == [0.0, 0.3, 0.3]
    assert t.followees(0).tolist() == [1, 2]


def test_jack_commit_weights(jack_net):
    c = build_commit_propagation(jack_net)
    js, ruby = 0, 1
    jack, mike = 0, 2
    assert c.dev_to_proj_weight(jack, js) == 2 / 3
    assert c.dev_to_proj_weight(jack, ruby) == 1 / 3
    # JavaScript received 3 commits, 2 from Jack
    assert c.proj_to_dev_weight(js, jack) == 2 / 3
    assert c.proj_to_dev_weight(js, mike) == 1 / 3
    assert c.proj_to_dev_weight(ruby, jack) == 1.0


def test_asymmetric_weights_three_to_one():
    net = HeteroNetwork.build(2, 2, commits=[(0, 0, 3), (0, 1, 1), (1, 1, 3)])
    c = build_commit_propagation(net)
    assert (c.dev_to_proj_weight(0, 0), c.dev_to_proj_weight(0, 1)) == (0.75, 0.25)
    assert (c.proj_to_dev_weight(1, 0), c.proj_to_dev_weight(1, 1)) == (0.25, 0.75)


def test_single_dev_single_project_is_identity(backend):
    c = build_commit_propagation(HeteroNetwork.build(1, 1, commits=[(0, 0, 5)]))
    for f in (apply_dev_to_proj, apply_proj_to_dev, apply_binary_dev_to_proj, apply_binary_proj_to_dev):
        assert f(c, [0.42]).tolist() == [0.42]


def test_length_mismatch_rejected(jack_net):
    t, c = build_follow_transition(jack_net), build_commit_propagation(jack_net)
    with pytest.raises(ContractViolation):
        apply_follow(t, [1.0, 0.0])
    with pytest.raises(ContractViolation):
        apply_dev_to_proj(c, [1.0])
    with pytest.raises(ContractViolation):
        apply_proj_to_dev(c, np.ones((2, 1)))


def test_structures_are_read_only(jack_net):
    c = build_commit_propagation(jack_net)
    with pytest.raises(ValueError):
        c.dp_w[0] = 1.0


@pytest.mark.parametrize("seed", range(25))
def test_matches_dense_matrices(seed, backend):
    rng = np.random.default_rng(seed)
    net = random_network(rng, min_commits=0)
    t, c = build_follow_transition(net), build_commit_propagation(net)
    f = follow_matrix(net)
    dp, pd, binary = commit_matrices(net)
    x, y = rng.random(net.n_d), rng.random(net.n_p)
    assert np.allclose(apply_follow(t, x), f @ x, rtol=0, atol=1e-14)
    assert np.allclose(apply_dev_to_proj(c, x), dp @ x, rtol=0, atol=1e-14)
    assert np.allclose(apply_proj_to_dev(c, y), pd @ y, rtol=0, atol=1e-14)
    assert np.allclose(apply_binary_dev_to_proj(c, x), binary @ x, rtol=0, atol=1e-14)
    assert np.allclose(apply_binary_proj_to_dev(c, y), binary.T @ y, rtol=0, atol=1e-14)


networks = st.integers(0, 2**32 - 1).map(lambda s: random_network(np.random.default_rng(s), max_d=30, max_p=15))


@settings(max_examples=80, deadline=None)
@given(networks, st.integers(0, 2**32 - 1))
def test_follow_conserves_mass(net, seed):
    x = np.random.default_rng(seed).random(net.n_d)
    out = apply_follow(build_follow_transition(net), x)
    assert (out >= 0).all()
    assert abs(out.sum() - x.sum()) <= 1e-12 * net.n_d


@settings(max_examples=80, deadline=None)
@given(networks, st.integers(0, 2**32 - 1))
def test_commit_conserves_mass_among_committers(net, seed):
    rng = np.random.default_rng(seed)
    c = build_commit_propagation(net)
    x, y = rng.random(net.n_d), rng.random(net.n_p)
    # mass held by entities without commits has nowhere to go
    assert abs(apply_dev_to_proj(c, x).sum() - x[c.dev_total > 0].sum()) <= 1e-12 * net.n_d
    assert abs(apply_proj_to_dev(c, y).sum() - y[c.proj_total > 0].sum()) <= 1e-12 * net.n_p


@settings(max_examples=60, deadline=None)
@given(networks, st.integers(1, 9))
def test_binary_ignores_counts(net, factor):
    scaled = HeteroNetwork.build(net.n_d, net.n_p, net.follows,
                                 np.column_stack([net.commits[:, :2], net.commits[:, 2] * factor]))
    a, b = build_commit_propagation(net), build_commit_propagation(scaled)
    x = np.linspace(0.1, 1.0, net.n_d)
    assert np.array_equal(apply_binary_dev_to_proj(a, x), apply_binary_dev_to_proj(b, x))
    assert np.array_equal(apply_dev_to_proj(a, x), apply_dev_to_proj(b, x))


@settings(max_examples=60, deadline=None)
@given(networks, st.randoms(use_true_random=False))
def test_edge_insertion_order_is_irrelevant(net, rnd):
    follows, commits = net.follows.tolist(), net.commits.tolist()
    rnd.shuffle(follows)
    rnd.shuffle(commits)
    other = HeteroNetwork.build(net.n_d, net.n_p, follows or (), commits or ())
    x = np.random.default_rng(1).random(net.n_d)
    y = np.random.default_rng(2).random(net.n_p)
    t1, t2 = build_follow_transition(net), build_follow_transition(other)
    c1, c2 = build_commit_propagation(net), build_commit_propagation(other)
    assert np.array_equal(apply_follow(t1, x), apply_follow(t2, x))
    assert np.array_equal(apply_dev_to_proj(c1, x), apply_dev_to_proj(c2, x))
    assert np.array_equal(apply_proj_to_dev(c1, y), apply_proj_to_dev(c2, y))

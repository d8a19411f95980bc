import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from devrank.graph import HeteroNetwork
from devrank.oracle import dense_rank
from devrank.rankers import (
    AlgorithmKind,
    RankParams,
    dc_variant,
    devrank,
    df_variant,
    hits_variant,
    pagerank_follow,
    pagerank_variant,
    ranking,
    ranks,
    run,
)

from conftest import random_network

JACK_DEV = {"Jack": 0.675035043729498, "John": 0.0832543220599714, "Mike": 0.2417106342105306}
JACK_PROJ = {"JavaScript": 0.754553867383615, "Ruby": 0.245446132616385}


def test_jack_network_golden(jack_net, backend):
    s = devrank(jack_net, RankParams(0.37, 0.63, threshold=1e-12))
    assert s.converged
    for name, v in JACK_DEV.items():
        assert s.dev_scores[jack_net.developer_index(name)] == pytest.approx(v, abs=1e-12)
    for name, v in JACK_PROJ.items():
        assert s.proj_scores[jack_net.project_index(name)] == pytest.approx(v, abs=1e-12)
    assert [jack_net.developers[i] for i in ranking(s.dev_scores)] == ["Jack", "Mike", "John"]


def test_jack_network_dense_oracle_agrees(jack_net):
    o = dense_rank("DevRank", jack_net, RankParams(0.37, 0.63))
    assert np.allclose(o.dev_scores, [JACK_DEV[n] for n in jack_net.developers], atol=1e-14)


def test_mirror_developers_tie():
    # 0 and 1 follow each other and commit identically to one project
    net = HeteroNetwork.build(3, 1, follows=[(0, 1), (1, 0), (2, 0), (2, 1)],
                              commits=[(0, 0, 4), (1, 0, 4)])
    for kind in AlgorithmKind:
        s = run(kind, net, RankParams.for_kind(kind, threshold=1e-12))
        assert s.dev_scores[0] == pytest.approx(s.dev_scores[1], abs=1e-14), kind


@pytest.mark.parametrize("n", [2, 3, 7])
def test_follow_cycle_is_uniform(n):
    net = HeteroNetwork.build(n, 0, follows=[(i, (i + 1) % n) for i in range(n)])
    s = devrank(net, RankParams(0.5, 0.3, threshold=1e-12))
    assert np.allclose(s.dev_scores, 1.0 / n, atol=1e-15)
    assert len(s.proj_scores) == 0


def test_zero_weights_give_uniform_developers_after_one_step():
    net = random_network(np.random.default_rng(3))
    seen = []
    devrank(net, RankParams(0.0, 0.0, max_iters=3), callback=lambda it, d, p: seen.append(d.copy()))
    for d in seen:
        assert np.allclose(d, 1.0 / net.n_d, atol=1e-15)


def test_single_pair_converges_immediately():
    net = HeteroNetwork.build(1, 1, commits=[(0, 0, 3)])
    s = devrank(net)
    assert s.iterations == 1 and s.converged
    assert s.dev_scores.tolist() == [1.0] and s.proj_scores.tolist() == [1.0]


def test_empty_network_rejected():
    with pytest.raises(ValueError):
        devrank(HeteroNetwork.build(0, 0))


@pytest.mark.parametrize("bad", [dict(alpha=-0.1), dict(beta=1.2), dict(alpha=0.6, beta=0.6),
                                 dict(threshold=0), dict(max_iters=0)])
def test_params_validated(bad):
    with pytest.raises(ValueError):
        RankParams(**{"alpha": 0.37, "beta": 0.63, **bad})


def test_params_float_slack():
    RankParams(0.37, 0.63)
    RankParams(0.1 * 3, 0.7)


# --- reductions --------------------------------------------------------------


@pytest.mark.parametrize("seed", range(10))
def test_zero_follow_weight_is_dc(seed):
    net = random_network(np.random.default_rng(seed))
    a = devrank(net, RankParams(0.0, 0.85, max_iters=5000))
    b = dc_variant(net, 0.85, max_iters=5000)
    assert np.array_equal(a.dev_scores, b.dev_scores)
    assert np.array_equal(a.proj_scores, b.proj_scores)


@pytest.mark.parametrize("seed", range(10))
def test_zero_commit_weight_is_df(seed):
    net = random_network(np.random.default_rng(seed))
    a = devrank(net, RankParams(0.85, 0.0, threshold=1e-13, max_iters=5000))
    b = df_variant(net, 0.85, threshold=1e-13, max_iters=5000)
    assert np.abs(a.dev_scores - b.dev_scores).max() <= 1e-12
    assert np.abs(a.proj_scores - b.proj_scores).max() <= 1e-12


def test_pagerank_and_df_share_developer_scores():
    net = random_network(np.random.default_rng(11))
    a, b = pagerank_variant(net), df_variant(net)
    assert np.array_equal(a.dev_scores, b.dev_scores)
    assert np.array_equal(a.dev_scores, pagerank_follow(net).scores)


def test_hits_ignores_follows():
    rng = np.random.default_rng(5)
    net = random_network(rng)
    bare = HeteroNetwork.build(net.n_d, net.n_p, (), net.commits)
    assert np.array_equal(hits_variant(net).dev_scores, hits_variant(bare).dev_scores)


# --- dispatch ----------------------------------------------------------------


def test_run_matches_direct_calls(jack_net):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert np.array_equal(run("devrank", jack_net).dev_scores, devrank(jack_net).dev_scores)
        assert np.array_equal(run("HITS", jack_net).dev_scores, hits_variant(jack_net).dev_scores)
        assert np.array_equal(run(AlgorithmKind.DC, jack_net).proj_scores, dc_variant(jack_net).proj_scores)
        assert run("df", jack_net).kind is AlgorithmKind.DF


def test_run_warns_on_ignored_parameter(jack_net):
    with pytest.warns(UserWarning, match="ignores beta"):
        run("PageRank", jack_net, RankParams(0.85, 0.1))
    with pytest.warns(UserWarning, match="ignores alpha"):
        run("DC", jack_net, RankParams(0.1, 0.8))


def test_unknown_kind():
    with pytest.raises(ValueError, match="unknown algorithm"):
        AlgorithmKind.parse("SALSA")


# --- iteration invariants ----------------------------------------------------


@pytest.mark.parametrize("kind", list(AlgorithmKind))
def test_normalized_every_iteration(kind):
    net = random_network(np.random.default_rng(21), with_stars=True)
    sums = []
    run(kind, net, callback=lambda it, d, p: sums.append((d.sum(), p.sum(), d.min(), p.min())))
    assert sums
    for sd, sp, md, mp in sums:
        assert abs(sd - 1) <= 1e-12 and abs(sp - 1) <= 1e-12
        assert md >= 0 and mp >= 0


@pytest.mark.parametrize("kind", list(AlgorithmKind))
def test_converged_flag_matches_trace(kind):
    net = random_network(np.random.default_rng(8))
    s = run(kind, net, RankParams.for_kind(kind, threshold=1e-10))
    assert s.converged == (s.final_err < 1e-10)
    assert s.iterations == len(s.trace)
    cut = run(kind, net, RankParams.for_kind(kind, threshold=1e-10, max_iters=1))
    if cut.final_err >= 1e-10:
        assert not cut.converged and cut.iterations == 1


@pytest.mark.parametrize("kind", list(AlgorithmKind))
@pytest.mark.parametrize("seed", range(6))
def test_matches_dense_oracle(kind, seed):
    net = random_network(np.random.default_rng(100 + seed))
    params = RankParams.for_kind(kind, threshold=1e-12, max_iters=20000)
    s, o = run(kind, net, params), dense_rank(kind, net, params)
    assert s.converged
    assert np.abs(s.dev_scores - o.dev_scores).max() <= 1e-9
    assert np.abs(s.proj_scores - o.proj_scores).max() <= 1e-9


def test_repeatable(backend):
    net = random_network(np.random.default_rng(4))
    a, b = devrank(net, threads=1), devrank(net, threads=3)
    assert np.array_equal(a.dev_scores, b.dev_scores)
    assert a.trace == b.trace


networks = st.integers(0, 2**32 - 1).map(lambda s: random_network(np.random.default_rng(s)))


@settings(max_examples=40, deadline=None)
@given(networks, st.sampled_from(list(AlgorithmKind)))
def test_scaling_commits_keeps_scores(net, kind):
    scaled = HeteroNetwork.build(net.n_d, net.n_p, net.follows,
                                 np.column_stack([net.commits[:, :2], net.commits[:, 2] * 7]))
    a, b = run(kind, net), run(kind, scaled)
    assert np.array_equal(ranks(a.dev_scores), ranks(b.dev_scores))
    assert np.array_equal(ranks(a.proj_scores), ranks(b.proj_scores))
    assert np.allclose(a.dev_scores, b.dev_scores, rtol=0, atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(networks, st.floats(0, 1), st.floats(0, 1))
def test_scores_are_distributions(net, a, b):
    if a + b > 1:
        a, b = a / (a + b), b / (a + b)
    s = devrank(net, RankParams(a, b, max_iters=200))
    assert abs(s.dev_scores.sum() - 1) <= 1e-12
    assert (s.dev_scores >= 0).all() and (s.proj_scores >= 0).all()


def test_ranking_tie_break():
    assert ranking([0.2, 0.5, 0.2, 0.1]).tolist() == [1, 0, 2, 3]
    assert ranks([0.2, 0.5, 0.2, 0.1]).tolist() == [2, 1, 3, 4]


def test_two_step_oscillation_without_teleport():
    # mutual follow and disjoint projects: with alpha + beta = 1 the
    # simultaneous update has an eigenvalue of exactly -1 and alternates forever
    net = HeteroNetwork.build(2, 3, follows=[(0, 1), (1, 0)], commits=[(0, 0, 1), (1, 1, 1), (1, 2, 1)])
    seen = []
    s = devrank(net, RankParams(0.37, 0.63, threshold=1e-12, max_iters=400),
                callback=lambda it, d, p: seen.append(d.copy()))
    assert not s.converged
    assert s.trace[-1] == pytest.approx(s.trace[-2], rel=1e-9) and s.trace[-1] > 0.1
    assert np.array_equal(seen[-1], seen[-3])
    # the two alternating states straddle the fixed point
    o = dense_rank("DevRank", net, RankParams(0.37, 0.63))
    assert np.allclose((seen[-1] + seen[-2]) / 2, o.dev_scores, atol=1e-14)
    # any teleport mass damps the mode
    damped = devrank(net, RankParams(0.37, 0.53, threshold=1e-12))
    assert damped.converged

"""Dense-matrix reference rankers for small networks.

Matrices are assembled entry by entry from the network's edge arrays and
never touch the sparse propagation structures.  Follow-only rankings are
solved as a linear system; coupled rankings use a Gauss-Seidel power
iteration (projects refreshed from the current developer vector), which
reaches the same fixed point as the Jacobi schedule of the sparse engine.
"""

from __future__ import annotations

import numpy as np

from .graph import HeteroNetwork
from .rankers import AlgorithmKind, RankParams, RankState

MAX_DENSE_NODES = 5000


def follow_matrix(net: HeteroNetwork) -> np.ndarray:
    """Column-stochastic follow matrix: column i spreads developer i's score."""
    n = net.n_d
    m = np.zeros((n, n))
    out = [0] * n
    for f, _ in net.follows.tolist():
        out[f] += 1
    for f, g in net.follows.tolist():
        m[g, f] += 1.0 / out[f]
    for i in range(n):
        if out[i] == 0:
            m[:, i] = 1.0 / n
    return m


def commit_matrices(net: HeteroNetwork):
    """(dev->proj, proj->dev, binary project x developer adjacency)."""
    n_d, n_p = net.n_d, net.n_p
    counts = np.zeros((n_p, n_d))
    for d, p, c in net.commits.tolist():
        counts[p, d] += c
    dev_tot = counts.sum(axis=0)
    proj_tot = counts.sum(axis=1)
    dp = np.divide(counts, dev_tot[None, :], out=np.zeros_like(counts), where=dev_tot[None, :] > 0)
    pd = np.divide(counts, proj_tot[:, None], out=np.zeros_like(counts), where=proj_tot[:, None] > 0).T
    binary = (counts > 0).astype(float)
    return dp, pd, binary


def _unit(v):
    s = v.sum()
    if s > 0:
        return v / s
    return np.full(len(v), 1.0 / len(v)) if len(v) else v


def _solve_follow(net, alpha):
    n = net.n_d
    a = np.eye(n) - alpha * follow_matrix(net)
    return _unit(np.linalg.solve(a, np.full(n, (1.0 - alpha) / n)))


def _power(step, d, p, tol, max_iters):
    it = 0
    for it in range(1, max_iters + 1):
        new_d, new_p = step(d, p)
        err = np.abs(new_d - d).sum() + np.abs(new_p - p).sum()
        d, p = new_d, new_p
        if err < tol:
            return d, p, it, err, True
    return d, p, it, err, False


def dense_rank(kind, net: HeteroNetwork, params: RankParams | None = None,
               tol: float = 1e-14, max_iters: int = 50_000) -> RankState:
    """Reference scores for ``kind``; feasible only for small networks."""
    kind = AlgorithmKind.parse(kind)
    if params is None:
        params = RankParams.for_kind(kind)
    if net.n_d + net.n_p > MAX_DENSE_NODES:
        raise ValueError(f"dense oracle limited to {MAX_DENSE_NODES} nodes")
    n_d, n_p = net.n_d, net.n_p
    dp, pd, binary = commit_matrices(net)

    if kind in (AlgorithmKind.PAGERANK, AlgorithmKind.DF):
        d = _solve_follow(net, params.alpha)
        p = _unit((binary if kind is AlgorithmKind.PAGERANK else dp) @ d)
        return RankState(kind, params, d, p, 1, [0.0], True)

    if kind is AlgorithmKind.HITS:
        a, b, fwd, back = 0.0, params.alpha, binary, binary.T
    elif kind is AlgorithmKind.DC:
        a, b, fwd, back = 0.0, params.beta, dp, pd
    else:
        a, b, fwd, back = params.alpha, params.beta, dp, pd
    f = follow_matrix(net) if a else np.zeros((n_d, n_d))
    teleport = max(0.0, 1.0 - a - b) / n_d

    def step(d, p):
        p = _unit(fwd @ d)
        d = _unit(a * (f @ d) + b * (back @ p) + teleport)
        return d, p

    d0 = np.full(n_d, 1.0 / n_d)
    p0 = np.full(n_p, 1.0 / n_p) if n_p else np.zeros(0)
    d, p, it, err, ok = _power(step, d0, p0, tol, max_iters)
    if not ok and err > 1e-13:
        # rounding floor on larger instances; anything above it is a real failure
        return RankState(kind, params, d, p, it, [float(err)], False)
    return RankState(kind, params, d, p, it, [float(err)], True)

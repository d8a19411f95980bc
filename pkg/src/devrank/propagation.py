"""Matrix-free score flows over the follow graph and the commit bipartite graph.

Every structure stores its edges grouped by *destination* (CSR layout) with
sources in ascending order, and the kernels accumulate each destination
sequentially in that order.  Results are therefore independent of edge
insertion order and of the thread count.

Follow flow runs follower -> followee, split evenly over the follower's
out-degree; developers who follow nobody spread their score uniformly over
all developers.  Commit flow is asymmetric: a developer splits its score over
projects by its share of its own commits, while a project splits its score
over developers by their share of the commits the project received.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .graph import HeteroNetwork


class ContractViolation(ValueError):
    """Input vector does not match the structure it is applied to."""


def _csr(dst, src, weights, n_dst):
    order = np.lexsort((src, dst))
    dst, src, weights = dst[order], src[order], weights[order]
    indptr = np.zeros(n_dst + 1, dtype=np.intp)
    np.cumsum(np.bincount(dst, minlength=n_dst), out=indptr[1:])
    return indptr, np.ascontiguousarray(src, dtype=np.intp), np.ascontiguousarray(weights, dtype=np.float64)


def _check(vec, n, what):
    vec = np.ascontiguousarray(vec, dtype=np.float64)
    if vec.ndim != 1 or len(vec) != n:
        raise ContractViolation(f"{what} vector has shape {vec.shape}, expected ({n},)")
    return vec


@dataclass(frozen=True, eq=False)
class FollowTransition:
    n_d: int
    followee_ptr: np.ndarray  # CSR by follower
    followee_idx: np.ndarray
    out_degree: np.ndarray
    dangling: np.ndarray  # indices with out_degree == 0
    in_ptr: np.ndarray  # CSR by followee, sources = followers
    in_idx: np.ndarray
    in_w: np.ndarray

    def followees(self, d: int) -> np.ndarray:
        return self.followee_idx[self.followee_ptr[d]:self.followee_ptr[d + 1]]


def build_follow_transition(net: HeteroNetwork) -> FollowTransition:
    n = net.n_d
    src = net.follows[:, 0].astype(np.intp)
    dst = net.follows[:, 1].astype(np.intp)
    out_degree = np.bincount(src, minlength=n).astype(np.int64)
    fptr, fidx, _ = _csr(src, dst, np.ones(len(src)), n)
    with np.errstate(divide="ignore"):
        inv = np.where(out_degree > 0, 1.0 / np.maximum(out_degree, 1), 0.0)
    iptr, iidx, iw = _csr(dst, src, inv[src], n)
    dangling = np.flatnonzero(out_degree == 0)
    for a in (fptr, fidx, out_degree, dangling, iptr, iidx, iw):
        a.setflags(write=False)
    return FollowTransition(n, fptr, fidx, out_degree, dangling, iptr, iidx, iw)


def apply_follow(t: FollowTransition, scores, threads: int = 1) -> np.ndarray:
    """Inflow of developer scores along follow edges, dangling mass spread uniformly."""
    x = _check(scores, t.n_d, "developer")
    out = kernels.csr_gather(t.in_ptr, t.in_idx, t.in_w, x, threads)
    if len(t.dangling):
        out += x[t.dangling].sum() / t.n_d
    return out


@dataclass(frozen=True, eq=False)
class CommitPropagation:
    n_d: int
    n_p: int
    edges: np.ndarray  # (developer, project, count), sorted by (developer, project)
    dev_total: np.ndarray
    proj_total: np.ndarray
    # developer -> project, grouped by project
    dp_ptr: np.ndarray
    dp_idx: np.ndarray
    dp_w: np.ndarray
    # project -> developer, grouped by developer
    pd_ptr: np.ndarray
    pd_idx: np.ndarray
    pd_w: np.ndarray
    dp_one: np.ndarray
    pd_one: np.ndarray

    def dev_to_proj_weight(self, d: int, p: int) -> float:
        lo, hi = self.dp_ptr[p], self.dp_ptr[p + 1]
        hit = np.flatnonzero(self.dp_idx[lo:hi] == d)
        return float(self.dp_w[lo + hit[0]]) if len(hit) else 0.0

    def proj_to_dev_weight(self, p: int, d: int) -> float:
        lo, hi = self.pd_ptr[d], self.pd_ptr[d + 1]
        hit = np.flatnonzero(self.pd_idx[lo:hi] == p)
        return float(self.pd_w[lo + hit[0]]) if len(hit) else 0.0


def build_commit_propagation(net: HeteroNetwork) -> CommitPropagation:
    dev = net.commits[:, 0].astype(np.intp)
    proj = net.commits[:, 1].astype(np.intp)
    count = net.commits[:, 2].astype(np.float64)
    dev_total = np.bincount(dev, weights=count, minlength=net.n_d)
    proj_total = np.bincount(proj, weights=count, minlength=net.n_p)
    dp = _csr(proj, dev, count / dev_total[dev] if len(dev) else count, net.n_p)
    pd = _csr(dev, proj, count / proj_total[proj] if len(proj) else count, net.n_d)
    arrays = (dev_total, proj_total, *dp, *pd, np.ones(len(dev)), np.ones(len(dev)))
    for a in arrays:
        a.setflags(write=False)
    return CommitPropagation(net.n_d, net.n_p, net.commits, *arrays)


def apply_dev_to_proj(c: CommitPropagation, dev_scores, threads: int = 1) -> np.ndarray:
    x = _check(dev_scores, c.n_d, "developer")
    return kernels.csr_gather(c.dp_ptr, c.dp_idx, c.dp_w, x, threads)


def apply_proj_to_dev(c: CommitPropagation, proj_scores, threads: int = 1) -> np.ndarray:
    x = _check(proj_scores, c.n_p, "project")
    return kernels.csr_gather(c.pd_ptr, c.pd_idx, c.pd_w, x, threads)


def apply_binary_dev_to_proj(c: CommitPropagation, dev_scores, threads: int = 1) -> np.ndarray:
    """Unweighted adjacency sum: each commit edge carries the full score."""
    x = _check(dev_scores, c.n_d, "developer")
    return kernels.csr_gather(c.dp_ptr, c.dp_idx, c.dp_one, x, threads)


def apply_binary_proj_to_dev(c: CommitPropagation, proj_scores, threads: int = 1) -> np.ndarray:
    x = _check(proj_scores, c.n_p, "project")
    return kernels.csr_gather(c.pd_ptr, c.pd_idx, c.pd_one, x, threads)

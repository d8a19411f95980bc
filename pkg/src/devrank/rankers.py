"""Iterative influence rankers: DevRank and the four comparison variants.

All rankers share one convention: ``alpha`` weights the follow term and
``beta`` the commit term of the developer update, the remainder
``1 - alpha - beta`` is a uniform teleport, and both score vectors are
L1-normalized after every iteration.  Convergence is declared when the sum
of L1 changes of both vectors drops below ``threshold``.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Optional

import numpy as np

from .graph import HeteroNetwork
from .propagation import (
    apply_binary_dev_to_proj,
    apply_binary_proj_to_dev,
    apply_dev_to_proj,
    apply_follow,
    apply_proj_to_dev,
    build_commit_propagation,
    build_follow_transition,
)

#: damping of the follow-network PageRank that seeds DevRank
INIT_DAMPING = 0.85

Callback = Callable[[int, np.ndarray, np.ndarray], None]


class AlgorithmKind(str, enum.Enum):
    DEVRANK = "DevRank"
    PAGERANK = "PageRank"
    HITS = "HITS"
    DF = "DF"
    DC = "DC"

    @classmethod
    def parse(cls, text) -> "AlgorithmKind":
        if isinstance(text, cls):
            return text
        for k in cls:
            if k.value.lower() == str(text).lower():
                return k
        raise ValueError(f"unknown algorithm {text!r}; choose from {[k.value for k in cls]}")


@dataclass(frozen=True)
class RankParams:
    alpha: float = 0.37
    beta: float = 0.63
    threshold: float = 1e-8
    max_iters: int = 1000

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0 and 0.0 <= self.beta <= 1.0):
            raise ValueError(f"alpha and beta must lie in [0, 1], got {self.alpha}, {self.beta}")
        if self.alpha + self.beta > 1.0 + 1e-9:
            raise ValueError(f"alpha + beta must not exceed 1, got {self.alpha + self.beta}")
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")

    @property
    def teleport(self) -> float:
        return max(0.0, 1.0 - self.alpha - self.beta)

    @classmethod
    def for_kind(cls, kind, **overrides) -> "RankParams":
        """Default parameters for an algorithm, with explicit overrides applied."""
        kind = AlgorithmKind.parse(kind)
        base = {
            AlgorithmKind.DEVRANK: dict(alpha=0.37, beta=0.63),
            AlgorithmKind.PAGERANK: dict(alpha=0.85, beta=0.0),
            AlgorithmKind.HITS: dict(alpha=0.85, beta=0.0),
            AlgorithmKind.DF: dict(alpha=0.85, beta=0.0),
            AlgorithmKind.DC: dict(alpha=0.0, beta=0.85),
        }[kind]
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)


@dataclass
class RankState:
    kind: AlgorithmKind
    params: RankParams
    dev_scores: np.ndarray
    proj_scores: np.ndarray
    iterations: int
    trace: list[float] = field(default_factory=list)
    converged: bool = False
    init_iterations: int = 0

    @property
    def final_err(self) -> float:
        return self.trace[-1] if self.trace else float("nan")


class FollowScores(NamedTuple):
    scores: np.ndarray
    iterations: int
    trace: list
    converged: bool


def normalize(v: np.ndarray) -> np.ndarray:
    """Scale to unit sum; an all-zero vector becomes uniform."""
    s = v.sum()
    if s > 0:
        return v / s
    return np.full(len(v), 1.0 / len(v)) if len(v) else v


def _uniform(n):
    return np.full(n, 1.0 / n) if n else np.zeros(0)


def _prepared(net: HeteroNetwork):
    # the network is immutable, so its propagation structures are cached on it
    cache = net.__dict__.get("_propagation")
    if cache is None:
        cache = (build_follow_transition(net), build_commit_propagation(net))
        object.__setattr__(net, "_propagation", cache)
    return cache


def _require_developers(net):
    if net.n_d < 1:
        raise ValueError("network has no developers")


def pagerank_follow(net: HeteroNetwork, alpha: float = 0.85, threshold: float = 1e-8,
                    max_iters: int = 1000, *, threads: int = 1,
                    callback: Optional[Callable[[int, np.ndarray], None]] = None) -> FollowScores:
    """Power iteration on the follow network from the uniform vector."""
    _require_developers(net)
    follow, _ = _prepared(net)
    n = net.n_d
    x = _uniform(n)
    teleport = (1.0 - alpha) / n
    trace, converged = [], False
    for it in range(1, max_iters + 1):
        new = normalize(alpha * apply_follow(follow, x, threads) + teleport)
        err = float(np.abs(new - x).sum())
        x = new
        trace.append(err)
        if callback is not None:
            callback(it, x)
        if err < threshold:
            converged = True
            break
    return FollowScores(x, len(trace), trace, converged)


def _follow_then_project(kind, net, params, project, threads, callback):
    _, commit = _prepared(net)

    def proj_of(d):
        return normalize(project(commit, d, threads))

    cb = None if callback is None else (lambda it, d: callback(it, d, proj_of(d)))
    fs = pagerank_follow(net, params.alpha, params.threshold, params.max_iters, threads=threads, callback=cb)
    return RankState(kind, params, fs.scores, proj_of(fs.scores), fs.iterations, fs.trace, fs.converged)


def _coupled(kind, net, params, dev_init, *, follow_weight, commit_weight, weighted, threads, callback,
             init_iterations=0):
    """Jacobi iteration over both vectors; every update reads iteration n-1."""
    follow, commit = _prepared(net)
    d2p = apply_dev_to_proj if weighted else apply_binary_dev_to_proj
    p2d = apply_proj_to_dev if weighted else apply_binary_proj_to_dev
    n_d, n_p = net.n_d, net.n_p
    a, b = follow_weight, commit_weight
    teleport = max(0.0, 1.0 - a - b) / n_d

    d, p = dev_init, _uniform(n_p)
    trace, converged = [], False
    for it in range(1, params.max_iters + 1):
        new_p = normalize(d2p(commit, d, threads))
        acc = np.zeros(n_d)
        if a:
            acc += a * apply_follow(follow, d, threads)
        if b and n_p:
            acc += b * p2d(commit, p, threads)
        acc += teleport
        new_d = normalize(acc)
        err = float(np.abs(new_d - d).sum() + np.abs(new_p - p).sum())
        d, p = new_d, new_p
        trace.append(err)
        if callback is not None:
            callback(it, d, p)
        if err < params.threshold:
            converged = True
            break
    return RankState(kind, params, d, p, len(trace), trace, converged, init_iterations)


def _devrank_init(net, params, threads):
    return pagerank_follow(net, INIT_DAMPING, params.threshold, params.max_iters, threads=threads)


def devrank(net: HeteroNetwork, params: RankParams = RankParams(), *, threads: int = 1,
            callback: Optional[Callback] = None) -> RankState:
    """DevRank: follow PageRank step plus asymmetric weighted commit propagation.

    Developer scores start from the follow-network PageRank, project scores
    from uniform.  With no projects the commit term is simply absent.
    """
    _require_developers(net)
    init = _devrank_init(net, params, threads)
    return _coupled(AlgorithmKind.DEVRANK, net, params, init.scores, follow_weight=params.alpha,
                    commit_weight=params.beta, weighted=True, threads=threads, callback=callback,
                    init_iterations=init.iterations)


def pagerank_variant(net: HeteroNetwork, alpha: float = 0.85, threshold: float = 1e-8,
                     max_iters: int = 1000, *, threads: int = 1,
                     callback: Optional[Callback] = None) -> RankState:
    """Follow PageRank for developers; projects get the unweighted sum of their committers."""
    _require_developers(net)
    params = RankParams(alpha=alpha, beta=0.0, threshold=threshold, max_iters=max_iters)
    return _follow_then_project(AlgorithmKind.PAGERANK, net, params, apply_binary_dev_to_proj, threads, callback)


def hits_variant(net: HeteroNetwork, alpha: float = 0.85, threshold: float = 1e-8,
                 max_iters: int = 1000, *, threads: int = 1,
                 callback: Optional[Callback] = None) -> RankState:
    """Hub/authority iteration on the unweighted commit network; follows are ignored."""
    _require_developers(net)
    params = RankParams(alpha=alpha, beta=0.0, threshold=threshold, max_iters=max_iters)
    return _coupled(AlgorithmKind.HITS, net, params, _uniform(net.n_d), follow_weight=0.0,
                    commit_weight=alpha, weighted=False, threads=threads, callback=callback)


def df_variant(net: HeteroNetwork, alpha: float = 0.85, threshold: float = 1e-8,
               max_iters: int = 1000, *, threads: int = 1,
               callback: Optional[Callback] = None) -> RankState:
    """DevRank restricted to the follow network; projects weighted once at the end."""
    _require_developers(net)
    params = RankParams(alpha=alpha, beta=0.0, threshold=threshold, max_iters=max_iters)
    return _follow_then_project(AlgorithmKind.DF, net, params, apply_dev_to_proj, threads, callback)


def dc_variant(net: HeteroNetwork, beta: float = 0.85, threshold: float = 1e-8,
               max_iters: int = 1000, *, threads: int = 1,
               callback: Optional[Callback] = None) -> RankState:
    """DevRank restricted to the commit network (follow weight zero)."""
    _require_developers(net)
    params = RankParams(alpha=0.0, beta=beta, threshold=threshold, max_iters=max_iters)
    init = _devrank_init(net, params, threads)
    return _coupled(AlgorithmKind.DC, net, params, init.scores, follow_weight=0.0, commit_weight=beta,
                    weighted=True, threads=threads, callback=callback, init_iterations=init.iterations)


def run(kind, net: HeteroNetwork, params: Optional[RankParams] = None, *, threads: int = 1,
        callback: Optional[Callback] = None) -> RankState:
    """Dispatch to the ranker for ``kind``; warns about parameters it ignores."""
    kind = AlgorithmKind.parse(kind)
    if params is None:
        params = RankParams.for_kind(kind)
    common = dict(threshold=params.threshold, max_iters=params.max_iters, threads=threads, callback=callback)
    if kind in (AlgorithmKind.PAGERANK, AlgorithmKind.HITS, AlgorithmKind.DF) and params.beta != 0:
        warnings.warn(f"{kind.value} ignores beta={params.beta}", stacklevel=2)
    if kind is AlgorithmKind.DC and params.alpha != 0:
        warnings.warn(f"DC ignores alpha={params.alpha}", stacklevel=2)

    if kind is AlgorithmKind.DEVRANK:
        return devrank(net, params, threads=threads, callback=callback)
    if kind is AlgorithmKind.PAGERANK:
        state = pagerank_variant(net, params.alpha, **common)
    elif kind is AlgorithmKind.HITS:
        state = hits_variant(net, params.alpha, **common)
    elif kind is AlgorithmKind.DF:
        state = df_variant(net, params.alpha, **common)
    else:
        state = dc_variant(net, params.beta, **common)
    return replace(state, params=params)


def ranking(scores) -> np.ndarray:
    """Entity indices best-first: descending score, ties by ascending index."""
    scores = np.asarray(scores, dtype=np.float64)
    return np.lexsort((np.arange(len(scores)), -scores))


def ranks(scores) -> np.ndarray:
    """1-based rank position of each entity under :func:`ranking`."""
    order = ranking(scores)
    out = np.empty(len(order), dtype=np.int64)
    out[order] = np.arange(1, len(order) + 1)
    return out

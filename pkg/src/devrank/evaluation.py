"""Temporal-split evaluation: ground truth, precision@k, Pearson, sweeps, stats.

Rankings are computed on the network before ``train_end``; an entity's
"future influence" is the number of follow (developer) or star (project)
events it receives in the half-open test window ``[test_start, test_end)``.
"""

from __future__ import annotations

import csv
import io
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import date
from typing import Iterable, Optional, Sequence

import numpy as np

from .graph import EventLog, HeteroNetwork, snapshot
from .rankers import AlgorithmKind, RankParams, RankState, devrank, ranking, ranks, run


@dataclass(frozen=True)
class SplitSpec:
    train_end: date
    test_end: date
    label: str = ""
    test_start: Optional[date] = None

    def __post_init__(self):
        if not self.train_end < self.test_end:
            raise ValueError(f"train_end {self.train_end} must precede test_end {self.test_end}")
        if self.test_start is not None and not (self.train_end <= self.test_start < self.test_end):
            raise ValueError("test_start must lie in [train_end, test_end)")

    @property
    def window_start(self) -> date:
        return self.test_start or self.train_end


#: the three time plans; training spans everything before train_end
PLANS = {
    "a": SplitSpec(date(2013, 1, 1), date(2014, 1, 1), "plan-a"),
    "b": SplitSpec(date(2012, 1, 1), date(2014, 1, 1), "plan-b"),
    "c": SplitSpec(date(2010, 1, 1), date(2014, 1, 1), "plan-c", test_start=date(2011, 1, 1)),
}


@dataclass
class GroundTruth:
    new_followers: np.ndarray  # per developer of the training network
    new_stars: np.ndarray  # per project of the training network
    raw_follow_events: int = 0
    raw_star_events: int = 0
    dropped_follow_events: int = 0
    dropped_star_events: int = 0


def compute_ground_truth(log: EventLog, split: SplitSpec, train_net: HeteroNetwork) -> GroundTruth:
    """Count window follow/star events whose actor and target both exist in ``train_net``.

    Events touching an entity that only appears after ``train_end`` are
    dropped and counted separately, as are self-follows.
    """
    lo, hi = split.window_start, split.test_end
    followers = np.zeros(train_net.n_d, dtype=np.int64)
    stars = np.zeros(train_net.n_p, dtype=np.int64)
    raw_f = raw_s = drop_f = drop_s = 0
    for e in log.events:
        if not (lo <= e.date < hi):
            continue
        if e.kind == "follow":
            raw_f += 1
            if e.actor != e.target and train_net.has_developer(e.actor) and train_net.has_developer(e.target):
                followers[train_net.developer_index(e.target)] += 1
            else:
                drop_f += 1
        elif e.kind == "star":
            raw_s += 1
            p = log.resolve(e.target)
            if train_net.has_developer(e.actor) and train_net.has_project(p):
                stars[train_net.project_index(p)] += 1
            else:
                drop_s += 1
    return GroundTruth(followers, stars, raw_f, raw_s, drop_f, drop_s)


def top_k(values, k: int) -> np.ndarray:
    """Indices of the k largest values, ties broken by ascending index."""
    return ranking(values)[:k]


def precision_at_k(scores, truth_counts, k: int) -> float:
    scores = np.asarray(scores, dtype=np.float64)
    truth = np.asarray(truth_counts, dtype=np.float64)
    if len(scores) != len(truth):
        raise ValueError("scores and truth must have equal length")
    if not 1 <= k <= len(scores):
        raise ValueError(f"k={k} outside [1, {len(scores)}]")
    hits = np.intersect1d(top_k(scores, k), top_k(truth, k), assume_unique=True)
    return len(hits) / k


def pearson_top_k(scores, truth_counts, k: int, select: str = "score") -> float:
    """Pearson correlation of score and truth over the top-k entities.

    ``select`` picks the top-k by ``"score"`` (default) or by ``"truth"``.
    Returns NaN, with a warning, when either series has zero variance.
    """
    scores = np.asarray(scores, dtype=np.float64)
    truth = np.asarray(truth_counts, dtype=np.float64)
    if k < 2 or k > len(scores):
        raise ValueError(f"k={k} outside [2, {len(scores)}]")
    if select not in ("score", "truth"):
        raise ValueError("select must be 'score' or 'truth'")
    idx = top_k(scores if select == "score" else truth, k)
    x, y = scores[idx], truth[idx]
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        warnings.warn(f"Pearson undefined over top-{k}: zero variance in "
                      f"{'scores' if sxx == 0.0 else 'truth'}", RuntimeWarning, stacklevel=2)
        return math.nan
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


# ---------------------------------------------------------------------------
# alpha/beta sweep
# ---------------------------------------------------------------------------


def lattice(step: float) -> list[tuple[float, float]]:
    """Points (i*step, j*step) with i + j <= 1/step, alpha-major order."""
    if not 0 < step <= 1:
        raise ValueError("step must lie in (0, 1]")
    m = int(math.floor(1.0 / step + 1e-9))
    return [(round(i * step, 12), round(j * step, 12)) for i in range(m + 1) for j in range(m + 1 - i)]


def lattice_size(step: float) -> int:
    m = int(math.floor(1.0 / step + 1e-9))
    return (m + 1) * (m + 2) // 2


@dataclass
class SweepGrid:
    step: float
    cells: list[tuple[float, float, float]] = field(default_factory=list)

    def best(self) -> tuple[float, float, float]:
        return max(self.cells, key=lambda c: (c[2], -c[0], -c[1]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "beta", "precision"])
        for a, b, p in self.cells:
            w.writerow([repr(a), repr(b), repr(p)])
        return buf.getvalue()


def sweep_alpha_beta(net: HeteroNetwork, truth, k: int, step: float = 0.01, *,
                     threshold: float = 1e-8, max_iters: int = 1000,
                     threads: int = 1) -> SweepGrid:
    """DevRank precision@k of developer scores at every lattice point.

    ``threads`` > 1 evaluates cells concurrently; output order is fixed.
    """
    truth = truth.new_followers if isinstance(truth, GroundTruth) else np.asarray(truth)
    points = lattice(step)

    def cell(ab):
        a, b = ab
        params = RankParams(a, b, threshold, max_iters)
        state = devrank(net, params)
        return (a, b, precision_at_k(state.dev_scores, truth, k))

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            cells = list(pool.map(cell, points))
    else:
        cells = [cell(ab) for ab in points]
    return SweepGrid(step, cells)


# ---------------------------------------------------------------------------
# commit / influence statistics
# ---------------------------------------------------------------------------


@dataclass
class Bin:
    lo: int
    hi: int
    mean: float
    population: int

    @property
    def label(self):
        return f"({self.lo},{self.hi}]"


@dataclass
class StatsBins:
    bin_width: int
    developers: list[Bin] = field(default_factory=list)
    projects: list[Bin] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["entity", "lo", "hi", "mean_gain", "population"])
        for name, bins in (("developer", self.developers), ("project", self.projects)):
            for b in bins:
                w.writerow([name, b.lo, b.hi, "nan" if math.isnan(b.mean) else repr(b.mean), b.population])
        return buf.getvalue()


def _bin(totals, gains, width):
    totals = np.asarray(totals)
    gains = np.asarray(gains, dtype=np.float64)
    keep = totals > 0  # (lo, hi] bins start at (0, width]
    if not keep.any():
        return []
    which = (totals[keep] - 1) // width
    g = gains[keep]
    out = []
    for b in range(int(which.max()) + 1):
        sel = which == b
        n = int(sel.sum())
        out.append(Bin(b * width, (b + 1) * width, float(g[sel].mean()) if n else math.nan, n))
    return out


def commit_follower_stats(log: EventLog, cutoff: date, window_end: date, bin_width: int = 100) -> StatsBins:
    """Mean future follower (star) gain of developers (projects) binned by prior commits.

    Entities with no commits before ``cutoff`` fall outside every bin.
    """
    if bin_width < 1:
        raise ValueError("bin_width must be positive")
    net = snapshot(log, cutoff)
    truth = compute_ground_truth(log, SplitSpec(cutoff, window_end), net)
    return StatsBins(
        bin_width,
        _bin(net.commit_totals(), truth.new_followers, bin_width),
        _bin(net.project_commit_totals(), truth.new_stars, bin_width),
    )


# ---------------------------------------------------------------------------
# convergence benchmark and reports
# ---------------------------------------------------------------------------


@dataclass
class BenchRow:
    algorithm: str
    threshold: float
    iterations: int
    millis: float
    converged: bool


def convergence_benchmark(net: HeteroNetwork, kinds: Iterable = tuple(AlgorithmKind),
                          thresholds: Sequence[float] = (1e-8, 1e-10, 1e-12), *,
                          max_iters: int = 1000, params: Optional[dict] = None,
                          threads: int = 1) -> list[BenchRow]:
    """Iteration count and wall time of each algorithm at each threshold."""
    rows = []
    for kind in kinds:
        kind = AlgorithmKind.parse(kind)
        for thr in thresholds:
            if not thr > 0:
                raise ValueError("thresholds must be positive")
            overrides = dict((params or {}).get(kind, {}))
            p = RankParams.for_kind(kind, threshold=thr, max_iters=max_iters, **overrides)
            t0 = time.perf_counter()
            state = run(kind, net, p, threads=threads)
            ms = (time.perf_counter() - t0) * 1000.0
            rows.append(BenchRow(kind.value, thr, state.iterations, ms, state.converged))
    return rows


def bench_csv(rows: Sequence[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["algorithm", "threshold", "iterations", "millis", "converged"])
    for r in rows:
        w.writerow([r.algorithm, repr(r.threshold), r.iterations, f"{r.millis:.3f}", int(r.converged)])
    return buf.getvalue()


def top_table(state: RankState, truth: GroundTruth, net: HeteroNetwork, n: int = 10,
              comparison_states: Sequence[RankState] = ()) -> list[dict]:
    """Developers with the largest future follower gain, with their ranks per algorithm."""
    if n < 1:
        raise ValueError("n must be at least 1")
    followers = net.follower_counts()
    commits = net.commit_totals()
    rank_cols = [(s.kind.value, ranks(s.dev_scores)) for s in (state, *comparison_states)]
    rows = []
    for d in top_k(truth.new_followers, min(n, net.n_d)):
        row = {
            "external_id": net.developers[d],
            "new_followers": int(truth.new_followers[d]),
            "followers_before": int(followers[d]),
            "commits_before": int(commits[d]),
        }
        for name, r in rank_cols:
            row[name] = int(r[d])
        rows.append(row)
    return rows


def precision_table(states: Sequence[RankState], truth, ks: Sequence[int], *, projects=False) -> list[dict]:
    """Precision@k per algorithm; k larger than the population is skipped."""
    counts = truth.new_stars if projects else truth.new_followers
    rows = []
    for k in ks:
        if k > len(counts):
            continue
        row = {"k": k}
        for s in states:
            row[s.kind.value] = precision_at_k(s.proj_scores if projects else s.dev_scores, counts, k)
        rows.append(row)
    return rows

"""Seeded preferential-attachment generator for follow/commit/star event logs.

Time is split into calendar months.  Within a month the attachment weights
are frozen and that month's events are drawn in bulk, then the degree
counters are updated (batched preferential attachment):

* commits: every developer owns a few "home" projects picked on arrival
  with probability proportional to ``(received commits + 1) ** commit_exponent``;
  monthly commit counts are Poisson with a heavy-tailed per-developer rate.
* follows: follower uniform among active developers, followee proportional
  to ``(in-degree + 1) ** follow_exponent * (1 + commits / mean_commits) ** commit_influence``.
* stars: starrer uniform, project proportional to its received commits.

The commit factor in the followee weight is what makes past commit volume
predictive of future followers.
"""

from __future__ import annotations

import calendar
import csv
from dataclasses import asdict, dataclass
from datetime import date, timedelta
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class SyntheticSpec:
    n_d: int = 10_000
    n_p: int = 1_000
    follow_exponent: float = 1.0
    commit_exponent: float = 1.0
    mean_commits: float = 20.0
    mean_follows: float = 8.0
    mean_stars: float = 3.0
    commit_influence: float = 1.0
    fork_fraction: float = 0.02
    start: date = date(2006, 1, 1)
    end: date = date(2014, 1, 1)
    seed: int = 0

    def __post_init__(self):
        for name in ("n_d", "n_p"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        for name in ("mean_commits", "mean_follows", "mean_stars"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("follow_exponent", "commit_exponent", "commit_influence"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not 0 <= self.fork_fraction < 1:
            raise ValueError("fork_fraction must lie in [0, 1)")
        if not self.start < self.end:
            raise ValueError("start must precede end")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def to_json(self) -> dict:
        d = asdict(self)
        d["start"], d["end"] = self.start.isoformat(), self.end.isoformat()
        return d


def _months(start: date, end: date) -> list[tuple[date, int]]:
    """(first day, number of days) of each month-long epoch in [start, end)."""
    out, cur = [], start
    while cur < end:
        y, m = cur.year, cur.month
        nxt = date(y + (m == 12), m % 12 + 1, 1) if cur.day == 1 else cur + timedelta(days=30)
        nxt = min(nxt, end)
        out.append((cur, (nxt - cur).days))
        cur = nxt
    return out


def dev_id(i: int) -> str:
    return f"dev{i:06d}"


def proj_id(i: int) -> str:
    return f"proj{i:05d}"


@dataclass
class SyntheticData:
    follows: list[tuple[str, str, str]]
    commits: list[tuple[str, str, str, int]]
    stars: list[tuple[str, str, str]]
    projects: list[tuple[str, str, str]]

    def write(self, out_dir) -> dict[str, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        files = {
            "follows": (out / "follows.csv", ("follower_id", "followee_id", "date"), self.follows),
            "commits": (out / "commits.csv", ("developer_id", "project_id", "date", "count"), self.commits),
            "stars": (out / "stars.csv", ("developer_id", "project_id", "date"), self.stars),
            "projects": (out / "projects.csv", ("project_id", "name", "forked_from"), self.projects),
        }
        for path, header, rows in files.values():
            with path.open("w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                w.writerows(rows)
        return {k: v[0] for k, v in files.items()}


def _pick(rng, weights, size):
    total = weights.sum()
    if size <= 0 or total <= 0:
        return np.zeros(0, dtype=np.int64)
    return rng.choice(len(weights), size=size, p=weights / total)


def generate(spec: SyntheticSpec) -> SyntheticData:
    rng = np.random.default_rng(spec.seed)
    months = _months(spec.start, spec.end)
    n_e, n_d, n_p = len(months), spec.n_d, spec.n_p
    arrival_span = max(1, int(round(0.75 * n_e)))

    dev_join = np.sort(rng.integers(0, arrival_span, size=n_d))
    proj_join = np.sort(rng.integers(0, arrival_span, size=n_p))
    proj_join[0] = 0  # someone to commit to from the first month
    activity = rng.lognormal(0.0, 1.0, size=n_d)
    lifetime = n_e - dev_join
    rate = spec.mean_commits * n_d / float((activity * lifetime).sum())

    # forks: a later project pointing at an earlier one
    fork_of = np.full(n_p, -1)
    for p in np.flatnonzero(rng.random(n_p) < spec.fork_fraction):
        earlier = np.flatnonzero(proj_join[:p] <= proj_join[p])
        if len(earlier):
            fork_of[p] = int(rng.choice(earlier))
    projects = [(proj_id(p), f"repo{(fork_of[p] if fork_of[p] >= 0 else p):05d}",
                 proj_id(fork_of[p]) if fork_of[p] >= 0 else "") for p in range(n_p)]

    received = np.zeros(n_p)
    dev_commits = np.zeros(n_d)
    in_deg = np.zeros(n_d)
    followed: set[tuple[int, int]] = set()
    home_dev: list[int] = []
    home_proj: list[int] = []
    home_share: list[float] = []
    seated = np.zeros(n_d, dtype=bool)

    follows, commits, stars = [], [], []
    total_follows = spec.mean_follows * n_d
    total_stars = spec.mean_stars * n_d
    active_months = float(lifetime.sum())

    for e, (first, ndays) in enumerate(months):
        active = np.flatnonzero(dev_join <= e)
        open_p = np.flatnonzero(proj_join <= e)

        def day():
            return (first + timedelta(days=int(rng.integers(0, ndays)))).isoformat()

        # seat newly arrived developers on their home projects
        for d in active[~seated[active]]:
            k = min(len(open_p), 1 + int(rng.poisson(0.5)))
            w = (received[open_p] + 1.0) ** spec.commit_exponent
            chosen = rng.choice(open_p, size=k, replace=False, p=w / w.sum())
            share = rng.dirichlet(np.full(k, 0.7))
            home_dev.extend([int(d)] * k)
            home_proj.extend(int(p) for p in chosen)
            home_share.extend(share.tolist())
            seated[d] = True

        # commits
        hd, hp, hs = np.asarray(home_dev), np.asarray(home_proj), np.asarray(home_share)
        n_c = rng.poisson(rate * activity[hd] * hs)
        for d, p, c in zip(hd[n_c > 0].tolist(), hp[n_c > 0].tolist(), n_c[n_c > 0].tolist()):
            commits.append((dev_id(d), proj_id(p), day(), c))
        np.add.at(received, hp, n_c)
        np.add.at(dev_commits, hd, n_c)

        # follows
        n_f = int(rng.poisson(total_follows * len(active) / active_months))
        if len(active) > 1 and n_f:
            attract = (in_deg[active] + 1.0) ** spec.follow_exponent
            attract *= (1.0 + dev_commits[active] / spec.mean_commits) ** spec.commit_influence
            src = active[rng.integers(0, len(active), size=n_f)]
            dst = active[_pick(rng, attract, n_f)]
            for a, b in zip(src.tolist(), dst.tolist()):
                if a != b and (a, b) not in followed:
                    followed.add((a, b))
                    in_deg[b] += 1
                    follows.append((dev_id(a), dev_id(b), day()))

        # stars
        n_s = int(rng.poisson(total_stars * len(active) / active_months))
        if n_s:
            src = active[rng.integers(0, len(active), size=n_s)]
            dst = open_p[_pick(rng, received[open_p], n_s)]
            for a, p in zip(src.tolist(), dst.tolist()):
                stars.append((dev_id(a), proj_id(p), day()))

    return SyntheticData(follows, commits, stars, projects)

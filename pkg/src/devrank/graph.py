"""Heterogeneous developer/project network built from dated GitHub events.

Three event kinds feed the network: ``follow`` (developer -> developer),
``commit`` (developer -> project, weighted by commit count) and ``star``
(developer -> project).  Events are loaded from flat CSV exports into an
:class:`EventLog`; :func:`snapshot` then freezes everything strictly before a
cutoff date into an immutable :class:`HeteroNetwork` with dense integer ids.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

log = logging.getLogger(__name__)

FOLLOW_HEADER = ("follower_id", "followee_id", "date")
COMMIT_HEADER = ("developer_id", "project_id", "date")
COMMIT_HEADER_COUNTED = ("developer_id", "project_id", "date", "count")
STAR_HEADER = ("developer_id", "project_id", "date")
PROJECT_HEADER = ("project_id", "name", "forked_from")


class Kind(str, Enum):
    DEVELOPER = "developer"
    PROJECT = "project"


class EntityId(NamedTuple):
    index: int
    kind: Kind


class MalformedRowError(ValueError):
    """A CSV row that cannot be parsed; carries file name and 1-based line."""

    def __init__(self, path, line, reason):
        self.path = str(path)
        self.line = line
        self.reason = reason
        super().__init__(f"{self.path}:{line}: {reason}")


@dataclass(frozen=True, slots=True)
class Event:
    kind: str  # "follow" | "commit" | "star"
    actor: str
    target: str
    date: date
    count: int = 1


@dataclass
class EventLog:
    events: list[Event] = field(default_factory=list)
    project_aliases: dict[str, str] = field(default_factory=dict)
    skipped: int = 0

    def resolve(self, project_id: str) -> str:
        return self.project_aliases.get(project_id, project_id)

    def count(self, kind: str) -> int:
        return sum(1 for e in self.events if e.kind == kind)

    def __len__(self):
        return len(self.events)


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------


def _read_rows(path, headers, skip_malformed, on_skip):
    """Yield (line number, row) for each data row; validates header and width."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(h.strip() for h in next(reader))
        except StopIteration:
            raise MalformedRowError(path, 1, "missing header") from None
        if header not in headers:
            raise MalformedRowError(path, 1, f"unexpected header {','.join(header)}")
        width = len(header)
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != width:
                err = MalformedRowError(path, line, f"expected {width} columns, got {len(row)}")
                if not skip_malformed:
                    raise err
                on_skip(err)
                continue
            yield line, width, [c.strip() for c in row]


def _parse_date(path, line, text):
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise MalformedRowError(path, line, f"unparseable date {text!r}") from None


def _parse_count(path, line, text):
    try:
        value = int(text)
    except ValueError:
        raise MalformedRowError(path, line, f"unparseable count {text!r}") from None
    if value <= 0:
        raise MalformedRowError(path, line, f"non-positive count {value}")
    return value


def _require_ids(path, line, *ids):
    if any(not i for i in ids):
        raise MalformedRowError(path, line, "empty identifier")


def load_project_aliases(path, merge_by_name=False):
    """Map every non-canonical project id to the root of its fork chain.

    With ``merge_by_name`` roots sharing a name collapse onto the
    lexicographically smallest root id.
    """
    parent: dict[str, str] = {}
    names: dict[str, str] = {}
    for line, _, row in _read_rows(path, (PROJECT_HEADER,), False, None):
        pid, name, forked_from = row
        _require_ids(path, line, pid)
        names[pid] = name
        if forked_from and forked_from != pid:
            parent[pid] = forked_from

    def root(pid):
        seen = []
        while pid in parent:
            if pid in seen:
                raise MalformedRowError(path, 0, f"fork cycle through {pid!r}")
            seen.append(pid)
            pid = parent[pid]
        return pid

    aliases = {pid: root(pid) for pid in parent}

    if merge_by_name:
        by_name: dict[str, list[str]] = {}
        for pid, name in names.items():
            if name:
                by_name.setdefault(name, []).append(aliases.get(pid, pid))
        for roots in by_name.values():
            canonical = min(roots)
            for r in set(roots):
                if r != canonical:
                    aliases[r] = canonical
        # re-close: a fork pointing at a merged root follows it
        aliases = {pid: aliases.get(tgt, tgt) for pid, tgt in aliases.items()}

    return {pid: tgt for pid, tgt in aliases.items() if pid != tgt}


def load_event_log(follow_file, commit_file, star_file, project_file=None, *,
                   skip_malformed=False, merge_by_name=False) -> EventLog:
    """Read follow/commit/star CSV exports (and optional project table).

    Malformed rows raise :class:`MalformedRowError` unless ``skip_malformed``,
    in which case they are logged and counted in ``EventLog.skipped``.
    """
    out = EventLog()

    def on_skip(err):
        log.warning("skipping %s", err)
        out.skipped += 1

    def guarded(path, headers, parse):
        for line, width, row in _read_rows(path, headers, skip_malformed, on_skip):
            try:
                out.events.append(parse(path, line, width, row))
            except MalformedRowError as err:
                if not skip_malformed:
                    raise
                on_skip(err)

    def follow(path, line, width, row):
        _require_ids(path, line, row[0], row[1])
        return Event("follow", row[0], row[1], _parse_date(path, line, row[2]))

    def commit(path, line, width, row):
        _require_ids(path, line, row[0], row[1])
        n = _parse_count(path, line, row[3]) if width == 4 else 1
        return Event("commit", row[0], row[1], _parse_date(path, line, row[2]), n)

    def star(path, line, width, row):
        _require_ids(path, line, row[0], row[1])
        return Event("star", row[0], row[1], _parse_date(path, line, row[2]))

    guarded(follow_file, (FOLLOW_HEADER,), follow)
    guarded(commit_file, (COMMIT_HEADER, COMMIT_HEADER_COUNTED), commit)
    guarded(star_file, (STAR_HEADER,), star)
    if project_file is not None:
        out.project_aliases = load_project_aliases(project_file, merge_by_name)
    return out


# ---------------------------------------------------------------------------
# network
# ---------------------------------------------------------------------------


def _frozen(a, dtype, width):
    a = np.asarray(a, dtype=dtype).reshape(-1, width)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class HeteroNetwork:
    """Immutable developer/project network with dense integer ids.

    ``follows`` is an (m, 2) array of (follower, followee) rows, ``commits``
    an (m, 3) array of (developer, project, count) rows, ``stars`` an (m, 2)
    array of (developer, project) rows.  All are sorted lexicographically.
    """

    developers: tuple[str, ...]
    projects: tuple[str, ...]
    follows: np.ndarray
    commits: np.ndarray
    stars: np.ndarray

    @classmethod
    def build(cls, developers, projects, follows=(), commits=(), stars=()) -> "HeteroNetwork":
        """Canonicalize index-based edges into a network.

        ``developers``/``projects`` are external id sequences or plain counts
        (ids then default to ``d0, d1, ...`` / ``p0, p1, ...``).  Self-follows
        and duplicate follows/stars are dropped; commit counts are summed per
        (developer, project) pair.
        """
        if isinstance(developers, (int, np.integer)):
            developers = [f"d{i}" for i in range(developers)]
        if isinstance(projects, (int, np.integer)):
            projects = [f"p{i}" for i in range(projects)]
        developers, projects = tuple(developers), tuple(projects)
        n_d, n_p = len(developers), len(projects)
        if len(set(developers)) != n_d or len(set(projects)) != n_p:
            raise ValueError("external ids must be unique within each kind")

        f = np.asarray(follows, dtype=np.int64).reshape(-1, 2)
        c = np.asarray(commits, dtype=np.int64).reshape(-1, 3)
        s = np.asarray(stars, dtype=np.int64).reshape(-1, 2)
        for name, arr, bounds in (("follow", f, (n_d, n_d)), ("commit", c[:, :2], (n_d, n_p)),
                                  ("star", s, (n_d, n_p))):
            if arr.size and ((arr < 0).any() or (arr[:, 0] >= bounds[0]).any() or (arr[:, 1] >= bounds[1]).any()):
                raise ValueError(f"{name} edge index out of range")
        if c.size and (c[:, 2] <= 0).any():
            raise ValueError("commit counts must be positive")

        f = f[f[:, 0] != f[:, 1]]
        f = np.unique(f, axis=0) if len(f) else f
        s = np.unique(s, axis=0) if len(s) else s
        if len(c):
            pairs, inverse = np.unique(c[:, :2], axis=0, return_inverse=True)
            totals = np.bincount(inverse.ravel(), weights=c[:, 2], minlength=len(pairs)).astype(np.int64)
            c = np.column_stack([pairs, totals])
        return cls(developers, projects, _frozen(f, np.int64, 2), _frozen(c, np.int64, 3), _frozen(s, np.int64, 2))

    @property
    def n_d(self) -> int:
        return len(self.developers)

    @property
    def n_p(self) -> int:
        return len(self.projects)

    def _lookup(self, kind):
        key = "_dev_index" if kind is Kind.DEVELOPER else "_proj_index"
        idx = self.__dict__.get(key)
        if idx is None:
            names = self.developers if kind is Kind.DEVELOPER else self.projects
            idx = {name: i for i, name in enumerate(names)}
            object.__setattr__(self, key, idx)
        return idx

    def entity(self, kind: Kind, external: str) -> EntityId:
        kind = Kind(kind)
        return EntityId(self._lookup(kind)[external], kind)

    def external(self, eid: EntityId) -> str:
        names = self.developers if eid.kind is Kind.DEVELOPER else self.projects
        return names[eid.index]

    def developer_index(self, external: str) -> int:
        return self._lookup(Kind.DEVELOPER)[external]

    def project_index(self, external: str) -> int:
        return self._lookup(Kind.PROJECT)[external]

    def has_developer(self, external: str) -> bool:
        return external in self._lookup(Kind.DEVELOPER)

    def has_project(self, external: str) -> bool:
        return external in self._lookup(Kind.PROJECT)

    def follower_counts(self) -> np.ndarray:
        return np.bincount(self.follows[:, 1], minlength=self.n_d)

    def commit_totals(self) -> np.ndarray:
        return np.bincount(self.commits[:, 0], weights=self.commits[:, 2], minlength=self.n_d).astype(np.int64)

    def project_commit_totals(self) -> np.ndarray:
        return np.bincount(self.commits[:, 1], weights=self.commits[:, 2], minlength=self.n_p).astype(np.int64)

    def star_counts(self) -> np.ndarray:
        return np.bincount(self.stars[:, 1], minlength=self.n_p)

    # external-id views, mostly for comparing networks with different interning
    def follow_pairs(self) -> set[tuple[str, str]]:
        d = self.developers
        return {(d[a], d[b]) for a, b in self.follows.tolist()}

    def commit_counts(self) -> dict[tuple[str, str], int]:
        d, p = self.developers, self.projects
        return {(d[a], p[b]): n for a, b, n in self.commits.tolist()}

    def star_pairs(self) -> set[tuple[str, str]]:
        d, p = self.developers, self.projects
        return {(d[a], p[b]) for a, b in self.stars.tolist()}

    def __repr__(self):
        return (f"HeteroNetwork(n_d={self.n_d}, n_p={self.n_p}, follows={len(self.follows)}, "
                f"commits={len(self.commits)}, stars={len(self.stars)})")


def snapshot(log: EventLog, cutoff: date) -> HeteroNetwork:
    """Network induced by all events dated strictly before ``cutoff``.

    Ids are interned in sorted external-id order, so the result does not
    depend on event order.
    """
    follows, commits, stars = [], [], []
    devs, projs = set(), set()
    resolve = log.resolve
    for e in log.events:
        if e.date >= cutoff:
            continue
        if e.kind == "follow":
            if e.actor == e.target:
                continue
            follows.append((e.actor, e.target))
            devs.add(e.actor)
            devs.add(e.target)
        else:
            p = resolve(e.target)
            devs.add(e.actor)
            projs.add(p)
            if e.kind == "commit":
                commits.append((e.actor, p, e.count))
            else:
                stars.append((e.actor, p))

    developers, projects = sorted(devs), sorted(projs)
    di = {x: i for i, x in enumerate(developers)}
    pi = {x: i for i, x in enumerate(projects)}
    return HeteroNetwork.build(
        developers,
        projects,
        [(di[a], di[b]) for a, b in follows],
        [(di[a], pi[p], n) for a, p, n in commits],
        [(di[a], pi[p]) for a, p in stars],
    )


@dataclass(frozen=True)
class FollowView:
    developers: tuple[str, ...]
    edges: np.ndarray  # (follower, followee)

    @property
    def n_nodes(self):
        return len(self.developers)


@dataclass(frozen=True)
class CommitView:
    developers: tuple[str, ...]
    projects: tuple[str, ...]
    edges: np.ndarray  # (developer, project, count)

    @property
    def n_nodes(self):
        return len(self.developers) + len(self.projects)


def decompose(net: HeteroNetwork) -> tuple[FollowView, CommitView]:
    """Split into the developer-only follow graph and the commit bipartite graph."""
    return FollowView(net.developers, net.follows), CommitView(net.developers, net.projects, net.commits)


def events_from_tuples(rows: Iterable[Sequence]) -> list[Event]:
    """Convenience for tests and generators: (kind, actor, target, 'YYYY-MM-DD'[, count])."""
    out = []
    for row in rows:
        kind, actor, target, d = row[:4]
        count = row[4] if len(row) > 4 else 1
        out.append(Event(kind, actor, target, d if isinstance(d, date) else date.fromisoformat(d), count))
    return out

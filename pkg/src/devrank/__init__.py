"""Influence ranking of developers and projects in social-coding networks."""

from .graph import EventLog, HeteroNetwork, load_event_log, snapshot
from .kernels import BACKEND
from .rankers import AlgorithmKind, RankParams, RankState, devrank, ranking, run

__version__ = "0.1.0"

__all__ = [
    "AlgorithmKind",
    "BACKEND",
    "EventLog",
    "HeteroNetwork",
    "RankParams",
    "RankState",
    "devrank",
    "load_event_log",
    "ranking",
    "run",
    "snapshot",
]

"""Command-line interface: ``devrank {gen,rank,eval,sweep,stats,bench}``.

Every option may also come from a JSON file given with ``--config`` (keys are
the option names with dashes replaced by underscores); explicit flags win.

Exit codes: 0 ok, 1 input error, 2 non-convergence, 3 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from dataclasses import dataclass, field, fields
from datetime import date
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .evaluation import (
    PLANS,
    SplitSpec,
    bench_csv,
    commit_follower_stats,
    compute_ground_truth,
    convergence_benchmark,
    pearson_top_k,
    precision_table,
    sweep_alpha_beta,
    top_table,
)
from .graph import MalformedRowError, load_event_log, snapshot
from .oracle import dense_rank
from .rankers import AlgorithmKind, RankParams, ranking, run
from .synthetic import SyntheticSpec, generate

log = logging.getLogger("devrank")

EXIT_OK, EXIT_INPUT, EXIT_NONCONVERGED, EXIT_CONFIG = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    follows: Optional[str] = None
    commits: Optional[str] = None
    stars: Optional[str] = None
    projects: Optional[str] = None
    train_end: Optional[date] = None
    test_end: Optional[date] = None
    test_start: Optional[date] = None
    plan: Optional[str] = None
    algo: str = "DevRank"
    alpha: Optional[float] = None
    beta: Optional[float] = None
    threshold: Optional[list] = None
    max_iters: int = 1000
    k: list = field(default_factory=lambda: [10, 20, 30, 40, 50])
    step: float = 0.01
    bin_width: int = 100
    seed: int = 0
    threads: int = 1
    out: str = "."
    dense_oracle: bool = False
    skip_malformed: bool = False
    merge_by_name: bool = False
    # gen
    n_dev: int = 10_000
    n_proj: int = 1_000
    follow_exponent: float = 1.0
    commit_exponent: float = 1.0
    commit_influence: float = 1.0
    mean_commits: float = 20.0
    mean_follows: float = 8.0
    mean_stars: float = 3.0
    fork_fraction: float = 0.02
    start: date = date(2006, 1, 1)
    end: date = date(2014, 1, 1)

    def validate(self):
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        if self.threshold is not None and (not self.threshold or any(t <= 0 for t in self.threshold)):
            raise ConfigError("thresholds must be positive")
        if any(k < 1 for k in self.k):
            raise ConfigError("k values must be positive")
        if self.plan is not None and self.plan not in PLANS:
            raise ConfigError(f"unknown plan {self.plan!r}; choose from {sorted(PLANS)}")
        try:
            AlgorithmKind.parse(self.algo)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def thresholds(self, default=(1e-8,)) -> list:
        return list(self.threshold) if self.threshold is not None else list(default)

    def params(self, kind=None) -> RankParams:
        kind = AlgorithmKind.parse(kind or self.algo)
        try:
            return RankParams.for_kind(kind, alpha=self.alpha, beta=self.beta,
                                       threshold=self.thresholds()[0], max_iters=self.max_iters)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def split(self) -> SplitSpec:
        if self.plan:
            return PLANS[self.plan]
        if self.train_end is None or self.test_end is None:
            raise ConfigError("--train-end and --test-end (or --plan) are required")
        try:
            return SplitSpec(self.train_end, self.test_end, "custom", self.test_start)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _iso(text):
    try:
        return date.fromisoformat(text)
    except (TypeError, ValueError):
        raise argparse.ArgumentTypeError(f"not an ISO date: {text!r}") from None


def _floats(text):
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a decimal list: {text!r}") from None


def _ints(text):
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from None


_CONVERTERS = {"train_end": _iso, "test_end": _iso, "test_start": _iso, "start": _iso, "end": _iso,
               "threshold": _floats, "k": _ints}


def _add_inputs(p):
    p.add_argument("--follows", help="follows.csv (follower_id,followee_id,date)")
    p.add_argument("--commits", help="commits.csv (developer_id,project_id,date[,count])")
    p.add_argument("--stars", help="stars.csv (developer_id,project_id,date)")
    p.add_argument("--projects", help="optional projects.csv (project_id,name,forked_from)")
    p.add_argument("--skip-malformed", action="store_true", default=None,
                   help="skip and count malformed rows instead of aborting")
    p.add_argument("--merge-by-name", action="store_true", default=None,
                   help="also merge projects sharing a name")


def _add_common(p):
    S = argparse.SUPPRESS
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--train-end", type=_iso, default=S, help="training cutoff (exclusive)")
    p.add_argument("--test-end", type=_iso, default=S, help="end of test window (exclusive)")
    p.add_argument("--test-start", type=_iso, default=S, help="start of test window (default train-end)")
    p.add_argument("--plan", choices=sorted(PLANS), default=S, help="preset time split")
    p.add_argument("--algo", default=S, help="DevRank, PageRank, HITS, DF or DC")
    p.add_argument("--alpha", type=float, default=S, help="follow-term weight")
    p.add_argument("--beta", type=float, default=S, help="commit-term weight")
    p.add_argument("--threshold", type=_floats, default=S, help="L1 convergence bound (bench: comma list)")
    p.add_argument("--max-iters", type=int, default=S)
    p.add_argument("--k", type=_ints, default=S, help="comma-separated top-k list")
    p.add_argument("--step", type=float, default=S, help="sweep lattice spacing")
    p.add_argument("--bin-width", type=int, default=S, help="commit-count bin width for stats")
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--threads", type=int, default=S)
    p.add_argument("--out", default=S, help="output directory")
    p.add_argument("--dense-oracle", action="store_true", default=S,
                   help="use the dense-matrix reference rankers (small inputs only)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="devrank", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a synthetic event log")
    _add_common(g)
    S = argparse.SUPPRESS
    g.add_argument("--n-dev", type=int, default=S)
    g.add_argument("--n-proj", type=int, default=S)
    g.add_argument("--follow-exponent", type=float, default=S)
    g.add_argument("--commit-exponent", type=float, default=S)
    g.add_argument("--commit-influence", type=float, default=S)
    g.add_argument("--mean-commits", type=float, default=S)
    g.add_argument("--mean-follows", type=float, default=S)
    g.add_argument("--mean-stars", type=float, default=S)
    g.add_argument("--fork-fraction", type=float, default=S)
    g.add_argument("--start", type=_iso, default=S)
    g.add_argument("--end", type=_iso, default=S)

    for name, text in (("rank", "rank developers and projects"),
                       ("eval", "temporal-split evaluation of all five algorithms"),
                       ("sweep", "DevRank precision over the alpha/beta lattice"),
                       ("stats", "future follower/star gain binned by prior commits"),
                       ("bench", "iterations and wall time per algorithm and threshold")):
        p = sub.add_parser(name, help=text)
        _add_inputs(p)
        _add_common(p)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the JSON config file, then explicit flags."""
    values = {}
    names = {f.name for f in fields(RunConfig)}
    if getattr(args, "config", None):
        try:
            raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        for key, value in raw.items():
            key = key.replace("-", "_")
            if key not in names:
                raise ConfigError(f"unknown config key {key!r}")
            conv = _CONVERTERS.get(key)
            if conv is not None and not isinstance(value, list):
                try:
                    value = conv(value)
                except argparse.ArgumentTypeError as exc:
                    raise ConfigError(str(exc)) from None
            values[key] = value
    for key, value in vars(args).items():
        if key in names and value is not None:
            values[key] = value
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _load(cfg: RunConfig):
    missing = [n for n in ("follows", "commits", "stars") if not getattr(cfg, n)]
    if missing:
        raise ConfigError(f"missing input file option(s): {', '.join('--' + m for m in missing)}")
    event_log = load_event_log(cfg.follows, cfg.commits, cfg.stars, cfg.projects,
                               skip_malformed=cfg.skip_malformed, merge_by_name=cfg.merge_by_name)
    if event_log.skipped:
        log.warning("skipped %d malformed rows", event_log.skipped)
    inputs = {}
    for name in ("follows", "commits", "stars", "projects"):
        path = getattr(cfg, name)
        if path:
            inputs[name] = {"path": str(path), "sha256": _digest(path)}
    return event_log, inputs


def _rank(kind, net, params, cfg):
    if cfg.dense_oracle:
        return dense_rank(kind, net, params)
    return run(kind, net, params, threads=cfg.threads)


def _fmt(x) -> str:
    x = float(x)
    return "nan" if np.isnan(x) else repr(x)


def _write_rows(path: Path, header, rows):
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_dicts(path: Path, rows: list[dict], header=None):
    header = header or (list(rows[0]) if rows else [])
    _write_rows(path, header, [[_fmt(r[h]) if isinstance(r[h], float) else r[h] for h in header] for r in rows])


def _write_json(path: Path, payload):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_scores(path: Path, names, scores):
    order = ranking(scores)
    _write_rows(path, ["external_id", "score", "rank"],
                ([names[i], _fmt(scores[i]), r] for r, i in enumerate(order, start=1)))


def _params_json(p: RankParams):
    return {"alpha": p.alpha, "beta": p.beta, "threshold": p.threshold, "max_iters": p.max_iters}


def _out_dir(cfg) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_gen(cfg: RunConfig) -> int:
    try:
        spec = SyntheticSpec(cfg.n_dev, cfg.n_proj, cfg.follow_exponent, cfg.commit_exponent,
                             cfg.mean_commits, cfg.mean_follows, cfg.mean_stars, cfg.commit_influence,
                             cfg.fork_fraction, cfg.start, cfg.end, cfg.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = _out_dir(cfg)
    data = generate(spec)
    data.write(out)
    _write_json(out / "gen_meta.json", {"spec": spec.to_json(), "follows": len(data.follows),
                                        "commit_rows": len(data.commits), "stars": len(data.stars),
                                        "version": __version__})
    log.info("wrote %d follows, %d commit rows, %d stars to %s",
             len(data.follows), len(data.commits), len(data.stars), out)
    return EXIT_OK


def cmd_rank(cfg: RunConfig) -> int:
    kind = AlgorithmKind.parse(cfg.algo)
    params = cfg.params(kind)
    event_log, inputs = _load(cfg)
    net = snapshot(event_log, cfg.train_end or date.max)
    if net.n_d == 0:
        raise ConfigError("no developers before the cutoff")
    state = _rank(kind, net, params, cfg)
    out = _out_dir(cfg)
    write_scores(out / "dev_scores.csv", net.developers, state.dev_scores)
    write_scores(out / "proj_scores.csv", net.projects, state.proj_scores)
    _write_json(out / "run_meta.json", {
        "command": "rank",
        "algorithm": kind.value,
        "params": _params_json(params),
        "engine": "dense-oracle" if cfg.dense_oracle else "sparse",
        "iterations": state.iterations,
        "init_iterations": state.init_iterations,
        "final_err": state.final_err,
        "converged": state.converged,
        "train_end": cfg.train_end.isoformat() if cfg.train_end else None,
        "n_developers": net.n_d,
        "n_projects": net.n_p,
        "inputs": inputs,
        "skip_malformed": cfg.skip_malformed,
        "merge_by_name": cfg.merge_by_name,
        "skipped_rows": event_log.skipped,
        "seed": cfg.seed,
        "version": __version__,
    })
    if not state.converged:
        log.error("%s did not converge in %d iterations", kind.value, params.max_iters)
        return EXIT_NONCONVERGED
    return EXIT_OK


def _train_and_truth(cfg):
    split = cfg.split()
    event_log, inputs = _load(cfg)
    net = snapshot(event_log, split.train_end)
    if net.n_d == 0:
        raise ConfigError("no developers before train_end")
    truth = compute_ground_truth(event_log, split, net)
    return split, event_log, inputs, net, truth


def _split_json(split):
    return {"train_end": split.train_end.isoformat(), "test_end": split.test_end.isoformat(),
            "test_start": split.window_start.isoformat(), "label": split.label}


def cmd_eval(cfg: RunConfig) -> int:
    split, _, inputs, net, truth = _train_and_truth(cfg)
    states = []
    for kind in AlgorithmKind:
        params = cfg.params(kind) if kind is AlgorithmKind.DEVRANK else RankParams.for_kind(
            kind, threshold=cfg.thresholds()[0], max_iters=cfg.max_iters)
        states.append(_rank(kind, net, params, cfg))
    out = _out_dir(cfg)
    names = [s.kind.value for s in states]
    _write_dicts(out / "precision_dev.csv", precision_table(states, truth, cfg.k), ["k", *names])
    _write_dicts(out / "precision_proj.csv", precision_table(states, truth, cfg.k, projects=True), ["k", *names])
    pearson = []
    for k in cfg.k:
        if 2 <= k <= net.n_d:
            pearson.append({"k": k, **{s.kind.value: pearson_top_k(s.dev_scores, truth.new_followers, k)
                                       for s in states}})
    _write_dicts(out / "pearson_dev.csv", pearson, ["k", *names])
    table = top_table(states[0], truth, net, 10, states[1:])
    _write_dicts(out / "top_developers.csv", table,
                 ["external_id", "new_followers", "followers_before", "commits_before", *names])
    _write_json(out / "eval_meta.json", {
        "command": "eval",
        "split": _split_json(split),
        "algorithms": {s.kind.value: {"params": _params_json(s.params), "iterations": s.iterations,
                                      "final_err": s.final_err, "converged": s.converged} for s in states},
        "engine": "dense-oracle" if cfg.dense_oracle else "sparse",
        "n_developers": net.n_d,
        "n_projects": net.n_p,
        "ground_truth": {"new_followers": int(truth.new_followers.sum()), "new_stars": int(truth.new_stars.sum()),
                         "raw_follow_events": truth.raw_follow_events, "raw_star_events": truth.raw_star_events,
                         "dropped_follow_events": truth.dropped_follow_events,
                         "dropped_star_events": truth.dropped_star_events},
        "k": cfg.k,
        "inputs": inputs,
        "seed": cfg.seed,
        "version": __version__,
    })
    return EXIT_OK if all(s.converged for s in states) else EXIT_NONCONVERGED


def cmd_sweep(cfg: RunConfig) -> int:
    split, _, inputs, net, truth = _train_and_truth(cfg)
    k = cfg.k[-1]
    try:
        grid = sweep_alpha_beta(net, truth, k, cfg.step, threshold=cfg.thresholds()[0],
                                max_iters=cfg.max_iters, threads=cfg.threads)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = _out_dir(cfg)
    (out / "sweep.csv").write_text(grid.to_csv(), encoding="utf-8")
    a, b, p = grid.best()
    _write_json(out / "sweep_meta.json", {"command": "sweep", "split": _split_json(split), "k": k,
                                          "step": cfg.step, "cells": len(grid.cells),
                                          "best": {"alpha": a, "beta": b, "precision": p},
                                          "inputs": inputs, "seed": cfg.seed, "version": __version__})
    return EXIT_OK


def cmd_stats(cfg: RunConfig) -> int:
    split = cfg.split()
    event_log, inputs = _load(cfg)
    if cfg.bin_width < 1:
        raise ConfigError("bin width must be positive")
    stats = commit_follower_stats(event_log, split.train_end, split.test_end, cfg.bin_width)
    out = _out_dir(cfg)
    (out / "stats.csv").write_text(stats.to_csv(), encoding="utf-8")
    return EXIT_OK


def cmd_bench(cfg: RunConfig) -> int:
    event_log, inputs = _load(cfg)
    net = snapshot(event_log, cfg.train_end or date.max)
    if net.n_d == 0:
        raise ConfigError("no developers before the cutoff")
    thresholds = cfg.thresholds((1e-8, 1e-10, 1e-12))
    overrides = {AlgorithmKind.DEVRANK: {"alpha": cfg.alpha, "beta": cfg.beta}}
    rows = convergence_benchmark(net, AlgorithmKind, thresholds, max_iters=cfg.max_iters,
                                 params=overrides, threads=cfg.threads)
    out = _out_dir(cfg)
    (out / "convergence.csv").write_text(bench_csv(rows), encoding="utf-8")
    return EXIT_OK if all(r.converged for r in rows) else EXIT_NONCONVERGED


COMMANDS = {"gen": cmd_gen, "rank": cmd_rank, "eval": cmd_eval, "sweep": cmd_sweep,
            "stats": cmd_stats, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors, which would read as non-convergence
        return EXIT_CONFIG if exc.code == 2 else exc.code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except MalformedRowError as exc:
        log.error("input error: %s", exc)
        return EXIT_INPUT
    except OSError as exc:
        log.error("input error: %s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

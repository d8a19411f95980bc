"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--n-dev 10000] [--n-proj 1000] [--repeat 5]

Times the raw CSR gather on the follow inflow structure and a full DevRank
run on a synthetic network, per backend and thread count, and checks that
all backends return identical scores.
"""

import argparse
import time
from datetime import date

import numpy as np

from devrank import kernels
from devrank.graph import EventLog, events_from_tuples, snapshot
from devrank.propagation import build_follow_transition
from devrank.rankers import RankParams, devrank
from devrank.synthetic import SyntheticSpec, generate


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def build_network(n_dev, n_proj, seed):
    data = generate(SyntheticSpec(n_d=n_dev, n_p=n_proj, seed=seed))
    rows = [("follow", *r) for r in data.follows]
    rows += [("commit", *r) for r in data.commits]
    rows += [("star", *r) for r in data.stars]
    return snapshot(EventLog(events_from_tuples(rows)), date.max)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-dev", type=int, default=10_000)
    ap.add_argument("--n-proj", type=int, default=1_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--threads", type=int, nargs="+", default=[1, 2, 4])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    net = build_network(args.n_dev, args.n_proj, args.seed)
    t = build_follow_transition(net)
    x = np.random.default_rng(args.seed).random(net.n_d)
    params = RankParams(threshold=1e-10)
    print(f"network: {net.n_d} developers, {net.n_p} projects, "
          f"{len(net.follows)} follows, {len(net.commits)} commit edges")
    print(f"{'backend':<8} {'threads':>7} {'gather_us':>10} {'devrank_ms':>11} {'iters':>6}")

    reference = None
    previous = kernels.BACKEND
    try:
        for backend in kernels.available_backends():
            kernels.set_backend(backend)
            for threads in args.threads if backend == "cython" else [1]:
                g = best_of(lambda: kernels.csr_gather(t.in_ptr, t.in_idx, t.in_w, x, threads), args.repeat * 20)
                state = devrank(net, params, threads=threads)
                r = best_of(lambda: devrank(net, params, threads=threads), args.repeat)
                if reference is None:
                    reference = state.dev_scores
                same = "same" if np.array_equal(reference, state.dev_scores) else "DIFFERENT"
                print(f"{backend:<8} {threads:>7} {g * 1e6:>10.1f} {r * 1e3:>11.1f} {state.iterations:>6}  {same}")
    finally:
        kernels.set_backend(previous)


if __name__ == "__main__":
    main()

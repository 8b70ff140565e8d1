"""Time the final-outcome kernels: numba BFS, numpy chain-binomial, interpreted BFS.

    python3 benchmarks/bench_kernels.py --reps 20

The interpreted BFS is the BFS source run without compilation (what
``COMMSIR_DISABLE_NUMBA=1`` would give if the BFS kernel were selected) and
is only timed at the small sizes.
"""
import argparse
import time

import numpy as np

from commsir import _chain, _kernels
from commsir._accel import NUMBA_ENABLED
from commsir.periods import Exponential
from commsir.sim import ModelParams

CASES = [(100, 10), (500, 20), (500, 500)]
INTERPRETED_MAX = 21 * 500


def _py(func):
    return getattr(func, "py_func", func)


def bfs_interpreted(p, rng):
    # route the nested kernel calls to their uncompiled versions too
    saved = _kernels.draw_period, _kernels.floyd_sample
    _kernels.draw_period, _kernels.floyd_sample = _py(saved[0]), _py(saved[1])
    try:
        kind, p1, p2 = p.period.code
        return _py(_kernels.bfs_multi)(p.n, p.m, p.beta_W, p.beta_G, kind, p1, p2, rng)
    finally:
        _kernels.draw_period, _kernels.floyd_sample = saved


def bfs_compiled(p, rng):
    kind, p1, p2 = p.period.code
    return _kernels.bfs_multi(p.n, p.m, p.beta_W, p.beta_G, kind, p1, p2, rng)


def chain(p, rng):
    return _chain.chain_multi(p.n, p.m, p.beta_W, p.beta_G, p.period, rng)


def bench(fn, p, reps, seed):
    fn(p, np.random.default_rng(seed))  # warm-up / compile
    t0 = time.perf_counter()
    for i in range(reps):
        fn(p, np.random.default_rng([seed, i]))
    return (time.perf_counter() - t0) / reps


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    engines = [("chain (numpy)", chain), ("bfs (interpreted)", bfs_interpreted)]
    if NUMBA_ENABLED:
        engines.insert(0, ("bfs (numba)", bfs_compiled))
    print(f"{'n':>6} {'m':>6}  {'engine':<18} {'ms/replicate':>12}")
    for n, m in CASES:
        p = ModelParams.from_lambdas(n, m, 2.0, 6.0, Exponential(1.0))
        for name, fn in engines:
            if fn is bfs_interpreted and n * (m + 1) > INTERPRETED_MAX:
                continue
            dt = bench(fn, p, args.reps, args.seed)
            print(f"{n:>6} {m:>6}  {name:<18} {1e3 * dt:>12.2f}")


if __name__ == "__main__":
    main()

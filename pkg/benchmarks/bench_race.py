"""Time the compiled and numpy race kernels on the towed five-pool split.

    python benchmarks/bench_race.py --trials 1000000 --repeat 3
"""

import argparse
import time

import numpy as np

from minetactics import fork
from minetactics.fork import apply_towing, fig1_split, race_winners


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    s = apply_towing(fig1_split(towing=True))
    backends = ["numpy"] + (["cython"] if fork._race_c is not None else [])
    print(f"trials={args.trials} repeat={args.repeat} default backend={fork.BACKEND}")
    print(f"{'backend':>8} {'delay':>6} {'seconds':>9} {'Mtrials/s':>10}  P(lower)")
    ref = {}
    for delay in (None, 2.0):
        for be in backends:
            sec, winners = best_of(lambda: race_winners(s, args.trials, args.seed, delay, backend=be), args.repeat)
            p = np.mean(winners == s.branches.index("lower"))
            print(f"{be:>8} {str(delay):>6} {sec:9.3f} {args.trials / sec / 1e6:10.2f}  {p:.5f}")
            if delay in ref and not np.array_equal(ref[delay], winners):
                print("   !! backends disagree")
            ref.setdefault(delay, winners)


if __name__ == "__main__":
    main()

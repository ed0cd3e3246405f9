"""Vectorised numpy implementation of the fork-race kernel.

Used when the compiled ``_race`` extension is unavailable. Draw-for-draw
identical to the Cython kernel: both derive every exponential variate from a
counter-based SplitMix64 stream,

    key(trial)      = mix(seed + GOLDEN * (trial + 1))
    bits(trial, s)  = mix(key(trial) + GOLDEN * (s + 1)),   s = round * n_pools + pool
    u               = ((bits >> 11) + 0.5) / 2**53
    time            = -log(u) / rate

so any trial's outcome depends only on (seed, trial index), never on the
batch it was computed in.
"""

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))
_INV53 = 2.0 ** -53
CHUNK = 1 << 16


def _mix(z):
    z = z ^ (z >> _S30)
    z = z * _M1
    z = z ^ (z >> _S27)
    z = z * _M2
    return z ^ (z >> _S31)


def race_winners(rates, branch_of, n_branches, seed, start_trial, n_trials, delay, round_cap):
    """Winning branch index for trials ``start_trial .. start_trial + n_trials - 1``.

    ``delay < 0`` disables the tie window.
    """
    rates = np.ascontiguousarray(rates, dtype=np.float64)
    branch_of = np.ascontiguousarray(branch_of, dtype=np.int64)
    n_pools = rates.shape[0]
    seed = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    out = np.empty(n_trials, dtype=np.int32)
    live = [p for p in range(n_pools) if rates[p] > 0]
    with np.errstate(over="ignore"):
        for lo in range(0, n_trials, CHUNK):
            hi = min(lo + CHUNK, n_trials)
            trial = np.arange(start_trial + lo + 1, start_trial + hi + 1, dtype=np.uint64)
            keys = _mix(seed + GOLDEN * trial)
            idx = np.arange(hi - lo)
            for rnd in range(round_cap):
                k = keys[idx]
                best = np.full((idx.size, n_branches), np.inf)
                for p in live:
                    bits = _mix(k + GOLDEN * np.uint64(rnd * n_pools + p + 1))
                    u = ((bits >> _S11).astype(np.float64) + 0.5) * _INV53
                    t = -np.log(u) / rates[p]
                    b = branch_of[p]
                    np.minimum(best[:, b], t, out=best[:, b])
                first = np.argmin(best, axis=1)
                if n_branches > 1:
                    two = np.partition(best, 1, axis=1)
                    gap = two[:, 1] - two[:, 0]
                else:
                    gap = np.full(idx.size, np.inf)
                if delay < 0 or rnd == round_cap - 1:
                    done = np.ones(idx.size, dtype=bool)
                else:
                    done = gap >= delay
                out[lo + idx[done]] = first[done]
                idx = idx[~done]
                if idx.size == 0:
                    break
    return out

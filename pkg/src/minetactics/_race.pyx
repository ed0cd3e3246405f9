# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled fork-race kernel; see ``_race_py`` for the random-stream layout."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, INFINITY
from libc.stdint cimport uint64_t, int64_t, int32_t

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t _mix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def race_winners(rates, branch_of, Py_ssize_t n_branches, seed, Py_ssize_t start_trial,
                 Py_ssize_t n_trials, double delay, Py_ssize_t round_cap):
    cdef double[::1] r = np.ascontiguousarray(rates, dtype=np.float64)
    cdef int64_t[::1] br = np.ascontiguousarray(branch_of, dtype=np.int64)
    cdef Py_ssize_t n_pools = r.shape[0]
    cdef uint64_t s = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    out_arr = np.empty(n_trials, dtype=np.int32)
    cdef int32_t[::1] out = out_arr
    cdef double[::1] best = np.empty(max(n_branches, 1), dtype=np.float64)
    cdef Py_ssize_t i, p, b, rnd, first
    cdef uint64_t key, bits
    cdef double t, u, lo1, lo2

    with nogil:
        for i in range(n_trials):
            key = _mix(s + GOLDEN * <uint64_t>(start_trial + i + 1))
            for rnd in range(round_cap):
                for b in range(n_branches):
                    best[b] = INFINITY
                for p in range(n_pools):
                    if r[p] > 0:
                        bits = _mix(key + GOLDEN * <uint64_t>(rnd * n_pools + p + 1))
                        u = (<double>(bits >> 11) + 0.5) * 1.1102230246251565e-16
                        t = -log(u) / r[p]
                        if t < best[br[p]]:
                            best[br[p]] = t
                first = 0
                lo1 = best[0]
                for b in range(1, n_branches):
                    if best[b] < lo1:
                        lo1 = best[b]
                        first = b
                lo2 = INFINITY
                for b in range(n_branches):
                    if b != first and best[b] < lo2:
                        lo2 = best[b]
                if delay < 0 or rnd == round_cap - 1 or lo2 - lo1 >= delay:
                    break
            out[i] = <int32_t>first
    return out_arr

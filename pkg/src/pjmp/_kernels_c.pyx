# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampling core: the C twin of ``_kernels_py``.

Same algorithms, same xoshiro256++/splitmix64 stream, same draw order;
a given (master seed, path index) yields bit-identical trajectories in
both backends.  See the pure module for the full RNG contract.
"""

from libc.math cimport log

import numpy as np

BACKEND = "c"

cdef extern from *:
    """
    #include <stdint.h>
    #define PJ_GAMMA 0x9E3779B97F4A7C15ULL
    static inline uint64_t pj_rotl(uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    static inline uint64_t pj_mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    """
    unsigned long long PJ_GAMMA
    unsigned long long pj_rotl(unsigned long long x, int k) nogil
    unsigned long long pj_mix(unsigned long long z) nogil

cdef struct RngState:
    unsigned long long s0
    unsigned long long s1
    unsigned long long s2
    unsigned long long s3


cdef inline void rng_init(RngState *r, unsigned long long master_seed,
                          unsigned long long path_id) noexcept nogil:
    cdef unsigned long long base = master_seed + 4ULL * path_id * PJ_GAMMA
    r.s0 = pj_mix(base + 1ULL * PJ_GAMMA)
    r.s1 = pj_mix(base + 2ULL * PJ_GAMMA)
    r.s2 = pj_mix(base + 3ULL * PJ_GAMMA)
    r.s3 = pj_mix(base + 4ULL * PJ_GAMMA)
    if r.s0 == 0 and r.s1 == 0 and r.s2 == 0 and r.s3 == 0:
        r.s0 = PJ_GAMMA


cdef inline unsigned long long rng_next_u64(RngState *r) noexcept nogil:
    cdef unsigned long long tmp = r.s0 + r.s3
    cdef unsigned long long result = pj_rotl(tmp, 23) + r.s0
    cdef unsigned long long t = r.s1 << 17
    r.s2 ^= r.s0
    r.s3 ^= r.s1
    r.s1 ^= r.s2
    r.s0 ^= r.s3
    r.s2 ^= t
    r.s3 = pj_rotl(r.s3, 45)
    return result


cdef inline double rng_next_double(RngState *r) noexcept nogil:
    return <double>(rng_next_u64(r) >> 11) * 1.1102230246251565e-16


def gillespie_sample(double[::1] totals, double[:, ::1] cumrates,
                     long long[:, ::1] targets, long long x0,
                     double[::1] times, long long n_paths,
                     unsigned long long master_seed, long long path_offset,
                     long long[:, ::1] out):
    """States at the given nondecreasing times for n_paths Gillespie paths."""
    cdef Py_ssize_t n_times = times.shape[0]
    cdef Py_ssize_t n_neurons = cumrates.shape[1]
    cdef Py_ssize_t k, ti, j
    cdef long long state
    cdef double t, t_next, tr, target_u
    cdef RngState rng
    with nogil:
        for k in range(n_paths):
            rng_init(&rng, master_seed, <unsigned long long>(path_offset + k))
            state = x0
            t = 0.0
            ti = 0
            while ti < n_times:
                tr = totals[state]
                t_next = t - log(1.0 - rng_next_double(&rng)) / tr
                while ti < n_times and times[ti] < t_next:
                    out[k, ti] = state
                    ti += 1
                if ti >= n_times:
                    break
                target_u = rng_next_double(&rng) * tr
                j = 0
                while j < n_neurons - 1 and target_u >= cumrates[state, j]:
                    j += 1
                state = targets[state, j]
                t = t_next
    return np.asarray(out)


def thinning_sample(double[:, ::1] rates, long long[:, ::1] targets,
                    double phi_max, long long x0, double[::1] times,
                    long long n_paths, unsigned long long master_seed,
                    long long path_offset, long long[:, ::1] out):
    """States at the given times for n_paths thinning paths."""
    cdef Py_ssize_t n_times = times.shape[0]
    cdef Py_ssize_t n_neurons = rates.shape[1]
    cdef Py_ssize_t k, ti, i, i_star
    cdef long long state
    cdef double t_event
    cdef double tau[64]
    cdef RngState rng
    if n_neurons > 64:
        raise ValueError("compiled thinning sampler supports at most 64 neurons")
    with nogil:
        for k in range(n_paths):
            rng_init(&rng, master_seed, <unsigned long long>(path_offset + k))
            state = x0
            ti = 0
            for i in range(n_neurons):
                tau[i] = -log(1.0 - rng_next_double(&rng)) / phi_max
            while ti < n_times:
                i_star = 0
                for i in range(1, n_neurons):
                    if tau[i] < tau[i_star]:
                        i_star = i
                t_event = tau[i_star]
                while ti < n_times and times[ti] < t_event:
                    out[k, ti] = state
                    ti += 1
                if ti >= n_times:
                    break
                if rng_next_double(&rng) * phi_max <= rates[state, i_star]:
                    state = targets[state, i_star]
                tau[i_star] = t_event - log(1.0 - rng_next_double(&rng)) / phi_max
    return np.asarray(out)


def window_events(double[::1] totals, double[:, ::1] cumrates,
                  long long[:, ::1] targets, long long x0, double window,
                  long long n_paths, unsigned long long master_seed,
                  long long path_offset, long long[::1] counts,
                  long long[::1] first):
    """Count Gillespie events in [0, window] per path (capped at 2) and the
    first spiking neuron (-1 when no event)."""
    cdef Py_ssize_t n_neurons = cumrates.shape[1]
    cdef Py_ssize_t k, j
    cdef long long state, count, first_j
    cdef double t, target_u
    cdef RngState rng
    with nogil:
        for k in range(n_paths):
            rng_init(&rng, master_seed, <unsigned long long>(path_offset + k))
            state = x0
            t = 0.0
            count = 0
            first_j = -1
            while True:
                t = t - log(1.0 - rng_next_double(&rng)) / totals[state]
                if t > window:
                    break
                target_u = rng_next_double(&rng) * totals[state]
                j = 0
                while j < n_neurons - 1 and target_u >= cumrates[state, j]:
                    j += 1
                if count == 0:
                    first_j = j
                count += 1
                if count >= 2:
                    break
                state = targets[state, j]
            counts[k] = count
            first[k] = first_j
    return np.asarray(counts), np.asarray(first)


def occupation(double[::1] totals, double[:, ::1] cumrates,
               long long[:, ::1] targets, long long x0, long long n_jumps,
               unsigned long long master_seed, double[::1] occ):
    """Sojourn times over one Gillespie path of n_jumps events."""
    cdef Py_ssize_t n_neurons = cumrates.shape[1]
    cdef Py_ssize_t j
    cdef long long state, k
    cdef double total, dt, target_u
    cdef RngState rng
    rng_init(&rng, master_seed, 0)
    state = x0
    total = 0.0
    with nogil:
        for k in range(n_jumps):
            dt = -log(1.0 - rng_next_double(&rng)) / totals[state]
            occ[state] += dt
            total += dt
            target_u = rng_next_double(&rng) * totals[state]
            j = 0
            while j < n_neurons - 1 and target_u >= cumrates[state, j]:
                j += 1
            state = targets[state, j]
    return total, state


def gillespie_events(double[::1] totals, double[:, ::1] cumrates,
                     long long[:, ::1] targets, long long x0, double horizon,
                     unsigned long long master_seed, long long path_id,
                     double[::1] ev_times, long long[::1] ev_spikers,
                     long long[::1] ev_states):
    """Full event list of one Gillespie path on [0, horizon]."""
    cdef Py_ssize_t cap = ev_times.shape[0]
    cdef Py_ssize_t n_neurons = cumrates.shape[1]
    cdef Py_ssize_t j
    cdef long long state, n
    cdef double t, target_u
    cdef RngState rng
    rng_init(&rng, master_seed, <unsigned long long>path_id)
    state = x0
    t = 0.0
    n = 0
    while True:
        t = t - log(1.0 - rng_next_double(&rng)) / totals[state]
        if t > horizon:
            return n
        if n >= cap:
            return -1
        target_u = rng_next_double(&rng) * totals[state]
        j = 0
        while j < n_neurons - 1 and target_u >= cumrates[state, j]:
            j += 1
        state = targets[state, j]
        ev_times[n] = t
        ev_spikers[n] = j
        ev_states[n] = state
        n += 1


def thinning_events(double[:, ::1] rates, long long[:, ::1] targets,
                    double phi_max, long long x0, double horizon,
                    unsigned long long master_seed, long long path_id,
                    double[::1] ev_times, long long[::1] ev_spikers,
                    long long[::1] ev_states):
    """Full accepted-event list of one thinning path on [0, horizon]."""
    cdef Py_ssize_t cap = ev_times.shape[0]
    cdef Py_ssize_t n_neurons = rates.shape[1]
    cdef Py_ssize_t i, i_star
    cdef long long state, n
    cdef double t_event
    cdef double tau[64]
    cdef RngState rng
    if n_neurons > 64:
        raise ValueError("compiled thinning sampler supports at most 64 neurons")
    rng_init(&rng, master_seed, <unsigned long long>path_id)
    state = x0
    n = 0
    for i in range(n_neurons):
        tau[i] = -log(1.0 - rng_next_double(&rng)) / phi_max
    while True:
        i_star = 0
        for i in range(1, n_neurons):
            if tau[i] < tau[i_star]:
                i_star = i
        t_event = tau[i_star]
        if t_event > horizon:
            return n
        if rng_next_double(&rng) * phi_max <= rates[state, i_star]:
            state = targets[state, i_star]
            if n >= cap:
                return -1
            ev_times[n] = t_event
            ev_spikers[n] = i_star
            ev_states[n] = state
            n += 1
        tau[i_star] = t_event - log(1.0 - rng_next_double(&rng)) / phi_max

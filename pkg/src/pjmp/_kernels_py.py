"""Pure-Python sampling core: the reference twin of ``_kernels_c``.

Both backends implement the exact same algorithms over the exact same
random stream, so a given (master seed, path index) produces
bit-identical trajectories whichever backend is active and however the
paths are chunked across threads.

Random numbers come from xoshiro256++ seeded per path by splitmix64 in
counter mode: word w of path k mixes ``master + (4k + w + 1) * GAMMA``
(mod 2^64), so path streams are disjoint and depend only on the master
seed and the absolute path index.  Doubles are ``(x >> 11) * 2**-53``;
waiting times are ``-log(1 - u) / rate``.

Events are spikes: a neuron firing whose jump may leave the state
unchanged (spiker already at 0, all increments capped) still counts as
an event.  Sampling at times follows the right-continuous convention
(the state at time t includes any event at exactly t).
"""

from __future__ import annotations

import math

MASK = 0xFFFFFFFFFFFFFFFF
GAMMA = 0x9E3779B97F4A7C15

BACKEND = "python"


def _mix(z: int) -> int:
    """splitmix64 output for counter value z."""
    z &= MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return (z ^ (z >> 31)) & MASK


class Xoshiro256pp:
    """xoshiro256++ stream for one path."""

    __slots__ = ("s0", "s1", "s2", "s3")

    def __init__(self, master_seed: int, path_id: int):
        base = (master_seed + 4 * path_id * GAMMA) & MASK
        self.s0 = _mix(base + 1 * GAMMA)
        self.s1 = _mix(base + 2 * GAMMA)
        self.s2 = _mix(base + 3 * GAMMA)
        self.s3 = _mix(base + 4 * GAMMA)
        if self.s0 == self.s1 == self.s2 == self.s3 == 0:
            self.s0 = GAMMA

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self.s0, self.s1, self.s2, self.s3
        tmp = (s0 + s3) & MASK
        result = (((tmp << 23) | (tmp >> 41)) + s0) & MASK
        t = (s1 << 17) & MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & MASK
        self.s0, self.s1, self.s2, self.s3 = s0, s1, s2, s3
        return result

    def next_double(self) -> float:
        """Uniform in [0, 1)."""
        return (self.next_u64() >> 11) * 1.1102230246251565e-16  # 2**-53


def gillespie_sample(totals, cumrates, targets, x0, times, n_paths, master_seed,
                     path_offset, out):
    """States at the given nondecreasing times for n_paths Gillespie paths.

    out[k, ti] receives the state index of path (path_offset + k) at
    times[ti].
    """
    n_times = len(times)
    n_neurons = cumrates.shape[1]
    totals_l = totals.tolist()
    cum_l = cumrates.tolist()
    targets_l = targets.tolist()
    times_l = list(times)
    log = math.log
    for k in range(n_paths):
        rng = Xoshiro256pp(master_seed, path_offset + k)
        nd = rng.next_double
        state = x0
        t = 0.0
        ti = 0
        row_out = out[k]
        while ti < n_times:
            tr = totals_l[state]
            t_next = t - log(1.0 - nd()) / tr
            while ti < n_times and times_l[ti] < t_next:
                row_out[ti] = state
                ti += 1
            if ti >= n_times:
                break
            target_u = nd() * tr
            row = cum_l[state]
            j = 0
            while j < n_neurons - 1 and target_u >= row[j]:
                j += 1
            state = targets_l[state][j]
            t = t_next
    return out


def thinning_sample(rates, targets, phi_max, x0, times, n_paths, master_seed,
                    path_offset, out):
    """States at the given times for n_paths thinning paths.

    Each neuron carries an independent dominating Poisson stream of rate
    phi_max; a point for neuron i at time s is accepted as a spike iff
    u * phi_max <= phi(x^i_{s-}).
    """
    n_times = len(times)
    n_neurons = rates.shape[1]
    rates_l = rates.tolist()
    targets_l = targets.tolist()
    times_l = list(times)
    log = math.log
    for k in range(n_paths):
        rng = Xoshiro256pp(master_seed, path_offset + k)
        nd = rng.next_double
        state = x0
        ti = 0
        row_out = out[k]
        tau = [0.0] * n_neurons
        for i in range(n_neurons):
            tau[i] = -log(1.0 - nd()) / phi_max
        while ti < n_times:
            i_star = 0
            for i in range(1, n_neurons):
                if tau[i] < tau[i_star]:
                    i_star = i
            t_event = tau[i_star]
            while ti < n_times and times_l[ti] < t_event:
                row_out[ti] = state
                ti += 1
            if ti >= n_times:
                break
            if nd() * phi_max <= rates_l[state][i_star]:
                state = targets_l[state][i_star]
            tau[i_star] = t_event - log(1.0 - nd()) / phi_max
    return out


def window_events(totals, cumrates, targets, x0, window, n_paths, master_seed,
                  path_offset, counts, first):
    """Count Gillespie events in [0, window] per path, capped at 2, and the
    first spiking neuron (-1 when no event)."""
    n_neurons = cumrates.shape[1]
    totals_l = totals.tolist()
    cum_l = cumrates.tolist()
    targets_l = targets.tolist()
    log = math.log
    for k in range(n_paths):
        rng = Xoshiro256pp(master_seed, path_offset + k)
        nd = rng.next_double
        state = x0
        t = 0.0
        count = 0
        first_j = -1
        while True:
            t = t - log(1.0 - nd()) / totals_l[state]
            if t > window:
                break
            target_u = nd() * totals_l[state]
            row = cum_l[state]
            j = 0
            while j < n_neurons - 1 and target_u >= row[j]:
                j += 1
            if count == 0:
                first_j = j
            count += 1
            if count >= 2:
                break
            state = targets_l[state][j]
        counts[k] = count
        first[k] = first_j
    return counts, first


def occupation(totals, cumrates, targets, x0, n_jumps, master_seed, occ):
    """Accumulate sojourn times over one Gillespie path of n_jumps events.

    Returns (total elapsed time, final state index).
    """
    n_neurons = cumrates.shape[1]
    totals_l = totals.tolist()
    cum_l = cumrates.tolist()
    targets_l = targets.tolist()
    occ_l = occ.tolist()
    log = math.log
    rng = Xoshiro256pp(master_seed, 0)
    nd = rng.next_double
    state = x0
    total = 0.0
    for _ in range(n_jumps):
        dt = -log(1.0 - nd()) / totals_l[state]
        occ_l[state] += dt
        total += dt
        target_u = nd() * totals_l[state]
        row = cum_l[state]
        j = 0
        while j < n_neurons - 1 and target_u >= row[j]:
            j += 1
        state = targets_l[state][j]
    occ[:] = occ_l
    return total, state


def gillespie_events(totals, cumrates, targets, x0, horizon, master_seed,
                     path_id, ev_times, ev_spikers, ev_states):
    """Full event list of one Gillespie path on [0, horizon].

    Fills the preallocated arrays and returns the number of events;
    returns -1 if the arrays are too small.
    """
    cap = len(ev_times)
    n_neurons = cumrates.shape[1]
    log = math.log
    rng = Xoshiro256pp(master_seed, path_id)
    state = x0
    t = 0.0
    n = 0
    while True:
        t = t - log(1.0 - rng.next_double()) / totals[state]
        if t > horizon:
            return n
        if n >= cap:
            return -1
        target_u = rng.next_double() * totals[state]
        row = cumrates[state]
        j = 0
        while j < n_neurons - 1 and target_u >= row[j]:
            j += 1
        state = targets[state, j]
        ev_times[n] = t
        ev_spikers[n] = j
        ev_states[n] = state
        n += 1


def thinning_events(rates, targets, phi_max, x0, horizon, master_seed,
                    path_id, ev_times, ev_spikers, ev_states):
    """Full accepted-event list of one thinning path on [0, horizon]."""
    cap = len(ev_times)
    n_neurons = rates.shape[1]
    log = math.log
    rng = Xoshiro256pp(master_seed, path_id)
    state = x0
    n = 0
    tau = [0.0] * n_neurons
    for i in range(n_neurons):
        tau[i] = -log(1.0 - rng.next_double()) / phi_max
    while True:
        i_star = 0
        for i in range(1, n_neurons):
            if tau[i] < tau[i_star]:
                i_star = i
        t_event = tau[i_star]
        if t_event > horizon:
            return n
        if rng.next_double() * phi_max <= rates[state, i_star]:
            state = targets[state, i_star]
            if n >= cap:
                return -1
            ev_times[n] = t_event
            ev_spikers[n] = i_star
            ev_states[n] = state
            n += 1
        tau[i_star] = t_event - log(1.0 - rng.next_double()) / phi_max
    return n

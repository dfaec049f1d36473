"""Trajectory sampling for the neuron network: Gillespie and thinning.

Both samplers draw per-path random streams derived from the master seed
by counter-based splitting, so results are reproducible bit for bit for
a fixed (parameters, seed) regardless of how paths are chunked over
threads, and identical between the compiled and pure sampling cores.

Gillespie draws Exponential(phi_bar(x)) waiting times and picks the
spiker proportionally to phi(x^j).  Thinning runs one dominating
Poisson stream per neuron at the exact rate max phi over [0, cap] and
accepts a point for neuron i iff u * phi_max <= phi(x^i) at the current
state.  Spikes whose jump leaves the state unchanged still count as
events.  States at requested times follow the right-continuous
convention.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend
from .model import Config, NetworkParams
from .statespace import StateSpace, enumerate_reachable

__all__ = [
    "SimConfig",
    "ModelTables",
    "Trajectory",
    "SamplerDivergence",
    "simulate_path",
    "sample_at_times",
    "sample_state_indices",
    "window_event_stats",
    "occupation_run",
    "cross_validate_samplers",
]

_U64 = 0xFFFFFFFFFFFFFFFF
SAMPLERS = ("gillespie", "thinning")


@dataclass(frozen=True)
class SimConfig:
    """Sampler settings: master seed, number of paths, horizon, kind."""

    seed: int
    n_paths: int
    horizon: float
    sampler: str = "gillespie"

    def __post_init__(self):
        if self.sampler not in SAMPLERS:
            raise ValueError(f"sampler must be one of {SAMPLERS}")
        if self.n_paths < 1:
            raise ValueError("n_paths must be positive")
        if self.horizon < 0:
            raise ValueError("horizon must be nonnegative")
        object.__setattr__(self, "seed", self.seed & _U64)


@dataclass(frozen=True)
class ModelTables:
    """Flat float/int tables the sampling cores consume.

    Built once per state space; ``totals`` equals the last cumulative
    column so waiting times and spiker selection use the same float sum.
    """

    space: StateSpace
    rates: np.ndarray
    cumrates: np.ndarray
    totals: np.ndarray
    targets: np.ndarray
    phi_max: float

    @staticmethod
    def from_space(space: StateSpace) -> "ModelTables":
        p = space.params
        n, nn = len(space), p.n_neurons
        rates = np.empty((n, nn))
        for s, x in enumerate(space.states):
            for j in range(nn):
                rates[s, j] = float(p.rate_of_level(x.levels[j]))
        cumrates = np.cumsum(rates, axis=1)
        totals = np.ascontiguousarray(cumrates[:, -1])
        targets = np.ascontiguousarray(space.targets.T, dtype=np.int64)
        phi_max = float(p.intensity.max_rate(p.cap))
        return ModelTables(
            space=space,
            rates=np.ascontiguousarray(rates),
            cumrates=np.ascontiguousarray(cumrates),
            totals=totals,
            targets=targets,
            phi_max=phi_max,
        )


@dataclass(frozen=True)
class Trajectory:
    """One sampled path: initial configuration, event times and spikers,
    and the configuration after each event."""

    x0: Config
    horizon: float
    times: np.ndarray
    spikers: np.ndarray
    states: tuple

    @property
    def n_events(self) -> int:
        return len(self.times)

    def state_at(self, t: float) -> Config:
        """Right-continuous state at time t in [0, horizon]."""
        if not 0 <= t <= self.horizon:
            raise ValueError(f"time {t} outside [0, {self.horizon}]")
        k = int(np.searchsorted(self.times, t, side="right"))
        return self.x0 if k == 0 else self.states[k - 1]


def _tables_for(x0: Config, p: NetworkParams, space: StateSpace | None) -> ModelTables:
    if space is None:
        space = enumerate_reachable(p, x0)
    return ModelTables.from_space(space)


def simulate_path(
    x0: Config,
    sim: SimConfig,
    p: NetworkParams,
    space: StateSpace | None = None,
    path_id: int = 0,
) -> Trajectory:
    """Sample one full trajectory on [0, horizon] (events and states)."""
    tables = _tables_for(x0, p, space)
    backend = _backend.active
    s0 = tables.space.state_index(x0)
    # mean event count ~ horizon * max total rate; grow on overflow
    cap = max(64, int(4 * sim.horizon * float(np.max(tables.totals))) + 64)
    while True:
        ev_times = np.empty(cap)
        ev_spikers = np.empty(cap, dtype=np.int64)
        ev_states = np.empty(cap, dtype=np.int64)
        if sim.sampler == "gillespie":
            n = backend.gillespie_events(
                tables.totals, tables.cumrates, tables.targets, s0,
                float(sim.horizon), sim.seed, path_id,
                ev_times, ev_spikers, ev_states,
            )
        else:
            n = backend.thinning_events(
                tables.rates, tables.targets, tables.phi_max, s0,
                float(sim.horizon), sim.seed, path_id,
                ev_times, ev_spikers, ev_states,
            )
        if n >= 0:
            break
        cap *= 4
    states = tuple(tables.space.states[int(si)] for si in ev_states[:n])
    return Trajectory(
        x0=x0,
        horizon=float(sim.horizon),
        times=ev_times[:n].copy(),
        spikers=ev_spikers[:n].copy(),
        states=states,
    )


def _run_chunked(fn, n_paths: int, n_threads: int):
    """Apply fn(path_offset, count) over a disjoint partition of paths.
    Results are written into caller-provided slices, so the partition and
    execution order never affect the output."""
    if n_threads <= 1:
        fn(0, n_paths)
        return
    chunk = (n_paths + n_threads - 1) // n_threads
    jobs = [(off, min(chunk, n_paths - off)) for off in range(0, n_paths, chunk)]
    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        futures = [pool.submit(fn, off, cnt) for off, cnt in jobs]
        for fut in futures:
            fut.result()


def sample_state_indices(
    x0: Config,
    times,
    sim: SimConfig,
    p: NetworkParams,
    space: StateSpace | None = None,
    n_threads: int = 1,
) -> np.ndarray:
    """State indices at the given nondecreasing times, one row per path."""
    tables = _tables_for(x0, p, space)
    times_arr = np.ascontiguousarray(times, dtype=np.float64)
    if len(times_arr) and (np.any(np.diff(times_arr) < 0) or times_arr[0] < 0):
        raise ValueError("sampling times must be nonnegative and nondecreasing")
    backend = _backend.active
    s0 = tables.space.state_index(x0)
    out = np.empty((sim.n_paths, len(times_arr)), dtype=np.int64)

    if sim.sampler == "gillespie":
        def chunk_fn(off, cnt):
            backend.gillespie_sample(
                tables.totals, tables.cumrates, tables.targets, s0,
                times_arr, cnt, sim.seed, off, out[off:off + cnt],
            )
    else:
        def chunk_fn(off, cnt):
            backend.thinning_sample(
                tables.rates, tables.targets, tables.phi_max, s0,
                times_arr, cnt, sim.seed, off, out[off:off + cnt],
            )

    _run_chunked(chunk_fn, sim.n_paths, n_threads)
    return out


def sample_at_times(
    x0: Config,
    times,
    sim: SimConfig,
    p: NetworkParams,
    space: StateSpace | None = None,
    n_threads: int = 1,
) -> list:
    """Configurations at the given times, one list per path."""
    if space is None:
        space = enumerate_reachable(p, x0)
    idx = sample_state_indices(x0, times, sim, p, space, n_threads)
    return [[space.states[int(s)] for s in row] for row in idx]


def window_event_stats(
    x0: Config,
    window: float,
    sim: SimConfig,
    p: NetworkParams,
    space: StateSpace | None = None,
    n_threads: int = 1,
):
    """Per-path Gillespie event count in [0, window] capped at 2, and the
    first spiker (-1 if none).  Used to validate the closed-form no-jump
    and single-spike probabilities."""
    tables = _tables_for(x0, p, space)
    backend = _backend.active
    s0 = tables.space.state_index(x0)
    counts = np.empty(sim.n_paths, dtype=np.int64)
    first = np.empty(sim.n_paths, dtype=np.int64)

    def chunk_fn(off, cnt):
        backend.window_events(
            tables.totals, tables.cumrates, tables.targets, s0,
            float(window), cnt, sim.seed, off,
            counts[off:off + cnt], first[off:off + cnt],
        )

    _run_chunked(chunk_fn, sim.n_paths, n_threads)
    return counts, first


def occupation_run(
    x0: Config,
    n_jumps: int,
    seed: int,
    p: NetworkParams,
    space: StateSpace | None = None,
):
    """One long Gillespie run of n_jumps events; returns (occupation-time
    fractions per state, total elapsed time, final state index)."""
    tables = _tables_for(x0, p, space)
    backend = _backend.active
    s0 = tables.space.state_index(x0)
    occ = np.zeros(len(tables.space))
    total, final_state = backend.occupation(
        tables.totals, tables.cumrates, tables.targets, s0,
        int(n_jumps), seed & _U64, occ,
    )
    return occ / total, total, int(final_state)


@dataclass(frozen=True)
class SamplerDivergence:
    """Total-variation distances between the two samplers' empirical laws
    at one time, and of each against the exact kernel row."""

    t: float
    n_paths: int
    tv_gillespie_thinning: float
    tv_gillespie_kernel: float
    tv_thinning_kernel: float
    noise_floor: float


def _tv(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.abs(a - b).sum())


def cross_validate_samplers(
    x0: Config,
    t: float,
    n_paths: int,
    seed: int,
    p: NetworkParams,
    space: StateSpace | None = None,
    kernel_row: np.ndarray | None = None,
    n_threads: int = 1,
) -> SamplerDivergence:
    """Run both samplers with independent seeds and compare their empirical
    state laws at time t (and the exact kernel row when provided)."""
    if space is None:
        space = enumerate_reachable(p, x0)
    n = len(space)
    laws = {}
    for kind, seed_shift in (("gillespie", 0), ("thinning", 1)):
        sim = SimConfig(seed=(seed + seed_shift) & _U64, n_paths=n_paths,
                        horizon=t, sampler=kind)
        idx = sample_state_indices(x0, [t], sim, p, space, n_threads)
        laws[kind] = np.bincount(idx[:, 0], minlength=n) / n_paths

    noise_floor = float(np.sqrt(n / n_paths))
    tv_gk = tv_tk = float("nan")
    if kernel_row is not None:
        tv_gk = _tv(laws["gillespie"], kernel_row)
        tv_tk = _tv(laws["thinning"], kernel_row)
    return SamplerDivergence(
        t=float(t),
        n_paths=n_paths,
        tv_gillespie_thinning=_tv(laws["gillespie"], laws["thinning"]),
        tv_gillespie_kernel=tv_gk,
        tv_thinning_kernel=tv_tk,
        noise_floor=noise_floor,
    )

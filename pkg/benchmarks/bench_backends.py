"""Throughput comparison of the compiled and pure-Python sampling kernels.

Runs the 2-neuron benchmark network through both backends (when the
compiled one is importable), checks bit-identity of the sampled
marginals, and prints paths/second for each sampler.

Usage: python benchmarks/bench_backends.py [--paths N] [--horizon T]
"""

import argparse
import time

import numpy as np

from pjmp import _backend
from pjmp.model import Config, IntensitySpec, NetworkParams
from pjmp.simulate import ModelTables
from pjmp.statespace import invariant_domain


def benchmark_network():
    p = NetworkParams(
        n_neurons=2,
        cap=2,
        weights=[[0, 1], [1, 0]],
        intensity=IntensitySpec.affine(1, 1),
        delta=1,
    )
    x0 = Config.from_potentials(p, [0, 0])
    return p, invariant_domain(p, x0)


def run_sampler(backend, tables, s0, kind, times, n_paths, seed):
    out = np.empty((n_paths, len(times)), dtype=np.int64)
    t0 = time.perf_counter()
    if kind == "gillespie":
        backend.gillespie_sample(
            tables.totals, tables.cumrates, tables.targets, s0,
            times, n_paths, seed, 0, out,
        )
    else:
        backend.thinning_sample(
            tables.rates, tables.targets, tables.phi_max, s0,
            times, n_paths, seed, 0, out,
        )
    return out, time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--paths", type=int, default=200_000)
    ap.add_argument("--horizon", type=float, default=2.0)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()

    p, dom = benchmark_network()
    tables = ModelTables.from_space(dom)
    s0 = dom.state_index(dom.states[0])
    times = np.ascontiguousarray([args.horizon / 2, args.horizon])

    backends = {"python": _backend.get_backend("python")}
    try:
        backends["c"] = _backend.get_backend("c")
    except ImportError:
        print("compiled backend not available; timing the pure one only")

    print(f"{args.paths} paths, horizon {args.horizon}, "
          f"{len(dom)} states, active backend: {_backend.backend_name()}")
    print(f"{'sampler':<12} {'backend':<8} {'seconds':>9} {'paths/s':>12}")
    results = {}
    for kind in ("gillespie", "thinning"):
        for name, backend in backends.items():
            out, dt = run_sampler(
                backend, tables, s0, kind, times, args.paths, args.seed
            )
            results[(kind, name)] = out
            print(f"{kind:<12} {name:<8} {dt:>9.3f} {args.paths / dt:>12.0f}")
        if len(backends) == 2:
            same = np.array_equal(
                results[(kind, "python")], results[(kind, "c")]
            )
            print(f"{kind:<12} marginals bit-identical across backends: {same}")
            if not same:
                raise SystemExit(1)


if __name__ == "__main__":
    main()

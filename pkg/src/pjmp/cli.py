"""Command-line entry point.

Subcommands: statespace | kernel | ratios | verify | simulate |
concentration | empirical | run.  Global flags --config/--seed/--out/
--threads apply to every subcommand; exit status 0 iff the requested
suite passed.  All CSV output is deterministic for a fixed (config,
seed) regardless of thread count.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .harness import ExperimentConfig, run, verify_checks
from .model import Config
from .semigroup import kernel, kernel_ratios
from .simulate import SimConfig, simulate_path
from .statespace import build_rate_matrix, enumerate_reachable, invariant_domain


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pjmp",
        description="Finite-state spiking-network jump process toolkit",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True,
                        help="experiment/network JSON file")
    common.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    common.add_argument("--out", default=None, help="output file or directory")
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads for sampling")

    sub = ap.add_subparsers(dest="cmd", required=True)
    sub.add_parser("statespace", parents=[common],
                   help="dump states and jump edges as CSV")

    k = sub.add_parser("kernel", parents=[common],
                       help="transition matrix at one time as CSV")
    k.add_argument("--t", type=float, required=True)

    sub.add_parser("ratios", parents=[common],
                   help="kernel-ratio constants as CSV + JSON")

    v = sub.add_parser("verify", parents=[common],
                       help="inequality verification suites")
    v.add_argument("--check", default="all",
                   choices=["mlsi", "standard_form", "sweep", "denom",
                            "explip", "cylindrical", "all"])
    v.add_argument("--t-grid", default="0.25,0.5,1,2",
                   help="comma-separated times")

    s = sub.add_parser("simulate", parents=[common],
                       help="sample trajectories to CSV")
    s.add_argument("--paths", type=int, default=1)
    s.add_argument("--horizon", type=float, default=1.0)
    s.add_argument("--sampler", default="gillespie",
                   choices=["gillespie", "thinning"])
    s.add_argument("--at", default=None,
                   help="comma-separated sampling times (default: events)")

    sub.add_parser("concentration", parents=[common],
                   help="single-time concentration experiment")
    e = sub.add_parser("empirical", parents=[common],
                       help="empirical-average concentration experiment")
    e.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="override the exponent scale (default 1)")
    sub.add_parser("run", parents=[common],
                   help="dispatch the experiment named in the config")
    return ap


def _load(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(args.config)
    if args.seed is not None:
        doc = dict(cfg.raw)
        doc["seed"] = args.seed
        cfg = ExperimentConfig.from_dict(doc)
    if getattr(args, "lam", None) is not None:
        doc = dict(cfg.raw)
        doc["lambda"] = args.lam
        cfg = ExperimentConfig.from_dict(doc)
    return cfg


def _domain(cfg: ExperimentConfig):
    p = cfg.params
    if cfg.x0_potentials is not None:
        x0 = Config.from_potentials(p, cfg.x0_potentials)
    else:
        x0 = Config.from_potentials(p, [0] * p.n_neurons)
    return x0, invariant_domain(p, x0)


def _out_path(args, default_name: str) -> Path:
    if args.out is None:
        return Path(default_name)
    out = Path(args.out)
    if out.suffix == "" and not out.name.endswith(".csv"):
        out.mkdir(parents=True, exist_ok=True)
        return out / default_name
    return out


def _cmd_statespace(args) -> int:
    cfg = _load(args)
    _, dom = _domain(cfg)
    p = cfg.params
    path = _out_path(args, "statespace.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["state_index", "potentials"]
        for j in range(p.n_neurons):
            header += [f"target_index_{j}", f"rate_{j}"]
        w.writerow(header)
        for s, x in enumerate(dom.states):
            row = [s, ";".join(str(v) for v in x.potentials)]
            for j in range(p.n_neurons):
                row.append(int(dom.targets[j, s]))
                row.append(repr(float(p.rate_of_level(x.levels[j]))))
            w.writerow(row)
    print(f"wrote {path} ({len(dom)} states)")
    return 0


def _cmd_kernel(args) -> int:
    cfg = _load(args)
    _, dom = _domain(cfg)
    rm = build_rate_matrix(dom)
    K = kernel(rm, args.t).matrix
    path = _out_path(args, "kernel.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["state_index"] + [f"s{j}" for j in range(len(dom))])
        for s in range(len(dom)):
            w.writerow([s] + [repr(float(v)) for v in K[s]])
    print(f"wrote {path} (t={args.t:g})")
    return 0


def _cmd_ratios(args) -> int:
    cfg = _load(args)
    _, dom = _domain(cfg)
    rm = build_rate_matrix(dom)
    rr = kernel_ratios(rm)
    path = _out_path(args, "ratios.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["quantity", "value"])
        for name in ("c11_hat", "c12_hat", "t_hat", "t0_global", "e_min"):
            w.writerow([name, repr(float(getattr(rr, name)))])
    jpath = path.with_suffix(".json")
    with open(jpath, "w") as fh:
        json.dump({
            "c11_hat": rr.c11_hat,
            "c12_hat": rr.c12_hat,
            "c11_argmax": list(rr.c11_argmax),
            "c12_argmax": list(rr.c12_argmax),
            "t_hat": rr.t_hat,
            "t0_global": rr.t0_global,
            "e_min": rr.e_min,
            "t_grid": list(rr.t_grid),
            "u_resolution": rr.u_resolution,
        }, fh, indent=2, sort_keys=True)
    print(f"wrote {path} and {jpath}")
    return 0


def _cmd_verify(args) -> int:
    cfg = _load(args)
    t_grid = tuple(float(v) for v in args.t_grid.split(","))
    out_dir = Path(args.out) if args.out else Path("verify_out")
    passed, artifacts, summary = verify_checks(
        cfg, [args.check], t_grid, out_dir
    )
    for a in artifacts:
        print(f"wrote {a}")
    for name, info in summary["checks"].items():
        print(f"{name}: {'pass' if info['pass'] else 'FAIL'} "
              f"({info['rows']} rows)")
    return 0 if passed else 1


def _cmd_simulate(args) -> int:
    cfg = _load(args)
    p = cfg.params
    if cfg.x0_potentials is not None:
        x0 = Config.from_potentials(p, cfg.x0_potentials)
    else:
        x0 = Config.from_potentials(p, [0] * p.n_neurons)
    # sampling may start from transient states; use the reachable closure
    dom = enumerate_reachable(p, x0)
    seed = cfg.seed
    path = _out_path(args, "simulate.csv")
    sim = SimConfig(seed=seed, n_paths=args.paths, horizon=args.horizon,
                    sampler=args.sampler)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["path_id", "time", "state_index"])
        if args.at is not None:
            times = [float(v) for v in args.at.split(",")]
            from .simulate import sample_state_indices
            idx = sample_state_indices(x0, times, sim, p, dom,
                                       n_threads=args.threads)
            for pid in range(args.paths):
                for t, s in zip(times, idx[pid]):
                    w.writerow([pid, repr(float(t)), int(s)])
        else:
            for pid in range(args.paths):
                traj = simulate_path(x0, sim, p, dom, path_id=pid)
                w.writerow([pid, repr(0.0), int(dom.state_index(x0))])
                for t, s in zip(traj.times, traj.states):
                    w.writerow([pid, repr(float(t)),
                                int(dom.state_index(s))])
    print(f"wrote {path}")
    return 0


def _cmd_experiment(args, experiment: str) -> int:
    cfg = _load(args)
    if cfg.experiment != experiment:
        doc = dict(cfg.raw)
        doc["experiment"] = experiment
        cfg = ExperimentConfig.from_dict(doc)
    out_dir = Path(args.out) if args.out else Path(f"{experiment}_out")
    passed, manifest = run(cfg, out_dir, subcommand=experiment,
                           n_threads=args.threads)
    print(json.dumps(manifest, indent=2, sort_keys=True))
    return 0 if passed else 1


def _cmd_run(args) -> int:
    cfg = _load(args)
    out_dir = Path(args.out) if args.out else Path("run_out")
    passed, manifest = run(cfg, out_dir, subcommand="run",
                           n_threads=args.threads)
    print(json.dumps(manifest, indent=2, sort_keys=True))
    return 0 if passed else 1


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.cmd == "statespace":
            return _cmd_statespace(args)
        if args.cmd == "kernel":
            return _cmd_kernel(args)
        if args.cmd == "ratios":
            return _cmd_ratios(args)
        if args.cmd == "verify":
            return _cmd_verify(args)
        if args.cmd == "simulate":
            return _cmd_simulate(args)
        if args.cmd == "concentration":
            return _cmd_experiment(args, "concentration")
        if args.cmd == "empirical":
            return _cmd_experiment(args, "empirical")
        if args.cmd == "run":
            return _cmd_run(args)
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())

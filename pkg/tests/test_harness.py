"""Experiment configs, tail experiments and the verification driver."""

import json
import math

import numpy as np
import pytest

from pjmp.harness import (
    OBSERVABLES,
    WILSON_Z,
    ExperimentConfig,
    concentration_experiment,
    empirical_experiment,
    get_observable,
    run,
    verify_checks,
    wilson_interval,
)
from pjmp.harness import _config_sha256, _write_concentration_csv


# ---------------------------------------------------------------------------
# observables and intervals

def test_observables_are_one_lipschitz():
    grid = np.linspace(0.0, 2.0, 21)
    for name in OBSERVABLES:
        fn = get_observable(name, 2.0)
        vals = [fn(v) for v in grid]
        assert all(v >= 0 for v in vals)
        for a, fa in zip(grid, vals):
            for b, fb in zip(grid, vals):
                assert abs(fa - fb) <= abs(a - b) + 1e-12


def test_get_observable_rejects_unknown():
    with pytest.raises(ValueError):
        get_observable("cubic", 2.0)


def test_wilson_interval_known_values():
    # recompute from the score-interval formula with independent code
    def oracle(k, n, z=WILSON_Z):
        p = k / n
        c = (p + z * z / (2 * n)) / (1 + z * z / n)
        h = z / (1 + z * z / n) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
        return max(0.0, c - h), min(1.0, c + h)

    for k, n in [(0, 100), (5, 100), (50, 100), (100, 100), (3, 7)]:
        lo, hi = wilson_interval(k, n)
        olo, ohi = oracle(k, n)
        assert lo == pytest.approx(olo, abs=1e-15)
        assert hi == pytest.approx(ohi, abs=1e-15)
        # sandwich up to float noise (lo at k=0 is 0 plus ~1e-18 roundoff)
        assert 0.0 <= lo <= k / n + 1e-12
        assert k / n - 1e-12 <= hi <= 1.0
    with pytest.raises(ValueError):
        wilson_interval(1, 0)


def test_wilson_covers_truth_at_nominal_rate():
    # 95% interval: empirical coverage of a fair coin at n=200 draws
    rng = np.random.default_rng(12)
    p_true = 0.3
    n = 200
    covered = 0
    trials = 400
    for _ in range(trials):
        k = rng.binomial(n, p_true)
        lo, hi = wilson_interval(k, n)
        covered += lo <= p_true <= hi
    assert covered / trials >= 0.90


# ---------------------------------------------------------------------------
# config parsing

def test_config_from_dict_defaults(bench_config_doc):
    cfg = ExperimentConfig.from_dict(bench_config_doc)
    assert cfg.experiment == "verify-all"
    assert cfg.t_values == (1.0,)
    assert cfg.schedule == "auto"
    assert cfg.r_grid == tuple(np.round(np.linspace(0.0, 3.0, 13), 10))
    assert cfg.n_grid == tuple(range(2, 11))
    assert cfg.n_paths == 100000
    assert cfg.seed == 7
    assert cfg.lam == 1.0
    assert cfg.a_param == 0.0


def test_config_rejects_bad_docs(bench_config_doc):
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({})
    bad = dict(bench_config_doc, experiment="fourier")
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict(bad)
    bad = dict(bench_config_doc, r_grid=[-1.0])
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict(bad)
    bad = dict(bench_config_doc, observable="cubic")
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict(bad)
    bad = dict(bench_config_doc, n_grid=[])
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict(bad)


def test_config_from_file(tmp_path, bench_config_doc):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(bench_config_doc))
    cfg = ExperimentConfig.from_file(path)
    assert cfg.seed == 7
    with pytest.raises(FileNotFoundError):
        ExperimentConfig.from_file(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ValueError):
        ExperimentConfig.from_file(bad)


def test_config_sha_is_canonical(bench_config_doc):
    cfg1 = ExperimentConfig.from_dict(dict(bench_config_doc))
    reordered = dict(reversed(list(bench_config_doc.items())))
    cfg2 = ExperimentConfig.from_dict(reordered)
    assert _config_sha256(cfg1) == _config_sha256(cfg2)


# ---------------------------------------------------------------------------
# experiments (reduced path counts; the acceptance module runs them full)

@pytest.fixture(scope="module")
def small_doc(bench_config_doc):
    return dict(bench_config_doc, n_paths=4000,
                r_grid=[0.0, 0.5, 1.0, 2.0])


def test_concentration_experiment_structure(small_doc):
    cfg = ExperimentConfig.from_dict(small_doc)
    curves, summary = concentration_experiment(cfg, n_threads=2)
    assert len(curves) == 4  # one per domain state at the single t
    for c in curves:
        assert len(c.tails) == 4
        assert c.tails[0] == 1.0  # r=0 tail is everything
        assert all(hi >= lo for lo, hi in zip(c.wilson_lo, c.wilson_hi))
        assert all(0.0 <= ex <= 1.0 for ex in c.reference)
        assert c.fitted_prefactor >= 1.0  # r=0 forces tail*e^0 = 1
    assert summary["exact_within_wilson"] in (True, False)
    assert summary["q_hat_global"] >= summary["q_hat_min"]
    assert summary["single_q_covers_all"] is True


def test_concentration_fixed_x0(small_doc):
    cfg = ExperimentConfig.from_dict(dict(small_doc, x0=[0, 1]))
    curves, _ = concentration_experiment(cfg, n_threads=1)
    assert len(curves) == 1
    assert curves[0].metadata["x0_index"] == 0


def test_empirical_experiment_structure(small_doc):
    cfg = ExperimentConfig.from_dict(dict(small_doc, experiment="empirical"))
    curve, passed, built = empirical_experiment(cfg, n_threads=2)
    assert curve.abscissa == tuple(float(n) for n in range(2, 11))
    assert built is not None  # auto schedule engages the builder
    assert curve.metadata["degenerate_schedule"] is True
    assert curve.metadata["n_positive_tails"] == 0
    assert curve.fitted_exponent == -math.inf
    assert passed  # zero tails satisfy both the slope and the bound
    assert all(t == 0.0 for t in curve.tails)


def test_empirical_user_schedule(small_doc):
    doc = dict(small_doc, experiment="empirical",
               schedule=[0.0] + [0.5 * k for k in range(1, 10)],
               n_paths=2000)
    cfg = ExperimentConfig.from_dict(doc)
    curve, passed, built = empirical_experiment(cfg, n_threads=2)
    assert built is None
    assert curve.metadata["degenerate_schedule"] is False
    assert curve.abscissa == tuple(float(n) for n in cfg.n_grid)
    # structural guarantees only: the slope on a user schedule is a
    # statistical quantity with no fixed sign at these path counts
    for lo, tail, hi in zip(curve.wilson_lo, curve.tails, curve.wilson_hi):
        assert 0.0 <= lo <= tail + 1e-12
        assert tail - 1e-12 <= hi <= 1.0
    assert curve.metadata["tails_bounded_by_reference"]
    assert math.isfinite(curve.metadata["D_T"])


def test_empirical_rejects_short_schedule(small_doc):
    doc = dict(small_doc, experiment="empirical", schedule=[0.0, 0.5])
    cfg = ExperimentConfig.from_dict(doc)
    with pytest.raises(ValueError):
        empirical_experiment(cfg)


# ---------------------------------------------------------------------------
# verification driver

def test_verify_checks_artifacts(tmp_path, bench_config_doc):
    cfg = ExperimentConfig.from_dict(bench_config_doc)
    passed, artifacts, summary = verify_checks(
        cfg, ["explip", "cylindrical"], (0.5, 1.0), tmp_path
    )
    assert passed
    names = {p.name for p in artifacts}
    assert names == {
        "verify_explip.csv", "verify_cylindrical.csv", "verify_summary.json"
    }
    header = (tmp_path / "verify_explip.csv").read_text().splitlines()[0]
    assert header == "check,t,x_index,function_id,lhs,rhs,slack,constants_used"
    loaded = json.loads((tmp_path / "verify_summary.json").read_text())
    assert loaded["checks"]["explip"]["pass"] is True
    assert loaded["checks"]["cylindrical"]["pass"] is True
    assert loaded["C11"] == pytest.approx(8.000897870656091, rel=1e-9)


def test_run_writes_manifest(tmp_path, bench_config_doc):
    cfg = ExperimentConfig.from_dict(bench_config_doc)
    passed, manifest = run(cfg, tmp_path, checks=("explip",), t_grid=(0.5,))
    assert passed
    assert manifest["pass"] is True
    assert manifest["seed"] == 7
    assert manifest["config_sha256"] == _config_sha256(cfg)
    assert "verify_explip.csv" in manifest["artifacts"]
    on_disk = json.loads((tmp_path / "manifest.json").read_text())
    assert on_disk["config_sha256"] == manifest["config_sha256"]


def test_run_verify_all_artifacts(tmp_path, bench_config_doc):
    cfg = ExperimentConfig.from_dict(bench_config_doc)
    passed, manifest = run(cfg, tmp_path)
    assert passed
    csvs = [a for a in manifest["artifacts"] if a.endswith(".csv")]
    assert len(csvs) >= 6
    assert manifest["subcommand"] == "verify-all"
    assert (tmp_path / "manifest.json").exists()


def test_run_concentration_dispatch(tmp_path, small_doc):
    cfg = ExperimentConfig.from_dict(dict(small_doc, experiment="concentration"))
    passed, manifest = run(cfg, tmp_path)
    assert (tmp_path / "concentration.csv").exists()
    assert (tmp_path / "concentration_summary.json").exists()
    assert manifest["subcommand"] == "concentration"
    assert isinstance(passed, bool)


def test_concentration_csv_thread_invariance(tmp_path, small_doc):
    cfg = ExperimentConfig.from_dict(small_doc)
    curves1, _ = concentration_experiment(cfg, n_threads=1)
    curves4, _ = concentration_experiment(cfg, n_threads=4)
    p1 = tmp_path / "one.csv"
    p4 = tmp_path / "four.csv"
    _write_concentration_csv(p1, curves1)
    _write_concentration_csv(p4, curves4)
    assert p1.read_bytes() == p4.read_bytes()

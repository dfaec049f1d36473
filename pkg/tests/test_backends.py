"""The compiled and pure-Python sampling cores must be bit-identical."""

import numpy as np
import pytest

from pjmp import _backend
from pjmp.simulate import ModelTables

pure = _backend.get_backend("python")
try:
    compiled = _backend.get_backend("c")
except ImportError:
    compiled = None

needs_compiled = pytest.mark.skipif(
    compiled is None, reason="compiled core not built"
)


@pytest.fixture(scope="module")
def tables(bench_domain):
    return ModelTables.from_space(bench_domain)


def test_active_backend_known():
    assert _backend.backend_name() in ("python", "c")


def test_get_backend_rejects_unknown():
    with pytest.raises(ValueError):
        _backend.get_backend("fortran")


@needs_compiled
def test_gillespie_sample_bit_identical(tables):
    times = np.array([0.25, 1.0, 3.0])
    out_p = np.empty((257, 3), dtype=np.int64)
    out_c = np.empty((257, 3), dtype=np.int64)
    args = (tables.totals, tables.cumrates, tables.targets, 1, times, 257, 99, 13)
    pure.gillespie_sample(*args, out_p)
    compiled.gillespie_sample(*args, out_c)
    np.testing.assert_array_equal(out_p, out_c)


@needs_compiled
def test_thinning_sample_bit_identical(tables):
    times = np.array([0.5, 2.0])
    out_p = np.empty((128, 2), dtype=np.int64)
    out_c = np.empty((128, 2), dtype=np.int64)
    args = (tables.rates, tables.targets, tables.phi_max, 0, times, 128, 7, 0)
    pure.thinning_sample(*args, out_p)
    compiled.thinning_sample(*args, out_c)
    np.testing.assert_array_equal(out_p, out_c)


@needs_compiled
def test_window_events_bit_identical(tables):
    n = 200
    counts_p = np.empty(n, dtype=np.int64)
    first_p = np.empty(n, dtype=np.int64)
    counts_c = np.empty(n, dtype=np.int64)
    first_c = np.empty(n, dtype=np.int64)
    args = (tables.totals, tables.cumrates, tables.targets, 2, 0.75, n, 31, 5)
    pure.window_events(*args, counts_p, first_p)
    compiled.window_events(*args, counts_c, first_c)
    np.testing.assert_array_equal(counts_p, counts_c)
    np.testing.assert_array_equal(first_p, first_c)


@needs_compiled
def test_occupation_bit_identical(tables):
    occ_p = np.zeros(4)
    occ_c = np.zeros(4)
    total_p, final_p = pure.occupation(
        tables.totals, tables.cumrates, tables.targets, 0, 5000, 11, occ_p
    )
    total_c, final_c = compiled.occupation(
        tables.totals, tables.cumrates, tables.targets, 0, 5000, 11, occ_c
    )
    assert total_p == total_c
    assert final_p == final_c
    np.testing.assert_array_equal(occ_p, occ_c)


@needs_compiled
def test_gillespie_events_bit_identical(tables):
    cap = 4096
    t_p = np.empty(cap)
    s_p = np.empty(cap, dtype=np.int64)
    st_p = np.empty(cap, dtype=np.int64)
    t_c = np.empty(cap)
    s_c = np.empty(cap, dtype=np.int64)
    st_c = np.empty(cap, dtype=np.int64)
    n_p = pure.gillespie_events(
        tables.totals, tables.cumrates, tables.targets, 3, 40.0, 321, 0,
        t_p, s_p, st_p,
    )
    n_c = compiled.gillespie_events(
        tables.totals, tables.cumrates, tables.targets, 3, 40.0, 321, 0,
        t_c, s_c, st_c,
    )
    assert n_p == n_c
    np.testing.assert_array_equal(t_p[:n_p], t_c[:n_c])
    np.testing.assert_array_equal(s_p[:n_p], s_c[:n_c])
    np.testing.assert_array_equal(st_p[:n_p], st_c[:n_c])


@needs_compiled
def test_thinning_events_bit_identical(tables):
    cap = 4096
    t_p = np.empty(cap)
    s_p = np.empty(cap, dtype=np.int64)
    st_p = np.empty(cap, dtype=np.int64)
    t_c = np.empty(cap)
    s_c = np.empty(cap, dtype=np.int64)
    st_c = np.empty(cap, dtype=np.int64)
    n_p = pure.thinning_events(
        tables.rates, tables.targets, tables.phi_max, 2, 25.0, 77, 0,
        t_p, s_p, st_p,
    )
    n_c = compiled.thinning_events(
        tables.rates, tables.targets, tables.phi_max, 2, 25.0, 77, 0,
        t_c, s_c, st_c,
    )
    assert n_p == n_c
    np.testing.assert_array_equal(t_p[:n_p], t_c[:n_c])
    np.testing.assert_array_equal(s_p[:n_p], s_c[:n_c])
    np.testing.assert_array_equal(st_p[:n_p], st_c[:n_c])


def test_stream_independence_across_paths(tables):
    # per-path streams keyed by absolute path id: disjoint offsets
    # reproduce the same per-path values
    times = np.array([1.0])
    full = np.empty((10, 1), dtype=np.int64)
    pure.gillespie_sample(
        tables.totals, tables.cumrates, tables.targets, 0, times, 10, 5, 0, full
    )
    tail = np.empty((4, 1), dtype=np.int64)
    pure.gillespie_sample(
        tables.totals, tables.cumrates, tables.targets, 0, times, 4, 5, 6, tail
    )
    np.testing.assert_array_equal(full[6:], tail)

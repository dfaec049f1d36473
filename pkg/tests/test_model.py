"""Parameter validation, exact jump dynamics and the generator identities."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pjmp.model import (
    RATE_EQUALITY_TOL,
    Config,
    IntensitySpec,
    NetworkParams,
    ValidationError,
    apply_jump,
    carre_du_champ,
    generator_apply,
    model_constants,
    params_from_json,
    params_to_json,
    peak_time_from_rates,
    total_rate,
)


# ---------------------------------------------------------------------------
# intensity specs

def test_constant_intensity():
    spec = IntensitySpec.constant(Fraction(3, 2))
    assert spec.rate(Fraction(0)) == Fraction(3, 2)
    assert spec.rate(Fraction(7, 3)) == Fraction(3, 2)
    assert spec.max_rate(Fraction(5)) == Fraction(3, 2)


def test_affine_intensity():
    spec = IntensitySpec.affine(1, 2)
    assert spec.rate(Fraction(1, 2)) == Fraction(2)
    assert spec.max_rate(Fraction(3)) == Fraction(7)
    spec.check_lower_bound(Fraction(1), Fraction(3))
    with pytest.raises(ValidationError):
        spec.check_lower_bound(Fraction(2), Fraction(3))


def test_affine_negative_slope_rejected():
    spec = IntensitySpec.affine(5, -1)
    with pytest.raises(ValidationError):
        spec.check_lower_bound(Fraction(1), Fraction(2))


def test_table_intensity():
    spec = IntensitySpec.table({0: 1, 1: "3/2", 2: 2})
    assert spec.rate(Fraction(1)) == Fraction(3, 2)
    assert spec.max_rate(Fraction(2)) == Fraction(2)
    with pytest.raises(ValidationError):
        spec.rate(Fraction(1, 2))


def test_table_duplicate_value_rejected():
    with pytest.raises(ValidationError):
        IntensitySpec.table([(0, 1), ("0/1", 2)])


def test_float_rationals_rejected():
    with pytest.raises(ValidationError):
        IntensitySpec.constant(1.5)


# ---------------------------------------------------------------------------
# network params

def test_params_validation(bench_params):
    assert bench_params.scale == 1
    assert bench_params.cap_level == 2
    assert bench_params.weight_levels == ((0, 1), (1, 0))


def test_params_reject_bad_shapes():
    spec = IntensitySpec.constant(1)
    with pytest.raises(ValidationError):
        NetworkParams(0, 1, [], spec, 1)
    with pytest.raises(ValidationError):
        NetworkParams(2, 1, [[0, 1]], spec, 1)
    with pytest.raises(ValidationError):
        NetworkParams(2, 0, [[0, 1], [1, 0]], spec, 1)
    with pytest.raises(ValidationError):
        NetworkParams(2, 1, [[0, 1], [1, 0]], spec, 0)
    with pytest.raises(ValidationError):
        NetworkParams(2, 1, [[0, -1], [1, 0]], spec, 1)
    # fully silent network: no neuron can ever push another
    with pytest.raises(ValidationError):
        NetworkParams(2, 1, [[0, 0], [0, 0]], spec, 1)


def test_fractional_scale():
    p = NetworkParams(
        2, "3/2", [["0", "1/2"], ["1/4", "0"]], IntensitySpec.constant(1), 1
    )
    assert p.scale == 4
    assert p.cap_level == 6
    assert p.weight_levels == ((0, 2), (1, 0))


def test_config_lattice_check():
    p = NetworkParams(2, 2, [[0, 1], [1, 0]], IntensitySpec.constant(1), 1)
    with pytest.raises(ValidationError):
        Config.from_potentials(p, ["1/2", 0])
    with pytest.raises(ValidationError):
        Config.from_potentials(p, [3, 0])
    with pytest.raises(ValidationError):
        Config.from_potentials(p, [0])


def test_json_roundtrip(bench_params):
    doc = params_to_json(bench_params)
    back = params_from_json(doc)
    assert back == bench_params
    with pytest.raises(ValidationError):
        params_from_json({"n_neurons": 2})


# ---------------------------------------------------------------------------
# jumps and rates

def test_apply_jump_reset_and_cap(bench_params):
    p = bench_params
    x = Config.from_potentials(p, [1, 2])
    assert apply_jump(x, 0, p).potentials == (0, 2)  # 2+1 over the cap
    assert apply_jump(x, 1, p).potentials == (2, 0)
    with pytest.raises(ValidationError):
        apply_jump(x, 2, p)


def test_total_rate_exact(bench_params):
    x = Config.from_potentials(bench_params, [1, 2])
    assert total_rate(x, bench_params) == Fraction(5)


def test_generator_kills_constants(bench_params):
    x = Config.from_potentials(bench_params, [0, 2])
    assert generator_apply(lambda _: Fraction(7), x, bench_params) == 0


def test_generator_manual_value(bench_params):
    # f = first coordinate; at (1, 0): spike 0 at rate 2 moves 1 -> 0,
    # spike 1 at rate 1 moves 1 -> 2
    p = bench_params
    x = Config.from_potentials(p, [1, 0])
    val = generator_apply(lambda y: y.potentials[0], x, p)
    assert val == Fraction(2) * (0 - 1) + Fraction(1) * (2 - 1)


@settings(max_examples=60, deadline=None)
@given(
    levels=st.tuples(st.integers(0, 2), st.integers(0, 2)),
    coeffs=st.lists(
        st.integers(-5, 5).map(Fraction), min_size=4, max_size=4
    ),
    shift=st.integers(1, 9).map(Fraction),
)
def test_carre_du_champ_identity(levels, coeffs, shift, bench_params):
    """Gamma(f,f) = (G(f^2) - 2 f G f) / 2, exactly in rationals."""
    p = bench_params
    x = Config(tuple(levels), p.scale)

    def f(y):
        a, b, c, d = coeffs
        u, v = y.potentials
        return shift + a * u + b * v + c * u * v + d * u * u

    gamma = carre_du_champ(f, x, p)
    g_f2 = generator_apply(lambda y: f(y) ** 2, x, p)
    g_f = generator_apply(f, x, p)
    assert gamma == (g_f2 - 2 * f(x) * g_f) / 2
    assert gamma >= 0


# ---------------------------------------------------------------------------
# peak time

def test_peak_time_two_branches():
    a, b = 3.0, 4.0
    t = peak_time_from_rates(a, b)
    assert t == pytest.approx((math.log(a) - math.log(b)) / (a - b), rel=1e-15)
    assert peak_time_from_rates(2.0, 2.0) == 0.5
    # the equal-rate branch is the continuous limit of the generic one
    eps = RATE_EQUALITY_TOL / 2
    assert peak_time_from_rates(2.0, 2.0 + eps) == pytest.approx(0.5, rel=1e-9)


def test_peak_time_is_a_maximum():
    # h(s) = a e^{-a s} windowed by e^{-b (t-s)} peaks where the closed
    # form says; check by sign change of the derivative on a fine grid
    a, b = 3.0, 5.0
    t_star = peak_time_from_rates(a, b)

    def window(t):
        # one-jump window mass with before/after rates a, b
        if abs(a - b) <= RATE_EQUALITY_TOL:
            return a * t * math.exp(-a * t)
        return a * (math.exp(-b * t) - math.exp(-a * t)) / (a - b)

    grid = np.linspace(1e-4, 5.0, 20000)
    vals = np.array([window(t) for t in grid])
    assert abs(grid[np.argmax(vals)] - t_star) <= grid[1] - grid[0]


# ---------------------------------------------------------------------------
# model constants

def test_model_constants(bench_params, bench_domain):
    mc = model_constants(bench_params, bench_domain)
    assert mc.phi_bar_max == 4.0  # at (0,2): (1+0) + (1+2)
    assert mc.M == 25.0
    assert mc.t0_global == 0.25
    assert mc.w_max == 1.0
    assert mc.n_neurons == 2
    # d_lip = M wmax^2 / 2 * e^{2m} with M=25, wmax=1, m=2
    assert mc.d_lip == pytest.approx(12.5 * math.exp(4.0), rel=1e-15)
    assert mc.d_lip == pytest.approx(682.476875414303, rel=1e-12)

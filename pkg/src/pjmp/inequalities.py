"""Entropy inequalities for the neuron network semigroup.

The central object is a modified log-Sobolev bound for the process
started at a point: the entropy of f under pi_t(x, .) is controlled by

    delta(t) * [ P_t(Gamma(f,f)/f) + sum_j P_t(Gamma(f,f)(jump(.,j))/f)
                 + sum_{i,j} P_t(Gamma(f,f)(jump(jump(.,j),i))/f) ](x)

where Gamma is evaluated at the shifted configurations but the divisor
f stays at the unshifted argument.  delta(t) = max(alpha, beta, gamma)
is an increasing cubic built from the scalar constants of the model and
two empirical kernel-ratio suprema.  The module also provides the
intermediate bounds the cubic comes from (a sweeping-out bound for
Gamma(P_t f) and a denominator-shift bound for P_s(g / P_{t-s} f)),
exponential-Lipschitz jump bounds, a multi-time (cylindrical) version
of the entropy bound over observation schedules with fast-decaying
increments, and the explicit constants of the moment-based
concentration bound.

Every theoretical constant also exists as a plain formula string in
``FORMULAS`` so an independent evaluator can cross-check the code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .model import Config, ModelConstants, model_constants
from .semigroup import (
    Kernel,
    PathFunctional,
    RatioReport,
    Schedule,
    kernel,
    multi_time_expectation,
)
from .statespace import RateMatrix

__all__ = [
    "InequalityReport",
    "MlsiConstants",
    "Cubic",
    "ConcentrationConstants",
    "ScheduleBuildResult",
    "LipschitzBoundsReport",
    "FORMULAS",
    "eval_formula",
    "state_vector",
    "gamma_vector",
    "entropy",
    "build_mlsi_constants",
    "mlsi_sides",
    "exp_lipschitz_family",
    "probe_family",
    "delta_star_curve",
    "multi_time_terms",
    "multi_time_constant",
    "fit_cubic_through_origin",
    "shift_ratios",
    "standard_form_sides",
    "sweeping_out_check",
    "denominator_shift_check",
    "lipschitz_exp_bounds",
    "cylindrical_mlsi_sides",
    "condition_terms",
    "schedule_builder",
    "concentration_constants",
]

FITTED_SLACK_TOL = -1e-10


# ---------------------------------------------------------------------------
# state vectors, carre du champ, entropy

def state_vector(space, fn: Callable[[Config], float]) -> np.ndarray:
    """Vectorize a configuration function over the space's states."""
    return np.array([float(fn(x)) for x in space.states])


def coordinate_values(space, i: int) -> np.ndarray:
    """Potential of neuron i in each state, as floats."""
    return np.array([float(x.potentials[i]) for x in space.states])


def _rates_array(rate_matrix: RateMatrix) -> np.ndarray:
    """phi(x^j) per (state, neuron), as floats."""
    space = rate_matrix.space
    p = space.params
    out = np.empty((len(space), p.n_neurons))
    for s, x in enumerate(space.states):
        for j in range(p.n_neurons):
            out[s, j] = float(p.rate_of_level(x.levels[j]))
    return out


def gamma_vector(rate_matrix: RateMatrix, f: np.ndarray) -> np.ndarray:
    """Gamma(f, f) as a state vector over the space."""
    space = rate_matrix.space
    rates = _rates_array(rate_matrix)
    targets = space.targets  # (n_neurons, n_states)
    f = np.asarray(f, dtype=float)
    diffs = f[targets] - f[None, :]  # (n_neurons, n_states)
    return 0.5 * np.einsum("sj,js->s", rates, diffs * diffs)


def _require_positive(f: np.ndarray, what: str = "f") -> None:
    if np.any(np.asarray(f) <= 0):
        raise ValueError(f"{what} must be strictly positive on the state space")


def entropy(rate_matrix: RateMatrix, t: float, f: np.ndarray, x_index: int) -> float:
    """Ent_{pi_t(x,.)}(f) = P_t(f log f)(x) - P_t f(x) log P_t f(x)."""
    f = np.asarray(f, dtype=float)
    _require_positive(f)
    K = kernel(rate_matrix, t).matrix
    mean_flogf = float(K[x_index] @ (f * np.log(f)))
    mean_f = float(K[x_index] @ f)
    return mean_flogf - mean_f * math.log(mean_f)


# ---------------------------------------------------------------------------
# constants

FORMULAS = {
    "M": "(phibar_max + 1)**2",
    "c": "8 * t0**2 * M",
    "C1": "d_vis**2 * (C11**2 + C12**2)",
    "c_of_t": "4 * t0**2 * M * C1 + 2 * t**2 * M * C1",
    "d_of_t_linear": "2 + 8 * t**2 * M**2 * C11",
    "d_of_t_quadratic": "2 + 4 * t**2 * M**2 * C11**2",
    "alpha": "t * (2 * M * c_t + 2 * d_t)",
    "beta": "t * (2 * (c * M + 1) * d_t)",
    "gamma": "t * (2 * c * M * d_t)",
    "d_lip": "M * wmax**2 / 2 * exp(2 * m)",
    "b0": "max(2 + 2 * d**2 * M * c_t, 2 * c * M + 2 * d_t, 2 * c * M * d_t)",
    "D1": "2**(N - 1) * M * N * (m + wmax)**2 * exp(2 * N * (m + wmax))",
    "D2": "2**(N - 1) * M * (m + wmax)**2 * exp(2 * N * (m + 2 * wmax))",
    "D3": "2**(N - 1) * M * (m + 2 * wmax)**2 * exp(2 * N * (m + 3 * wmax))",
}


def eval_formula(expr: str, variables: dict) -> float:
    """Evaluate one of the FORMULAS strings in a bare namespace."""
    scope = {"exp": math.exp, "log": math.log, "sqrt": math.sqrt,
             "max": max, "min": min}
    scope.update(variables)
    return float(eval(expr, {"__builtins__": {}}, scope))


@dataclass(frozen=True)
class MlsiConstants:
    """All scalar constants feeding the entropy bounds.

    ``C11`` and ``C12`` are the empirical kernel-ratio suprema; the rest
    are closed forms in the model scalars:

    * ``c`` = 8 t0^2 M
    * ``C1`` = d_vis^2 (C11^2 + C12^2), d_vis the number of visitable
      states
    * c(t) = 4 t0^2 M C1 + 2 t^2 M C1
    * d(t) = 2 + 8 t^2 M^2 C11 (the default, linear in C11; the variant
      2 + 4 t^2 M^2 C11^2, quadratic in C11, is ``variant='quadratic'``)
    * alpha(t) = t (2 M c(t) + 2 d(t)), beta(t) = t (2 (cM+1) d(t)),
      gamma(t) = t (2 c M d(t)); delta(t) = max of the three
    """

    M: float
    t0: float
    C11: float
    C12: float
    d_vis: int
    d_lip: float
    n_neurons: int
    c: float = field(init=False)
    C1: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "c", 8.0 * self.t0**2 * self.M)
        object.__setattr__(
            self, "C1", float(self.d_vis) ** 2 * (self.C11**2 + self.C12**2)
        )

    def c_of_t(self, t: float) -> float:
        return 4.0 * self.t0**2 * self.M * self.C1 + 2.0 * t * t * self.M * self.C1

    def d_of_t(self, t: float, variant: str = "linear") -> float:
        if variant == "linear":
            return 2.0 + 8.0 * t * t * self.M**2 * self.C11
        if variant == "quadratic":
            return 2.0 + 4.0 * t * t * self.M**2 * self.C11**2
        raise ValueError(f"unknown d(t) variant {variant!r}")

    def alpha(self, t: float) -> float:
        return t * (2.0 * self.M * self.c_of_t(t) + 2.0 * self.d_of_t(t))

    def beta(self, t: float) -> float:
        return t * (2.0 * (self.c * self.M + 1.0) * self.d_of_t(t))

    def gamma(self, t: float) -> float:
        return t * (2.0 * self.c * self.M * self.d_of_t(t))

    def delta_of_t(self, t: float) -> float:
        return max(self.alpha(t), self.beta(t), self.gamma(t))

    def b0(self, increment: float) -> float:
        """Single-step constant of the multi-time induction for one
        schedule increment."""
        c_t = self.c_of_t(increment)
        d_t = self.d_of_t(increment)
        d = self.d_lip
        return max(
            2.0 + 2.0 * d * d * self.M * c_t,
            2.0 * self.c * self.M + 2.0 * d_t,
            2.0 * self.c * self.M * d_t,
        )


def build_mlsi_constants(
    rate_matrix: RateMatrix, ratios: RatioReport
) -> MlsiConstants:
    """Assemble the constants from the model scalars and a ratio report."""
    space = rate_matrix.space
    consts = model_constants(space.params, space)
    return MlsiConstants(
        M=consts.M,
        t0=consts.t0_global,
        C11=ratios.c11_hat,
        C12=ratios.c12_hat,
        d_vis=len(space),
        d_lip=consts.d_lip,
        n_neurons=space.params.n_neurons,
    )


# ---------------------------------------------------------------------------
# reports

@dataclass(frozen=True)
class InequalityReport:
    """One verified inequality instance: sides, slack, provenance.

    A negative slack under fitted constants is a failure (the fit
    guarantees slack >= -1e-10); under theoretical constants it is a
    finding to surface, never to clamp."""

    name: str
    lhs: float
    rhs_components: dict
    slack: float
    constant_mode: str
    constant_extracted: float | None
    metadata: dict

    @property
    def rhs(self) -> float:
        return float(sum(self.rhs_components.values()))

    @property
    def holds(self) -> bool:
        tol = FITTED_SLACK_TOL if self.constant_mode == "fitted" else 0.0
        return self.slack >= tol


def _report(name, lhs, components: dict, mode, extracted=None,
            **meta) -> InequalityReport:
    rhs = float(sum(components.values()))
    return InequalityReport(
        name=name, lhs=float(lhs), rhs_components=components,
        slack=rhs - float(lhs), constant_mode=mode,
        constant_extracted=extracted, metadata=meta,
    )


# ---------------------------------------------------------------------------
# pointwise entropy bound

def _mlsi_bracket(rate_matrix: RateMatrix, t: float, f: np.ndarray,
                  x_index: int) -> tuple:
    """The three transported quotient terms of the entropy bound at x."""
    space = rate_matrix.space
    targets = space.targets
    nn = space.params.n_neurons
    gam = gamma_vector(rate_matrix, f)
    K = kernel(rate_matrix, t).matrix

    own = gam / f
    one_jump = np.zeros_like(gam)
    two_jump = np.zeros_like(gam)
    for j in range(nn):
        one_jump += gam[targets[j]]
        for i in range(nn):
            two_jump += gam[targets[i][targets[j]]]
    one_jump /= f
    two_jump /= f

    a = float(K[x_index] @ own)
    b = float(K[x_index] @ one_jump)
    c = float(K[x_index] @ two_jump)
    return a, b, c


def mlsi_sides(
    rate_matrix: RateMatrix,
    t: float,
    f: np.ndarray,
    x_index: int,
    constants: MlsiConstants,
    delta_value: float | None = None,
) -> InequalityReport:
    """Entropy bound at one (t, f, x); theoretical delta(t) by default, a
    caller-supplied (fitted) delta value otherwise."""
    f = np.asarray(f, dtype=float)
    _require_positive(f)
    lhs = entropy(rate_matrix, t, f, x_index)
    a, b, c = _mlsi_bracket(rate_matrix, t, f, x_index)
    if delta_value is None:
        delta_value = constants.delta_of_t(t)
        mode = "theoretical"
    else:
        mode = "fitted"
    return _report(
        "mlsi", lhs,
        {"own": delta_value * a, "one_jump": delta_value * b,
         "two_jump": delta_value * c},
        mode, extracted=delta_value,
        t=t, x_index=x_index, bracket=(a, b, c),
    )


def exp_lipschitz_family(space) -> list:
    """Coordinate exponentials exp(lam * x^i), lam in {±1/4, ±1/2, ±1}:
    the positive Lipschitz exponentials the multi-time argument runs on."""
    probes = []
    for i in range(space.params.n_neurons):
        coord = coordinate_values(space, i)
        for lam in (0.25, 0.5, 1.0, -0.25, -0.5, -1.0):
            probes.append((f"exp({lam:+g}*x{i})", np.exp(lam * coord)))
    return probes


def probe_family(space, n_random: int = 50, seed: int = 20240817) -> list:
    """Positive test functions: the exponential-Lipschitz family, shifted
    coordinate sums, and seeded random positive vectors."""
    probes = exp_lipschitz_family(space)
    n = len(space)
    nn = space.params.n_neurons
    total = sum(coordinate_values(space, i) for i in range(nn))
    probes.append(("1+sum(x)", 1.0 + total))
    for i in range(nn):
        probes.append((f"1+x{i}", 1.0 + coordinate_values(space, i)))
    rng = np.random.default_rng(seed)
    for k in range(n_random):
        probes.append((f"rand{k}", rng.uniform(0.2, 5.0, size=n)))
    return probes


def delta_star_curve(
    rate_matrix: RateMatrix,
    t_grid: Sequence[float],
    probes: list | None = None,
) -> dict:
    """Smallest constant making the entropy bound hold over the probe
    family at each t:

        delta*(t) = max over probes f and states x of LHS / bracket,

    with 0/0 treated as 0 and positive LHS over zero bracket an error.
    The default family is the exponential-Lipschitz one.
    """
    if probes is None:
        probes = exp_lipschitz_family(rate_matrix.space)
    n = rate_matrix.dim
    values = []
    argmax = []
    for t in t_grid:
        best = 0.0
        who = None
        for name, f in probes:
            f = np.asarray(f, dtype=float)
            _require_positive(f, what=f"probe {name}")
            for x_index in range(n):
                lhs = entropy(rate_matrix, t, f, x_index)
                a, b, c = _mlsi_bracket(rate_matrix, t, f, x_index)
                bracket = a + b + c
                if bracket <= 0.0:
                    if lhs > 1e-12:
                        raise FloatingPointError(
                            f"entropy {lhs:.3e} positive with zero bracket "
                            f"(t={t}, probe={name}, x={x_index})"
                        )
                    continue
                ratio = lhs / bracket
                if ratio > best:
                    best = ratio
                    who = (name, x_index)
        values.append(best)
        argmax.append(who)
    raw = np.array(values)
    # the minimal nondecreasing constant valid on [0, t]: the closed-form
    # delta is increasing, so the usable extraction is the running max;
    # the raw per-t ratios overshoot at small t and then saturate
    return {"t_grid": tuple(float(t) for t in t_grid),
            "delta_star": raw,
            "envelope": np.maximum.accumulate(raw),
            "argmax": argmax}


@dataclass(frozen=True)
class Cubic:
    """Through-origin cubic c1*t + c2*t^2 + c3*t^3."""

    c1: float
    c2: float
    c3: float

    def __call__(self, t: float) -> float:
        return self.c1 * t + self.c2 * t * t + self.c3 * t * t * t


def fit_cubic_through_origin(ts, ys) -> tuple:
    """Least-squares cubic through the origin; returns (Cubic, relative L2
    residual)."""
    ts = np.asarray(ts, dtype=float)
    ys = np.asarray(ys, dtype=float)
    basis = np.stack([ts, ts**2, ts**3], axis=1)
    coef, *_ = np.linalg.lstsq(basis, ys, rcond=None)
    pred = basis @ coef
    norm = float(np.linalg.norm(ys))
    resid = float(np.linalg.norm(pred - ys)) / norm if norm > 0 else 0.0
    return Cubic(*map(float, coef)), resid


# ---------------------------------------------------------------------------
# equal-weights standard-form bound

def shift_ratios(rate_matrix: RateMatrix, f: np.ndarray) -> dict:
    """Empirical jump-shift ratios of Gamma(f, f):

        R_hat  = max over states x and neurons j with Gamma(f,f)(x) > 0 of
                 Gamma(f,f)(jump(x,j)) / Gamma(f,f)(x)

    plus the corresponding two-jump maximum.  Infinite when Gamma
    vanishes at some x but not at a jump target."""
    space = rate_matrix.space
    targets = space.targets
    nn = space.params.n_neurons
    gam = gamma_vector(rate_matrix, np.asarray(f, dtype=float))
    one = 0.0
    two = 0.0
    for s in range(len(space)):
        g = gam[s]
        for j in range(nn):
            gj = gam[targets[j, s]]
            if g > 0:
                one = max(one, gj / g)
            elif gj > 1e-300:
                one = math.inf
            for i in range(nn):
                gij = gam[targets[i, targets[j, s]]]
                if g > 0:
                    two = max(two, gij / g)
                elif gij > 1e-300:
                    two = math.inf
    return {"one_jump": one, "two_jump": two}


def _check_one_coordinate_shape(values: np.ndarray, fs: np.ndarray) -> None:
    """Require monotone and (convex or concave) on the sorted value set."""
    order = np.argsort(values)
    v = values[order]
    y = fs[order]
    uniq_v, first = np.unique(v, return_index=True)
    y = y[first]
    if len(uniq_v) < 2:
        return
    slopes = np.diff(y) / np.diff(uniq_v)
    tol = 1e-12
    if not (np.all(slopes >= -tol) or np.all(slopes <= tol)):
        raise ValueError("standard-form observable must be monotone in the coordinate")
    if len(slopes) >= 2:
        d2 = np.diff(slopes)
        if not (np.all(d2 >= -tol) or np.all(d2 <= tol)):
            raise ValueError("standard-form observable must be convex or concave")


def standard_form_sides(
    rate_matrix: RateMatrix,
    t: float,
    f_i: Callable[[float], float],
    i: int,
    x_index: int,
    constants: MlsiConstants,
) -> InequalityReport:
    """Equal-weights entropy bound in standard form for a one-coordinate
    monotone convex/concave observable:

        Ent <= delta(t) (1 + N R + N^2 R^2) P_t(Gamma(f,f)/f)(x)

    with R the empirical one-jump shift ratio of Gamma."""
    p = rate_matrix.space.params
    off = [p.weights[j][k] for j in range(p.n_neurons)
           for k in range(p.n_neurons) if j != k]
    if p.n_neurons > 1 and len(set(off)) != 1:
        raise ValueError("the standard-form bound needs equal synaptic weights")

    coord = coordinate_values(rate_matrix.space, i)
    f = np.array([f_i(v) for v in coord], dtype=float)
    if np.any(f < 0) or not np.any(f > 0):
        raise ValueError("observable must be nonnegative and not identically zero")
    _check_one_coordinate_shape(coord, f)

    ratios = shift_ratios(rate_matrix, f)
    r_hat = ratios["one_jump"]
    if not math.isfinite(r_hat):
        raise FloatingPointError("one-jump shift ratio is infinite for this observable")

    K = kernel(rate_matrix, t).matrix
    flogf = np.where(f > 0, f * np.log(np.where(f > 0, f, 1.0)), 0.0)
    mean_f = float(K[x_index] @ f)
    lhs = float(K[x_index] @ flogf) - mean_f * math.log(mean_f)
    gam = gamma_vector(rate_matrix, f)
    # zero f with positive local fluctuation makes the quotient infinite
    # and the bound there vacuous
    with np.errstate(divide="ignore"):
        quot = np.where(f > 0, gam / np.where(f > 0, f, 1.0),
                        np.where(gam > 0, math.inf, 0.0))
    a = float(K[x_index] @ quot)
    nn = p.n_neurons
    zeta = constants.delta_of_t(t) * (1.0 + nn * r_hat + nn * nn * r_hat * r_hat)
    return _report(
        "standard_form", lhs, {"transport": zeta * a}, "theoretical",
        extracted=r_hat,
        t=t, x_index=x_index, neuron=i, two_jump=ratios["two_jump"], zeta=zeta,
    )


# ---------------------------------------------------------------------------
# intermediate bounds

def sweeping_out_check(
    rate_matrix: RateMatrix,
    t: float,
    s: float,
    f: np.ndarray,
    constants: MlsiConstants,
    mode: str = "theoretical",
) -> list:
    """Carre du champ of the smoothed function against its sweeping-out
    bound, at every state:

        Gamma(P_u f, P_u f)(x) <= 2 Gamma(f,f)(x)
            + 2c sum_i phi(x^i) Gamma(f,f)(jump(x,i))
            + 2 M c(u) P_u(Gamma(f,f)/f)(x) P_u f(x),        u = t - s.

    In fitted mode all three terms are scaled by the smallest common
    factor that restores the bound."""
    if not 0 <= s <= t:
        raise ValueError("need 0 <= s <= t")
    u = t - s
    f = np.asarray(f, dtype=float)
    _require_positive(f)
    space = rate_matrix.space
    targets = space.targets
    rates = _rates_array(rate_matrix)
    nn = space.params.n_neurons

    K_u = kernel(rate_matrix, u).matrix
    pf = K_u @ f
    gam_pf = gamma_vector(rate_matrix, pf)
    gam = gamma_vector(rate_matrix, f)
    transported = K_u @ (gam / f)

    shifted = np.zeros_like(gam)
    for i in range(nn):
        shifted += rates[:, i] * gam[targets[i]]

    term1 = 2.0 * gam
    term2 = 2.0 * constants.c * shifted
    term3 = 2.0 * constants.M * constants.c_of_t(u) * transported * pf
    rhs = term1 + term2 + term3
    lhs = gam_pf

    scale = 1.0
    if mode == "fitted":
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(rhs > 0, lhs / rhs, 0.0)
        scale = float(np.max(ratios))
    elif mode != "theoretical":
        raise ValueError(f"unknown mode {mode!r}")

    return [
        _report(
            "sweeping_out", lhs[x],
            {"own_gamma": scale * term1[x], "shifted_gamma": scale * term2[x],
             "smoothed_quotient": scale * term3[x]},
            mode, extracted=scale if mode == "fitted" else None,
            t=t, s=s, x_index=x,
        )
        for x in range(len(space))
    ]


def denominator_shift_check(
    rate_matrix: RateMatrix,
    t: float,
    s: float,
    g: np.ndarray,
    f: np.ndarray,
    constants: MlsiConstants,
    mode: str = "theoretical",
    variant: str = "linear",
) -> list:
    """Denominator-shift bound at every state:

        P_s(g / P_{t-s} f)(x) <= d(t-s) [ P_t(g/f)(x)
                                          + sum_j P_t(g(jump(.,j))/f)(x) ].

    Fitted mode replaces d(t-s) by the smallest value restoring the
    bound; ``variant`` picks the linear-in-C11 or quadratic d(t)."""
    if not 0 <= s <= t:
        raise ValueError("need 0 <= s <= t")
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    _require_positive(f)
    if np.any(g < 0):
        raise ValueError("g must be nonnegative")
    space = rate_matrix.space
    targets = space.targets
    nn = space.params.n_neurons

    K_s = kernel(rate_matrix, s).matrix
    K_u = kernel(rate_matrix, t - s).matrix
    K_t = kernel(rate_matrix, t).matrix

    lhs = K_s @ (g / (K_u @ f))
    own = K_t @ (g / f)
    shift = np.zeros_like(own)
    for j in range(nn):
        shift = shift + K_t @ (g[targets[j]] / f)

    d_val = constants.d_of_t(t - s, variant=variant)
    if mode == "fitted":
        bracket = own + shift
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(bracket > 0, lhs / bracket, 0.0)
        d_val = float(np.max(ratios))
    elif mode != "theoretical":
        raise ValueError(f"unknown mode {mode!r}")

    return [
        _report(
            "denominator_shift", lhs[x],
            {"own": d_val * own[x], "shifted": d_val * shift[x]},
            mode, extracted=d_val,
            t=t, s=s, x_index=x, variant=variant,
        )
        for x in range(len(space))
    ]


# ---------------------------------------------------------------------------
# exponential Lipschitz jump bounds

@dataclass(frozen=True)
class LipschitzBoundsReport:
    """Exhaustive check of the exponential jump-growth bounds.

    * chain bound: exp(lam f_i(jump chain of length k applied to x))
      <= d_lip^k exp(lam f_i(x)) for all chains with k <= max_chain
    * carre bound: Gamma(e^{lam f_i}, e^{lam f_i})(jump(x, j))
      <= lam^2 d_lip exp(2 lam f_i(x))
    """

    lam: float
    max_chain: int
    chain_max_ratio: float
    chain_witness: tuple
    carre_max_ratio: float
    carre_witness: tuple

    @property
    def holds(self) -> bool:
        return self.chain_max_ratio <= 1.0 + 1e-9 and self.carre_max_ratio <= 1.0 + 1e-9


def lipschitz_exp_bounds(
    rate_matrix: RateMatrix,
    f_i: Callable[[float], float],
    i: int,
    lam: float,
    max_chain: int = 3,
) -> LipschitzBoundsReport:
    """Check the exponential growth bounds for a 1-Lipschitz one-coordinate
    observable, exhaustively over states and jump chains."""
    if not 0 < lam <= 1.0:
        raise ValueError("lam must lie in (0, 1]")
    space = rate_matrix.space
    nn = space.params.n_neurons
    n = len(space)
    coord = coordinate_values(space, i)
    fvals = np.array([f_i(v) for v in coord], dtype=float)
    if np.any(fvals < 0):
        raise ValueError("observable must be nonnegative")
    # 1-Lipschitz on the coordinate value set
    for a in range(n):
        for b in range(n):
            if abs(fvals[a] - fvals[b]) > abs(coord[a] - coord[b]) + 1e-12:
                raise ValueError("observable is not 1-Lipschitz in the coordinate")

    consts = model_constants(space.params, space)
    d_lip = consts.d_lip
    targets = space.targets

    exp_f = np.exp(lam * fvals)
    chain_best = 0.0
    chain_wit = ()
    frontier = {(): np.arange(n)}
    for k in range(1, max_chain + 1):
        new_frontier = {}
        for chain, mapped in frontier.items():
            for j in range(nn):
                nxt = targets[j][mapped]
                new_frontier[(j,) + chain] = nxt
                ratios = exp_f[nxt] / (d_lip**k * exp_f)
                idx = int(np.argmax(ratios))
                if ratios[idx] > chain_best:
                    chain_best = float(ratios[idx])
                    chain_wit = ((j,) + chain, idx)
        frontier = new_frontier

    gam_exp = gamma_vector(rate_matrix, exp_f)
    carre_best = 0.0
    carre_wit = ()
    for j in range(nn):
        ratios = gam_exp[targets[j]] / (lam * lam * d_lip * exp_f * exp_f)
        idx = int(np.argmax(ratios))
        if ratios[idx] > carre_best:
            carre_best = float(ratios[idx])
            carre_wit = (j, idx)

    return LipschitzBoundsReport(
        lam=lam,
        max_chain=max_chain,
        chain_max_ratio=chain_best,
        chain_witness=chain_wit,
        carre_max_ratio=carre_best,
        carre_witness=carre_wit,
    )


# ---------------------------------------------------------------------------
# multi-time entropy bound

class ScheduleConditionError(RuntimeError):
    """Raised when a schedule's increment sum diverges or overflows."""


def _power_sum(nd: float, k: int) -> float:
    """sum_{r=1}^{k+1} (N d)^{r+4}"""
    return sum(nd ** (r + 4) for r in range(1, k + 2))


def condition_terms(
    constants: MlsiConstants,
    schedule: Schedule,
    delta_fn: Callable[[float], float] | None = None,
) -> list:
    """Summability-condition terms of an observation schedule:

        cond_k = delta(t_k - t_{k-1}) * 3^k * sum_{r=1}^{k+1} (N d)^{r+4}

    with the convention t_0 = 0 (so the k=1 term vanishes)."""
    if delta_fn is None:
        delta_fn = constants.delta_of_t
    nd = constants.n_neurons * constants.d_lip
    terms = []
    for k, inc in enumerate(schedule.increments, start=1):
        term = delta_fn(inc) * 3.0**k * _power_sum(nd, k)
        if not math.isfinite(term):
            raise ScheduleConditionError(
                f"condition term k={k} is not finite (value {term})"
            )
        terms.append(term)
    return terms


def multi_time_terms(
    constants: MlsiConstants,
    schedule: Schedule,
    delta_fn: Callable[[float], float] | None = None,
) -> list:
    """Per-increment terms of the multi-time entropy constant:

        term_k = delta(t_k - t_{k-1}) * b_{k-1} * sum_{r=1}^{k+1} (N d)^{r+4}

    where b_j = 3^j b0(j-th increment) is the single-step induction
    constant (b_0 uses a zero increment).  D(T) = 3 * sum_k term_k."""
    if delta_fn is None:
        delta_fn = constants.delta_of_t
    nd = constants.n_neurons * constants.d_lip
    incs = schedule.increments
    terms = []
    prev_inc = 0.0
    for k, inc in enumerate(incs, start=1):
        b_prev = 3.0 ** (k - 1) * constants.b0(prev_inc)
        term = delta_fn(inc) * b_prev * _power_sum(nd, k)
        if not math.isfinite(term):
            raise ScheduleConditionError(
                f"increment term k={k} is not finite (value {term})"
            )
        terms.append(term)
        prev_inc = inc
    return terms


def multi_time_constant(constants: MlsiConstants, schedule: Schedule) -> float:
    """D(T) = 3 * sum of the per-increment terms over the schedule."""
    return 3.0 * sum(multi_time_terms(constants, schedule))


def cylindrical_mlsi_sides(
    rate_matrix: RateMatrix,
    schedule: Schedule,
    f_i: Callable[[float], float],
    i: int,
    lam: float,
    x0_index: int,
    constants: MlsiConstants,
) -> InequalityReport:
    """Multi-time entropy bound for f = sum_k f_i(X^i_{t_k}):

        E[e^{lam f} log(e^{lam f} / E e^{lam f})] <= lam^2 D(T) E[e^{lam f}]

    with both sides computed exactly by transfer recursions."""
    if not 0 < lam <= 1.0:
        raise ValueError("lam must lie in (0, 1]")
    space = rate_matrix.space
    coord = coordinate_values(space, i)
    h = np.array([f_i(v) for v in coord], dtype=float)
    if np.any(h < 0):
        raise ValueError("observable must be nonnegative")

    n = schedule.n
    e1 = multi_time_expectation(
        rate_matrix, schedule, x0_index,
        PathFunctional("exp_sum", tuple([h] * n), lam=lam),
    )
    e2 = multi_time_expectation(
        rate_matrix, schedule, x0_index,
        PathFunctional("entropy_integrand", tuple([h] * n), lam=lam),
    )
    lhs = e2 - e1 * math.log(e1)
    d_t_const = multi_time_constant(constants, schedule)
    return _report(
        "cylindrical_mlsi", lhs, {"bound": lam * lam * d_t_const * e1},
        "theoretical",
        lam=lam, n_times=n, x0_index=x0_index, D_T=d_t_const,
        exp_mean=e1, neuron=i,
    )


@dataclass(frozen=True)
class ScheduleBuildResult:
    """A built observation schedule plus its convergence bookkeeping.

    ``thresholds[k-2]`` caps delta at the k-th increment (k >= 2);
    ``condition_terms`` are the realized delta * 3^k * power-sum values
    for the built horizon and ``condition_partial`` their sum, finite by
    construction.  ``delta_tail_bound`` bounds the delta mass of any
    extension by the same rule: sum_{k>n} delta(inc_k) <= 3 (2/3)^{n+1}.
    Note the thresholds leave the 3^k growth of the induction constants
    uncompensated, so the condition terms themselves grow like 2^k; only
    the built finite horizon enters D(T)."""

    schedule: Schedule
    thresholds: tuple
    increments: tuple
    condition_terms: tuple
    condition_partial: float
    delta_tail_bound: float


def schedule_builder(
    constants: MlsiConstants,
    delta_fit: Callable[[float], float],
    n: int,
    bisection_steps: int = 200,
) -> ScheduleBuildResult:
    """Build n observation times t_1 = 0 < t_2 < ... with increments chosen
    by bisection so that delta_fit(increment_k) <= threshold_k, where

        threshold_k = (2/3)^k / sum_{r=1}^{k+1} (N d)^{r+4}."""
    if n < 1:
        raise ValueError("need n >= 1 observation times")
    nd = constants.n_neurons * constants.d_lip
    thresholds = []
    increments = []
    for k in range(2, n + 1):
        th = (2.0 / 3.0) ** k / _power_sum(nd, k)
        thresholds.append(th)
        # sup{t : delta_fit(t) <= th} by expanding bracket + bisection
        hi = 1.0
        grow = 0
        while delta_fit(hi) <= th:
            hi *= 2.0
            grow += 1
            if grow > 200:
                raise ScheduleConditionError(
                    "delta_fit never exceeds the threshold; degenerate fit"
                )
        lo = 0.0
        for _ in range(bisection_steps):
            mid = 0.5 * (lo + hi)
            if delta_fit(mid) <= th:
                lo = mid
            else:
                hi = mid
        if lo <= 0.0:
            raise ScheduleConditionError(
                f"threshold {th:.3e} unreachable at k={k}; delta_fit degenerate"
            )
        increments.append(lo)

    times = [0.0]
    for inc in increments:
        times.append(times[-1] + inc)
    sched = Schedule(tuple(times))
    terms = condition_terms(constants, sched, delta_fn=delta_fit)
    tail = 3.0 * (2.0 / 3.0) ** (n + 1)
    return ScheduleBuildResult(
        schedule=sched,
        thresholds=tuple(thresholds),
        increments=tuple(increments),
        condition_terms=tuple(terms),
        condition_partial=float(sum(terms)),
        delta_tail_bound=float(tail),
    )


# ---------------------------------------------------------------------------
# concentration constants

@dataclass(frozen=True)
class ConcentrationConstants:
    """Explicit constants of the moment-based concentration bound for
    sums of one-coordinate 1-Lipschitz observables."""

    D1: float
    D2: float
    D3: float

    def multiplier(self, delta_t: float, n_neurons: int) -> float:
        return delta_t * (
            self.D1 + n_neurons * self.D2 + n_neurons * n_neurons * self.D3
        )


def concentration_constants(M: float, n_neurons: int, m: float,
                            w_max: float) -> ConcentrationConstants:
    """D1, D2, D3 in closed form (see FORMULAS for the string versions)."""
    n = n_neurons
    two = 2.0 ** (n - 1)
    d1 = two * M * n * (m + w_max) ** 2 * math.exp(2.0 * n * (m + w_max))
    d2 = two * M * (m + w_max) ** 2 * math.exp(2.0 * n * (m + 2.0 * w_max))
    d3 = two * M * (m + 2.0 * w_max) ** 2 * math.exp(2.0 * n * (m + 3.0 * w_max))
    return ConcentrationConstants(D1=d1, D2=d2, D3=d3)

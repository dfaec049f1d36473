"""Transition kernels, closed-form spike-window probabilities, empirical
kernel-ratio constants, and multi-time cylindrical expectations.

Kernels are computed by uniformization: with Lambda the largest total
exit rate and P = I + Q/Lambda,

    pi_t = sum_k exp(-Lambda t) (Lambda t)^k / k! * P^k,

truncated when the Poisson tail drops below 1e-14 and row-renormalized.
This keeps Chapman-Kolmogorov and the invariant measure identities at
the 1e-10 level used by the verification suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import (
    RATE_EQUALITY_TOL,
    Config,
    NetworkParams,
    apply_jump,
    model_constants,
    peak_time_from_rates,
    total_rate,
)
from .statespace import RateMatrix, invariant_measure

__all__ = [
    "Kernel",
    "Schedule",
    "PathFunctional",
    "RatioReport",
    "RatioDegenerateError",
    "kernel",
    "semigroup_apply",
    "no_jump_prob",
    "single_spike_prob",
    "peak_time",
    "default_t_grid",
    "kernel_ratios",
    "multi_time_expectation",
]

POISSON_TAIL = 1e-14
KERNEL_CLAMP = -1e-15


@dataclass(frozen=True)
class Kernel:
    """Transition matrix pi_t over a state space at one time."""

    t: float
    matrix: np.ndarray

    def row(self, state_index: int) -> np.ndarray:
        return self.matrix[state_index]


def _poisson_weights(mean: float, tail: float = POISSON_TAIL) -> np.ndarray:
    """Poisson pmf values 0..K with K the smallest index leaving tail mass
    below ``tail``; evaluated in log space so large means stay stable."""
    if mean <= 0.0:
        return np.array([1.0])
    k_hi = int(mean + 12.0 * math.sqrt(mean) + 60.0)
    while True:
        ks = np.arange(k_hi + 1)
        logs = -mean + ks * math.log(mean) - np.array(
            [math.lgamma(k + 1.0) for k in ks]
        )
        pmf = np.exp(logs)
        cum = np.cumsum(pmf)
        idx = int(np.searchsorted(cum, 1.0 - tail))
        if idx < len(pmf):
            return pmf[: idx + 1]
        # the cumulative sum can saturate below 1 - tail from rounding
        # alone; accept once the terminal term bounds the true tail by a
        # geometric series well under the target
        ratio = mean / (k_hi + 1.0)
        if ratio < 0.5 and pmf[-1] / (1.0 - ratio) < tail:
            return pmf
        k_hi *= 2


def kernel(rate_matrix: RateMatrix, t: float) -> Kernel:
    """pi_t by uniformization; rows renormalized, entries clamped at 0."""
    if t < 0:
        raise ValueError("kernel time must be nonnegative")
    Q = rate_matrix.Q
    n = Q.shape[0]
    lam = rate_matrix.uniformization_rate
    if t == 0.0 or lam == 0.0:
        return Kernel(t=float(t), matrix=np.eye(n))
    weights = _poisson_weights(lam * t)
    P = np.eye(n) + Q / lam
    acc = weights[0] * np.eye(n)
    term = np.eye(n)
    for w in weights[1:]:
        term = term @ P
        acc += w * term
    if acc.min() < KERNEL_CLAMP:
        raise FloatingPointError(
            f"kernel entry {acc.min():.3e} below clamp threshold {KERNEL_CLAMP}"
        )
    np.clip(acc, 0.0, None, out=acc)
    acc /= acc.sum(axis=1, keepdims=True)
    return Kernel(t=float(t), matrix=acc)


def semigroup_apply(rate_matrix: RateMatrix, t: float, f_values) -> np.ndarray:
    """(P_t f) as a vector over the space, for f given as a state vector."""
    f = np.asarray(f_values, dtype=float)
    return kernel(rate_matrix, t).matrix @ f


def no_jump_prob(x: Config, s: float, p: NetworkParams) -> float:
    """P(no spike in [0, s] | X_0 = x) = exp(-s phi_bar(x))."""
    if s < 0:
        raise ValueError("window length must be nonnegative")
    return math.exp(-s * float(total_rate(x, p)))


def single_spike_prob(x: Config, i: int, s: float, p: NetworkParams) -> float:
    """P(exactly one spike in [0, s], fired by neuron i | X_0 = x).

    With a = phi_bar(x) and b = phi_bar(jump(x, i)):

        phi(x^i) / (a - b) * (exp(-s b) - exp(-s a))   when a != b
        s * phi(x^i) * exp(-s a)                        when a == b

    branching at |a - b| <= RATE_EQUALITY_TOL.
    """
    if s < 0:
        raise ValueError("window length must be nonnegative")
    a = float(total_rate(x, p))
    b = float(total_rate(apply_jump(x, i, p), p))
    phi_i = float(p.rate_of_level(x.levels[i]))
    if abs(a - b) <= RATE_EQUALITY_TOL:
        return s * phi_i * math.exp(-s * a)
    return phi_i / (a - b) * (math.exp(-s * b) - math.exp(-s * a))


def peak_time(x: Config, i: int, p: NetworkParams) -> float:
    """Window length maximizing single_spike_prob(x, i, .)."""
    a = float(total_rate(x, p))
    b = float(total_rate(apply_jump(x, i, p), p))
    return peak_time_from_rates(a, b)


class RatioDegenerateError(RuntimeError):
    """Raised when a kernel ratio has positive numerator over zero mass."""


@dataclass(frozen=True)
class RatioReport:
    """Empirical suprema of the two kernel-ratio families on a grid.

    * ``c11_hat``: max over u <= t, states x, y of pi_u(x,y) / pi_t(x,y)
    * ``c12_hat``: max over u <= t, states x, neurons i, y of
      pi_u(jump(x,i), y)^2 / pi_t(x,y); for t below the global peak time
      the target y = jump(x, i) is excluded (the ratio is only claimed
      off that atom there)
    * ``t_hat``: smallest grid time at which every kernel entry exceeds
      half the minimal invariant mass
    """

    c11_hat: float
    c12_hat: float
    c11_argmax: tuple
    c12_argmax: tuple
    t_hat: float
    t0_global: float
    e_min: float
    t_grid: tuple
    u_resolution: int


def default_t_grid(t_min: float = 0.05, t_max: float = 20.0, n: int = 25) -> tuple:
    """Geometric grid spanning [t_min, t_max]."""
    return tuple(float(v) for v in np.geomspace(t_min, t_max, n))


def kernel_ratios(
    rate_matrix: RateMatrix,
    t_grid: Sequence[float] | None = None,
    u_resolution: int = 64,
) -> RatioReport:
    """Scan the kernel-ratio families over t_grid x linspace(0, t, u_res)."""
    if t_grid is None:
        t_grid = default_t_grid()
    t_grid = tuple(sorted(float(t) for t in t_grid))
    if not t_grid or t_grid[0] <= 0:
        raise ValueError("t_grid must contain positive times")

    space = rate_matrix.space
    p = space.params
    n = len(space)
    consts = model_constants(p, space)
    t0 = consts.t0_global
    e_min = invariant_measure(rate_matrix).e_min

    jump_to = space.targets  # (n_neurons, n_states)

    c11_best, c11_arg = -math.inf, ()
    c12_best, c12_arg = -math.inf, ()
    t_hat = math.nan

    for t in t_grid:
        K_t = kernel(rate_matrix, t).matrix
        if math.isnan(t_hat) and K_t.min() > e_min / 2.0:
            t_hat = t
        for u in np.linspace(0.0, t, u_resolution):
            K_u = kernel(rate_matrix, float(u)).matrix
            zero_den = K_t <= 0.0
            num11 = K_u
            if np.any(zero_den & (num11 >= 1e-300)):
                xi, yi = np.argwhere(zero_den & (num11 >= 1e-300))[0]
                raise RatioDegenerateError(
                    f"pi_{u}(x,y) > 0 but pi_{t}(x,y) = 0 at x={space.states[xi]}, "
                    f"y={space.states[yi]}"
                )
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(zero_den, 0.0, num11 / np.where(zero_den, 1.0, K_t))
            k = int(np.argmax(ratio))
            if ratio.flat[k] > c11_best:
                c11_best = float(ratio.flat[k])
                c11_arg = (float(u), float(t), k // n, k % n)

            for i in range(p.n_neurons):
                shifted = K_u[jump_to[i], :] ** 2  # pi_u(jump(x,i), y)^2 as (x,y)
                mask = zero_den.copy()
                if t < t0:
                    for s in range(n):
                        shifted[s, jump_to[i, s]] = 0.0
                if np.any(mask & (shifted >= 1e-300)):
                    xi, yi = np.argwhere(mask & (shifted >= 1e-300))[0]
                    raise RatioDegenerateError(
                        f"pi_{u}(jump(x,{i}),y)^2 > 0 but pi_{t}(x,y) = 0 at "
                        f"x={space.states[xi]}, y={space.states[yi]}"
                    )
                with np.errstate(divide="ignore", invalid="ignore"):
                    r2 = np.where(mask, 0.0, shifted / np.where(mask, 1.0, K_t))
                k = int(np.argmax(r2))
                if r2.flat[k] > c12_best:
                    c12_best = float(r2.flat[k])
                    c12_arg = (float(u), float(t), k // n, i, k % n)

    return RatioReport(
        c11_hat=c11_best,
        c12_hat=c12_best,
        c11_argmax=c11_arg,
        c12_argmax=c12_arg,
        t_hat=t_hat,
        t0_global=t0,
        e_min=e_min,
        t_grid=t_grid,
        u_resolution=u_resolution,
    )


@dataclass(frozen=True)
class Schedule:
    """Nondecreasing observation times starting at 0."""

    times: tuple

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        if not times:
            raise ValueError("schedule needs at least one time")
        if times[0] != 0.0:
            raise ValueError("schedules start at time 0")
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError("schedule times must be nondecreasing")
        object.__setattr__(self, "times", times)

    @property
    def n(self) -> int:
        return len(self.times)

    @property
    def increments(self) -> tuple:
        """(t_1 - 0, t_2 - t_1, ...); the first entry is always 0."""
        return tuple(b - a for a, b in zip((0.0,) + self.times, self.times))


@dataclass(frozen=True)
class PathFunctional:
    """A functional of (X_{t_1}, ..., X_{t_n}) with per-time state vectors.

    Kinds:
      * ``product``:            prod_k g_k(X_{t_k})
      * ``sum``:                sum_k h_k(X_{t_k})
      * ``exp_sum``:            exp(lam * sum_k h_k(X_{t_k}))
      * ``entropy_integrand``:  exp(lam * sum h) * (lam * sum h)
    """

    kind: str
    factors: tuple
    lam: float = 1.0

    def __post_init__(self):
        if self.kind not in ("product", "sum", "exp_sum", "entropy_integrand"):
            raise ValueError(f"unknown functional kind {self.kind!r}")
        object.__setattr__(
            self,
            "factors",
            tuple(np.asarray(f, dtype=float) for f in self.factors),
        )


def _product_expectation(kernels: list, factors: list, x0: int) -> float:
    """Backward transfer recursion for E[prod_k g_k(X_{t_k})]."""
    v = factors[-1].copy()
    for k in range(len(factors) - 2, -1, -1):
        v = factors[k] * (kernels[k + 1] @ v)
    return float(v[x0])


def multi_time_expectation(
    rate_matrix: RateMatrix,
    schedule: Schedule,
    x0_index: int,
    functional: PathFunctional,
) -> float:
    """Exact expectation of the functional along the schedule from state
    x0_index, via transfer-matrix recursions over the increments."""
    n_states = rate_matrix.dim
    times = schedule.times
    n = len(times)
    factors = list(functional.factors)
    if len(factors) != n:
        raise ValueError(
            f"functional carries {len(factors)} factors for {n} schedule times"
        )
    for f in factors:
        if f.shape != (n_states,):
            raise ValueError("each factor must be a state vector")

    cache: dict = {}

    def k_matrix(dt: float) -> np.ndarray:
        if dt not in cache:
            cache[dt] = kernel(rate_matrix, dt).matrix
        return cache[dt]

    kernels = [None] + [k_matrix(times[k] - times[k - 1]) for k in range(1, n)]

    if functional.kind == "product":
        return _product_expectation(kernels, factors, x0_index)

    if functional.kind == "sum":
        row = np.zeros(n_states)
        row[x0_index] = 1.0
        total = float(row @ factors[0])
        for k in range(1, n):
            row = row @ kernels[k]
            total += float(row @ factors[k])
        return total

    lam = functional.lam
    exp_factors = [np.exp(lam * h) for h in factors]
    if functional.kind == "exp_sum":
        return _product_expectation(kernels, exp_factors, x0_index)

    # entropy integrand: one inserted-factor product recursion per slot
    total = 0.0
    for j in range(n):
        inserted = list(exp_factors)
        inserted[j] = exp_factors[j] * (lam * factors[j])
        total += _product_expectation(kernels, inserted, x0_index)
    return total

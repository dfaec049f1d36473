"""Finite network of interacting neurons driven by a pure jump Markov process.

Each of the N neurons carries a membrane potential in [0, m].  Neuron j
spikes at rate phi(x^j) depending only on its own potential; when it
spikes its potential resets to 0 and every other neuron i receives the
synaptic weight W[j][i], except that increments pushing a potential
above the cap m are discarded (the potential is left unchanged).

The process generator acting on a function f is

    (G f)(x) = sum_j phi(x^j) * (f(jump(x, j)) - f(x))

and the associated carre du champ operator is

    Gamma(f, f)(x) = 1/2 * sum_j phi(x^j) * (f(jump(x, j)) - f(x))**2.

All potentials, weights and the cap are rationals sharing one common
denominator fixed at parameter validation; configurations are stored as
scaled integers so state enumeration and rate bookkeeping are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

__all__ = [
    "ValidationError",
    "IntensitySpec",
    "NetworkParams",
    "Config",
    "ModelConstants",
    "apply_jump",
    "total_rate",
    "generator_apply",
    "carre_du_champ",
    "peak_time_from_rates",
    "model_constants",
    "params_from_json",
    "params_to_json",
]

#: equal-rate branch cutoff shared by the closed-form jump probabilities
RATE_EQUALITY_TOL = 1e-12


class ValidationError(ValueError):
    """Raised when parameters or configurations violate the model contract."""


def _as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and 'p/q' strings to an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    if isinstance(value, float):
        raise ValidationError(
            f"refusing float {value!r}: pass rationals as 'p/q' strings or ints"
        )
    raise ValidationError(f"cannot interpret {value!r} as a rational")


@dataclass(frozen=True)
class IntensitySpec:
    """Spike intensity phi as a function of the neuron's own potential.

    Supported kinds:

    * ``constant``: phi(v) = a, with ``a = params[0]``
    * ``affine``:   phi(v) = a + b*v, with ``(a, b) = params``, b >= 0
    * ``table``:    explicit map value -> rate, ``params`` holds the
      sorted (value, rate) pairs; evaluation at a value missing from the
      table is an error
    """

    kind: str
    params: tuple

    @staticmethod
    def constant(rate) -> "IntensitySpec":
        return IntensitySpec("constant", (_as_fraction(rate),))

    @staticmethod
    def affine(a, b) -> "IntensitySpec":
        return IntensitySpec("affine", (_as_fraction(a), _as_fraction(b)))

    @staticmethod
    def table(entries) -> "IntensitySpec":
        items = entries.items() if hasattr(entries, "items") else entries
        pairs = sorted((_as_fraction(v), _as_fraction(r)) for v, r in items)
        values = [v for v, _ in pairs]
        if len(set(values)) != len(values):
            raise ValidationError("duplicate potential value in intensity table")
        return IntensitySpec("table", tuple(pairs))

    def rate(self, v: Fraction) -> Fraction:
        """Exact rate phi(v)."""
        if self.kind == "constant":
            return self.params[0]
        if self.kind == "affine":
            a, b = self.params
            return a + b * v
        if self.kind == "table":
            for value, r in self.params:
                if value == v:
                    return r
            raise ValidationError(
                f"intensity table has no entry for potential {v}; "
                "the table must cover every reachable potential value"
            )
        raise ValidationError(f"unknown intensity kind {self.kind!r}")

    def max_rate(self, cap: Fraction) -> Fraction:
        """Exact upper bound for phi on [0, cap] (used as dominating rate)."""
        if self.kind == "constant":
            return self.params[0]
        if self.kind == "affine":
            a, b = self.params
            return a + b * cap
        if self.kind == "table":
            return max(r for _, r in self.params)
        raise ValidationError(f"unknown intensity kind {self.kind!r}")

    def check_lower_bound(self, delta: Fraction, cap: Fraction) -> None:
        """Verify phi >= delta on its evaluable domain within [0, cap]."""
        if self.kind == "constant":
            ok = self.params[0] >= delta
        elif self.kind == "affine":
            a, b = self.params
            if b < 0:
                raise ValidationError("affine intensity needs slope b >= 0")
            ok = a >= delta
        elif self.kind == "table":
            for value, r in self.params:
                if value < 0 or value > cap:
                    raise ValidationError(
                        f"intensity table value {value} outside [0, {cap}]"
                    )
            ok = all(r >= delta for _, r in self.params)
        else:
            raise ValidationError(f"unknown intensity kind {self.kind!r}")
        if not ok:
            raise ValidationError(
                f"intensity must stay >= delta = {delta} on [0, {cap}]"
            )


def _lcm(a: int, b: int) -> int:
    return a // math.gcd(a, b) * b


@dataclass(frozen=True)
class NetworkParams:
    """Validated network: size, cap, synaptic weights, intensity, rate floor.

    ``weights[j][i]`` is the potential increment neuron i receives when
    neuron j spikes; the diagonal is ignored (the spiker resets to 0).
    ``scale`` is the common denominator of the cap and all weights; every
    configuration lives on the lattice {0, 1/scale, ..., cap}.
    """

    n_neurons: int
    cap: Fraction
    weights: tuple
    intensity: IntensitySpec
    delta: Fraction
    scale: int = field(init=False, compare=False)
    cap_level: int = field(init=False, compare=False)
    weight_levels: tuple = field(init=False, compare=False)

    def __post_init__(self):
        n = self.n_neurons
        if n < 1:
            raise ValidationError("need at least one neuron")
        cap = _as_fraction(self.cap)
        delta = _as_fraction(self.delta)
        if cap <= 0:
            raise ValidationError("cap m must be positive")
        if delta <= 0:
            raise ValidationError("rate floor delta must be positive")
        if len(self.weights) != n or any(len(row) != n for row in self.weights):
            raise ValidationError("weights must be an N x N matrix")
        rows = tuple(tuple(_as_fraction(w) for w in row) for row in self.weights)
        flat = [w for row in rows for w in row]
        if any(w < 0 for w in flat):
            raise ValidationError("synaptic weights must be nonnegative")
        off_diag = [rows[j][i] for j in range(n) for i in range(n) if i != j]
        if n > 1 and all(w == 0 for w in off_diag):
            raise ValidationError("at least one off-diagonal weight must be positive")
        self.intensity.check_lower_bound(delta, cap)

        scale = cap.denominator
        for w in flat:
            scale = _lcm(scale, w.denominator)
        object.__setattr__(self, "cap", cap)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "weights", rows)
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "cap_level", int(cap * scale))
        object.__setattr__(
            self,
            "weight_levels",
            tuple(tuple(int(w * scale) for w in row) for row in rows),
        )

    def rate_of_level(self, level: int) -> Fraction:
        """phi evaluated at the lattice potential level/scale."""
        return self.intensity.rate(Fraction(level, self.scale))


@dataclass(frozen=True)
class Config:
    """One network configuration: scaled-integer potentials on the lattice."""

    levels: tuple
    scale: int

    @staticmethod
    def from_potentials(p: NetworkParams, values: Iterable) -> "Config":
        vals = [_as_fraction(v) for v in values]
        if len(vals) != p.n_neurons:
            raise ValidationError(f"expected {p.n_neurons} potentials, got {len(vals)}")
        levels = []
        for v in vals:
            if v < 0 or v > p.cap:
                raise ValidationError(f"potential {v} outside [0, {p.cap}]")
            lv = v * p.scale
            if lv.denominator != 1:
                raise ValidationError(
                    f"potential {v} is not on the lattice with denominator {p.scale} "
                    "fixed by the cap and weights"
                )
            levels.append(int(lv))
        return Config(tuple(levels), p.scale)

    @property
    def potentials(self) -> tuple:
        return tuple(Fraction(lv, self.scale) for lv in self.levels)

    def __str__(self):
        return "(" + ",".join(str(v) for v in self.potentials) + ")"


def apply_jump(x: Config, j: int, p: NetworkParams) -> Config:
    """Configuration after neuron j spikes: j resets, others gain W[j][i] if
    the result stays at or below the cap, otherwise keep their potential."""
    if not 0 <= j < p.n_neurons:
        raise ValidationError(f"neuron index {j} out of range")
    levels = list(x.levels)
    wrow = p.weight_levels[j]
    for i in range(p.n_neurons):
        if i == j:
            levels[i] = 0
        else:
            cand = levels[i] + wrow[i]
            if cand <= p.cap_level:
                levels[i] = cand
    return Config(tuple(levels), x.scale)


def total_rate(x: Config, p: NetworkParams) -> Fraction:
    """Exact total spike rate phi_bar(x) = sum_j phi(x^j)."""
    return sum((p.rate_of_level(lv) for lv in x.levels), start=Fraction(0))


def generator_apply(f: Callable[[Config], object], x: Config, p: NetworkParams):
    """(G f)(x); exact when f returns exact numbers."""
    fx = f(x)
    acc = 0
    for j in range(p.n_neurons):
        rate = p.rate_of_level(x.levels[j])
        acc += rate * (f(apply_jump(x, j, p)) - fx)
    return acc


def carre_du_champ(f: Callable[[Config], object], x: Config, p: NetworkParams):
    """Gamma(f, f)(x) = 1/2 sum_j phi(x^j) (f(jump(x,j)) - f(x))^2."""
    fx = f(x)
    acc = 0
    for j in range(p.n_neurons):
        rate = p.rate_of_level(x.levels[j])
        diff = f(apply_jump(x, j, p)) - fx
        acc += rate * diff * diff
    return acc / 2


def peak_time_from_rates(a: float, b: float) -> float:
    """Time at which the one-spike window probability peaks, given the total
    rates a (before) and b (after) the spike; equal-rate branch at |a-b| <=
    RATE_EQUALITY_TOL."""
    if abs(a - b) <= RATE_EQUALITY_TOL:
        return 1.0 / a
    return (math.log(a) - math.log(b)) / (a - b)


@dataclass(frozen=True)
class ModelConstants:
    """Scalar constants of the network used by the entropy inequalities.

    * ``M``: sup over the invariant domain of (phi_bar(x) + 1)^2
    * ``phi_bar_max``: sup of the total rate over the invariant domain
    * ``t0_global``: min over states x and neurons i of the peak time of
      the single-spike window probability
    * ``d_lip``: M * (max weight)^2 / 2 * exp(2m), the growth factor of
      exponentials of 1-Lipschitz coordinate functions under jumps
    * ``w_max``: largest synaptic weight
    """

    M: float
    phi_bar_max: float
    t0_global: float
    d_lip: float
    w_max: float
    n_neurons: int


def model_constants(p: NetworkParams, space) -> ModelConstants:
    """Compute the scalar constants over the states of ``space`` (normally
    the invariant domain)."""
    phi_bar_max = Fraction(0)
    for x in space.states:
        phi_bar_max = max(phi_bar_max, total_rate(x, p))
    M = float((phi_bar_max + 1) ** 2)

    t0 = math.inf
    for x in space.states:
        a = float(total_rate(x, p))
        for i in range(p.n_neurons):
            b = float(total_rate(apply_jump(x, i, p), p))
            t0 = min(t0, peak_time_from_rates(a, b))

    w_max = max(w for row in p.weights for w in row)
    d_lip = float(M) * float(w_max) ** 2 / 2.0 * math.exp(2.0 * float(p.cap))
    return ModelConstants(
        M=M,
        phi_bar_max=float(phi_bar_max),
        t0_global=t0,
        d_lip=d_lip,
        w_max=float(w_max),
        n_neurons=p.n_neurons,
    )


def _intensity_from_json(obj) -> IntensitySpec:
    kind = obj.get("kind")
    if kind == "constant":
        return IntensitySpec.constant(obj["rate"])
    if kind == "affine":
        return IntensitySpec.affine(obj["a"], obj["b"])
    if kind == "table":
        return IntensitySpec.table(obj["values"])
    raise ValidationError(f"unknown intensity kind {kind!r}")


def _intensity_to_json(spec: IntensitySpec) -> dict:
    if spec.kind == "constant":
        return {"kind": "constant", "rate": str(spec.params[0])}
    if spec.kind == "affine":
        return {"kind": "affine", "a": str(spec.params[0]), "b": str(spec.params[1])}
    if spec.kind == "table":
        return {"kind": "table", "values": {str(v): str(r) for v, r in spec.params}}
    raise ValidationError(f"unknown intensity kind {spec.kind!r}")


def params_from_json(obj: dict) -> NetworkParams:
    """Build NetworkParams from the JSON schema used by the CLI config files.

    Rationals appear as 'p/q' strings or ints::

        {"n_neurons": 2, "cap": "2", "weights": [["0","1"],["1","0"]],
         "intensity": {"kind": "affine", "a": "1", "b": "1"}, "delta": "1"}
    """
    try:
        n = int(obj["n_neurons"])
        cap = _as_fraction(obj["cap"])
        weights = tuple(tuple(_as_fraction(w) for w in row) for row in obj["weights"])
        intensity = _intensity_from_json(obj["intensity"])
        delta = _as_fraction(obj["delta"])
    except KeyError as exc:
        raise ValidationError(f"network config missing field {exc}") from exc
    return NetworkParams(n, cap, weights, intensity, delta)


def params_to_json(p: NetworkParams) -> dict:
    return {
        "n_neurons": p.n_neurons,
        "cap": str(p.cap),
        "weights": [[str(w) for w in row] for row in p.weights],
        "intensity": _intensity_to_json(p.intensity),
        "delta": str(p.delta),
    }

"""Reachable state spaces, rate matrices and invariant measures.

States are enumerated by breadth-first closure of the jump map starting
from an initial configuration, so the resulting space is always closed
under jumps and the enumeration order is deterministic.  The invariant
domain is the unique closed strongly connected component of the jump
digraph; the chain restricted to it is irreducible and positive
recurrent, and its invariant measure charges every state.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .model import Config, NetworkParams, ValidationError, apply_jump

__all__ = [
    "EnumerationBudgetError",
    "MultipleClosedClassesError",
    "SingularSolveError",
    "StateSpace",
    "RateMatrix",
    "Distribution",
    "InvariantMeasureResult",
    "enumerate_reachable",
    "invariant_domain",
    "build_rate_matrix",
    "invariant_measure",
]

DEFAULT_BUDGET = 10**6


class EnumerationBudgetError(RuntimeError):
    """Raised when the reachable closure exceeds the state budget."""


class MultipleClosedClassesError(RuntimeError):
    """Raised when the jump digraph has more than one closed class."""


class SingularSolveError(RuntimeError):
    """Raised when the invariant-measure solve fails beyond tolerance."""


@dataclass(frozen=True)
class StateSpace:
    """A jump-closed list of configurations with index lookup and targets.

    ``targets[j, s]`` is the index of the configuration reached when
    neuron j spikes in state s; closure guarantees it is always valid.
    """

    params: NetworkParams
    states: tuple
    index: dict
    targets: np.ndarray

    def __len__(self):
        return len(self.states)

    def state_index(self, x: Config) -> int:
        try:
            return self.index[x]
        except KeyError:
            raise KeyError(f"configuration {x} not in this state space") from None


def _close_under_jumps(p: NetworkParams, seeds, budget: int):
    """BFS closure; returns (states, index) in discovery order."""
    states = []
    index = {}
    queue = deque()
    for x0 in seeds:
        if x0 not in index:
            index[x0] = len(states)
            states.append(x0)
            queue.append(x0)
    while queue:
        x = queue.popleft()
        for j in range(p.n_neurons):
            y = apply_jump(x, j, p)
            if y not in index:
                if len(states) >= budget:
                    raise EnumerationBudgetError(
                        f"reachable closure exceeded budget of {budget} states"
                    )
                index[y] = len(states)
                states.append(y)
                queue.append(y)
    return states, index


def _build_space(p: NetworkParams, states, index) -> StateSpace:
    n = len(states)
    targets = np.empty((p.n_neurons, n), dtype=np.int64)
    for s, x in enumerate(states):
        for j in range(p.n_neurons):
            targets[j, s] = index[apply_jump(x, j, p)]
    return StateSpace(params=p, states=tuple(states), index=dict(index), targets=targets)


def enumerate_reachable(
    p: NetworkParams, x0: Config, budget: int = DEFAULT_BUDGET
) -> StateSpace:
    """Closure of {x0} under all single jumps, in BFS discovery order."""
    if len(x0.levels) != p.n_neurons or x0.scale != p.scale:
        raise ValidationError("initial configuration does not match the parameters")
    states, index = _close_under_jumps(p, [x0], budget)
    return _build_space(p, states, index)


def _strongly_connected_components(n_states: int, edges) -> list:
    """Iterative Tarjan; edges[s] is an iterable of successor indices.
    Components are returned in reverse topological order."""
    index_counter = 0
    stack = []
    on_stack = [False] * n_states
    indices = [-1] * n_states
    lowlink = [0] * n_states
    components = []

    for root in range(n_states):
        if indices[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                indices[v] = lowlink[v] = index_counter
                index_counter += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            succ = edges[v]
            for k in range(pi, len(succ)):
                w = succ[k]
                if indices[w] == -1:
                    work[-1] = (v, k + 1)
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    lowlink[v] = min(lowlink[v], indices[w])
            if recurse:
                continue
            if lowlink[v] == indices[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                components.append(comp)
            work.pop()
            if work:
                u, _ = work[-1]
                lowlink[u] = min(lowlink[u], lowlink[v])
    return components


def invariant_domain(
    p: NetworkParams, x0: Config, budget: int = DEFAULT_BUDGET
) -> StateSpace:
    """The unique closed strongly connected component reachable from x0.

    Raises MultipleClosedClassesError when the jump digraph splits into
    several closed classes (the invariant measure would not be unique).
    """
    full = enumerate_reachable(p, x0, budget)
    n = len(full)
    edges = [sorted(set(int(full.targets[j, s]) for j in range(p.n_neurons)))
             for s in range(n)]
    components = _strongly_connected_components(n, edges)

    comp_of = [0] * n
    for ci, comp in enumerate(components):
        for s in comp:
            comp_of[s] = ci
    closed = []
    for ci, comp in enumerate(components):
        if all(comp_of[w] == ci for s in comp for w in edges[s]):
            closed.append(comp)
    if len(closed) != 1:
        reps = [str(full.states[min(comp)]) for comp in closed]
        raise MultipleClosedClassesError(
            f"jump digraph has {len(closed)} closed classes "
            f"(representatives {', '.join(reps)}); invariant measure not unique"
        )

    keep = sorted(closed[0])
    states = [full.states[s] for s in keep]
    index = {x: k for k, x in enumerate(states)}
    return _build_space(p, states, index)


@dataclass(frozen=True)
class RateMatrix:
    """Dense generator matrix Q over a state space.

    Off-diagonal q(x, y) sums phi(x^j) over the neurons j whose jump maps
    x to y; jumps with jump(x, j) = x contribute nothing.  Diagonals make
    float row sums exactly zero; the construction is exact in rationals
    before conversion.
    """

    space: StateSpace
    Q: np.ndarray

    @property
    def dim(self) -> int:
        return self.Q.shape[0]

    @property
    def uniformization_rate(self) -> float:
        """Largest total exit rate, Lambda = max |q(x, x)|."""
        return float(np.max(-np.diag(self.Q))) if self.dim else 0.0

    def exact_rows(self) -> list:
        """Off-diagonal rates as exact Fractions, one dict per row."""
        p = self.space.params
        rows = []
        for s, x in enumerate(self.space.states):
            row = {}
            for j in range(p.n_neurons):
                t = int(self.space.targets[j, s])
                if t != s:
                    row[t] = row.get(t, Fraction(0)) + p.rate_of_level(x.levels[j])
            rows.append(row)
        return rows


def build_rate_matrix(space: StateSpace) -> RateMatrix:
    """Assemble Q from the enumerated space; rationals first, floats after."""
    p = space.params
    n = len(space)
    Q = np.zeros((n, n))
    for s, x in enumerate(space.states):
        acc = {}
        for j in range(p.n_neurons):
            t = int(space.targets[j, s])
            if t != s:
                acc[t] = acc.get(t, Fraction(0)) + p.rate_of_level(x.levels[j])
        row_sum = 0.0
        for t, rate in acc.items():
            r = float(rate)
            Q[s, t] = r
            row_sum += r
        Q[s, s] = -row_sum
    return RateMatrix(space=space, Q=Q)


@dataclass(frozen=True)
class Distribution:
    """A probability vector over the states of a space."""

    weights: np.ndarray

    def min_weight(self) -> float:
        return float(np.min(self.weights))


@dataclass(frozen=True)
class InvariantMeasureResult:
    distribution: Distribution
    residual: float
    e_min: float
    method: str


def _solve_dense(Q: np.ndarray) -> np.ndarray:
    """Solve mu Q = 0, sum(mu) = 1 by replacing one balance equation with
    the normalization; one refinement pass keeps the residual near machine
    precision."""
    n = Q.shape[0]
    A = Q.T.copy()
    A[0, :] = 1.0
    b = np.zeros(n)
    b[0] = 1.0
    mu = np.linalg.solve(A, b)
    r = b - A @ mu
    mu = mu + np.linalg.solve(A, r)
    return mu


def _solve_power(Q: np.ndarray, tol: float = 1e-15, max_iters: int = 2_000_000):
    lam = float(np.max(-np.diag(Q)))
    if lam == 0.0:
        return np.full(Q.shape[0], 1.0 / Q.shape[0])
    P = np.eye(Q.shape[0]) + Q / lam
    v = np.full(Q.shape[0], 1.0 / Q.shape[0])
    for _ in range(max_iters):
        w = v @ P
        w /= w.sum()
        if np.abs(w - v).sum() <= tol:
            return w
        v = w
    return v


def invariant_measure(
    rate_matrix: RateMatrix,
    dense_cutoff: int = 2000,
    residual_tol: float = 1e-12,
    method: str = "auto",
) -> InvariantMeasureResult:
    """Invariant probability measure of Q: dense solve up to ``dense_cutoff``
    states, power iteration on the uniformized chain beyond."""
    Q = rate_matrix.Q
    n = Q.shape[0]
    if method == "auto":
        method = "dense" if n <= dense_cutoff else "power"
    if method == "dense":
        mu = _solve_dense(Q)
    elif method == "power":
        mu = _solve_power(Q)
    else:
        raise ValueError(f"unknown method {method!r}")

    if np.any(mu < -1e-10):
        raise SingularSolveError(
            f"invariant measure solve produced negative mass {mu.min():.3e}"
        )
    mu = np.clip(mu, 0.0, None)
    mu = mu / mu.sum()
    residual = float(np.max(np.abs(mu @ Q)))
    if residual > residual_tol:
        raise SingularSolveError(
            f"invariant measure residual {residual:.3e} exceeds {residual_tol:.1e}"
        )
    return InvariantMeasureResult(
        distribution=Distribution(weights=mu),
        residual=residual,
        e_min=float(mu.min()),
        method=method,
    )

"""Complex-balance membership, tree constants, steady states, trajectories.

A positive rate vector makes a weakly reversible graph complex balanced
exactly when the per-linkage-class tree constants K_i (rooted
spanning-tree weight sums, computed as principal minors of the weighted
out-Laplacian) are consistent with a positive state: x^(y_i - y_r) =
K_i / K_r within each class.  Consistency of that log-linear system is
decided exactly through multiplicative identities: for every rational
kernel vector of the transposed exponent matrix, cleared to integers,
the corresponding product of tree-constant ratios must equal one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .egraph import EGraph, NotWeaklyReversibleError, is_weakly_reversible, linkage_classes
from .equiv import EdgeVector, mass_action_rhs, state_power
from .exactla import (
    RationalMatrix,
    Vec,
    det,
    frac,
    kernel_basis,
    orthogonalize,
    subspace_from_span,
    vec,
)
from .jsonutil import rationals_to_json

_ZERO = Fraction(0)
_ONE = Fraction(1)

NEWTON_GRAD_TOL = 1e-12
NEWTON_MAX_ITER = 200
CB_REL_TOL = 1e-10


class ConvergenceError(RuntimeError):
    """An iterative solver hit its cap; the last iterate is attached."""

    def __init__(self, message: str, last_iterate: tuple[float, ...]):
        super().__init__(message)
        self.last_iterate = last_iterate


@dataclass(frozen=True)
class TreeConstants:
    """Per-vertex rooted spanning-tree weight sums, grouped by linkage class.

    Unscaled principal-minor values; only within-class ratios are
    meaningful, and those are invariant under per-class uniform scaling
    of the rate vector.
    """

    values: tuple[Fraction, ...]
    classes: tuple[tuple[int, ...], ...]

    def ratio(self, i: int, j: int) -> Fraction:
        return self.values[i] / self.values[j]


def tree_constants(g: EGraph, k: EdgeVector) -> TreeConstants:
    """Matrix-Tree constants of a weakly reversible, positively weighted graph.

    K_i is the principal minor of the class's weighted out-Laplacian with
    row and column i removed: the weight sum of spanning trees oriented
    toward vertex i.
    """
    if not is_weakly_reversible(g):
        raise NotWeaklyReversibleError("tree constants require a weakly reversible graph")
    if not k.is_strictly_positive:
        raise ValueError("tree constants require strictly positive rates")
    values: list[Fraction] = [_ZERO] * g.num_vertices
    classes = [tuple(c) for c in linkage_classes(g)]
    for cls in classes:
        pos = {v: i for i, v in enumerate(cls)}
        m = len(cls)
        lap = [[_ZERO] * m for _ in range(m)]
        for ei, (s, t) in enumerate(g.edges):
            if s in pos:
                lap[pos[s]][pos[s]] += k.values[ei]
                lap[pos[s]][pos[t]] -= k.values[ei]
        for v in cls:
            i = pos[v]
            minor = [
                [lap[r][c] for c in range(m) if c != i] for r in range(m) if r != i
            ]
            values[v] = det(RationalMatrix.from_rows(minor, cols=m - 1))
            if values[v] <= 0:
                raise RuntimeError("tree constant must be positive on a weakly reversible class")
    return TreeConstants(tuple(values), tuple(classes))


@dataclass(frozen=True)
class SteadyState:
    """A positive steady state, exact when derivable in the rationals."""

    x: tuple
    mode: str  # "exact" | "approximate"
    residual: float | None = None

    def to_json_dict(self) -> dict:
        if self.mode == "exact":
            xs = rationals_to_json(self.x)
        else:
            xs = [float(v) for v in self.x]
        return {"mode": self.mode, "x": xs, "residual": self.residual}

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_json_dict(), indent=indent)


@dataclass(frozen=True)
class ToricDecision:
    """Outcome of the complex-balance membership test, with witness when true."""

    toric: bool
    witness: SteadyState | None = None
    constants: TreeConstants | None = None
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.toric


def _relation_system(g: EGraph, tc: TreeConstants) -> tuple[list[Vec], list[Fraction]]:
    """Rows (y_i - y_r) and ratios K_i/K_r over each linkage class."""
    rows: list[Vec] = []
    ratios: list[Fraction] = []
    for cls in tc.classes:
        r = cls[0]
        for i in cls[1:]:
            rows.append(tuple(a - b for a, b in zip(g.vertices[i], g.vertices[r])))
            ratios.append(tc.ratio(i, r))
    return rows, ratios


def _consistent(rows: list[Vec], ratios: list[Fraction]) -> bool:
    """Exact consistency of sum_j row_ij * u_j = log(ratio_i).

    The system is consistent iff every rational kernel vector of the
    transposed row matrix, cleared to integers, satisfies the
    multiplicative identity prod ratio_i^c_i = 1.
    """
    if not rows:
        return True
    mt = RationalMatrix.from_rows([[row[j] for row in rows] for j in range(len(rows[0]))],
                                  cols=len(rows))
    for c in kernel_basis(mt).basis:
        scale = math.lcm(*(x.denominator for x in c))
        prod = _ONE
        for ci, ratio in zip(c, ratios):
            e = int(ci * scale)
            if e:
                prod *= ratio**e
        if prod != 1:
            return False
    return True


def _int_nth_root(a: int, n: int) -> int | None:
    if a < 0:
        return None
    if a in (0, 1) or n == 1:
        return a
    lo, hi = 0, 1
    while hi**n < a:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if mid**n < a:
            lo = mid + 1
        else:
            hi = mid
    return lo if lo**n == a else None


def _fraction_nth_root(x: Fraction, n: int) -> Fraction | None:
    if n < 0:
        x = 1 / x
        n = -n
    num = _int_nth_root(x.numerator, n)
    den = _int_nth_root(x.denominator, n)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def _exact_witness(rows: list[Vec], ratios: list[Fraction], n: int) -> Vec | None:
    """Try to solve x^rows = ratios in positive rationals (free coordinates 1).

    Integer row operations act multiplicatively on the ratios, so the
    elimination stays exact; a pivot with coefficient d needs an exact
    rational d-th root to back-substitute, otherwise the exact path
    fails and the caller falls back to floats.
    """
    work: list[tuple[list[int], Fraction]] = []
    for row, ratio in zip(rows, ratios):
        scale = math.lcm(*(x.denominator for x in row)) if row else 1
        work.append(([int(x * scale) for x in row], ratio**scale))
    nrows = len(work)
    pivots: list[tuple[int, int]] = []
    r = 0
    for c in range(n):
        pivot = next((i for i in range(r, nrows) if work[i][0][c] != 0), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        prow, pratio = work[r]
        p = prow[c]
        for i in range(r + 1, nrows):
            irow, iratio = work[i]
            f = irow[c]
            if f:
                g_ = math.gcd(p, f)
                a, b = p // g_, f // g_
                if a < 0:
                    a, b = -a, -b
                new_row = [a * irow[j] - b * prow[j] for j in range(n)]
                work[i] = (new_row, iratio**a / pratio**b)
        pivots.append((r, c))
        r += 1
    for i in range(r, nrows):
        if work[i][1] != 1:
            return None  # inconsistent; caller should have checked already
    x = [_ONE] * n
    for r_idx, c in reversed(pivots):
        row, ratio = work[r_idx]
        rhs = ratio
        for j in range(c + 1, n):
            if row[j]:
                rhs /= x[j] ** row[j]
        root = _fraction_nth_root(rhs, row[c])
        if root is None:
            return None
        x[c] = root
    return tuple(x)


def is_toric(g: EGraph, k: EdgeVector) -> ToricDecision:
    """Decide whether (g, k) is complex balanced at some positive state.

    The decision itself is exact for any rational data.  The witness
    state is exact when back-substitution stays rational (always when
    every pivot has coefficient +-1), and a floating least-squares
    solution flagged "approximate" otherwise.
    """
    if not k.is_strictly_positive:
        raise ValueError("toric membership is defined for strictly positive rates")
    if not is_weakly_reversible(g):
        return ToricDecision(False, reason="graph is not weakly reversible")
    tc = tree_constants(g, k)
    rows, ratios = _relation_system(g, tc)
    if not _consistent(rows, ratios):
        return ToricDecision(False, constants=tc, reason="tree-constant ratios are inconsistent")
    exact = _exact_witness(rows, ratios, g.n)
    if exact is not None:
        return ToricDecision(True, witness=SteadyState(exact, "exact"), constants=tc)
    a = np.array([[float(x) for x in row] for row in rows], dtype=float)
    b = np.array([math.log(float(r)) for r in ratios], dtype=float)
    u, *_ = np.linalg.lstsq(a, b, rcond=None)
    x = tuple(float(v) for v in np.exp(u))
    res = _cb_relative_residual(g, k, x)
    return ToricDecision(True, witness=SteadyState(x, "approximate", residual=res), constants=tc)


def _vertex_flows(g: EGraph, k: EdgeVector, x: Sequence, exact: bool):
    powers = [state_power(x, v, exact) for v in g.vertices]
    outs = []
    ins = []
    for vi in range(g.num_vertices):
        out = sum(k.values[ei] * powers[vi] for ei in g.out_edges[vi])
        inc = sum(k.values[ei] * powers[g.edges[ei][0]] for ei in g.in_edges[vi])
        outs.append(out)
        ins.append(inc)
    return outs, ins


def _cb_relative_residual(g: EGraph, k: EdgeVector, x: Sequence) -> float:
    outs, ins = _vertex_flows(g, k, x, exact=False)
    worst = 0.0
    for o, i in zip(outs, ins):
        scale = max(abs(o), abs(i), 1e-300)
        worst = max(worst, abs(o - i) / scale)
    return worst


def check_complex_balanced_at(
    g: EGraph, k: EdgeVector, x: Sequence, rel_tol: float = CB_REL_TOL
) -> bool:
    """Per-vertex inflow equals outflow at state x.

    Exact comparison when the vertex coordinates are integers and both k
    and x are rational; otherwise a relative-tolerance check.
    """
    for xi in x:
        if not (xi > 0):
            raise ValueError("state must be strictly positive")
    exact = g.has_integer_coordinates() and all(isinstance(v, (int, Fraction)) for v in x)
    if exact:
        outs, ins = _vertex_flows(g, k, x, exact=True)
        return all(o == i for o, i in zip(outs, ins))
    return _cb_relative_residual(g, k, x) <= rel_tol


def _entropy(x: np.ndarray, xstar: np.ndarray) -> float:
    return float(np.sum(x * (np.log(x) - np.log(xstar) - 1.0)))


def birch_point(
    g: EGraph,
    xstar: Sequence,
    x0: Sequence,
    grad_tol: float = NEWTON_GRAD_TOL,
    max_iter: int = NEWTON_MAX_ITER,
) -> SteadyState:
    """The unique positive point of x0's affine class with log x - log x* orthogonal
    to the stoichiometric subspace.

    When x* already lies in x0's class (checked exactly for rational
    inputs), it is returned unchanged in exact mode.  Otherwise a damped
    Newton iteration minimizes sum x_i (ln x_i - ln x*_i - 1) over the
    class, which is strictly convex with gradient ln x - ln x*.
    """
    if len(xstar) != g.n or len(x0) != g.n:
        raise ValueError("state length differs from ambient dimension")
    for v in list(xstar) + list(x0):
        if not (v > 0):
            raise ValueError("states must be strictly positive")
    s_basis = subspace_from_span(g.reaction_vectors, g.n)
    all_rational = all(isinstance(v, (int, Fraction)) for v in list(xstar) + list(x0))
    if all_rational:
        diff = [frac(a) - frac(b) for a, b in zip(xstar, x0)]
        if s_basis.contains(diff):
            return SteadyState(vec(xstar), "exact", residual=0.0)
    if s_basis.dim == 0:
        return SteadyState(tuple(float(v) for v in x0), "approximate", residual=0.0)

    ortho = orthogonalize(s_basis)
    basis = np.array([[float(v) for v in b] for b in ortho.basis], dtype=float).T  # n x s
    xs = np.array([float(v) for v in xstar], dtype=float)
    x = np.array([float(v) for v in x0], dtype=float)
    log_xs = np.log(xs)
    h = _entropy(x, xs)
    for _ in range(max_iter):
        grad_full = np.log(x) - log_xs
        grad = basis.T @ grad_full
        if float(np.max(np.abs(grad))) <= grad_tol:
            return SteadyState(
                tuple(float(v) for v in x), "approximate",
                residual=float(np.max(np.abs(grad))),
            )
        hess = basis.T @ (basis / x[:, None])
        step = np.linalg.solve(hess, -grad)
        dx = basis @ step
        alpha = 1.0
        for _ in range(80):
            trial = x + alpha * dx
            if np.all(trial > 0):
                trial_h = _entropy(trial, xs)
                if trial_h <= h + 1e-18:
                    x = trial
                    h = trial_h
                    break
            alpha *= 0.5
        else:
            raise ConvergenceError(
                "line search failed to make progress", tuple(float(v) for v in x)
            )
    raise ConvergenceError(
        f"no convergence within {max_iter} Newton iterations",
        tuple(float(v) for v in x),
    )


def ode_trajectory(
    g: EGraph,
    k: EdgeVector,
    x0: Sequence,
    t_end: float,
    dt: float,
    dt_min: float = 1e-9,
) -> list[tuple[float, tuple[float, ...]]]:
    """Classical fixed-step RK4 sampling of the mass-action dynamics.

    A step that leaves the positive orthant is rejected and retried with
    a halved step; below dt_min the integration aborts.
    """
    for v in x0:
        if not (v > 0):
            raise ValueError("initial state must be strictly positive")

    def f(state: tuple[float, ...]) -> tuple[float, ...]:
        return mass_action_rhs(g, k, state, exact=False)

    def ok(state: tuple[float, ...]) -> bool:
        return all(v > 0 and math.isfinite(v) for v in state)

    def rk4(x: tuple[float, ...], h: float) -> tuple[float, ...] | None:
        # a stage state outside the positive orthant rejects the whole step
        k1 = f(x)
        s2 = tuple(xi + 0.5 * h * ki for xi, ki in zip(x, k1))
        if not ok(s2):
            return None
        k2 = f(s2)
        s3 = tuple(xi + 0.5 * h * ki for xi, ki in zip(x, k2))
        if not ok(s3):
            return None
        k3 = f(s3)
        s4 = tuple(xi + h * ki for xi, ki in zip(x, k3))
        if not ok(s4):
            return None
        k4 = f(s4)
        nxt = tuple(
            xi + h / 6.0 * (a + 2 * b + 2 * c + d)
            for xi, a, b, c, d in zip(x, k1, k2, k3, k4)
        )
        return nxt if ok(nxt) else None

    x = tuple(float(v) for v in x0)
    t = 0.0
    samples = [(t, x)]
    while t < t_end - 1e-15:
        step = min(dt, t_end - t)
        while True:
            nxt = rk4(x, step)
            if nxt is not None:
                break
            step *= 0.5
            dt = step
            if step < dt_min:
                raise ConvergenceError("step size collapsed below dt_min", x)
        x = nxt
        t += step
        samples.append((t, x))
    return samples


def lyapunov_value(x: Sequence, xstar: Sequence) -> float:
    """sum x_i (ln x_i - ln x*_i - 1); non-increasing along complex-balanced flows."""
    return float(
        sum(float(a) * (math.log(float(a)) - math.log(float(b)) - 1.0) for a, b in zip(x, xstar))
    )

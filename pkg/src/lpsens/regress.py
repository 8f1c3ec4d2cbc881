"""Constrained lp regression and the sensitivities built on it.

The quantity everything reduces to is

    min ||B x||_p^p   subject to   a @ x = 1,

whose reciprocal is the sensitivity of the row ``a`` with respect to ``B``.
p = 1 is solved exactly as a linear program; other p by iteratively
reweighted least squares on a smoothed objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import as_matrix, as_vector, lp_norm, pseudoinverse_gram
from .leverage import leverage_exact
from .simplex import solve_lp

VALUE_TOL = 1e-6  # target relative accuracy of the optimal value
_RANGE_TOL = 1e-12  # below this times ||a||^p the row is outside the row space


@dataclass(frozen=True)
class RegressionSolution:
    x_opt: np.ndarray
    value: float
    status: str  # "optimal" or "iteration_limit"
    iterations: int


def _eliminate_hyperplane(B, a):
    """Substitute the largest-|a_j| coordinate out of  a @ x = 1.

    Returns (M, c, k, rest) with  B x = M z + c  where z are the remaining
    coordinates and x_k = (1 - a_rest @ z) / a_k.
    """
    k = int(np.argmax(np.abs(a)))  # ties resolve to the lowest index
    rest = np.concatenate([np.arange(k), np.arange(k + 1, a.shape[0])])
    col = B[:, k] / a[k]
    M = B[:, rest] - np.outer(col, a[rest])
    return M, col, k, rest


def _assemble(z, k, rest, a, d):
    x = np.empty(d)
    x[rest] = z
    x[k] = (1.0 - a[rest] @ z) / a[k]
    return x


def _min_l1_primal(B, a):
    """Literal LP encoding: min sum(t), -t <= Bx <= t, a @ x = 1."""
    m, d = B.shape
    nv = 2 * d + 3 * m  # x+, x-, t, s1, s2
    A = np.zeros((2 * m + 1, nv))
    A[:m, :d] = B
    A[:m, d : 2 * d] = -B
    A[:m, 2 * d : 2 * d + m] = -np.eye(m)
    A[:m, 2 * d + m : 2 * d + 2 * m] = np.eye(m)
    A[m : 2 * m, :d] = -B
    A[m : 2 * m, d : 2 * d] = B
    A[m : 2 * m, 2 * d : 2 * d + m] = -np.eye(m)
    A[m : 2 * m, 2 * d + 2 * m :] = np.eye(m)
    A[2 * m, :d] = a
    A[2 * m, d : 2 * d] = -a
    b = np.zeros(2 * m + 1)
    b[2 * m] = 1.0
    c = np.zeros(nv)
    c[2 * d : 2 * d + m] = 1.0
    res = solve_lp(c, A, b)
    x = res.x[:d] - res.x[d : 2 * d]
    return RegressionSolution(
        x_opt=x, value=res.value, status="optimal", iterations=res.pivots
    )


def _min_l1_dual(B, a):
    """Box-form dual of the same LP: max lambda s.t. B^T v = lambda a, |v| <= 1.

    The optimum equals min ||Bx||_1 on the hyperplane, the basis stays d x d,
    and the row multipliers recover the minimizer x.
    """
    m, d = B.shape
    A = np.empty((d, m + 1))
    A[:, :m] = B.T
    A[:, m] = -a
    b = B.sum(axis=0)  # from shifting v = w - 1 into w in [0, 2]
    c = np.zeros(m + 1)
    c[m] = -1.0
    ub = np.full(m + 1, 2.0)
    ub[m] = np.inf
    res = solve_lp(c, A, b, upper=ub)
    value = -res.value
    x = res.duals
    ok = (
        abs(a @ x - 1.0) <= 1e-6
        and abs(lp_norm(B @ x, 1) - value) <= max(1e-7, 1e-6 * value)
    )
    if ok:
        return RegressionSolution(
            x_opt=x, value=value, status="optimal", iterations=res.pivots
        )
    if value <= 1e-9 * (1.0 + float(np.abs(B).max())):
        # the minimum is (numerically) zero: any feasible near-null x will do
        x = _least_squares_feasible(B, a)
        return RegressionSolution(
            x_opt=x, value=value, status="optimal", iterations=res.pivots
        )
    return _min_l1_primal(B, a)  # degenerate recovery: fall back to the literal form


def _least_squares_feasible(B, a):
    """min ||Bx||_2 over the hyperplane, used only as a certificate carrier."""
    d = a.shape[0]
    if d == 1:
        return np.array([1.0 / a[0]])
    M, c, k, rest = _eliminate_hyperplane(B, a)
    z = np.linalg.lstsq(M, -c, rcond=None)[0]
    return _assemble(z, k, rest, a, d)


_DELTAS = 10.0 ** np.arange(-2.0, -11.0, -1.0)  # 1e-2 geometrically down to 1e-10


def _min_lp_irls(B, a, p, max_inner=60):
    """Smoothed IRLS: minimize sum((r^2 + delta^2)^(p/2)) with delta annealed."""
    m, d = B.shape
    M, c, k, rest = _eliminate_hyperplane(B, a)
    z = np.linalg.lstsq(M, -c, rcond=None)[0]
    r = M @ z + c
    if p == 2:  # weights are constant, the least-squares start is already optimal
        x = _assemble(z, k, rest, a, d)
        return RegressionSolution(
            x_opt=x, value=float(np.sum(r * r)), status="optimal", iterations=1
        )

    iterations = 0
    converged = True
    for delta in _DELTAS:
        d2 = delta * delta
        obj = float(np.sum((r * r + d2) ** (p / 2.0)))
        converged = False
        for _ in range(max_inner):
            wgt = (r * r + d2) ** (p / 2.0 - 1.0)
            WM = M * wgt[:, None]
            G = M.T @ WM
            rhs = -(WM.T @ c)
            try:
                z_new = scipy.linalg.solve(G, rhs, assume_a="pos")
            except scipy.linalg.LinAlgError:
                z_new = np.linalg.lstsq(G, rhs, rcond=None)[0]
            iterations += 1
            r_new = M @ z_new + c
            obj_new = float(np.sum((r_new * r_new + d2) ** (p / 2.0)))
            # for p > 2 the full step can overshoot; halve back until it descends
            halvings = 0
            while obj_new > obj * (1.0 + 1e-12) and halvings < 40:
                z_new = 0.5 * (z_new + z)
                r_new = M @ z_new + c
                obj_new = float(np.sum((r_new * r_new + d2) ** (p / 2.0)))
                halvings += 1
            z, r = z_new, r_new
            if abs(obj - obj_new) <= 1e-11 * (1.0 + abs(obj_new)):
                obj = obj_new
                converged = True
                break
            obj = obj_new

    x = _assemble(z, k, rest, a, d)
    value = float(np.sum(np.abs(r) ** p))
    return RegressionSolution(
        x_opt=x,
        value=value,
        status="optimal" if converged else "iteration_limit",
        iterations=iterations,
    )


def min_lp_on_hyperplane(B, a, p, solver: str = "auto") -> RegressionSolution:
    """Minimize ||B x||_p^p subject to a @ x = 1.

    Parameters
    ----------
    B : (m, d) array
    a : (d,) array, nonzero
    p : real >= 1
    solver : "auto" picks the exact LP for p = 1 and IRLS otherwise;
        "lp" (p = 1 only) and "irls" force a path.
    """
    B = as_matrix(B)
    a = as_vector(a)
    if B.shape[1] != a.shape[0]:
        raise ValueError(f"shape mismatch: B has {B.shape[1]} columns, a has {a.shape[0]}")
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if np.all(a == 0.0):
        raise ValueError("hyperplane row a must be nonzero")

    if a.shape[0] == 1:
        x = np.array([1.0 / a[0]])
        value = float(np.sum(np.abs(B[:, 0] * x[0]) ** p))
        return RegressionSolution(x_opt=x, value=value, status="optimal", iterations=0)

    if solver == "auto":
        solver = "lp" if p == 1 else "irls"
    if solver == "lp":
        if p != 1:
            raise ValueError("the LP path is exact only for p = 1")
        return _min_l1_dual(B, a)
    if solver == "irls":
        return _min_lp_irls(B, a, p)
    raise ValueError(f"unknown solver {solver!r}")


def sensitivity_one(a, B, p) -> float:
    """Sensitivity of the row a with respect to B: 1 / min ||Bx||_p^p on a@x=1.

    Returns 0.0 for a zero row and inf when the minimum vanishes (a outside
    the row space of B).
    """
    a = as_vector(a)
    B = as_matrix(B)
    if np.all(a == 0.0):
        return 0.0
    sol = min_lp_on_hyperplane(B, a, p)
    if sol.value <= _RANGE_TOL * float(np.linalg.norm(a)) ** p:
        return math.inf
    return 1.0 / sol.value


def sensitivities_wrt(M, B, p) -> np.ndarray:
    """Sensitivity of every row of M with respect to the matrix B."""
    M = as_matrix(M)
    B = as_matrix(B)
    if p == 2:
        G = pseudoinverse_gram(B)
        vals = np.einsum("ij,jk,ik->i", M, G, M)
        vals = np.maximum(vals, 0.0)
        # the closed form is blind to rows outside the row space; flag them
        gram_missing = M - (M @ G) @ (B.T @ B)
        row_scale = np.maximum(np.abs(M).max(axis=1), 1e-300)
        outside = np.abs(gram_missing).max(axis=1) > 1e-6 * row_scale
        vals[outside] = math.inf
        vals[np.all(M == 0.0, axis=1)] = 0.0
        return vals
    return np.array([sensitivity_one(M[i], B, p) for i in range(M.shape[0])])


def sensitivities_exact(A, p) -> "WeightVector":
    """Exact lp sensitivities of every row of A with respect to A itself."""
    from .core import WeightVector, require_tall_full_rank

    A = require_tall_full_rank(A)
    if p == 2:
        lev = leverage_exact(A)
        return WeightVector(values=lev.values, kind="sensitivity", p=2.0)
    vals = sensitivities_wrt(A, A, p)
    return WeightVector(values=vals, kind="sensitivity", p=float(p))

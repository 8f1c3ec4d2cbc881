"""Dense two-phase simplex for small equality-form LPs.

Solves  min c @ x  subject to  A @ x = b,  0 <= x <= upper,  with Bland's
anti-cycling rule throughout.  Variables may carry finite upper bounds, which
keeps the l1 regression encodings small: a box variable costs no extra row.

The tableau is kept dense; every problem this package builds has at most a
few dozen constraint rows, so each pivot is a handful of vectorized array
operations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import NonConvergenceError

_LOWER, _UPPER, _BASIC = 0, 1, 2


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    value: float
    duals: np.ndarray
    pivots: int
    basic_structural: np.ndarray


class InfeasibleError(ValueError):
    """Phase 1 ended with artificial variables still positive."""


class UnboundedError(ValueError):
    """A descent direction had no limiting bound."""


def _pivot(T, r, j):
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    T[:, j] = 0.0
    T[r, j] = 1.0


_BLAND_TRIGGER = 40  # consecutive degenerate pivots before Bland pricing kicks in


def _run_phase(T, xB, basis, status, ub, cost, allowed, tol, max_pivots):
    pivots = 0
    degenerate_run = 0
    while True:
        if pivots > max_pivots:
            raise NonConvergenceError(f"simplex exceeded {max_pivots} pivots")
        d = cost - cost[basis] @ T
        eligible = allowed & (
            ((status == _LOWER) & (d < -tol)) | ((status == _UPPER) & (d > tol))
        )
        candidates = np.nonzero(eligible)[0]
        if candidates.size == 0:
            return pivots
        if degenerate_run >= _BLAND_TRIGGER:
            j = int(candidates[0])  # Bland: smallest eligible index enters
        else:
            # Dantzig pricing: steepest reduced cost among the eligible
            score = np.where(status[candidates] == _LOWER, d[candidates], -d[candidates])
            j = int(candidates[np.argmin(score)])
        s = 1.0 if status[j] == _LOWER else -1.0
        w = s * T[:, j]

        # ratio test: entering moves by t >= 0, basic values move by -t * w
        rows_dn = np.nonzero(w > tol)[0]  # basic driven toward its lower bound
        t_dn = np.maximum(xB[rows_dn] / w[rows_dn], 0.0) if rows_dn.size else None
        caps = ub[basis]
        up_mask = (w < -tol) & np.isfinite(caps)
        rows_up = np.nonzero(up_mask)[0]  # basic driven toward its upper bound
        t_up = (
            np.maximum((caps[rows_up] - xB[rows_up]) / -w[rows_up], 0.0)
            if rows_up.size
            else None
        )

        t_cand = np.inf
        if rows_dn.size:
            t_cand = min(t_cand, float(t_dn.min()))
        if rows_up.size:
            t_cand = min(t_cand, float(t_up.min()))
        t_all = min(float(ub[j]), t_cand)
        if not np.isfinite(t_all):
            raise UnboundedError("descent direction with no limiting bound")

        if t_cand <= t_all + tol:
            # a basic variable leaves; Bland: smallest variable index among ties
            leave_row, leave_to_upper, best_var = -1, False, None
            if rows_dn.size:
                for i, t in zip(rows_dn, t_dn):
                    if t <= t_all + tol and (best_var is None or basis[i] < best_var):
                        leave_row, leave_to_upper, best_var = int(i), False, basis[i]
            if rows_up.size:
                for i, t in zip(rows_up, t_up):
                    if t <= t_all + tol and (best_var is None or basis[i] < best_var):
                        leave_row, leave_to_upper, best_var = int(i), True, basis[i]
            xB -= t_all * w
            r = leave_row
            leaving = basis[r]
            status[leaving] = _UPPER if leave_to_upper else _LOWER
            _pivot(T, r, j)
            status[j] = _BASIC
            basis[r] = j
            xB[r] = t_all if s > 0 else ub[j] - t_all
        else:
            # the entering variable runs to its other bound; basis unchanged
            xB -= ub[j] * w
            status[j] = _UPPER if s > 0 else _LOWER
        degenerate_run = degenerate_run + 1 if t_all <= tol else 0
        pivots += 1


def solve_lp(c, A, b, upper=None, *, tol=1e-9, max_pivots=500_000) -> LPResult:
    """Two-phase bounded-variable simplex; returns primal x and row duals."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64).copy()
    c = np.asarray(c, dtype=np.float64)
    m, n = A.shape
    if upper is None:
        upper = np.full(n, np.inf)
    else:
        upper = np.asarray(upper, dtype=np.float64)

    row_sign = np.where(b < 0, -1.0, 1.0)
    A = A * row_sign[:, None]
    b = b * row_sign

    T = np.hstack([A, np.eye(m)])
    xB = b.copy()
    basis = np.arange(n, n + m)
    status = np.full(n + m, _LOWER, dtype=np.int8)
    status[basis] = _BASIC
    ub = np.concatenate([upper, np.full(m, np.inf)])
    allowed = np.ones(n + m, dtype=bool)
    allowed[:n] &= upper > tol  # variables fixed at zero never enter

    scale = 1.0 + float(np.abs(b).max(initial=0.0))
    cost1 = np.concatenate([np.zeros(n), np.ones(m)])
    pivots = _run_phase(T, xB, basis, status, ub, cost1, allowed, tol, max_pivots)

    art_rows = np.nonzero(basis >= n)[0]
    art_total = float(xB[art_rows].sum()) if art_rows.size else 0.0
    if art_total > 1e-7 * scale:
        raise InfeasibleError(f"phase 1 residual {art_total:.3e}")

    keep_rows = np.ones(m, dtype=bool)
    for r in art_rows:
        structural = np.nonzero((np.abs(T[r, :n]) > 1e-9) & (status[:n] != _BASIC))[0]
        if structural.size:
            j = int(structural[0])
            status[basis[r]] = _LOWER
            _pivot(T, r, j)
            status[j] = _BASIC
            basis[r] = j
            xB[r] = 0.0
        else:
            keep_rows[r] = False  # redundant constraint
    if not keep_rows.all():
        rows = np.nonzero(keep_rows)[0]
        T = T[rows]
        xB = xB[rows]
        basis = basis[rows]

    allowed[n:] = False
    cost2 = np.concatenate([c, np.zeros(m)])
    pivots += _run_phase(T, xB, basis, status, ub, cost2, allowed, tol, max_pivots)

    x_full = np.where(status == _UPPER, ub, 0.0)
    x_full[basis] = xB
    x = x_full[:n]
    value = float(c @ x)

    # the artificial block of the tableau is the inverse of the final basis,
    # so the multipliers of the surviving rows come straight out of it
    duals = np.zeros(m)
    kept = np.nonzero(keep_rows)[0]
    duals[kept] = cost2[basis] @ T[:, n + kept]
    duals *= row_sign
    basic_structural = np.sort(basis[basis < n])
    return LPResult(
        x=x, value=value, duals=duals, pivots=pivots, basic_structural=basic_structural
    )

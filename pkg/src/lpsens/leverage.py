"""Statistical leverage scores, exact and sketched."""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg

from .core import (
    RANK_TOL,
    RandomSource,
    WeightVector,
    as_matrix,
    require_tall_full_rank,
)


def leverage_exact(a) -> WeightVector:
    """Leverage score of every row: tau_i = a_i @ pinv(A^T A) @ a_i.

    Computed as squared row norms of the left singular block, which keeps the
    values in [0, 1] and their sum equal to the rank.  Works for any shape
    and rank.
    """
    a = as_matrix(a)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return WeightVector(values=np.zeros(a.shape[0]), kind="leverage", p=2.0)
    keep = s > RANK_TOL * s[0]
    vals = np.einsum("ij,ij->i", u[:, keep], u[:, keep])
    return WeightVector(values=np.clip(vals, 0.0, 1.0), kind="leverage", p=2.0)


def leverage_approx(a, eps: float, rng: RandomSource) -> WeightVector:
    """Sketched leverage scores within (1 +- eps) per entry, w.h.p. per run.

    A Gaussian sketch G with ceil(8 ln n / eps^2) rows compresses A, the R
    factor of G @ A preconditions the rows, and the squared preconditioned
    row norms estimate the scores.  Requires full column rank.
    """
    a = require_tall_full_rank(a)
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    n, d = a.shape
    r = max(int(math.ceil(8.0 * math.log(n) / (eps * eps))), d + 1)
    g = rng.generator().standard_normal((r, n)) / math.sqrt(r)
    sketch = g @ a
    _, rr = np.linalg.qr(sketch)
    v = scipy.linalg.solve_triangular(rr, a.T, lower=False, trans="T")
    vals = np.einsum("ji,ji->i", v, v)
    # true scores never exceed 1, so clamping only sharpens the estimate
    return WeightVector(values=np.clip(vals, 0.0, 1.0), kind="leverage", p=2.0)

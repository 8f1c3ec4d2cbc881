"""Total-sensitivity estimators.

``total_lewis_oneshot`` importance-samples rows at Lewis-weight rates and
averages the ratio sensitivity / sampling-weight, which is unbiased for the
total against the embedded matrix.  ``total_recursive_l1`` is the l1
specialist: it splits rows into leverage buckets, uniformly subsamples each
bucket (values within a bucket are within a bounded ratio, so uniform
sampling is safe), and recurses until blocks are small enough to add up
directly.  ``bounded_ratio_mean`` is that uniform-sampling primitive on its
own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    RandomSource,
    as_matrix,
    pseudoinverse_gram,
    require_tall_full_rank,
)
from .embed import lp_embedding
from .leverage import leverage_exact
from .lewis import LewisConfig, lewis_weights
from .regress import sensitivities_wrt

_METHODS = ("lewis_oneshot", "recursive_l1")


@dataclass(frozen=True)
class TotalConfig:
    p: float
    gamma: float
    method: str = "lewis_oneshot"
    c_m: float = 10.0  # one-shot sample-size constant
    embed_eps: float = 0.5
    embed_constant: float = 4.0
    r_constant: float = 1.0  # recursive per-bucket sample-size constant
    base_constant: float = 1.0  # recursive base-case size constant
    base_size: int | None = None  # overrides the base-case formula when set
    r_override: int | None = None  # overrides the per-bucket sample size when set

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if not 0.01 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0.01, 1), got {self.gamma}")
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}, got {self.method!r}")


def bounded_ratio_mean(values, ratio_bound, gamma, delta, rng: RandomSource, count=None):
    """Estimate the sum of nonneg values whose max/min ratio is bounded.

    Draws ceil(10 * ratio_bound * (1 + gamma) / gamma^2 * ln(1/delta))
    uniform indices with replacement and rescales: within a factor
    (1 +- gamma) of the true sum with probability at least 1 - delta.
    ``values`` is an array or a callable index -> value (then ``count``
    gives the index range).
    """
    if not ratio_bound >= 1:
        raise ValueError("ratio_bound must be at least 1")
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if callable(values):
        if count is None:
            raise ValueError("count is required when values is a callable")
        fetch = values
        m_items = int(count)
    else:
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("values must be a nonempty 1-D array")
        if not np.all(arr > 0):
            raise ValueError("values must all be positive")
        fetch = None
        m_items = arr.size
    size = int(math.ceil(10.0 * ratio_bound * (1.0 + gamma) / (gamma * gamma) * math.log(1.0 / delta)))
    idx = rng.generator().integers(0, m_items, size=size)
    if fetch is None:
        picked = arr[idx]
    else:
        picked = np.array([fetch(int(i)) for i in idx], dtype=np.float64)
    return float(m_items / size * picked.sum())


class OneShotTotal:
    """Reusable one-shot estimator: fixes the embedding, then samples cheaply.

    Splitting preparation from sampling lets many seeded estimates share one
    embedded matrix, which is also what the unbiasedness statement refers to.
    """

    def __init__(self, a, cfg: TotalConfig, rng: RandomSource):
        a = require_tall_full_rank(a)
        n, d = a.shape
        self.a = a
        self.p = float(cfg.p)
        w = lewis_weights(a, LewisConfig(p=cfg.p)).values
        self.v = w / d  # sampling weight of each row; sums to 1 up to tolerance
        self.probs = self.v / self.v.sum()
        self.sample_size = int(
            math.ceil(cfg.c_m * d ** abs(1.0 - cfg.p / 2.0) / (cfg.gamma * cfg.gamma))
        )
        embedding = lp_embedding(
            a, cfg.p, cfg.embed_eps, rng.child("embed"),
            constant=cfg.embed_constant, weights=w,
        )
        self.sa = embedding.materialize(a)
        self.embedded_rows = len(embedding)
        if self.p == 2.0:
            self._gram_pinv = pseudoinverse_gram(self.sa)
        self._cache: dict[int, float] = {}

    def _sensitivity(self, i: int) -> float:
        hit = self._cache.get(i)
        if hit is not None:
            return hit
        if self.p == 2.0:
            row = self.a[i]
            val = float(row @ self._gram_pinv @ row)
        else:
            val = float(sensitivities_wrt(self.a[i : i + 1], self.sa, self.p)[0])
        self._cache[i] = val
        return val

    def embedded_total(self) -> float:
        """Sum of every row's sensitivity against the embedded matrix."""
        return float(sum(self._sensitivity(i) for i in range(self.a.shape[0])))

    def estimate(self, rng: RandomSource) -> float:
        gen = rng.generator()
        idx = gen.choice(self.a.shape[0], size=self.sample_size, replace=True, p=self.probs)
        total = 0.0
        for i in idx:
            total += self._sensitivity(int(i)) / float(self.v[i])
        return float(total / self.sample_size)


def total_lewis_oneshot(a, cfg: TotalConfig, rng: RandomSource) -> float:
    """One-shot estimate of the total lp sensitivity of A."""
    est = OneShotTotal(a, cfg, rng.child("prepare"))
    return est.estimate(rng.child("sample"))


def _depth_cap(n: int, d: int) -> int:
    inner = max(2.0 * n + 2.0 * d * math.log2(max(d, 2)), 4.0)
    return 1 + int(math.ceil(math.log2(math.log2(inner))))


def _bucket_count(n: int) -> int:
    # geometric halves of [1, n^-20]
    return max(1, int(math.ceil(20.0 * math.log2(max(n, 2)))))


def _bucket_index(tau: np.ndarray, n_buckets: int) -> np.ndarray:
    # bucket k holds [2^-k, 2^-(k-1)), except k = 1 which closes at 1
    with np.errstate(divide="ignore"):
        k = np.ceil(-np.log2(np.maximum(tau, 0.0)))
    k = np.where(np.isfinite(k), k, n_buckets)
    return np.clip(k, 1, n_buckets).astype(np.intp)


class _RecursiveState:
    def __init__(self, sa, spa, rho, delta, r_constant, r_override, base_size,
                 depth_cap, bucket_count, p):
        self.sa = sa
        self.spa = spa
        self.rho = rho
        self.delta = delta
        self.r_constant = r_constant
        self.r_override = r_override
        self.base_size = base_size
        self.depth_cap = depth_cap
        self.bucket_count = bucket_count
        self.p = p
        self.oracle_calls = 0
        self.max_depth_seen = 0

    def sample_size(self, n_node: int) -> int:
        if self.r_override is not None:
            return max(int(self.r_override), 1)
        r = math.ceil(
            self.r_constant
            * math.sqrt(n_node)
            * (1.0 + self.rho)
            / (self.rho * self.rho)
            * math.log(1.0 / self.delta)
        )
        return max(int(r), 1)


def _recurse(m_rows: np.ndarray, depth: int, rng: RandomSource, st: _RecursiveState):
    if depth > st.depth_cap:
        raise RuntimeError(
            "internal error: sensitivity recursion exceeded its depth cap "
            f"({st.depth_cap}); buckets are not shrinking"
        )
    st.max_depth_seen = max(st.max_depth_seen, depth)
    if m_rows.shape[0] <= st.base_size:
        vals = sensitivities_wrt(m_rows, st.spa, st.p)
        st.oracle_calls += m_rows.shape[0]
        return float(vals.sum())

    c = np.vstack([m_rows, st.sa])
    tau = leverage_exact(c).values[: m_rows.shape[0]]
    buckets = _bucket_index(tau, st.bucket_count)
    r_size = st.sample_size(c.shape[0])
    total = 0.0
    for k in np.unique(buckets):
        members = np.nonzero(buckets == k)[0]
        if r_size >= members.size:
            child = m_rows[members]
            scale = 1.0
        else:
            gen = rng.child("sample", int(k)).generator()
            pick = gen.integers(0, members.size, size=r_size)
            child = m_rows[members[pick]]
            scale = members.size / r_size
        total += scale * _recurse(child, depth + 1, rng.child("bucket", int(k)), st)
    return (1.0 + st.rho) * total


def total_recursive_l1(a, cfg: TotalConfig, rng: RandomSource) -> float:
    """Recursive estimate of the total l1 sensitivity; never meant to undershoot.

    Rows with negligible leverage are dropped and compensated by an n^-5
    term; the rest are bucketed by leverage against a constant-accuracy
    embedding, subsampled uniformly per bucket, and recursed.  The returned
    value carries the (1 + gamma) safety factor.
    """
    if cfg.p != 1:
        raise ValueError("the recursive estimator is specific to p = 1")
    a = require_tall_full_rank(a)
    n, d = a.shape

    depth_cap = _depth_cap(n, d)
    rho = cfg.gamma / depth_cap
    bucket_count = _bucket_count(n)
    delta = 0.01 / bucket_count**depth_cap
    if cfg.base_size is not None:
        base_size = int(cfg.base_size)
    else:
        core = depth_cap**4 / (cfg.gamma * cfg.gamma)
        base_size = int(math.ceil(cfg.base_constant * core * max(core, math.sqrt(d))))
    base_size = max(base_size, 1)

    tau = leverage_exact(a).values
    keep = tau >= n**-10.0
    dropped = int(n - keep.sum())
    surviving = a[keep]

    sa = lp_embedding(a, 1, cfg.embed_eps, rng.child("sa"), constant=cfg.embed_constant)
    spa = lp_embedding(
        a, 1, min(cfg.embed_eps, rho), rng.child("spa"), constant=cfg.embed_constant
    )
    st = _RecursiveState(
        sa=sa.materialize(a),
        spa=spa.materialize(a),
        rho=rho,
        delta=delta,
        r_constant=cfg.r_constant,
        r_override=cfg.r_override,
        base_size=base_size,
        depth_cap=depth_cap,
        bucket_count=bucket_count,
        p=1.0,
    )
    s = _recurse(as_matrix(surviving), 0, rng.child("recurse"), st)
    return (1.0 + cfg.gamma) * (s + dropped * float(n) ** -5.0)

"""Numeric inner-loop kernels, numba-jitted with a pure-numpy fallback.

The jitted path is the default whenever numba imports cleanly.  Setting the
environment variable ``METAPHOR_EVAL_NO_NUMBA=1`` (before import) selects the
pure-numpy implementations instead; both paths are exercised in the test
suite and compared in ``benchmarks/bench_kernels.py``.
"""

from __future__ import annotations

import os

import numpy as np

_FALLBACK_FLAG = os.environ.get("METAPHOR_EVAL_NO_NUMBA", "").lower() in ("1", "true", "yes")

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USING_NUMBA = HAVE_NUMBA and not _FALLBACK_FLAG


def _lcs_length_py(a: np.ndarray, b: np.ndarray) -> int:
    """Longest-common-subsequence length over two int64 id sequences.

    Row-sweep DP: within a row, max-accumulate propagates the left-neighbour
    term, so only the outer loop stays in Python.
    """
    if a.size == 0 or b.size == 0:
        return 0
    prev = np.zeros(b.size + 1, dtype=np.int64)
    for i in range(a.size):
        diag = np.where(b == a[i], prev[:-1] + 1, 0)
        row = np.maximum.accumulate(np.maximum(prev[1:], diag))
        prev = np.concatenate(([0], row))
    return int(prev[-1])


def _match_means_py(sim: np.ndarray, w_rows: np.ndarray, w_cols: np.ndarray) -> tuple[float, float]:
    """Weighted means of per-row and per-column maxima of a similarity matrix."""
    if sim.shape[0] == 0 or sim.shape[1] == 0:
        return 0.0, 0.0
    p = float(np.dot(sim.max(axis=1), w_rows) / w_rows.sum())
    r = float(np.dot(sim.max(axis=0), w_cols) / w_cols.sum())
    return p, r


if HAVE_NUMBA:

    @njit(cache=True)
    def _lcs_length_nb(a: np.ndarray, b: np.ndarray) -> int:  # pragma: no cover - parity-tested
        n, m = a.size, b.size
        if n == 0 or m == 0:
            return 0
        prev = np.zeros(m + 1, dtype=np.int64)
        curr = np.zeros(m + 1, dtype=np.int64)
        for i in range(n):
            for j in range(1, m + 1):
                if a[i] == b[j - 1]:
                    curr[j] = prev[j - 1] + 1
                elif prev[j] >= curr[j - 1]:
                    curr[j] = prev[j]
                else:
                    curr[j] = curr[j - 1]
            prev, curr = curr, prev
        return int(prev[m])

    @njit(cache=True)
    def _match_means_nb(sim: np.ndarray, w_rows: np.ndarray, w_cols: np.ndarray) -> tuple[float, float]:  # pragma: no cover
        n, m = sim.shape
        if n == 0 or m == 0:
            return 0.0, 0.0
        p_acc = 0.0
        for i in range(n):
            best = sim[i, 0]
            for j in range(1, m):
                if sim[i, j] > best:
                    best = sim[i, j]
            p_acc += best * w_rows[i]
        r_acc = 0.0
        for j in range(m):
            best = sim[0, j]
            for i in range(1, n):
                if sim[i, j] > best:
                    best = sim[i, j]
            r_acc += best * w_cols[j]
        return p_acc / w_rows.sum(), r_acc / w_cols.sum()


_lcs_impl = _lcs_length_nb if USING_NUMBA else _lcs_length_py
_match_impl = _match_means_nb if USING_NUMBA else _match_means_py


def lcs_length(a, b) -> int:
    """LCS length of two token-id sequences (any int-convertible 1-D inputs)."""
    a = np.ascontiguousarray(a, dtype=np.int64)
    b = np.ascontiguousarray(b, dtype=np.int64)
    return _lcs_impl(a, b)


def match_means(sim, w_rows=None, w_cols=None) -> tuple[float, float]:
    """Greedy-matching aggregation: (mean of row maxima, mean of col maxima).

    Optional nonnegative weights reweight the means (uniform when omitted);
    weight vectors must sum to a positive value.
    """
    sim = np.ascontiguousarray(sim, dtype=np.float64)
    if w_rows is None:
        w_rows = np.ones(sim.shape[0], dtype=np.float64)
    else:
        w_rows = np.ascontiguousarray(w_rows, dtype=np.float64)
    if w_cols is None:
        w_cols = np.ones(sim.shape[1], dtype=np.float64)
    else:
        w_cols = np.ascontiguousarray(w_cols, dtype=np.float64)
    return _match_impl(sim, w_rows, w_cols)

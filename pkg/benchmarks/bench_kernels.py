"""Timing comparison: compiled kernels vs the pure-numpy fallback.

Run directly:  python3 benchmarks/bench_kernels.py

The same numbers are reachable with METAPHOR_EVAL_NO_NUMBA=1 set, which
forces the public entry points onto the fallback path; here we call both
implementations side by side instead.
"""

import time

import numpy as np

from metaphor_eval._kernels import HAVE_NUMBA, _lcs_length_py, _match_means_py

if HAVE_NUMBA:
    from metaphor_eval._kernels import _lcs_length_nb, _match_means_nb
else:
    print("numba unavailable: timing the fallback only")


def best_of(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def report(name, py_s, nb_s):
    if nb_s is None:
        print(f"{name:<28} python {py_s * 1e3:8.2f} ms")
    else:
        print(f"{name:<28} python {py_s * 1e3:8.2f} ms   numba {nb_s * 1e3:8.2f} ms   speedup {py_s / nb_s:5.1f}x")


rng = np.random.default_rng(0)

# long sequences: one big DP table
a = rng.integers(0, 50, size=2000).astype(np.int64)
b = rng.integers(0, 50, size=2000).astype(np.int64)
if HAVE_NUMBA:
    _lcs_length_nb(a, b)  # compile outside the timed region
report(
    "lcs 2000x2000",
    best_of(_lcs_length_py, a, b),
    best_of(_lcs_length_nb, a, b) if HAVE_NUMBA else None,
)

# caption-sized sequences, many calls: the shape the evaluator actually sees
pairs = [
    (rng.integers(0, 30, size=rng.integers(6, 14)).astype(np.int64),
     rng.integers(0, 30, size=rng.integers(6, 14)).astype(np.int64))
    for _ in range(5000)
]


def lcs_batch(fn):
    return sum(fn(x, y) for x, y in pairs)


report(
    "lcs 5000 caption pairs",
    best_of(lcs_batch, _lcs_length_py),
    best_of(lcs_batch, _lcs_length_nb) if HAVE_NUMBA else None,
)

# greedy matching on one oversized similarity matrix
sim = rng.random((1500, 1500))
w_rows = np.full(1500, 1.0 / 1500)
w_cols = np.full(1500, 1.0 / 1500)
if HAVE_NUMBA:
    _match_means_nb(sim, w_rows, w_cols)
report(
    "match_means 1500x1500",
    best_of(_match_means_py, sim, w_rows, w_cols),
    best_of(_match_means_nb, sim, w_rows, w_cols) if HAVE_NUMBA else None,
)

# token-matching at caption scale, many calls
mats = [rng.random((rng.integers(5, 15), rng.integers(5, 15))) for _ in range(5000)]
weights = [(np.full(m.shape[0], 1.0 / m.shape[0]), np.full(m.shape[1], 1.0 / m.shape[1])) for m in mats]


def match_batch(fn):
    total = 0.0
    for m, (wr, wc) in zip(mats, weights):
        p, r = fn(m, wr, wc)
        total += p + r
    return total


report(
    "match_means 5000 captions",
    best_of(match_batch, _match_means_py),
    best_of(match_batch, _match_means_nb) if HAVE_NUMBA else None,
)

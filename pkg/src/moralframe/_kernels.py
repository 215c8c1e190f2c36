"""Hot numeric kernels for document scoring.

Each kernel exists twice: a numba ``@njit`` loop and a pure-numpy
equivalent. The dispatcher functions pick numba when it imports cleanly and
``MORALFRAME_DISABLE_NUMBA`` is unset; set it to ``1`` to force numpy.
Both paths sum in the same order, so they agree to the last few ulps.
"""
from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("MORALFRAME_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLE:
        raise ImportError("numba disabled by MORALFRAME_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


USING_NUMBA = HAVE_NUMBA


# --------------------------------------------------------------------------
# cosine of every row against every axis direction


def row_cosines_numpy(vectors: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """(n, d) x (k, d) -> (n, k) cosines; rows with zero norm give NaN."""
    vectors = np.asarray(vectors, dtype=np.float64)
    directions = np.asarray(directions, dtype=np.float64)
    n, k = vectors.shape[0], directions.shape[0]
    out = np.empty((n, k))
    vv = np.einsum("ij,ij->i", vectors, vectors)
    for j in range(k):
        d = directions[j]
        dd = np.dot(d, d)
        dots = np.einsum("ij,j->i", vectors, d)
        with np.errstate(invalid="ignore", divide="ignore"):
            c = dots / np.sqrt(vv * dd)
        c[vv == 0.0] = np.nan
        out[:, j] = np.clip(c, -1.0, 1.0)
    return out


@njit(cache=True)
def _row_cosines_jit(vectors, directions):
    n, d = vectors.shape
    k = directions.shape[0]
    out = np.empty((n, k))
    dd = np.empty(k)
    for j in range(k):
        s = 0.0
        for m in range(d):
            s += directions[j, m] * directions[j, m]
        dd[j] = s
    for i in range(n):
        vv = 0.0
        for m in range(d):
            vv += vectors[i, m] * vectors[i, m]
        for j in range(k):
            if vv == 0.0:
                out[i, j] = np.nan
                continue
            dot = 0.0
            for m in range(d):
                dot += vectors[i, m] * directions[j, m]
            c = dot / np.sqrt(vv * dd[j])
            if c > 1.0:
                c = 1.0
            elif c < -1.0:
                c = -1.0
            out[i, j] = c
    return out


def row_cosines_numba(vectors: np.ndarray, directions: np.ndarray) -> np.ndarray:
    return _row_cosines_jit(
        np.ascontiguousarray(vectors, dtype=np.float64),
        np.ascontiguousarray(directions, dtype=np.float64),
    )


# --------------------------------------------------------------------------
# tf-weighted mean of per-token values over CSR documents


def doc_weighted_mean_numpy(indptr, ids, counts, values):
    """Weighted mean of ``values[ids]`` per document, weights ``counts``.

    ``indptr`` has length n_docs + 1; document ``i`` owns entries
    ``indptr[i]:indptr[i+1]``. Returns (means (n_docs, k), weight per doc).
    Documents with zero weight get NaN means.
    """
    indptr = np.asarray(indptr, dtype=np.int64)
    ids = np.asarray(ids, dtype=np.int64)
    counts = np.asarray(counts, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    n_docs = indptr.shape[0] - 1
    k = values.shape[1]
    doc_of = np.repeat(np.arange(n_docs), np.diff(indptr))
    # bincount accumulates sequentially in entry order
    weight = np.bincount(doc_of, weights=counts, minlength=n_docs)
    out = np.full((n_docs, k), np.nan)
    has = weight > 0
    for j in range(k):
        s = np.bincount(doc_of, weights=counts * values[ids, j], minlength=n_docs)
        out[has, j] = s[has] / weight[has]
    np.clip(out, -1.0, 1.0, out=out)
    return out, weight


@njit(cache=True)
def _doc_weighted_mean_jit(indptr, ids, counts, values):
    n_docs = indptr.shape[0] - 1
    k = values.shape[1]
    out = np.empty((n_docs, k))
    weight = np.zeros(n_docs)
    for i in range(n_docs):
        w = 0.0
        for e in range(indptr[i], indptr[i + 1]):
            w += counts[e]
        weight[i] = w
        for j in range(k):
            if w == 0.0:
                out[i, j] = np.nan
                continue
            s = 0.0
            for e in range(indptr[i], indptr[i + 1]):
                s += counts[e] * values[ids[e], j]
            m = s / w
            if m > 1.0:
                m = 1.0
            elif m < -1.0:
                m = -1.0
            out[i, j] = m
    return out, weight


def doc_weighted_mean_numba(indptr, ids, counts, values):
    return _doc_weighted_mean_jit(
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(ids, dtype=np.int64),
        np.ascontiguousarray(counts, dtype=np.float64),
        np.ascontiguousarray(values, dtype=np.float64),
    )


if USING_NUMBA:
    row_cosines = row_cosines_numba
    doc_weighted_mean = doc_weighted_mean_numba
else:
    row_cosines = row_cosines_numpy
    doc_weighted_mean = doc_weighted_mean_numpy

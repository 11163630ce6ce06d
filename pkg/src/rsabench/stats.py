"""Scalar statistics used throughout the package.

All functions accept array-likes of finite floats and return numpy values.
Standard deviations are sample deviations (``ddof=1``) everywhere.
"""

import numpy as np

from .errors import DegenerateInput, LengthMismatch

#: relative tolerance below which a vector's sample variance counts as zero
DEGENERATE_RTOL = 1e-12


def as_vector(x, min_length=1, name="x"):
    """Return ``x`` as a 1-D float64 array, checking length and finiteness."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {v.shape}")
    if v.size < min_length:
        raise ValueError(f"{name} needs at least {min_length} elements, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains NaN or infinite values")
    return v


def is_degenerate(x):
    """True when the sample variance of ``x`` is numerically zero.

    The cutoff is ``1e-12 * max(1, mean(x**2))``, so large offsets do not
    hide a genuinely flat signal and tiny signals are not flagged merely
    for being small in absolute terms.
    """
    v = np.asarray(x, dtype=np.float64)
    if v.size < 2:
        return True
    var = np.var(v, ddof=1)
    return bool(var <= DEGENERATE_RTOL * max(1.0, float(np.mean(v * v))))


def _check_pair(x, y):
    x = as_vector(x, name="x")
    y = as_vector(y, name="y")
    if x.size != y.size:
        raise LengthMismatch(f"length mismatch: {x.size} != {y.size}")
    if x.size < 3:
        raise LengthMismatch(f"correlation needs at least 3 paired values, got {x.size}")
    return x, y


def _pearson(x, y):
    # exactly symmetric: elementwise products and the norm product commute
    dx = x - x.mean()
    dy = y - y.mean()
    r = np.dot(dx, dy) / (np.sqrt(np.dot(dx, dx)) * np.sqrt(np.dot(dy, dy)))
    return float(np.clip(r, -1.0, 1.0))


def pearson(x, y):
    """Sample Pearson correlation of two equal-length vectors.

    Raises
    ------
    LengthMismatch
        If the lengths differ or are below 3.
    DegenerateInput
        If either vector is constant.
    """
    x, y = _check_pair(x, y)
    if is_degenerate(x) or is_degenerate(y):
        raise DegenerateInput("correlation undefined for a constant vector")
    return _pearson(x, y)


def fractional_ranks(x):
    """Ranks starting at 1; ties share the average of the ranks they span."""
    v = as_vector(x)
    order = np.argsort(v, kind="mergesort")
    sorted_v = v[order]
    # boundaries of runs of equal values in sorted order
    new_run = np.empty(v.size, dtype=bool)
    new_run[0] = True
    np.not_equal(sorted_v[1:], sorted_v[:-1], out=new_run[1:])
    starts = np.flatnonzero(new_run)
    ends = np.append(starts[1:], v.size)
    # a run occupying 0-based positions [s, e) gets rank (s + 1 + e) / 2
    run_ranks = (starts + ends + 1) / 2.0
    ranks = np.empty(v.size, dtype=np.float64)
    ranks[order] = np.repeat(run_ranks, ends - starts)
    return ranks


def spearman(x, y):
    """Spearman rank correlation, computed as Pearson over fractional ranks.

    Ties are handled exactly; the ``1 - 6*sum(d**2)/(n*(n**2-1))`` shortcut
    is only valid for tie-free data and is not used.
    """
    x, y = _check_pair(x, y)
    rx = fractional_ranks(x)
    ry = fractional_ranks(y)
    if is_degenerate(rx) or is_degenerate(ry):
        raise DegenerateInput("rank correlation undefined: all values tied")
    return _pearson(rx, ry)


def zscore(x):
    """Center to mean 0 and scale to unit sample standard deviation."""
    v = as_vector(x, min_length=2)
    if is_degenerate(v):
        raise DegenerateInput("cannot z-score a constant vector")
    d = v - v.mean()
    return d / np.std(d, ddof=1)


def zscore_rows(a):
    """Row-wise :func:`zscore` of a 2-D array.

    Raises ``DegenerateInput`` naming the first constant row index.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[1] < 2:
        raise ValueError(f"expected a 2-D array with at least 2 columns, got {a.shape}")
    bad = degenerate_rows(a)
    if bad.any():
        raise DegenerateInput(f"row {int(np.flatnonzero(bad)[0])} is constant")
    d = a - a.mean(axis=1, keepdims=True)
    return d / np.std(d, axis=1, ddof=1, keepdims=True)


def degenerate_rows(a):
    """Boolean mask of rows of ``a`` that :func:`is_degenerate` would flag."""
    a = np.asarray(a, dtype=np.float64)
    if a.shape[1] < 2:
        return np.ones(a.shape[0], dtype=bool)
    var = np.var(a, axis=1, ddof=1)
    ms = np.mean(a * a, axis=1)
    return var <= DEGENERATE_RTOL * np.maximum(1.0, ms)


def mean(x):
    """Arithmetic mean of a non-empty vector."""
    return float(np.mean(as_vector(x)))

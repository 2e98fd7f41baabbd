"""Classifier-independent feature scorers: GR, IG, SU, CFS and ReliefF.

The entropy family works on discretized columns (equal-width bins); ReliefF
works on the raw continuous features with range normalization. All scorers
are pure functions of their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

DEFAULT_BINS = 10
RELIEFF_DEFAULT_NEIGHBORS = 10

FILTER_METHODS = ("GR", "IG", "RF", "SU")


@dataclass(frozen=True)
class DiscreteColumn:
    """Integer bin codes for one feature column plus the bin edges."""

    bins: np.ndarray  # int codes in [0, n_bins)
    n_bins: int
    edges: np.ndarray  # n_bins + 1 strictly increasing cut points

    def __post_init__(self):
        object.__setattr__(self, "bins", np.asarray(self.bins, dtype=np.intp))
        object.__setattr__(self, "edges", np.asarray(self.edges, dtype=np.float64))


def discretize(column, n_bins: int = DEFAULT_BINS) -> DiscreteColumn:
    """Equal-width binning over [min, max]; the maximum lands in the last
    bin and a constant column collapses to bin 0."""
    x = np.asarray(column, dtype=np.float64)
    if x.size == 0:
        raise DataError("cannot discretize an empty column", code="empty-column")
    if n_bins < 2:
        raise DataError("need at least two bins", code="bad-bins")
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        edges = lo + np.arange(n_bins + 1, dtype=np.float64)
        return DiscreteColumn(np.zeros(x.size, dtype=np.intp), n_bins, edges)
    width = (hi - lo) / n_bins
    codes = np.minimum(((x - lo) / width).astype(np.intp), n_bins - 1)
    edges = lo + width * np.arange(n_bins + 1)
    return DiscreteColumn(codes, n_bins, edges)


def _codes(values) -> np.ndarray:
    if isinstance(values, DiscreteColumn):
        return values.bins
    values = np.asarray(values)
    _, codes = np.unique(values, return_inverse=True)
    return codes


def entropy(labels) -> float:
    """Shannon entropy in bits, with 0*log(0) = 0."""
    codes = _codes(labels)
    if codes.size == 0:
        raise DataError("entropy of an empty sequence", code="empty-column")
    counts = np.bincount(codes)
    p = counts[counts > 0] / codes.size
    return float(-(p * np.log2(p)).sum())


def _check_paired(feature, labels):
    f = _codes(feature)
    y = _codes(labels)
    if f.size != y.size:
        raise DataError("feature and labels differ in length",
                        code="length-mismatch")
    return f, y


def info_gain(feature, labels) -> float:
    """H(labels) - H(labels | feature)."""
    f, y = _check_paired(feature, labels)
    h_y = entropy(y)
    cond = 0.0
    for v in np.unique(f):
        mask = f == v
        cond += mask.mean() * entropy(y[mask])
    return max(h_y - cond, 0.0)


def gain_ratio(feature, labels) -> float:
    """IG normalized by the feature entropy; 0 when H(feature) = 0."""
    f, y = _check_paired(feature, labels)
    h_f = entropy(f)
    if h_f == 0.0:
        return 0.0
    return info_gain(f, y) / h_f


def symmetrical_uncertainty(feature, labels) -> float:
    """2*IG / (H(feature) + H(labels)); 0 when both entropies vanish."""
    f, y = _check_paired(feature, labels)
    denom = entropy(f) + entropy(y)
    if denom == 0.0:
        return 0.0
    return 2.0 * info_gain(f, y) / denom


def cfs_merit(feature_columns, labels, n_bins: int = DEFAULT_BINS) -> float:
    """Correlation-based subset merit k*r_cf / sqrt(k + k(k-1)*r_ff).

    ``feature_columns`` is a sequence of columns (raw or DiscreteColumn);
    SU serves as the correlation measure for both the feature-class and
    the feature-feature terms.
    """
    cols = [c if isinstance(c, DiscreteColumn) else discretize(c, n_bins)
            for c in feature_columns]
    k = len(cols)
    if k == 0:
        raise DataError("empty feature subset", code="empty-subset")
    y = _codes(labels)
    r_cf = float(np.mean([symmetrical_uncertainty(c, y) for c in cols]))
    if k == 1:
        return r_cf
    pair_sum = 0.0
    for i in range(k):
        for j in range(i + 1, k):
            pair_sum += symmetrical_uncertainty(cols[i], cols[j])
    r_ff = pair_sum / (k * (k - 1) / 2)
    return k * r_cf / np.sqrt(k + k * (k - 1) * r_ff)


# --------------------------------------------------------------------------
# ReliefF
# --------------------------------------------------------------------------

def relieff(X, y, n_neighbors: int = RELIEFF_DEFAULT_NEIGHBORS,
            n_iterations: int | None = None, seed: int = 0) -> np.ndarray:
    """Kononenko-style ReliefF weights in [-1, 1] per feature.

    Neighbor distance is Manhattan on range-normalized features. With the
    default ``n_iterations=None`` every instance is visited once in index
    order, making the scores seed-free; pass an iteration count for
    Monte-Carlo sampling instead.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    n, d = X.shape
    classes, y_codes = np.unique(y, return_inverse=True)
    counts = np.bincount(y_codes)
    if np.any(counts < n_neighbors + 1):
        small = classes[counts < n_neighbors + 1]
        raise DataError(
            f"every class needs at least {n_neighbors + 1} samples; "
            f"too small: {list(small)}", code="class-too-small")
    priors = counts / n

    spans = X.max(axis=0) - X.min(axis=0)
    spans[spans == 0] = 1.0  # constant features contribute zero diff anyway
    Z = X / spans

    exhaustive = n_iterations is None
    if exhaustive:
        visits = np.arange(n)
    else:
        visits = np.random.default_rng(seed).integers(0, n, size=int(n_iterations))
    if visits.size == 0:
        return np.zeros(d)

    weights = np.zeros(d)
    m = visits.size
    for i in visits:
        diffs = np.abs(Z - Z[i])          # (n, d) per-feature diff
        dists = diffs.sum(axis=1)
        order = np.lexsort((np.arange(n), dists))  # distance, then index
        order = order[order != i]
        ci = y_codes[i]
        for c in range(classes.size):
            mask = y_codes[order] == c
            nearest = order[mask][:n_neighbors]
            mean_diff = diffs[nearest].mean(axis=0)
            if c == ci:
                weights -= mean_diff / m
            else:
                weights += (priors[c] / (1.0 - priors[ci])) * mean_diff / m
    return weights


def filter_scores(X, y, method: str, n_bins: int = DEFAULT_BINS,
                  n_neighbors: int = RELIEFF_DEFAULT_NEIGHBORS) -> np.ndarray:
    """Score every column of X with one of GR / IG / RF / SU."""
    method = method.upper()
    if method not in FILTER_METHODS:
        raise DataError(f"unknown filter method: {method!r}", code="bad-method")
    X = np.asarray(X, dtype=np.float64)
    if method == "RF":
        return relieff(X, y, n_neighbors=n_neighbors)
    scorer = {"GR": gain_ratio, "IG": info_gain,
              "SU": symmetrical_uncertainty}[method]
    y_codes = _codes(np.asarray(y))
    return np.array([scorer(discretize(X[:, j], n_bins), y_codes)
                     for j in range(X.shape[1])])

"""From activation matrices to representational similarity matrices.

The pipeline has four stages, applied in order by :func:`run_pipeline`:

1. :func:`variance_filter` drops features that do not vary across stimuli.
2. :func:`responsiveness_filter` keeps features whose mean activation lies
   more than ``k`` standard deviations above the mean of all feature means.
3. :func:`normalize` z-scores each feature across stimuli.
4. :func:`compute_rsm` correlates every pair of stimulus patterns.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import stats
from .errors import DegenerateInput, EmptySelection, StimulusMismatch

DEFAULT_K = 3.1

Z_AXES = ("per-feature", "per-pattern")

STAGE_KEPT = ""
STAGE_VARIANCE = "variance"
STAGE_RESPONSIVENESS = "responsiveness"


def _ids(values, name):
    ids = tuple(str(v) for v in values)
    if len(set(ids)) != len(ids):
        seen = set()
        dup = next(i for i in ids if i in seen or seen.add(i))
        raise ValueError(f"duplicate {name} id {dup!r}")
    return ids


@dataclass(frozen=True, eq=False)
class ActivationMatrix:
    """Features x stimuli activations with ids on both axes."""

    feature_ids: tuple
    stimulus_ids: tuple
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "feature_ids", _ids(self.feature_ids, "feature"))
        object.__setattr__(self, "stimulus_ids", _ids(self.stimulus_ids, "stimulus"))
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValueError(f"activation data must be 2-D, got shape {data.shape}")
        if data.shape != (len(self.feature_ids), len(self.stimulus_ids)):
            raise ValueError(
                f"data shape {data.shape} does not match "
                f"{len(self.feature_ids)} feature ids x {len(self.stimulus_ids)} stimulus ids"
            )
        if data.shape[0] < 1 or data.shape[1] < 3:
            raise ValueError(f"need >= 1 feature and >= 3 stimuli, got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("activation data contains NaN or infinite values")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n_features(self):
        return self.data.shape[0]

    @property
    def n_stimuli(self):
        return self.data.shape[1]

    def select(self, keep):
        """Subset of features given a boolean mask."""
        keep = np.asarray(keep, dtype=bool)
        ids = tuple(f for f, k in zip(self.feature_ids, keep) if k)
        return ActivationMatrix(ids, self.stimulus_ids, self.data[keep])

    def reorder_stimuli(self, stimulus_ids):
        """Columns permuted into the given order (must be the same id set)."""
        stimulus_ids = tuple(stimulus_ids)
        if sorted(stimulus_ids) != sorted(self.stimulus_ids) or len(stimulus_ids) != self.n_stimuli:
            raise StimulusMismatch(
                f"stimulus ids {list(self.stimulus_ids)} do not match {list(stimulus_ids)}"
            )
        pos = {s: i for i, s in enumerate(self.stimulus_ids)}
        order = [pos[s] for s in stimulus_ids]
        return ActivationMatrix(self.feature_ids, stimulus_ids, self.data[:, order])

    def __eq__(self, other):
        if not isinstance(other, ActivationMatrix):
            return NotImplemented
        return (
            self.feature_ids == other.feature_ids
            and self.stimulus_ids == other.stimulus_ids
            and np.array_equal(self.data, other.data)
        )


@dataclass(frozen=True, eq=False)
class SelectionMask:
    """Which features survived selection, and which stage removed the rest.

    ``stage[i]`` is ``""`` for kept features, otherwise ``"variance"`` or
    ``"responsiveness"``. ``fallback`` is set when the responsiveness
    criterion selected nothing and every variance-surviving feature was
    kept instead.
    """

    kept: np.ndarray
    stage: tuple
    threshold_used: float = float("nan")
    fallback: bool = False

    @property
    def n_features(self):
        return len(self.kept)

    @property
    def n_kept(self):
        return int(np.count_nonzero(self.kept))

    def n_dropped(self, stage):
        return sum(1 for s in self.stage if s == stage)

    def summary(self):
        return {
            "n_features": self.n_features,
            "n_kept": self.n_kept,
            "n_variance_dropped": self.n_dropped(STAGE_VARIANCE),
            "n_responsiveness_dropped": self.n_dropped(STAGE_RESPONSIVENESS),
            "threshold": None if np.isnan(self.threshold_used) else float(self.threshold_used),
            "fallback": bool(self.fallback),
        }


def _check_square(values, ids, kind):
    values = np.array(values, dtype=np.float64)
    n = len(ids)
    if values.shape != (n, n):
        raise ValueError(f"{kind} values must be {n}x{n}, got shape {values.shape}")
    if n < 3:
        raise ValueError(f"{kind} needs at least 3 stimuli, got {n}")
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{kind} contains NaN or infinite values")
    if not np.allclose(values, values.T, rtol=0, atol=1e-12):
        raise ValueError(f"{kind} is not symmetric")
    return values


@dataclass(frozen=True, eq=False)
class Rsm:
    """Symmetric stimulus-by-stimulus correlation matrix with unit diagonal."""

    stimulus_ids: tuple
    values: np.ndarray

    def __post_init__(self):
        ids = _ids(self.stimulus_ids, "stimulus")
        values = _check_square(self.values, ids, "Rsm")
        if np.any(np.abs(values) > 1.0):
            raise ValueError("Rsm entries must lie in [-1, 1]")
        np.fill_diagonal(values, 1.0)
        values.setflags(write=False)
        object.__setattr__(self, "stimulus_ids", ids)
        object.__setattr__(self, "values", values)

    @property
    def n(self):
        return len(self.stimulus_ids)

    def reorder(self, stimulus_ids):
        pos = {s: i for i, s in enumerate(self.stimulus_ids)}
        try:
            order = [pos[s] for s in stimulus_ids]
        except KeyError as exc:
            raise StimulusMismatch(f"unknown stimulus id {exc.args[0]!r}") from None
        if len(order) != self.n:
            raise StimulusMismatch("reordering must list every stimulus exactly once")
        return Rsm(tuple(stimulus_ids), self.values[np.ix_(order, order)])

    def __eq__(self, other):
        if not isinstance(other, Rsm):
            return NotImplemented
        return self.stimulus_ids == other.stimulus_ids and np.array_equal(self.values, other.values)


@dataclass(frozen=True, eq=False)
class Rdm:
    """Dissimilarity view of an :class:`Rsm`; entries in [0, 2], zero diagonal."""

    stimulus_ids: tuple
    values: np.ndarray

    def __post_init__(self):
        ids = _ids(self.stimulus_ids, "stimulus")
        values = _check_square(self.values, ids, "Rdm")
        if np.any(values < 0.0) or np.any(values > 2.0):
            raise ValueError("Rdm entries must lie in [0, 2]")
        np.fill_diagonal(values, 0.0)
        values.setflags(write=False)
        object.__setattr__(self, "stimulus_ids", ids)
        object.__setattr__(self, "values", values)

    @property
    def n(self):
        return len(self.stimulus_ids)

    def __eq__(self, other):
        if not isinstance(other, Rdm):
            return NotImplemented
        return self.stimulus_ids == other.stimulus_ids and np.array_equal(self.values, other.values)


def variance_filter(m):
    """Drop features whose variance across stimuli is numerically zero.

    Returns the filtered matrix and a :class:`SelectionMask` over the input
    features. Raises :class:`EmptySelection` if nothing survives.
    """
    flat = stats.degenerate_rows(m.data)
    if flat.all():
        raise EmptySelection(f"all {m.n_features} features have zero variance")
    stage = tuple(STAGE_VARIANCE if f else STAGE_KEPT for f in flat)
    return m.select(~flat), SelectionMask(kept=~flat, stage=stage)


def responsiveness_filter(m, k=DEFAULT_K):
    """Keep features whose mean exceeds ``mu + k * sigma`` of all feature means.

    ``mu`` and ``sigma`` are the mean and sample standard deviation of the
    per-feature means. The test is one-sided: only unusually *high* means
    qualify. When no feature qualifies, including the case where the
    feature means are all (numerically) equal, every feature is kept and
    the mask's ``fallback`` flag is set.
    """
    if not k > 0:
        raise ValueError(f"k must be positive, got {k}")
    means = m.data.mean(axis=1)
    if m.n_features < 2 or stats.is_degenerate(means):
        # no spread among the means: the threshold is unreachable
        threshold = float(means.mean())
        keep = np.zeros(m.n_features, dtype=bool)
    else:
        threshold = float(means.mean() + k * means.std(ddof=1))
        keep = means > threshold
    if not keep.any():
        kept = np.ones(m.n_features, dtype=bool)
        mask = SelectionMask(kept, (STAGE_KEPT,) * m.n_features, threshold, fallback=True)
        return m, mask
    stage = tuple(STAGE_KEPT if x else STAGE_RESPONSIVENESS for x in keep)
    return m.select(keep), SelectionMask(keep, stage, threshold)


def normalize(m, z_axis="per-feature"):
    """Z-score activations.

    ``"per-feature"`` (the default) standardizes each feature across
    stimuli. ``"per-pattern"`` standardizes each stimulus column across
    features instead.
    """
    if z_axis == "per-feature":
        data = stats.zscore_rows(m.data)
    elif z_axis == "per-pattern":
        if m.n_features < 2:
            raise DegenerateInput("per-pattern z-scoring needs at least 2 features")
        bad = stats.degenerate_rows(m.data.T)
        if bad.any():
            raise DegenerateInput(f"stimulus {m.stimulus_ids[int(np.flatnonzero(bad)[0])]!r} is constant across features")
        data = stats.zscore_rows(m.data.T).T
    else:
        raise ValueError(f"z_axis must be one of {Z_AXES}, got {z_axis!r}")
    return ActivationMatrix(m.feature_ids, m.stimulus_ids, data)


def compute_rsm(m):
    """Pearson correlation between every pair of stimulus columns.

    Warns when fewer than 3 features are available. Raises
    :class:`DegenerateInput` naming the first stimulus whose column is
    constant across features.
    """
    if m.n_features < 3:
        warnings.warn(
            f"computing an RSM from only {m.n_features} feature(s)", RuntimeWarning, stacklevel=2
        )
    cols = m.data.T
    if m.n_features < 2:
        raise DegenerateInput(f"stimulus {m.stimulus_ids[0]!r} is constant: a single feature")
    flat = stats.degenerate_rows(cols)
    if flat.any():
        raise DegenerateInput(f"stimulus {m.stimulus_ids[int(np.flatnonzero(flat)[0])]!r} is constant across features")
    d = cols - cols.mean(axis=1, keepdims=True)
    unit = d / np.sqrt(np.einsum("ij,ij->i", d, d))[:, None]
    values = unit @ unit.T
    values = (values + values.T) / 2.0
    np.clip(values, -1.0, 1.0, out=values)
    np.fill_diagonal(values, 1.0)
    return Rsm(m.stimulus_ids, values)


def rsm_to_rdm(r):
    """``1 - r`` entrywise."""
    return Rdm(r.stimulus_ids, 1.0 - r.values)


def vectorize_offdiag(r):
    """Upper-triangle entries (``i < j``) in row-major order."""
    values = r.values if isinstance(r, (Rsm, Rdm)) else np.asarray(r, dtype=np.float64)
    i, j = np.triu_indices(values.shape[0], k=1)
    return values[i, j]


def run_pipeline(m, k=DEFAULT_K, z_axis="per-feature"):
    """Full pipeline: variance filter, responsiveness filter, z-score, RSM.

    Returns ``(rsm, mask)`` where the mask covers the *input* features and
    records the stage that removed each dropped feature.
    """
    after_var, var_mask = variance_filter(m)
    selected, resp_mask = responsiveness_filter(after_var, k)
    rsm = compute_rsm(normalize(selected, z_axis))

    kept = var_mask.kept.copy()
    stage = list(var_mask.stage)
    survivors = np.flatnonzero(var_mask.kept)
    for pos, keep in zip(survivors, resp_mask.kept):
        if not keep:
            kept[pos] = False
            stage[pos] = STAGE_RESPONSIVENESS
    mask = SelectionMask(kept, tuple(stage), resp_mask.threshold_used, resp_mask.fallback)
    return rsm, mask

"""Reference geometries and synthetic cohorts with a planted correlation structure.

The hue-angle model assigns every pair of colors a similarity that depends
only on their hue difference. Planted cohorts draw activation matrices
whose stimulus columns have a chosen population correlation matrix, which
lets the whole pipeline be checked against a known answer.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import stats
from .errors import DegenerateInput, NotPositiveSemidefinite
from .pipeline import ActivationMatrix, Rsm, vectorize_offdiag
from .scoring import CONDITIONS, NO_REPORT, SubjectRecording, check_condition

PSD_TOL = 1e-10


@dataclass(frozen=True)
class Stimulus:
    id: str
    hue_deg: float
    sat: float = 1.0
    val: float = 1.0


@dataclass(frozen=True)
class StimulusSet:
    stimuli: tuple

    def __post_init__(self):
        stimuli = tuple(s if isinstance(s, Stimulus) else Stimulus(*s) for s in self.stimuli)
        if len(stimuli) < 3:
            raise ValueError(f"a stimulus set needs at least 3 stimuli, got {len(stimuli)}")
        ids = [s.id for s in stimuli]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate stimulus ids in {ids}")
        for s in stimuli:
            if not math.isfinite(s.hue_deg):
                raise ValueError(f"stimulus {s.id!r} has non-finite hue")
            if not (0.0 <= s.sat <= 1.0 and 0.0 <= s.val <= 1.0):
                raise ValueError(f"stimulus {s.id!r}: saturation and value must lie in [0, 1]")
        object.__setattr__(self, "stimuli", stimuli)

    @property
    def ids(self):
        return tuple(s.id for s in self.stimuli)

    @property
    def hues(self):
        return np.array([s.hue_deg % 360.0 for s in self.stimuli])

    def __len__(self):
        return len(self.stimuli)


def even_hues(n=9, prefix="hue"):
    """``n`` fully saturated colors evenly spaced around the hue circle.

    A synthetic default (0, 40, ..., 320 degrees for ``n=9``). Real
    analyses should take stimulus coordinates from the dataset manifest.
    """
    step = 360.0 / n
    return StimulusSet(tuple(Stimulus(f"{prefix}{round(i * step):03d}", i * step) for i in range(n)))


def hue_difference(a, b):
    """Circular hue distance in degrees, in [0, 180]."""
    d = abs(a - b) % 360.0
    return np.minimum(d, 360.0 - d)


def cosine_kernel(delta_deg):
    return np.cos(np.deg2rad(delta_deg))


def linear_kernel(delta_deg):
    # 0 degrees -> 1, 90 -> 0, 180 -> -1
    return 1.0 - np.asarray(delta_deg) / 90.0


ANGLE_KERNELS = {"cosine": cosine_kernel, "linear": linear_kernel}


def hsv_angle_rsm(stimuli, kernel="cosine"):
    """Similarity defined purely by hue angle.

    ``kernel`` maps the circular hue difference in degrees (0..180) to a
    similarity in [-1, 1]; either a name from :data:`ANGLE_KERNELS` or a
    callable. Cosine is the default.
    """
    fn = ANGLE_KERNELS[kernel] if isinstance(kernel, str) else kernel
    hues = stimuli.hues
    delta = hue_difference(hues[:, None], hues[None, :])
    values = np.clip(np.asarray(fn(delta), dtype=np.float64), -1.0, 1.0)
    values = (values + values.T) / 2.0
    np.fill_diagonal(values, 1.0)
    return Rsm(stimuli.ids, values)


def antidiagonal_index(rsm, stimuli, kernel="cosine"):
    """Rank agreement between ``rsm`` and the hue-angle template.

    On evenly spaced hues the angle template is what produces the
    anti-diagonal band in an RDM, so a value near 1 means the geometry is
    organized by hue angle, near 0 means it is unrelated to it.
    """
    if tuple(rsm.stimulus_ids) != stimuli.ids:
        rsm = rsm.reorder(stimuli.ids)
    template = vectorize_offdiag(hsv_angle_rsm(stimuli, kernel))
    observed = vectorize_offdiag(rsm)
    if stats.is_degenerate(stats.fractional_ranks(template)):
        raise DegenerateInput("hue-angle template has a constant off-diagonal")
    if stats.is_degenerate(stats.fractional_ranks(observed)):
        raise DegenerateInput("RSM has a constant off-diagonal")
    return stats.spearman(observed, template)


def psd_factor(target):
    """Factor ``L`` with ``L @ L.T == target`` from an eigendecomposition.

    Eigenvalues down to ``-1e-10`` are treated as numerical noise and
    clipped to zero; anything more negative raises
    :class:`NotPositiveSemidefinite`.
    """
    values = target.values if isinstance(target, Rsm) else np.asarray(target, dtype=np.float64)
    w, v = np.linalg.eigh(values)
    if w.min() < -PSD_TOL:
        raise NotPositiveSemidefinite(f"target has eigenvalue {w.min():.3g}")
    return v * np.sqrt(np.clip(w, 0.0, None))


def random_rsm(stimulus_ids, rng, rank=None):
    """Correlation matrix of ``rank`` random Gaussian features per stimulus."""
    n = len(stimulus_ids)
    rank = n if rank is None else rank
    a = rng.standard_normal((n, rank))
    a -= a.mean(axis=1, keepdims=True)
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    values = np.clip(a @ a.T, -1.0, 1.0)
    values = (values + values.T) / 2.0
    return Rsm(stimulus_ids, values)


def blend_rsms(a, b, weight):
    """Convex combination ``(1 - weight) * a + weight * b``; stays PSD."""
    if a.stimulus_ids != b.stimulus_ids:
        b = b.reorder(a.stimulus_ids)
    return Rsm(a.stimulus_ids, (1.0 - weight) * a.values + weight * b.values)


@dataclass(frozen=True)
class PlantedCohortSpec:
    """Recipe for a synthetic cohort.

    Each subject's activations are ``X = G @ L.T + noise_sd * E`` with
    ``target = L @ L.T`` and ``G``, ``E`` standard normal. Optionally the
    first ``responsive_fraction`` of features get a constant
    ``responsive_offset`` added across all stimuli, which gives the
    responsiveness filter a population of clearly responsive features to
    find; the offset is removed again by per-feature z-scoring.
    """

    target: Rsm
    n_subjects: int = 20
    n_features: int = 10_000
    noise_sd: float = 0.0
    seed: int = 0
    responsive_fraction: float = 0.0
    responsive_offset: float = 0.0

    def __post_init__(self):
        if self.n_subjects < 1 or self.n_features < 1:
            raise ValueError("n_subjects and n_features must be positive")
        if not self.noise_sd >= 0:
            raise ValueError(f"noise_sd must be >= 0, got {self.noise_sd}")
        if not 0.0 <= self.responsive_fraction <= 1.0:
            raise ValueError("responsive_fraction must lie in [0, 1]")
        psd_factor(self.target)


def subject_rng(seed, subject_index, condition=NO_REPORT):
    """Independent generator per (seed, condition, subject).

    Derived through ``SeedSequence`` so that serial and parallel generation
    produce identical streams.
    """
    return np.random.default_rng([int(seed), CONDITIONS.index(check_condition(condition)), int(subject_index)])


# stream id for model activations, disjoint from the condition indices
_MODEL_STREAM = len(CONDITIONS)


def _draw(spec, rng):
    factor = psd_factor(spec.target)
    n = spec.target.n
    g = rng.standard_normal((spec.n_features, n))
    e = rng.standard_normal((spec.n_features, n))
    data = g @ factor.T
    if spec.noise_sd:
        data += spec.noise_sd * e
    n_resp = int(round(spec.responsive_fraction * spec.n_features))
    if n_resp and spec.responsive_offset:
        data[:n_resp] += spec.responsive_offset
    width = len(str(spec.n_features - 1))
    feature_ids = tuple(f"f{i:0{width}d}" for i in range(spec.n_features))
    return ActivationMatrix(feature_ids, spec.target.stimulus_ids, data)


def planted_activations(spec, subject_index, condition=NO_REPORT):
    """One subject's activation matrix under ``spec``."""
    return _draw(spec, subject_rng(spec.seed, subject_index, condition))


def planted_model_activations(spec, model_index):
    """Activations for a synthetic model, from a stream separate from subjects'."""
    return _draw(spec, np.random.default_rng([int(spec.seed), _MODEL_STREAM, int(model_index)]))


def generate_planted_cohort(spec, condition=NO_REPORT, subject_prefix="sub"):
    """Activation matrices for every subject in ``spec``.

    Subject ``i`` is reproducible bit-for-bit from ``(seed, condition, i)``
    alone.
    """
    width = max(2, len(str(spec.n_subjects)))
    recordings = []
    for i in range(spec.n_subjects):
        sid = f"{subject_prefix}{i + 1:0{width}d}"
        recordings.append(SubjectRecording(sid, condition, planted_activations(spec, i, condition)))
    return recordings

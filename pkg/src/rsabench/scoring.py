"""Model-versus-brain alignment scores, noise ceilings and score tables."""

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import stats
from .errors import (
    DegenerateInput,
    EmptySet,
    MissingCondition,
    MissingModel,
    StimulusMismatch,
    UnknownCondition,
)
from .pipeline import ActivationMatrix, Rsm, vectorize_offdiag

NO_REPORT = "no-report"
REPORT = "report"
CONDITIONS = (NO_REPORT, REPORT)

CEILING_METRICS = ("spearman", "pearson")


def check_condition(condition):
    if condition not in CONDITIONS:
        raise UnknownCondition(f"unknown condition {condition!r}; expected one of {list(CONDITIONS)}")
    return condition


@dataclass(frozen=True)
class SubjectRecording:
    subject_id: str
    condition: str
    matrix: ActivationMatrix

    def __post_init__(self):
        check_condition(self.condition)


@dataclass(frozen=True)
class SubjectRsmSet:
    """Per-subject RSMs for one condition, all over the same stimulus order."""

    condition: str
    entries: tuple  # of (subject_id, Rsm)

    def __post_init__(self):
        check_condition(self.condition)
        entries = tuple((str(s), r) for s, r in self.entries)
        ids = [s for s, _ in entries]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate subject ids in {ids}")
        if entries:
            first = entries[0][1].stimulus_ids
            for sid, r in entries[1:]:
                if r.stimulus_ids != first:
                    raise StimulusMismatch(f"subject {sid!r} has stimulus order {list(r.stimulus_ids)}, expected {list(first)}")
        object.__setattr__(self, "entries", entries)

    @property
    def subject_ids(self):
        return tuple(s for s, _ in self.entries)

    @property
    def stimulus_ids(self):
        if not self.entries:
            raise EmptySet("subject set is empty")
        return self.entries[0][1].stimulus_ids

    def __len__(self):
        return len(self.entries)

    def without(self, subject_id):
        kept = tuple((s, r) for s, r in self.entries if s != subject_id)
        if len(kept) == len(self.entries):
            raise KeyError(subject_id)
        return SubjectRsmSet(self.condition, kept)


def _check_mean(name, value, per_subject, tol=1e-12):
    if not per_subject:
        raise EmptySet(f"{name}: no per-subject values")
    expected = float(np.mean([r for _, r in per_subject]))
    if abs(value - expected) > tol:
        raise ValueError(f"{name} {value!r} is not the mean of its per-subject values ({expected!r})")


@dataclass(frozen=True)
class AlignmentScore:
    model_id: str
    condition: str
    per_subject: tuple  # of (subject_id, r)
    mean_score: float
    dropped: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "per_subject", tuple((str(s), float(r)) for s, r in self.per_subject))
        _check_mean("mean_score", self.mean_score, self.per_subject)


@dataclass(frozen=True)
class NoiseCeiling:
    condition: str
    per_subject: tuple  # of (subject_id, r)
    ceiling: float
    metric: str = "spearman"
    dropped: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "per_subject", tuple((str(s), float(r)) for s, r in self.per_subject))
        _check_mean("ceiling", self.ceiling, self.per_subject)


def _usable(subjects):
    """Split subjects into those with a non-degenerate off-diagonal and the rest."""
    usable, dropped = [], []
    for sid, r in subjects.entries:
        if stats.is_degenerate(stats.fractional_ranks(vectorize_offdiag(r))):
            dropped.append(sid)
        else:
            usable.append((sid, r))
    if dropped:
        warnings.warn(
            f"{subjects.condition}: dropping subject(s) {dropped} with constant off-diagonal RSM",
            RuntimeWarning,
            stacklevel=3,
        )
    return SubjectRsmSet(subjects.condition, tuple(usable)), tuple(dropped)


def score_model(model_rsm, subjects, model_id="model"):
    """Spearman-correlate the model's off-diagonal with each subject's.

    The score is the plain mean of the per-subject coefficients. Subjects
    whose own off-diagonal is constant are skipped with a warning and
    listed in ``AlignmentScore.dropped``.
    """
    if model_rsm.stimulus_ids != subjects.stimulus_ids:
        raise StimulusMismatch(
            f"model {model_id!r} stimulus order {list(model_rsm.stimulus_ids)} "
            f"differs from subjects' {list(subjects.stimulus_ids)}"
        )
    model_vec = vectorize_offdiag(model_rsm)
    if stats.is_degenerate(stats.fractional_ranks(model_vec)):
        raise DegenerateInput(f"model {model_id!r} has a constant off-diagonal RSM")
    usable, dropped = _usable(subjects)
    if not len(usable):
        raise EmptySet(f"no usable subjects in condition {subjects.condition!r}")
    per_subject = tuple((sid, stats.spearman(model_vec, vectorize_offdiag(r))) for sid, r in usable.entries)
    mean = float(np.mean([r for _, r in per_subject]))
    return AlignmentScore(model_id, subjects.condition, per_subject, mean, dropped)


def mean_rsm(subjects, exclude=None):
    """Entrywise mean of the subjects' RSMs, optionally leaving one out."""
    if exclude is not None:
        subjects = subjects.without(exclude)
    if not len(subjects):
        raise EmptySet("mean of zero RSMs")
    stacked = np.stack([r.values for _, r in subjects.entries])
    values = stacked.mean(axis=0)
    np.fill_diagonal(values, 1.0)
    return Rsm(subjects.stimulus_ids, values)


def noise_ceiling(subjects, metric="spearman"):
    """Leave-one-subject-out ceiling.

    Each subject's off-diagonal is correlated (Spearman by default, or
    Pearson) with that of the mean RSM of all other subjects; the ceiling
    is the mean of those coefficients.
    """
    if metric not in CEILING_METRICS:
        raise ValueError(f"metric must be one of {CEILING_METRICS}, got {metric!r}")
    corr = stats.spearman if metric == "spearman" else stats.pearson
    usable, dropped = _usable(subjects)
    if len(usable) < 2:
        raise EmptySet(f"noise ceiling needs at least 2 usable subjects, got {len(usable)}")
    per_subject = []
    for sid, r in usable.entries:
        others = vectorize_offdiag(mean_rsm(usable, exclude=sid))
        try:
            per_subject.append((sid, corr(vectorize_offdiag(r), others)))
        except DegenerateInput:
            raise DegenerateInput(f"leave-{sid!r}-out mean RSM has a constant off-diagonal") from None
    ceiling = float(np.mean([r for _, r in per_subject]))
    return NoiseCeiling(subjects.condition, tuple(per_subject), ceiling, metric, dropped)


@dataclass(frozen=True)
class ScoreRow:
    model_id: str
    arch: str
    training: str
    condition: str
    mean_score: float


@dataclass(frozen=True)
class ScoreTable:
    """Flat table of per-(model, condition) scores, sorted by model then condition."""

    rows: tuple

    def __post_init__(self):
        rows = tuple(sorted(self.rows, key=lambda r: (r.model_id, r.condition)))
        seen = set()
        for row in rows:
            check_condition(row.condition)
            key = (row.model_id, row.condition)
            if key in seen:
                raise ValueError(f"duplicate row for model {row.model_id!r} under {row.condition!r}")
            seen.add(key)
        object.__setattr__(self, "rows", rows)

    @property
    def model_ids(self):
        return tuple(dict.fromkeys(r.model_id for r in self.rows))

    def score(self, model_id, condition):
        for row in self.rows:
            if row.model_id == model_id and row.condition == condition:
                return row.mean_score
        raise MissingModel(f"model {model_id!r} has no score under {condition!r}")


@dataclass(frozen=True)
class ConditionSummary:
    mean_no_report: float
    mean_report: float
    deltas: dict = field(default_factory=dict)  # model_id -> no_report - report
    higher_count: int = 0
    n_models: int = 0

    @property
    def higher_fraction(self):
        return self.higher_count / self.n_models if self.n_models else float("nan")

    def as_dict(self):
        return {
            "mean_no_report": self.mean_no_report,
            "mean_report": self.mean_report,
            "deltas": dict(sorted(self.deltas.items())),
            "higher_count": self.higher_count,
            "n_models": self.n_models,
            "higher_fraction": self.higher_fraction,
        }


def condition_summary(table):
    """Per-condition means and how many models score higher under no-report."""
    models = table.model_ids
    if not models:
        raise EmptySet("score table is empty")
    no_report, report = [], []
    for model_id in models:
        try:
            no_report.append(table.score(model_id, NO_REPORT))
            report.append(table.score(model_id, REPORT))
        except MissingModel:
            raise MissingCondition(f"model {model_id!r} is not scored under both conditions") from None
    deltas = {m: a - b for m, a, b in zip(models, no_report, report)}
    return ConditionSummary(
        mean_no_report=float(np.mean(no_report)),
        mean_report=float(np.mean(report)),
        deltas=deltas,
        higher_count=sum(1 for d in deltas.values() if d > 0),
        n_models=len(models),
    )


def paired_delta(table, pair, condition):
    """``score(a) - score(b)`` under one condition."""
    a, b = pair
    return table.score(a, condition) - table.score(b, condition)

"""Whole-dataset runs: score every model under every condition.

Work units (one pipeline run per subject file and per model file) are
independent and may run on a thread pool; results are always reduced in
manifest order, so the report does not depend on scheduling.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import (
    PlantedCohortSpec,
    blend_rsms,
    even_hues,
    hsv_angle_rsm,
    planted_activations,
    planted_model_activations,
    random_rsm,
)
from .errors import ComputationError, InputError
from .io import (
    DatasetManifest,
    ManifestModel,
    ManifestSubject,
    ReportCeiling,
    ReportScore,
    ScoreReport,
    write_activation_matrix,
    write_manifest,
)
from .pipeline import DEFAULT_K, Z_AXES, run_pipeline
from .scoring import (
    CEILING_METRICS,
    CONDITIONS,
    NO_REPORT,
    REPORT,
    ScoreRow,
    ScoreTable,
    SubjectRsmSet,
    condition_summary,
    noise_ceiling,
    score_model,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    """Pipeline and scheduling options; the defaults follow the published method."""

    k: float = DEFAULT_K
    z_axis: str = "per-feature"
    ceiling_metric: str = "spearman"
    jobs: int = 1
    seed: int = None
    run_label: str = None

    def __post_init__(self):
        if not self.k > 0:
            raise InputError(f"k must be positive, got {self.k}")
        if self.z_axis not in Z_AXES:
            raise InputError(f"z-axis must be one of {list(Z_AXES)}, got {self.z_axis!r}")
        if self.ceiling_metric not in CEILING_METRICS:
            raise InputError(f"ceiling metric must be one of {list(CEILING_METRICS)}, got {self.ceiling_metric!r}")
        if self.jobs < 1:
            raise InputError(f"jobs must be >= 1, got {self.jobs}")

    def provenance(self):
        return {
            "toolkit_version": __version__,
            "k": self.k,
            "z_axis": self.z_axis,
            "ceiling_metric": self.ceiling_metric,
            "seed": self.seed,
            "run_label": self.run_label,
        }


@dataclass
class BenchmarkResult:
    report: ScoreReport
    subject_rsms: dict = field(default_factory=dict)  # condition -> SubjectRsmSet
    model_rsms: dict = field(default_factory=dict)  # model_id -> Rsm
    table: ScoreTable = None


def _pmap(fn, items, jobs):
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def process_file(manifest, path, config, label):
    """Load one activation file and run the pipeline on it."""
    m = manifest.load(path)
    try:
        return run_pipeline(m, config.k, config.z_axis)
    except ComputationError as exc:
        raise type(exc)(f"{label}: {exc}") from None


def run_benchmark(manifest, config=None):
    """Score all models in ``manifest`` against all subjects, per condition."""
    config = config or RunConfig()
    units = [
        ("subject", s.id, cond, path)
        for s in manifest.subjects
        for cond, path in s.conditions.items()
    ] + [("model", m.id, None, m.path) for m in manifest.models]

    def work(unit):
        kind, uid, cond, path = unit
        label = f"{kind} {uid!r}" + (f" ({cond})" if cond else "")
        return process_file(manifest, path, config, label)

    results = dict(zip(units, _pmap(work, units, config.jobs)))
    log.info("processed %d activation files", len(units))

    subject_sets = {}
    for cond in manifest.conditions():
        entries = tuple(
            (s.id, results[("subject", s.id, cond, s.conditions[cond])][0])
            for s in manifest.subjects
            if cond in s.conditions
        )
        subject_sets[cond] = SubjectRsmSet(cond, entries)
    model_rsms = {m.id: results[("model", m.id, None, m.path)][0] for m in manifest.models}
    model_masks = {m.id: results[("model", m.id, None, m.path)][1] for m in manifest.models}

    pairs = [(m, cond) for m in manifest.models for cond in subject_sets]

    def score(pair):
        m, cond = pair
        return score_model(model_rsms[m.id], subject_sets[cond], m.id)

    scores = []
    for (m, cond), s in zip(pairs, _pmap(score, pairs, config.jobs)):
        scores.append(ReportScore(
            m.id, m.arch, m.training, cond, s.mean_score, s.per_subject, s.dropped,
            model_masks[m.id].summary(),
        ))

    ceilings = []
    for cond, subjects in subject_sets.items():
        if len(subjects) < 2:
            log.warning("condition %s has fewer than 2 subjects; no noise ceiling", cond)
            continue
        c = noise_ceiling(subjects, config.ceiling_metric)
        ceilings.append(ReportCeiling(cond, c.metric, c.ceiling, c.per_subject, c.dropped))

    table = ScoreTable(tuple(ScoreRow(s.model_id, s.arch, s.training, s.condition, s.score) for s in scores))
    summary = None
    if set(subject_sets) == set(CONDITIONS) and manifest.models:
        summary = condition_summary(table).as_dict()

    report = ScoreReport(manifest.name, tuple(scores), tuple(ceilings), summary, config.provenance())
    report.check_consistency()
    return BenchmarkResult(report, subject_sets, model_rsms, table)


def format_table(report):
    """Plain-text summary sorted by no-report score, best first."""
    by_model = {}
    for s in report.scores:
        row = by_model.setdefault(s.model_id, {"arch": s.arch, "training": s.training})
        row[s.condition] = s.score

    def key(item):
        mid, row = item
        return (-row.get(NO_REPORT, float("-inf")), mid)

    width = max([len("model")] + [len(m) for m in by_model])
    lines = [f"{'model':<{width}}  {'arch':<10} {'training':<10} {'no-report':>10} {'report':>10} {'delta':>10}"]

    def fmt(v):
        return f"{v:>10.4f}" if v is not None else f"{'-':>10}"

    for mid, row in sorted(by_model.items(), key=key):
        a, b = row.get(NO_REPORT), row.get(REPORT)
        delta = a - b if a is not None and b is not None else None
        lines.append(f"{mid:<{width}}  {row['arch']:<10} {row['training']:<10} {fmt(a)} {fmt(b)} {fmt(delta)}")
    ceil = {c.condition: c.ceiling for c in report.ceilings}
    lines.append(f"{'ceiling':<{width}}  {'':<10} {'':<10} {fmt(ceil.get(NO_REPORT))} {fmt(ceil.get(REPORT))}")
    if report.summary:
        s = report.summary
        lines.append(
            f"mean no-report {s['mean_no_report']:.4f}, mean report {s['mean_report']:.4f}, "
            f"{s['higher_count']} of {s['n_models']} models higher under no-report"
        )
    return "\n".join(lines)


@dataclass(frozen=True)
class SynthOptions:
    """Shape of a synthetic dataset written by :func:`write_synthetic_dataset`."""

    seed: int = 0
    n_subjects: int = 20
    n_stimuli: int = 9
    n_features: int = 2000
    noise_sd: float = 1.0
    n_random_models: int = 3
    responsive_fraction: float = 0.05
    responsive_offset: float = 10.0
    report_blend: float = 0.5
    identical_subjects: bool = False


def synthetic_geometries(opts):
    """Planted brain geometries per condition plus named model geometries."""
    stimuli = even_hues(opts.n_stimuli)
    rng = np.random.default_rng([opts.seed, 7])
    brain = random_rsm(stimuli.ids, rng)
    report = blend_rsms(brain, random_rsm(stimuli.ids, rng), opts.report_blend)
    models = {"planted": ("synthetic", "planted", brain), "hsv-angle": ("theory", "angle", hsv_angle_rsm(stimuli))}
    for i in range(opts.n_random_models):
        models[f"random-{i + 1:02d}"] = ("synthetic", "random", random_rsm(stimuli.ids, rng))
    return stimuli, {NO_REPORT: brain, REPORT: report}, models


def write_synthetic_dataset(out_dir, opts=None, name="synthetic"):
    """Write a manifest plus activation CSVs for a planted cohort.

    Subjects' activations carry the condition geometry plus Gaussian
    noise; model activations carry their geometry with no noise.
    """
    opts = opts or SynthOptions()
    out_dir = Path(out_dir)
    stimuli, brain, models = synthetic_geometries(opts)
    width = max(2, len(str(opts.n_subjects)))
    subjects = []
    for i in range(opts.n_subjects):
        sid = f"sub{i + 1:0{width}d}"
        conds = {}
        for cond in CONDITIONS:
            spec = PlantedCohortSpec(
                brain[cond], opts.n_subjects, opts.n_features, opts.noise_sd, opts.seed,
                opts.responsive_fraction, opts.responsive_offset,
            )
            m = planted_activations(spec, 0 if opts.identical_subjects else i, cond)
            path = out_dir / "subjects" / f"{sid}_{cond}.csv"
            write_activation_matrix(m, path)
            conds[cond] = path
        subjects.append(ManifestSubject(sid, conds))
    manifest_models = []
    for j, (mid, (arch, training, geometry)) in enumerate(models.items()):
        spec = PlantedCohortSpec(
            geometry, 1, opts.n_features, 0.0, opts.seed, opts.responsive_fraction, opts.responsive_offset,
        )
        path = out_dir / "models" / f"{mid}.csv"
        write_activation_matrix(planted_model_activations(spec, j), path)
        manifest_models.append(ManifestModel(mid, arch, training, path))
    manifest = DatasetManifest(name, stimuli, tuple(subjects), tuple(manifest_models), out_dir)
    write_manifest(manifest, out_dir / "manifest.json")
    return manifest

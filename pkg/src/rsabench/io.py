"""Reading and writing activation CSVs, RSM CSVs, manifests and score reports.

Activation CSV
    Header ``feature_id,<stim_1>,...,<stim_n>``, then one row per feature.
    Numbers use ``.`` as decimal separator, no thousands separators; NaN and
    infinities are rejected. Values are written in shortest round-trip form,
    so write-then-read reproduces every binary64 value exactly.

Manifest JSON
    ``{"name", "stimuli": [{"id", "hue_deg", "sat", "val"}],
    "subjects": [{"id", "conditions": {"no-report": path, "report": path}}],
    "models": [{"id", "arch", "training", "path"}]}``. Relative paths are
    resolved against the manifest's directory.

Score report JSON
    Sorted keys, floats rounded to 6 significant digits. See
    :class:`ScoreReport`.
"""

import csv
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import Stimulus, StimulusSet
from .errors import (
    ConsistencyError,
    DuplicateId,
    MissingFile,
    NonFiniteValue,
    ParseError,
    SchemaError,
    StimulusMismatch,
    UnknownCondition,
)
from .pipeline import ActivationMatrix, Rsm
from .scoring import CONDITIONS

_NUMBER = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_NONFINITE = re.compile(r"[+-]?(?:nan|inf|infinity)", re.IGNORECASE)

SIGNIFICANT_DIGITS = 6


# -- numeric matrices -------------------------------------------------------

def _parse_float(token, path, line, column):
    if _NUMBER.fullmatch(token):
        value = float(token)
        if math.isfinite(value):
            return value
        raise NonFiniteValue(f"value {token!r} overflows to infinity", path, line, column)
    if _NONFINITE.fullmatch(token.strip()):
        raise NonFiniteValue(f"non-finite value {token!r}", path, line, column)
    raise ParseError(f"not a decimal number: {token!r}", path, line, column)


def _read_table(path, first_header):
    """Parse a labelled numeric CSV into (column ids, row ids, data)."""
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except FileNotFoundError:
        raise MissingFile(f"no such file: {path}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", path, 1) from None
        if not header or header[0] != first_header:
            raise ParseError(f"first header cell must be {first_header!r}", path, 1, 1)
        col_ids = header[1:]
        seen = {}
        for j, cid in enumerate(col_ids, start=2):
            if cid == "":
                raise ParseError("empty column id", path, 1, j)
            if cid in seen:
                raise DuplicateId(f"duplicate column id {cid!r}", path, 1, j)
            seen[cid] = j
        row_ids, rows, row_seen = [], [], set()
        for row in reader:
            line = reader.line_num
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, found {len(row)}", path, line)
            rid = row[0]
            if rid == "":
                raise ParseError("empty row id", path, line, 1)
            if rid in row_seen:
                raise DuplicateId(f"duplicate row id {rid!r}", path, line, 1)
            row_seen.add(rid)
            row_ids.append(rid)
            rows.append([_parse_float(tok, path, line, j) for j, tok in enumerate(row[1:], start=2)])
    data = np.array(rows, dtype=np.float64).reshape(len(rows), len(col_ids))
    return col_ids, row_ids, data


def _write_table(path, first_header, col_ids, row_ids, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join([first_header, *col_ids])]
    for rid, row in zip(row_ids, data):
        lines.append(",".join([rid, *(repr(float(v)) for v in row)]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_header(path):
    """Stimulus ids from an activation CSV without parsing the body."""
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            header = next(csv.reader(fh), None)
    except FileNotFoundError:
        raise MissingFile(f"no such file: {path}") from None
    if not header or header[0] != "feature_id":
        raise ParseError("first header cell must be 'feature_id'", path, 1, 1)
    return tuple(header[1:])


def load_activation_matrix(path, stimulus_order=None):
    """Parse an activation CSV.

    With ``stimulus_order`` the columns are permuted into that order; the
    file must contain exactly those stimulus ids.
    """
    stim_ids, feature_ids, data = _read_table(path, "feature_id")
    if not feature_ids:
        raise ParseError("no feature rows", path, 2)
    if len(stim_ids) < 3:
        raise ParseError(f"need at least 3 stimulus columns, found {len(stim_ids)}", path, 1)
    m = ActivationMatrix(feature_ids, stim_ids, data)
    if stimulus_order is not None:
        try:
            m = m.reorder_stimuli(stimulus_order)
        except StimulusMismatch as exc:
            raise StimulusMismatch(f"{path}: {exc}") from None
    return m


def write_activation_matrix(m, path):
    _write_table(path, "feature_id", m.stimulus_ids, m.feature_ids, m.data)


def load_rsm(path):
    col_ids, row_ids, data = _read_table(path, "stimulus_id")
    if row_ids != col_ids:
        raise ParseError("row ids must repeat the column ids in the same order", path)
    return Rsm(col_ids, data)


def write_rsm(r, path):
    _write_table(path, "stimulus_id", r.stimulus_ids, r.stimulus_ids, r.values)


# -- manifest ---------------------------------------------------------------

@dataclass(frozen=True)
class ManifestSubject:
    id: str
    conditions: dict  # condition -> Path


@dataclass(frozen=True)
class ManifestModel:
    id: str
    arch: str
    training: str
    path: Path


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    stimuli: StimulusSet
    subjects: tuple
    models: tuple
    root: Path = field(default=Path("."), compare=False)

    def subject(self, subject_id):
        for s in self.subjects:
            if s.id == subject_id:
                return s
        return None

    def model(self, model_id):
        for m in self.models:
            if m.id == model_id:
                return m
        return None

    def conditions(self):
        present = {c for s in self.subjects for c in s.conditions}
        return tuple(c for c in CONDITIONS if c in present)

    def load(self, path):
        """Load an activation file with columns in manifest stimulus order."""
        return load_activation_matrix(path, self.stimuli.ids)

    def to_dict(self):
        def rel(p):
            p = Path(p)
            try:
                return p.relative_to(self.root).as_posix()
            except ValueError:
                return str(p)

        return {
            "name": self.name,
            "stimuli": [
                {"id": s.id, "hue_deg": s.hue_deg, "sat": s.sat, "val": s.val} for s in self.stimuli.stimuli
            ],
            "subjects": [
                {"id": s.id, "conditions": {c: rel(p) for c, p in s.conditions.items()}} for s in self.subjects
            ],
            "models": [
                {"id": m.id, "arch": m.arch, "training": m.training, "path": rel(m.path)} for m in self.models
            ],
        }


def _require(obj, key, kind, where):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"{where}: missing required field {key!r}")
    value = obj[key]
    if kind is float:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)
    else:
        ok = isinstance(value, kind)
    if not ok:
        raise SchemaError(f"{where}: field {key!r} has the wrong type")
    return value


def _unique(ids, what):
    seen = set()
    for i in ids:
        if i in seen:
            raise SchemaError(f"duplicate {what} id {i!r}")
        seen.add(i)


def load_manifest(path, check_files=True):
    """Load and validate a dataset manifest.

    Every referenced file must exist and its stimulus columns must be
    exactly the manifest's stimulus ids (in any order).
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise MissingFile(f"no such manifest: {path}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise SchemaError("manifest must be a JSON object")
    root = path.parent
    name = _require(doc, "name", str, "manifest")

    raw_stimuli = _require(doc, "stimuli", list, "manifest")
    stimuli = []
    for i, s in enumerate(raw_stimuli):
        where = f"stimuli[{i}]"
        stimuli.append(Stimulus(
            _require(s, "id", str, where),
            float(_require(s, "hue_deg", float, where)),
            float(_require(s, "sat", float, where)),
            float(_require(s, "val", float, where)),
        ))
    _unique([s.id for s in stimuli], "stimulus")
    try:
        stimulus_set = StimulusSet(tuple(stimuli))
    except ValueError as exc:
        raise SchemaError(str(exc)) from None

    subjects = []
    for i, s in enumerate(_require(doc, "subjects", list, "manifest")):
        where = f"subjects[{i}]"
        sid = _require(s, "id", str, where)
        conds = _require(s, "conditions", dict, where)
        if not conds:
            raise SchemaError(f"{where}: no conditions")
        resolved = {}
        for cond in CONDITIONS:
            if cond in conds:
                resolved[cond] = root / _require(conds, cond, str, f"{where}.conditions")
        for cond in conds:
            if cond not in CONDITIONS:
                raise UnknownCondition(f"{where}: unknown condition {cond!r}; expected one of {list(CONDITIONS)}")
        subjects.append(ManifestSubject(sid, resolved))
    _unique([s.id for s in subjects], "subject")

    models = []
    for i, m in enumerate(_require(doc, "models", list, "manifest")):
        where = f"models[{i}]"
        models.append(ManifestModel(
            _require(m, "id", str, where),
            _require(m, "arch", str, where),
            _require(m, "training", str, where),
            root / _require(m, "path", str, where),
        ))
    _unique([m.id for m in models], "model")

    manifest = DatasetManifest(name, stimulus_set, tuple(subjects), tuple(models), root)
    if check_files:
        wanted = sorted(stimulus_set.ids)
        files = [p for s in subjects for p in s.conditions.values()] + [m.path for m in models]
        for f in files:
            if not f.is_file():
                raise MissingFile(f"manifest references missing file {f}")
            found = read_header(f)
            if sorted(found) != wanted or len(found) != len(wanted):
                missing = sorted(set(wanted) - set(found))
                extra = sorted(set(found) - set(wanted))
                raise StimulusMismatch(f"{f}: stimulus columns differ from manifest (missing {missing}, extra {extra})")
    return manifest


def write_manifest(manifest, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


# -- score report -----------------------------------------------------------

def round_sig(value, digits=SIGNIFICANT_DIGITS):
    """Round to ``digits`` significant digits (returns a float)."""
    return float(f"{float(value):.{digits}g}")


def _rounded(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError("score reports cannot hold NaN or infinite values")
        return round_sig(obj)
    if isinstance(obj, dict):
        return {str(k): _rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v) for v in obj]
    if isinstance(obj, np.generic):
        return _rounded(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@dataclass(frozen=True)
class ReportScore:
    """Score of one model under one condition, with per-subject raw values."""

    model_id: str
    arch: str
    training: str
    condition: str
    score: float
    raw: tuple  # of (subject_id, r)
    dropped: tuple = ()
    selection: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "model_id": self.model_id,
            "arch": self.arch,
            "training": self.training,
            "condition": self.condition,
            "score": self.score,
            "raw": [{"subject_id": s, "r": r} for s, r in self.raw],
            "dropped": list(self.dropped),
            "selection": dict(self.selection),
        }


@dataclass(frozen=True)
class ReportCeiling:
    condition: str
    metric: str
    ceiling: float
    raw: tuple
    dropped: tuple = ()

    def to_dict(self):
        return {
            "metric": self.metric,
            "ceiling": self.ceiling,
            "raw": [{"subject_id": s, "r": r} for s, r in self.raw],
            "dropped": list(self.dropped),
        }


@dataclass(frozen=True)
class ScoreReport:
    """Benchmark output: one score per (model, condition) plus ceilings.

    Mirrors a score / ceiling / raw-values layout: every aggregate keeps
    the per-subject values it was computed from.
    """

    name: str
    scores: tuple
    ceilings: tuple = ()
    summary: dict = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        scores = tuple(sorted(self.scores, key=lambda s: (s.model_id, s.condition)))
        keys = [(s.model_id, s.condition) for s in scores]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate (model, condition) in report")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "ceilings", tuple(sorted(self.ceilings, key=lambda c: c.condition)))

    def check_consistency(self, tol=1e-12, rel=0.0):
        """Every aggregate must equal the mean of its per-subject values.

        Allowed error is ``tol + rel * scale`` where ``scale`` is the
        largest magnitude involved.
        """
        def check(what, value, raw):
            values = [r for _, r in raw]
            if not values:
                raise ConsistencyError(f"{what}: no per-subject values")
            expected = math.fsum(values) / len(values)
            scale = max([abs(value)] + [abs(v) for v in values])
            if abs(value - expected) > tol + rel * scale:
                raise ConsistencyError(f"{what} is {value!r} but its per-subject mean is {expected!r}")

        for s in self.scores:
            check(f"score of {s.model_id!r} under {s.condition!r}", s.score, s.raw)
        for c in self.ceilings:
            check(f"ceiling under {c.condition!r}", c.ceiling, c.raw)
        if self.summary is not None:
            for cond, key in (("no-report", "mean_no_report"), ("report", "mean_report")):
                raw = [(s.model_id, s.score) for s in self.scores if s.condition == cond]
                check(f"summary {key}", self.summary[key], raw)
        return self

    def ceiling(self, condition):
        for c in self.ceilings:
            if c.condition == condition:
                return c
        return None

    def to_dict(self):
        return {
            "name": self.name,
            "scores": [s.to_dict() for s in self.scores],
            "ceilings": {c.condition: c.to_dict() for c in self.ceilings},
            "summary": self.summary,
            "provenance": dict(self.provenance),
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            scores = tuple(
                ReportScore(
                    d["model_id"], d["arch"], d["training"], d["condition"], float(d["score"]),
                    tuple((r["subject_id"], float(r["r"])) for r in d["raw"]),
                    tuple(d.get("dropped", ())),
                    dict(d.get("selection", {})),
                )
                for d in doc["scores"]
            )
            ceilings = tuple(
                ReportCeiling(
                    cond, d["metric"], float(d["ceiling"]),
                    tuple((r["subject_id"], float(r["r"])) for r in d["raw"]),
                    tuple(d.get("dropped", ())),
                )
                for cond, d in doc.get("ceilings", {}).items()
            )
            return cls(doc["name"], scores, ceilings, doc.get("summary"), dict(doc.get("provenance", {})))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed score report: {exc!r}") from None

    def rounded(self):
        """The report as it reads back after serialization."""
        return ScoreReport.from_dict(json.loads(json.dumps(_rounded(self.to_dict()))))


def dumps_score_report(report):
    return json.dumps(_rounded(report.to_dict()), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_score_report(report, path):
    """Write deterministic JSON: sorted keys, 6-significant-digit floats."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = dumps_score_report(report)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# rounding each value to 6 significant digits moves a mean by at most one
# unit in the 6th digit of the largest magnitude involved
_REPORT_REL_TOL = 1e-5


def load_score_report(path):
    """Read a report and re-check that every mean matches its raw values."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise MissingFile(f"no such report: {path}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path, exc.lineno, exc.colno) from None
    return ScoreReport.from_dict(doc).check_consistency(tol=1e-12, rel=_REPORT_REL_TOL)

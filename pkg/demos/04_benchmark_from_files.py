"""Run the full benchmark on an on-disk dataset.

Writes a synthetic dataset (CSV activations plus a JSON manifest) into a
temporary directory, then scores every model in both conditions.
"""

import tempfile
from pathlib import Path

from rsabench.benchmark import RunConfig, SynthOptions, format_table, run_benchmark, write_synthetic_dataset
from rsabench.io import load_manifest

with tempfile.TemporaryDirectory() as tmp:
    write_synthetic_dataset(Path(tmp), SynthOptions(seed=0, n_subjects=10, n_features=2000))
    manifest = load_manifest(Path(tmp) / "manifest.json")
    result = run_benchmark(manifest, RunConfig(jobs=4, seed=0, run_label="demo"))
    print(format_table(result.report))

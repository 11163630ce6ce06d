"""Compare an angle-shaped model geometry with an unrelated brain geometry.

The anti-diagonal index is the Spearman correlation between an RSM and the
cosine-of-hue-difference template. A model trained on the hue circle should
score near 1; a cohort built on a random geometry should score near 0.
"""

import numpy as np

from rsabench import PlantedCohortSpec, SubjectRsmSet, even_hues, hsv_angle_rsm, planted_activations, run_pipeline
from rsabench.baselines import antidiagonal_index, generate_planted_cohort, random_rsm
from rsabench.figures import render_heatmap
from rsabench.scoring import mean_rsm

stimuli = even_hues(9)

model_spec = PlantedCohortSpec(hsv_angle_rsm(stimuli), 1, 4000, 1.0, 15, 0.05, 10.0)
model_rsm, _ = run_pipeline(planted_activations(model_spec, 0))

brain_spec = PlantedCohortSpec(random_rsm(stimuli.ids, np.random.default_rng(0)), 20, 4000, 1.0, 15, 0.05, 10.0)
recs = generate_planted_cohort(brain_spec, "no-report")
brain = mean_rsm(SubjectRsmSet("no-report", tuple((r.subject_id, run_pipeline(r.matrix)[0]) for r in recs)))

print(f"model anti-diagonal index: {antidiagonal_index(model_rsm, stimuli):.3f}")
print(f"brain anti-diagonal index: {antidiagonal_index(brain, stimuli):.3f}")

with open("angle_model.svg", "w") as fh:
    fh.write(render_heatmap(model_rsm, stimuli, title="model"))
with open("angle_brain.svg", "w") as fh:
    fh.write(render_heatmap(brain, stimuli, title="brain (mean)"))
print("wrote angle_model.svg and angle_brain.svg")

"""Score candidate models against a noisy synthetic cohort.

The cohort shares one random geometry. The model that carries that same
geometry should approach the leave-one-out noise ceiling, and unrelated
random geometries should sit near zero.
"""

import numpy as np

from rsabench import (
    PlantedCohortSpec,
    SubjectRsmSet,
    even_hues,
    generate_planted_cohort,
    noise_ceiling,
    random_rsm,
    run_pipeline,
    score_model,
)

ids = even_hues(9).ids
truth = random_rsm(ids, np.random.default_rng(0))

for noise in (0.5, 1.0, 2.0):
    spec = PlantedCohortSpec(truth, 20, 4000, noise, seed=3, responsive_fraction=0.05, responsive_offset=10.0)
    recs = generate_planted_cohort(spec, "no-report")
    subjects = SubjectRsmSet("no-report", tuple((r.subject_id, run_pipeline(r.matrix)[0]) for r in recs))

    planted = score_model(truth, subjects, "planted").mean_score
    rng = np.random.default_rng(1)
    randoms = [score_model(random_rsm(ids, rng), subjects).mean_score for _ in range(10)]
    ceiling = noise_ceiling(subjects).ceiling
    print(f"noise {noise:.1f}: planted {planted:.3f}  best random {max(randoms):.3f}  ceiling {ceiling:.3f}")

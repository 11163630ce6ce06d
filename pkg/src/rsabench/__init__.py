"""Representational similarity analysis benchmark for color representations.

Typical use::

    from rsabench import run_pipeline, score_model, noise_ceiling

The submodules mirror the analysis: :mod:`rsabench.stats`,
:mod:`rsabench.pipeline`, :mod:`rsabench.scoring`, :mod:`rsabench.baselines`,
:mod:`rsabench.io`, :mod:`rsabench.figures` and :mod:`rsabench.benchmark`.
"""

__version__ = "0.1.0"

from .baselines import (  # noqa: E402
    PlantedCohortSpec,
    Stimulus,
    StimulusSet,
    antidiagonal_index,
    even_hues,
    generate_planted_cohort,
    hsv_angle_rsm,
    planted_activations,
    random_rsm,
)
from .pipeline import (  # noqa: E402
    ActivationMatrix,
    Rdm,
    Rsm,
    SelectionMask,
    compute_rsm,
    normalize,
    responsiveness_filter,
    rsm_to_rdm,
    run_pipeline,
    variance_filter,
    vectorize_offdiag,
)
from .scoring import (  # noqa: E402
    AlignmentScore,
    NoiseCeiling,
    ScoreRow,
    ScoreTable,
    SubjectRecording,
    SubjectRsmSet,
    condition_summary,
    mean_rsm,
    noise_ceiling,
    paired_delta,
    score_model,
)
from .stats import fractional_ranks, pearson, spearman, zscore  # noqa: E402

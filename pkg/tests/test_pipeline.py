import math
import statistics
import warnings

import numpy as np
import pytest

from rsabench.baselines import PlantedCohortSpec, even_hues, hsv_angle_rsm, planted_activations
from rsabench.errors import DegenerateInput, EmptySelection, StimulusMismatch
from rsabench.pipeline import (
    ActivationMatrix,
    Rsm,
    compute_rsm,
    normalize,
    responsiveness_filter,
    rsm_to_rdm,
    run_pipeline,
    variance_filter,
    vectorize_offdiag,
)

from oracles import column_corr_bruteforce


def matrix(rows, stim=None):
    rows = np.asarray(rows, dtype=float)
    stim = stim or [f"s{j}" for j in range(rows.shape[1])]
    return ActivationMatrix([f"f{i}" for i in range(rows.shape[0])], stim, rows)


def rows_with_means(means):
    return [[m - 1.0, m, m + 1.0] for m in means]


def test_activation_matrix_validation():
    with pytest.raises(ValueError):
        matrix([[1, 2]])
    with pytest.raises(ValueError):
        ActivationMatrix(["a", "a"], ["x", "y", "z"], np.ones((2, 3)))
    with pytest.raises(ValueError):
        matrix([[1, 2, np.inf]])
    with pytest.raises(ValueError):
        ActivationMatrix(["a"], ["x", "y", "z"], np.ones((2, 3)))


def test_reorder_stimuli():
    m = matrix([[1, 2, 3]], ["a", "b", "c"])
    r = m.reorder_stimuli(["c", "a", "b"])
    np.testing.assert_array_equal(r.data, [[3, 1, 2]])
    with pytest.raises(StimulusMismatch):
        m.reorder_stimuli(["a", "b"])


def test_variance_filter_examples():
    out, mask = variance_filter(matrix([[1, 1, 1], [1, 2, 3]]))
    np.testing.assert_array_equal(out.data, [[1, 2, 3]])
    assert out.feature_ids == ("f1",)
    assert list(mask.kept) == [False, True]
    assert mask.stage == ("variance", "")

    m = matrix([[1, 2, 3], [3, 1, 2]])
    out, mask = variance_filter(m)
    assert out == m and mask.kept.all()

    with pytest.raises(EmptySelection):
        variance_filter(matrix([[1, 1, 1], [2, 2, 2]]))


def test_responsiveness_threshold_oracle():
    means = [1, 1, 1, 1, 10]
    mu = statistics.mean(means)
    sd = statistics.stdev(means)
    assert mu == 2.8 and sd == pytest.approx(math.sqrt(16.2))
    assert mu + 1 * sd == pytest.approx(6.824922359, abs=1e-9)
    assert mu + 3.1 * sd == pytest.approx(15.27726, abs=1e-5)


def test_responsiveness_filter_examples():
    m = matrix(rows_with_means([1, 1, 1, 1, 10]))
    out, mask = responsiveness_filter(m, k=1)
    assert out.feature_ids == ("f4",)
    assert mask.threshold_used == pytest.approx(2.8 + math.sqrt(16.2))
    assert not mask.fallback

    out, mask = responsiveness_filter(m, k=3.1)
    assert out.n_features == 5
    assert mask.fallback and mask.kept.all()
    assert mask.threshold_used == pytest.approx(2.8 + 3.1 * math.sqrt(16.2))

    out, mask = responsiveness_filter(matrix(rows_with_means([4, 4, 4])))
    assert out.n_features == 3 and mask.fallback


def test_responsiveness_is_one_sided():
    # a strongly negative feature is far from the mean but not "responsive"
    m = matrix(rows_with_means([0, 0, 0, 0, 0, 0, 0, 0, 0, -50]))
    out, mask = responsiveness_filter(m, k=1)
    assert mask.fallback and out.n_features == 10


def test_normalize_examples():
    np.testing.assert_allclose(normalize(matrix([[1, 2, 3]])).data, [[-1, 0, 1]], atol=1e-15)
    z = normalize(matrix([[1, 2, 3], [10, 20, 30]])).data
    np.testing.assert_allclose(z, [[-1, 0, 1], [-1, 0, 1]], atol=1e-15)
    rng = np.random.default_rng(0)
    once = normalize(matrix(rng.normal(size=(5, 6))))
    np.testing.assert_allclose(normalize(once).data, once.data, atol=1e-12)
    with pytest.raises(DegenerateInput):
        normalize(matrix([[1, 1, 1]]))


def test_normalize_per_pattern():
    rng = np.random.default_rng(1)
    z = normalize(matrix(rng.normal(size=(20, 4))), "per-pattern").data
    np.testing.assert_allclose(z.mean(axis=0), 0, atol=1e-12)
    np.testing.assert_allclose(z.std(axis=0, ddof=1), 1, atol=1e-12)
    with pytest.raises(ValueError):
        normalize(matrix([[1, 2, 3]]), "sideways")


def test_compute_rsm_matches_bruteforce():
    rng = np.random.default_rng(2)
    data = rng.normal(size=(12, 5))
    r = compute_rsm(matrix(data))
    expected = column_corr_bruteforce(data.tolist())
    np.testing.assert_allclose(r.values, expected, atol=1e-12)
    assert np.array_equal(r.values, r.values.T)
    assert np.all(np.diag(r.values) == 1.0)


def test_compute_rsm_examples():
    rng = np.random.default_rng(3)
    data = rng.normal(size=(10, 4))
    data[:, 2] = data[:, 0]
    data[:, 3] = -data[:, 1]
    r = compute_rsm(matrix(data))
    assert r.values[0, 2] == pytest.approx(1.0, abs=1e-15)
    assert r.values[1, 3] == pytest.approx(-1.0, abs=1e-15)
    nine = compute_rsm(matrix(rng.normal(size=(30, 9))))
    assert nine.values.shape == (9, 9)


def test_compute_rsm_names_constant_stimulus():
    data = np.array([[1.0, 5, 2], [2, 5, 1], [3, 5, 7]])
    with pytest.raises(DegenerateInput, match="s1"):
        compute_rsm(matrix(data))


def test_compute_rsm_warns_on_few_features():
    with pytest.warns(RuntimeWarning, match="2 feature"):
        compute_rsm(matrix([[1, 2, 3, 4], [2, 1, 0, 5]]))


def test_rsm_validation_and_rdm():
    with pytest.raises(ValueError):
        Rsm(["a", "b", "c"], [[1, 0.5, 0], [0.4, 1, 0], [0, 0, 1]])
    with pytest.raises(ValueError):
        Rsm(["a", "b", "c"], [[1, 2, 0], [2, 1, 0], [0, 0, 1]])
    ident = Rsm(["a", "b", "c"], np.eye(3))
    rdm = rsm_to_rdm(ident)
    np.testing.assert_array_equal(rdm.values, 1 - np.eye(3))
    r = Rsm(["a", "b", "c"], [[1, -0.94, 0], [-0.94, 1, 0], [0, 0, 1]])
    d = rsm_to_rdm(r).values
    assert d[0, 1] == pytest.approx(1.94)
    assert d[0, 0] == 0.0


def test_vectorize_offdiag_order():
    v = np.array([[1, 0.1, 0.2], [0.1, 1, 0.3], [0.2, 0.3, 1]])
    np.testing.assert_array_equal(vectorize_offdiag(Rsm(["a", "b", "c"], v)), [0.1, 0.2, 0.3])
    lower = v.T[np.tril_indices(3, -1)[::-1]]
    np.testing.assert_array_equal(np.sort(lower), [0.1, 0.2, 0.3])
    assert len(vectorize_offdiag(hsv_angle_rsm(even_hues(9)))) == 36


def test_run_pipeline_recovers_planted_geometry():
    s = even_hues(9)
    target = hsv_angle_rsm(s)
    m = planted_activations(PlantedCohortSpec(target, 1, 10_000, 0.0, seed=11), 0)
    rsm, mask = run_pipeline(m)
    assert rsm.values.shape == (9, 9)
    assert np.abs(rsm.values - target.values).max() < 0.05
    assert mask.n_kept == 10_000


def test_run_pipeline_constant_feature_is_ignored():
    rng = np.random.default_rng(4)
    data = rng.normal(size=(40, 6)) + 2.0
    base, _ = run_pipeline(matrix(data))
    padded = np.vstack([data, np.full((1, 6), 3.0)])
    with_const, mask = run_pipeline(matrix(padded))
    np.testing.assert_array_equal(base.values, with_const.values)
    assert mask.stage[-1] == "variance"


def test_run_pipeline_mask_provenance():
    rng = np.random.default_rng(6)
    data = rng.normal(size=(100, 4))
    data[97:] += 40.0
    data[96] = 5.0
    rsm, mask = run_pipeline(matrix(data), k=3.1)
    assert mask.n_features == 100
    assert list(np.flatnonzero(mask.kept)) == [97, 98, 99]
    assert mask.stage[96] == "variance"
    assert mask.n_dropped("responsiveness") == 96
    assert mask.summary()["n_kept"] == 3 and not mask.fallback


def test_pipeline_invariances():
    rng = np.random.default_rng(5)
    data = rng.normal(size=(60, 7)) + rng.normal(size=(60, 1)) * 3
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        base, _ = run_pipeline(matrix(data), k=1.0)
    perm = rng.permutation(60)
    r_perm, _ = run_pipeline(matrix(data[perm]), k=1.0)
    np.testing.assert_allclose(r_perm.values, base.values, atol=1e-12)

    cols = rng.permutation(7)
    ids = [f"s{j}" for j in range(7)]
    r_cols, _ = run_pipeline(matrix(data[:, cols], [ids[j] for j in cols]), k=1.0)
    np.testing.assert_allclose(r_cols.values, base.values[np.ix_(cols, cols)], atol=1e-12)

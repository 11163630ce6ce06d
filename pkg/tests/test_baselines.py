import math

import numpy as np
import pytest

from rsabench.baselines import (
    PlantedCohortSpec,
    Stimulus,
    StimulusSet,
    antidiagonal_index,
    even_hues,
    generate_planted_cohort,
    hsv_angle_rsm,
    hue_difference,
    planted_activations,
    planted_model_activations,
    psd_factor,
    random_rsm,
)
from rsabench.errors import DegenerateInput, NotPositiveSemidefinite
from rsabench.pipeline import Rsm, vectorize_offdiag


def three(hues):
    return StimulusSet(tuple(Stimulus(f"c{i}", h) for i, h in enumerate(hues)))


def test_even_hues_default():
    s = even_hues()
    assert len(s) == 9
    np.testing.assert_array_equal(s.hues, np.arange(9) * 40.0)
    assert s.ids[0] == "hue000" and s.ids[-1] == "hue320"


def test_stimulus_set_validation():
    with pytest.raises(ValueError):
        three([0, 10])
    with pytest.raises(ValueError):
        StimulusSet((Stimulus("a", 0), Stimulus("a", 1), Stimulus("b", 2)))
    with pytest.raises(ValueError):
        StimulusSet((Stimulus("a", 0, sat=1.5), Stimulus("b", 1), Stimulus("c", 2)))
    with pytest.raises(ValueError):
        three([0, math.nan, 3])


def test_hue_difference_wraps():
    assert hue_difference(350.0, 10.0) == 20.0
    assert hue_difference(0.0, 180.0) == 180.0
    assert hue_difference(90.0, 300.0) == 150.0


def test_hsv_angle_examples():
    r = hsv_angle_rsm(three([0, 0.0001, 90]))
    assert r.values[0, 2] == pytest.approx(0.0, abs=1e-15)
    assert r.values[0, 1] == pytest.approx(1.0, abs=1e-8)
    nine = hsv_angle_rsm(even_hues(9)).values
    assert nine[0, 1] == pytest.approx(math.cos(math.radians(40)))
    assert nine[0, 1] == pytest.approx(0.766, abs=5e-4)
    assert nine[0, 4] == pytest.approx(math.cos(math.radians(160)))
    assert nine[0, 4] == pytest.approx(-0.940, abs=5e-4)
    assert nine.min() == pytest.approx(-0.9396926, abs=1e-7)


def test_hsv_angle_linear_kernel():
    r = hsv_angle_rsm(three([0, 90, 180]), kernel="linear").values
    assert r[0, 1] == pytest.approx(0.0) and r[0, 2] == pytest.approx(-1.0)
    custom = hsv_angle_rsm(three([0, 60, 120]), kernel=lambda d: 1 - d / 180).values
    assert custom[0, 2] == pytest.approx(1 / 3)


@pytest.mark.parametrize("n", [3, 5, 9, 12])
def test_hsv_angle_circulant_on_regular_polygon(n):
    v = hsv_angle_rsm(even_hues(n)).values
    for i in range(n):
        for j in range(n):
            assert v[i, j] == v[0, (j - i) % n]


def test_antidiagonal_index_examples():
    s = even_hues(9)
    template = hsv_angle_rsm(s)
    assert antidiagonal_index(template, s) == pytest.approx(1.0, abs=1e-15)
    reversed_ = Rsm(s.ids, -template.values)
    assert antidiagonal_index(reversed_, s) == pytest.approx(-1.0, abs=1e-15)
    flat = Rsm(s.ids, np.full((9, 9), 0.2))
    with pytest.raises(DegenerateInput):
        antidiagonal_index(flat, s)


def test_antidiagonal_index_monotone_invariance():
    s = even_hues(9)
    r = random_rsm(s.ids, np.random.default_rng(0))
    squashed = Rsm(s.ids, np.tanh(2 * r.values) / np.tanh(2))
    assert antidiagonal_index(squashed, s) == pytest.approx(antidiagonal_index(r, s), abs=1e-12)


def test_antidiagonal_index_reorders_to_stimulus_order():
    s = even_hues(6)
    t = hsv_angle_rsm(s)
    shuffled = t.reorder([s.ids[i] for i in (3, 1, 5, 0, 2, 4)])
    assert antidiagonal_index(shuffled, s) == pytest.approx(1.0, abs=1e-15)


def test_psd_factor():
    t = hsv_angle_rsm(even_hues(9))
    f = psd_factor(t)
    np.testing.assert_allclose(f @ f.T, t.values, atol=1e-12)
    bad = np.array([[1, 0.9, -0.9], [0.9, 1, 0.9], [-0.9, 0.9, 1]])
    with pytest.raises(NotPositiveSemidefinite):
        psd_factor(bad)
    with pytest.raises(NotPositiveSemidefinite):
        PlantedCohortSpec(Rsm(["a", "b", "c"], bad))


def test_planted_cohort_is_deterministic():
    spec = PlantedCohortSpec(hsv_angle_rsm(even_hues(9)), 3, 500, 0.5, seed=42)
    a = generate_planted_cohort(spec)
    b = generate_planted_cohort(spec)
    assert [r.matrix for r in a] == [r.matrix for r in b]
    # subject i depends only on (seed, condition, i)
    assert planted_activations(spec, 2) == a[2].matrix
    assert a[0].matrix != a[1].matrix
    assert generate_planted_cohort(spec, "report")[0].matrix != a[0].matrix
    assert planted_model_activations(spec, 0) != a[0].matrix


def test_planted_columns_converge_to_target():
    s = even_hues(9)
    target = hsv_angle_rsm(s)
    for n_features, tol in ((10_000, 0.05), (100_000, 0.02)):
        m = planted_activations(PlantedCohortSpec(target, 1, n_features, 0.0, seed=1), 0)
        emp = np.corrcoef(m.data, rowvar=False)
        assert np.abs(emp - target.values).max() < tol


def test_planted_identity_target():
    s = even_hues(9)
    ident = Rsm(s.ids, np.eye(9))
    m = planted_activations(PlantedCohortSpec(ident, 1, 10_000, 0.0, seed=2), 0)
    emp = np.corrcoef(m.data, rowvar=False)
    assert np.abs(vectorize_offdiag(emp)).max() < 0.05


def test_responsive_offset_only_shifts_first_features():
    spec = PlantedCohortSpec(hsv_angle_rsm(even_hues(9)), 1, 100, 0.0, 3)
    shifted = PlantedCohortSpec(spec.target, 1, 100, 0.0, 3, responsive_fraction=0.1, responsive_offset=7.0)
    diff = planted_activations(shifted, 0).data - planted_activations(spec, 0).data
    np.testing.assert_allclose(diff[:10], 7.0)
    np.testing.assert_array_equal(diff[10:], 0.0)


def test_random_rsm_is_valid():
    r = random_rsm(tuple("abcdefghi"), np.random.default_rng(0))
    assert np.all(np.linalg.eigvalsh(r.values) > -1e-10)
    assert np.all(np.diag(r.values) == 1.0)

import numpy as np
import pytest
from scipy import stats

from devcontrib.scoring import (
    BoxCoxParams,
    combine_complexity,
    commit_cvalue,
    fit_boxcox,
    function_score,
    normalize,
)


def test_lognormal_sample_transforms_to_low_skew():
    rng = np.random.RandomState(1)
    sample = rng.lognormal(mean=0.0, sigma=1.0, size=4000)
    params = fit_boxcox(sample)
    normed = [normalize(v, params) for v in sample]
    assert abs(stats.skew(normed)) < 0.2


def test_constant_samples_map_to_one():
    params = fit_boxcox([5.0] * 100)
    assert params.degenerate
    assert normalize(5.0, params) == 1.0
    assert normalize(0.01, params) == 1.0


def test_heavy_tail_profile_hits_target_moments():
    # shaped like a big project's cyclomatic-complexity population:
    # median ~3, mean ~13, huge std, max in the thousands
    rng = np.random.RandomState(42)
    sample = np.clip(rng.lognormal(np.log(3.0), 1.7, 8000), 1.0, 6667.0)
    sample[0] = 6667.0
    assert np.median(sample) < 5 and sample.mean() > 9 and sample.std() > 50
    params = fit_boxcox(sample)
    normed = np.array([normalize(v, params) for v in sample])
    assert abs(normed.mean() - 1.0) <= 0.05
    assert abs(normed.std() - 1.0 / 3.0) <= 0.05
    assert normed.min() >= 0.0


def test_values_far_below_distribution_clamp_to_zero():
    rng = np.random.RandomState(3)
    params = fit_boxcox(rng.uniform(50.0, 100.0, 500))
    assert normalize(1e-6, params) == 0.0


def test_normalize_is_monotone():
    rng = np.random.RandomState(4)
    sample = rng.lognormal(1.0, 1.2, 2000)
    params = fit_boxcox(sample)
    values = np.sort(rng.uniform(0.0, sample.max() * 1.5, 500))
    normed = [normalize(v, params) for v in values]
    assert all(a <= b + 1e-12 for a, b in zip(normed, normed[1:]))


def test_small_sample_uses_identity_lambda_and_rescales():
    sample = [1.0, 2.0, 3.0, 4.0, 10.0]
    params = fit_boxcox(sample)
    assert params.lam == 1.0
    normed = np.array([normalize(v, params) for v in sample])
    assert abs(normed.mean() - 1.0) < 1e-9
    assert abs(normed.std() - 1.0 / 3.0) < 1e-9
    order = np.argsort(sample)
    assert list(order) == list(np.argsort(normed))


def test_grid_fit_is_deterministic():
    rng = np.random.RandomState(6)
    sample = rng.lognormal(0.5, 0.9, 300)
    p1 = fit_boxcox(sample)
    p2 = fit_boxcox(list(sample))
    assert p1 == p2


def test_fit_agrees_with_scipy_mle_loosely():
    rng = np.random.RandomState(8)
    sample = rng.lognormal(0.0, 0.8, 2000) + 0.5
    params = fit_boxcox(sample)
    scipy_lam = stats.boxcox_normmax(sample, method="mle")
    assert abs(params.lam - float(scipy_lam)) < 0.05


def test_params_roundtrip():
    params = fit_boxcox(np.random.RandomState(9).lognormal(0, 1, 200))
    again = BoxCoxParams.from_dict(params.to_dict())
    assert again == params


# ---------------------------------------------------------------------------
# fusion
# ---------------------------------------------------------------------------

def test_cm_at_all_mean_inputs_is_two():
    assert combine_complexity(1.0, 1.0, 1.0, 1.0) == 2.0


def test_cm_clamped_at_one():
    assert combine_complexity(0.0, 0.0, 0.0, 0.0) == 1.0
    assert combine_complexity(0.0, 0.0, 0.0, 5.0) == 1.0


def test_cm_arithmetic():
    assert combine_complexity(2.0, 2.0, 2.0, 0.0) == 4.0


def test_cm_floor_on_random_tuples():
    rng = np.random.RandomState(10)
    tuples = rng.uniform(0.0, 3.0, size=(10000, 4))
    for l, c, h, p in tuples:
        assert combine_complexity(l, c, h, p) >= 1.0


def test_function_score_examples():
    assert function_score(0.0, 2.0, 1.0, 1.5) == 0.0
    assert function_score(1.0, 2.0, 1.0, 1.0) == 4.0
    assert function_score(4.0, 2.0, 0.0, 1.5) == 12.0


def test_score_zero_iff_delta_zero():
    rng = np.random.RandomState(11)
    for _ in range(500):
        delta = float(rng.choice([0.0, rng.uniform(0.01, 50.0)]))
        cm = 1.0 + float(rng.uniform(0, 3))
        ip = float(rng.uniform(0, 2))
        ir = 1.0 + float(rng.uniform(0, 2))
        score = function_score(delta, cm, ip, ir)
        assert (score == 0.0) == (delta == 0.0)


def test_cvalue_sum_and_permutation_invariance():
    assert commit_cvalue([]) == 0.0
    assert commit_cvalue([4.0, 12.0]) == 16.0
    rng = np.random.RandomState(12)
    scores = list(rng.uniform(0, 10, 50))
    assert commit_cvalue(scores) == pytest.approx(
        commit_cvalue(list(reversed(scores))), rel=1e-12)

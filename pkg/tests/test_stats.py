import numpy as np
import pytest

from epitown.stats import welch_test


def test_hand_computed_example():
    # equal variances 2.5, n=5 each: se=1, t=-1, dof=8
    res = welch_test([1, 2, 3, 4, 5], [2, 3, 4, 5, 6])
    assert res.t == pytest.approx(-1.0)
    assert res.dof == pytest.approx(8.0)
    assert 0.3 < res.p < 0.4


def test_identical_samples_t_zero():
    res = welch_test([1, 2, 3], [1, 2, 3])
    assert res.t == 0.0
    assert res.p == pytest.approx(1.0)


def test_separated_samples_tiny_p():
    rng = np.random.default_rng(0)
    a = rng.normal(0.0, 1e-6, size=50)
    b = 1.0 + rng.normal(0.0, 1e-6, size=50)
    res = welch_test(a, b)
    assert res.p < 1e-30


def test_zero_variance_rejected():
    with pytest.raises(ValueError, match="zero variance"):
        welch_test([1.0, 1.0, 1.0], [2.0, 2.0])


def test_small_samples_rejected():
    with pytest.raises(ValueError, match="two values"):
        welch_test([1.0], [1.0, 2.0])


def test_matches_scipy():
    from scipy import stats as sps
    rng = np.random.default_rng(5)
    a = rng.normal(0, 1, 40)
    b = rng.normal(0.3, 2, 25)
    res = welch_test(a, b)
    ref = sps.ttest_ind(a, b, equal_var=False)
    assert res.t == pytest.approx(ref.statistic)
    assert res.p == pytest.approx(ref.pvalue)

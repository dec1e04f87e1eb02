import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import spearmanr

from shapig.metrics import (UndefinedCorrelationError, aggregate, iaccuracy, iaccuracy_curve,
                            plot_data_csv, ranks, reports_csv, spearman)


def test_spearman_examples():
    a = np.array([3.0, 1.0, 4.0, 1.5])
    assert spearman(a, a) == 1.0
    assert spearman(a, -a) == -1.0
    assert spearman([1, 2, 3, 4], [1, 2, 4, 3]) == pytest.approx(0.8)


def test_ties_use_average_ranks():
    assert ranks([10, 20, 20, 30]).tolist() == [1, 2.5, 2.5, 4]


def test_constant_input_is_undefined():
    with pytest.raises(UndefinedCorrelationError):
        spearman([1, 1, 1], [1, 2, 3])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 5), min_size=3, max_size=12), st.integers(0, 1000))
def test_agrees_with_scipy_including_ties(xs, seed):
    a = np.array(xs, dtype=float)
    b = np.random.default_rng(seed).integers(0, 4, size=len(a)).astype(float)
    if len(set(a)) < 2 or len(set(b)) < 2:
        return
    assert spearman(a, b) == pytest.approx(spearmanr(a, b).statistic, abs=1e-12)


class ThresholdModel:
    """Class 1 while the summed intensity stays above ``t``."""

    def __init__(self, t):
        self.t = t

    def __call__(self, X):
        s = X.sum(axis=1)
        return np.stack([s <= self.t, s > self.t], axis=1).astype(float)


def test_iaccuracy_cases():
    img = np.ones((3, 3))
    order = np.arange(9)
    assert iaccuracy(ThresholdModel(0.5), img, order, 0, 0.0) == 1.0
    assert iaccuracy(ThresholdModel(-1.0), img, order, 6, 0.0) == 1.0
    assert iaccuracy(ThresholdModel(8.5), img, order, 6, 0.0) == pytest.approx(1 / 7)
    curve = iaccuracy_curve(ThresholdModel(8.5), img, order, 3, 0.0)
    np.testing.assert_allclose(curve, [1, 1 / 2, 1 / 3, 1 / 4])


def test_aggregate_examples():
    r = aggregate([0.0, 1.0])
    assert (r.mean, r.variance) == (0.5, 0.5)
    c = aggregate([2.0, 2.0, 2.0])
    assert (c.mean, c.variance, c.ci()) == (2.0, 0.0, (2.0, 2.0))
    with pytest.raises(ValueError):
        aggregate([1.0])
    single = aggregate([1.0], require_variance=False)
    assert single.variance is None and single.ci() == (1.0, 1.0)


def test_interval_is_normal_approximation():
    vals = np.arange(10.0)
    r = aggregate(vals)
    half = 1.959963984540054 * math.sqrt(np.var(vals, ddof=1) / 10)
    assert r.ci()[1] - r.mean == pytest.approx(half)


def test_report_csvs():
    r = aggregate([0.0, 1.0], name="sig")
    assert reports_csv([r]).splitlines()[0] == "metric,n,mean,variance,ci_low,ci_high"
    assert plot_data_csv([3], [r], "B").splitlines()[1].startswith("3,0.5,")

import numpy as np
import pytest

from errors import DomainError
from model.lattice import AttributeSpace
from model.metrics import auc_group_variance, auc_summary, mae, rmse, weighted_mse
from model.summary import GroundTruth


def test_auc_variance_examples():
    assert auc_group_variance(5, 2, 3) == pytest.approx(6 / 360)
    assert auc_group_variance(2, 1, 1) == pytest.approx(0.125)
    assert auc_group_variance(200, 100, 100) == pytest.approx(201 / 24_000_000)


def test_auc_variance_errors():
    with pytest.raises(DomainError):
        auc_group_variance(3, 0, 3)
    with pytest.raises(DomainError):
        auc_group_variance(4, 1, 2)


def test_auc_summary_flags_single_class_groups():
    space = AttributeSpace.from_counts([3])
    s = auc_summary([0.8, 0.6, 0.9], [2, 0, 1], [3, 4, 1], space)
    assert s.missing.tolist() == [False, True, False]
    assert s.precision[0] == pytest.approx(1 / auc_group_variance(5, 2, 3))
    assert s.precision[1] == 0.0
    assert s.y[1] == 0.0


def test_identity_and_offset():
    mu = np.array([0.1, 0.5, 0.9, 1.3])
    n = np.array([1, 2, 3, 4])
    truth = GroundTruth(mu, np.ones(4, dtype=bool))
    assert mae(mu, truth) == 0.0
    assert weighted_mse(mu, truth, n) == 0.0
    assert mae(mu + 1, truth) == pytest.approx(1.0)
    assert rmse(mu + 1, truth) == pytest.approx(1.0)
    assert weighted_mse(mu + 1, truth, n) == pytest.approx(2.5)


def test_matches_loop(rng):
    mu_hat, mu = rng.normal(size=6), rng.normal(size=6)
    n = rng.integers(1, 10, size=6)
    inc = np.array([True, False, True, True, False, True])
    truth = GroundTruth(mu, inc)
    idx = [g for g in range(6) if inc[g]]
    assert mae(mu_hat, truth) == pytest.approx(sum(abs(mu_hat[g] - mu[g]) for g in idx) / 4, rel=1e-14)
    assert weighted_mse(mu_hat, truth, n) == pytest.approx(
        sum(n[g] * (mu_hat[g] - mu[g]) ** 2 for g in idx) / 4, rel=1e-14
    )


def test_empty_mask_raises():
    truth = GroundTruth(np.zeros(3), np.zeros(3, dtype=bool))
    with pytest.raises(DomainError):
        mae(np.zeros(3), truth)
    with pytest.raises(DomainError):
        mae(np.zeros(2), GroundTruth(np.zeros(3), np.ones(3, dtype=bool)))

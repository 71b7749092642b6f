import numpy as np
import pytest
from numpy.testing import assert_allclose

from objectives.multi_task import mt_estimate
from objectives.sure import map_estimate
from oracle.ridge import design, max_discrepancy, pair_inverse_identity, ridge_multi, ridge_single, smw_inverse
from prior.structure import build_covariance


@pytest.mark.parametrize("tau2", [[0.5, 0.3, 1.0, 0.2], [0.5, 0.0, 1.0, 0.2], [0.0, 0.0, 0.0, 2.0]])
def test_single_task_matches_map(make_summaries, structure23, rng, tau2):
    tau2 = np.array(tau2)
    s = make_summaries(rng)[0]
    expected = map_estimate(s, np.zeros(6), build_covariance(structure23, tau2)).mu_hat
    assert_allclose(ridge_single(s, structure23, tau2).mu_hat, expected, atol=1e-8)


@pytest.mark.parametrize("seed", range(50))
def test_single_task_oracle_on_random_interior_parameters(make_summaries, structure23, seed):
    rng = np.random.default_rng(300 + seed)
    s = make_summaries(rng)[0]
    tau2 = rng.uniform(0.05, 3.0, size=4)
    expected = map_estimate(s, np.zeros(6), build_covariance(structure23, tau2)).mu_hat
    gap = np.max(np.abs(ridge_single(s, structure23, tau2).mu_hat - expected))
    assert gap <= 1e-8 * (1 + np.max(np.abs(s.y)))


def test_all_zero_variances(make_summaries, structure23, rng):
    s = make_summaries(rng)[0]
    assert design(structure23, np.zeros(4)).phi.shape == (6, 0)
    assert_allclose(ridge_single(s, structure23, np.zeros(4)).mu_hat, np.zeros(6))


def test_dropped_blocks(structure23):
    fd = design(structure23, np.array([0.0, 1.0, 0.0, 2.0]))
    assert fd.masks == [1, 3]
    assert fd.phi.shape == (6, 8)
    assert fd.k_diag.tolist() == [1.0] * 2 + [2.0] * 6


def test_multi_task_matches_metamap(make_summaries, structure23, rng):
    tasks = make_summaries(rng, tasks=3)
    tau2 = np.array([0.2, 0.4, 0.1, 0.3])
    ups = np.array([1.0, 0.0, 0.5, 0.1])
    estimates, _ = mt_estimate(tasks, structure23, tau2, ups, "metamap", nonneg=False)
    ridge = ridge_multi(tasks, structure23, tau2, ups)
    assert [r.task_id for r in ridge] == [e.task_id for e in estimates]
    assert max_discrepancy(estimates, ridge) < 1e-8


@pytest.mark.parametrize("seed", range(20))
def test_multi_task_oracle_on_random_interior_parameters(make_summaries, structure23, seed):
    rng = np.random.default_rng(400 + seed)
    tasks = make_summaries(rng, tasks=int(rng.integers(2, 6)))
    tau2 = rng.uniform(0.05, 3.0, size=4)
    ups = rng.uniform(0.05, 3.0, size=4)
    estimates, _ = mt_estimate(tasks, structure23, tau2, ups, "metamap", nonneg=False)
    bound = 1e-8 * (1 + max(np.max(np.abs(s.y)) for s in tasks))
    assert max_discrepancy(estimates, ridge_multi(tasks, structure23, tau2, ups)) <= bound


def test_smw_inverse(rng):
    a = np.diag(rng.uniform(1, 2, size=5))
    x = rng.normal(size=(5, 2))
    r = np.diag([0.5, 3.0])
    assert_allclose(smw_inverse(a, x, r), np.linalg.inv(a + x @ r @ x.T), rtol=1e-10)


def test_pair_inverse_identity(rng):
    m1, m2 = rng.normal(size=(4, 4)), rng.normal(size=(4, 4))
    lhs, rhs = pair_inverse_identity(m1 @ m1.T + np.eye(4), m2 @ m2.T + np.eye(4))
    assert_allclose(lhs, rhs, atol=1e-10)

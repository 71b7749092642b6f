import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import DomainError
from model.summary import TaskSummary
from objectives.multi_task import mt_estimate, mt_objective, theta_metamap, theta_suresolve
from objectives.single_task import st_objective
from objectives.sure import map_divergence, map_estimate, sure_value
from prior.structure import build_covariance, shrinkage_matrix

STEP = 1e-5
SEEDS = range(20)


def _central_difference(fun, x):
    grad = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = STEP * max(1.0, abs(x[i]))
        grad[i] = (fun(x + e) - fun(x - e)) / (2 * e[i])
    return grad


def test_single_task_value_tracks_sure(make_summaries, structure23, rng):
    s = make_summaries(rng, sigma2=0.8)[0]
    tau2 = rng.exponential(size=4)
    cov = build_covariance(structure23, tau2)
    a = shrinkage_matrix(cov, s.precision)
    mu = map_estimate(s, np.zeros(6), cov).mu_hat
    sure = sure_value(s, mu, map_divergence(a))
    value = st_objective(s, structure23, tau2).value
    assert sure == pytest.approx(s.sigma2 / s.d * (value + s.d), rel=1e-10)


def test_single_task_zero_prior(make_summaries, structure23, rng):
    s = make_summaries(rng)[0]
    out = st_objective(s, structure23, np.zeros(4))
    assert out.value == pytest.approx(float(s.precision @ (s.y * s.y)) - 12.0)


@pytest.mark.parametrize("seed", SEEDS)
def test_single_task_gradient(make_summaries, structure23, seed):
    rng = np.random.default_rng(seed)
    s = make_summaries(rng)[0]
    tau2 = rng.uniform(0.1, 2.0, size=4)
    analytic = st_objective(s, structure23, tau2).gradient
    numeric = _central_difference(lambda x: st_objective(s, structure23, x).value, tau2)
    assert_allclose(analytic, numeric, rtol=1e-4, atol=1e-6)


@pytest.mark.parametrize("seed", SEEDS)
def test_metamap_gradient(make_summaries, structure23, seed):
    rng = np.random.default_rng(100 + seed)
    tasks = make_summaries(rng, tasks=4)
    x0 = rng.uniform(0.1, 2.0, size=8)

    def value(x):
        return mt_objective(tasks, structure23, x[:4], x[4:], "metamap").value

    analytic = mt_objective(tasks, structure23, x0[:4], x0[4:], "metamap").gradient
    assert analytic.shape == (8,)
    assert_allclose(analytic, _central_difference(value, x0), rtol=1e-4, atol=1e-6)


@pytest.mark.parametrize("seed", SEEDS)
def test_suresolve_gradient(make_summaries, structure23, seed):
    rng = np.random.default_rng(200 + seed)
    tasks = make_summaries(rng, tasks=4)
    tau2 = rng.uniform(0.1, 2.0, size=4)
    analytic = mt_objective(tasks, structure23, tau2, variant="suresolve").gradient
    numeric = _central_difference(lambda x: mt_objective(tasks, structure23, x, variant="suresolve").value, tau2)
    assert analytic.shape == (4,)
    assert_allclose(analytic, numeric, rtol=1e-4, atol=1e-6)


@pytest.mark.parametrize("variant", ["metamap", "suresolve"])
def test_multi_task_value_tracks_sure(make_summaries, structure23, rng, variant):
    tasks = make_summaries(rng, tasks=3, sigma2=1.3)
    tau2 = rng.exponential(size=4)
    ups = rng.exponential(size=4)
    value = mt_objective(tasks, structure23, tau2, ups, variant).value
    estimates, center = mt_estimate(tasks, structure23, tau2, ups, variant, nonneg=False)
    cov = build_covariance(structure23, tau2)
    total = 0.0
    for s, est, m in zip(tasks, estimates, center.mixing):
        a = shrinkage_matrix(cov, s.precision)
        total += sure_value(s, est.mu_hat, map_divergence(a) + float(np.trace(a @ m)))
    assert total == pytest.approx(1.3 / 6 * (value + 3 * 6), rel=1e-9)


def test_zero_meta_prior_reduces_to_single_task(make_summaries, structure23, rng):
    tasks = make_summaries(rng, tasks=2)
    tau2 = rng.exponential(size=4)
    center = theta_metamap(tasks, structure23, tau2, np.zeros(4))
    assert_allclose(center.theta, np.zeros(6))
    estimates, _ = mt_estimate(tasks, structure23, tau2, np.zeros(4))
    cov = build_covariance(structure23, tau2)
    for s, est in zip(tasks, estimates):
        assert_allclose(est.mu_hat, map_estimate(s, np.zeros(6), cov).mu_hat, atol=1e-12)


def test_suresolve_center_is_stationary(make_summaries, structure23, rng):
    tasks = make_summaries(rng, tasks=4)
    tau2 = rng.exponential(size=4)
    center = theta_suresolve(tasks, structure23, tau2, nonneg=False)
    assert_allclose(sum(center.mixing), np.eye(6), atol=1e-10)


def test_metamap_center_with_a_flat_meta_prior(make_summaries, structure23, rng):
    tasks = make_summaries(rng, tasks=4)
    tau2 = rng.uniform(0.2, 1.0, size=4)
    center = theta_metamap(tasks, structure23, tau2, np.array([0.0, 0.0, 0.0, 1e12]), nonneg=False)
    cov = build_covariance(structure23, tau2)
    weights = [np.linalg.inv(cov + np.diag(s.sigma2 / s.n)) for s in tasks]
    expected = np.linalg.solve(sum(weights), sum(w @ s.y for w, s in zip(weights, tasks)))
    assert_allclose(center.theta, expected, rtol=1e-4, atol=1e-8)


@pytest.mark.parametrize("variant", ["metamap", "suresolve"])
def test_estimates_scale_with_the_data(make_summaries, structure23, rng, variant):
    scale = 3.0
    tasks = make_summaries(rng, tasks=3, sigma2=0.7)
    tau2 = rng.uniform(0.1, 1.0, size=4)
    ups = rng.uniform(0.1, 1.0, size=4)
    scaled = [TaskSummary(s.y * scale, s.n, s.sigma2 * scale**2, s.space, s.task_id) for s in tasks]
    base, _ = mt_estimate(tasks, structure23, tau2, ups, variant, nonneg=False)
    big, _ = mt_estimate(scaled, structure23, tau2 * scale**2, ups * scale**2, variant, nonneg=False)
    for a, b in zip(base, big):
        assert_allclose(b.mu_hat, scale * a.mu_hat, rtol=1e-10, atol=1e-12)
    theta = rng.normal(size=6)
    single = map_estimate(tasks[0], theta, build_covariance(structure23, tau2)).mu_hat
    scaled_single = map_estimate(scaled[0], scale * theta, build_covariance(structure23, tau2 * scale**2)).mu_hat
    assert_allclose(scaled_single, scale * single, rtol=1e-10, atol=1e-12)


def test_clamp_is_post_hoc(make_summaries, structure23, rng):
    tasks = make_summaries(rng, tasks=3)
    negative = [s.with_values(np.full(6, -2.0)) for s in tasks]
    tau2 = np.array([0.1, 0.1, 0.1, 0.1])
    clamped = theta_suresolve(negative, structure23, tau2)
    assert np.all(clamped.theta == 0.0)
    assert_allclose(clamped.raw_theta, np.full(6, -2.0))
    free = theta_suresolve(negative, structure23, tau2, nonneg=False)
    assert_allclose(free.theta, clamped.raw_theta)


def test_unknown_variant(make_summaries, structure23, rng):
    tasks = make_summaries(rng, tasks=2)
    with pytest.raises(DomainError):
        mt_objective(tasks, structure23, np.ones(4), variant="bogus")
    with pytest.raises(DomainError):
        mt_objective(tasks, structure23, np.ones(4), None, "metamap")

import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import DegenerateVarianceError, DomainError
from model.lattice import AttributeSpace
from model.summary import RecordBatch, TaskSummary, ground_truth, summarize, summarize_batch, summarize_multi
from settings import Settings


@pytest.fixture
def space2():
    return AttributeSpace.from_levels([("g", ["A", "B"])])


def _fixture_batch():
    return RecordBatch(np.array([[1], [1], [2]]), np.array([0.0, 1.0, 1.0]))


def test_three_row_example(space2):
    s = summarize(_fixture_batch(), space2)
    assert_allclose(s.y, [0.5, 1.0])
    assert s.n.tolist() == [2, 1]
    assert s.sigma2 == pytest.approx(0.5)


def test_zero_variance_uses_floor_or_raises(space2):
    batch = RecordBatch(np.array([[1], [1], [2], [2], [2]]), np.full(5, 0.7))
    s = summarize(batch, space2, Settings(sigma2_floor=1e-6))
    assert s.sigma2 == 1e-6
    assert_allclose(s.y, [0.7, 0.7])
    with pytest.raises(DegenerateVarianceError):
        summarize(batch, space2, Settings(sigma2_floor=None))


def test_no_degrees_of_freedom(space2):
    batch = RecordBatch(np.array([[1], [2]]), np.array([0.1, 0.4]))
    with pytest.raises(DegenerateVarianceError):
        summarize(batch, space2)
    s = summarize(batch, space2, Settings(fallback_sigma2=2.0))
    assert s.sigma2 == 2.0


def test_sigma2_matches_two_pass(space23, rng):
    N = 1000
    classes = np.column_stack([rng.integers(1, 3, N), rng.integers(1, 4, N)])
    values = rng.normal(size=N)
    s = summarize(RecordBatch(classes, values), space23)
    g = (classes[:, 0] - 1) * 3 + (classes[:, 1] - 1)
    rss = 0.0
    for grp in range(6):
        v = values[g == grp]
        rss += float(((v - v.mean()) ** 2).sum())
    assert s.sigma2 == pytest.approx(rss / (N - 6), rel=1e-12)
    assert s.total == N


def test_row_order_invariance(space23, rng):
    N = 200
    classes = np.column_stack([rng.integers(1, 3, N), rng.integers(1, 4, N)])
    values = rng.normal(size=N)
    perm = rng.permutation(N)
    a = summarize(RecordBatch(classes, values), space23)
    b = summarize(RecordBatch(classes[perm], values[perm]), space23)
    assert_allclose(a.y, b.y, rtol=1e-12)
    assert a.sigma2 == pytest.approx(b.sigma2, rel=1e-12)


def test_multi_pools_sigma2(space2):
    parts = [_fixture_batch(), _fixture_batch()]
    out = summarize_multi(parts, space2, task_ids=["a", "b"])
    # residual sum 0.5 per task over 6 - 4 degrees of freedom
    assert [s.sigma2 for s in out] == [pytest.approx(0.5), pytest.approx(0.5)]
    assert [s.task_id for s in out] == ["a", "b"]
    single = summarize_multi([_fixture_batch()], space2)[0]
    ref = summarize(_fixture_batch(), space2)
    assert single.sigma2 == ref.sigma2
    assert_allclose(single.y, ref.y)


def test_batch_with_task_column(space2):
    batch = RecordBatch(
        np.array([[1], [1], [2], [1], [2], [2]]),
        np.array([0.0, 1.0, 1.0, 2.0, 3.0, 5.0]),
        np.array(["t2", "t2", "t2", "t1", "t1", "t1"]),
    )
    out = summarize_batch(batch, space2)
    assert [s.task_id for s in out] == ["t2", "t1"]
    assert_allclose(out[1].y, [2.0, 4.0])
    assert out[0].sigma2 == out[1].sigma2


def test_missing_groups_are_placeholders(space23):
    s = TaskSummary(np.arange(6.0), np.array([1, 0, 2, 0, 3, 4]), 2.0, space23)
    assert s.y[1] == 0.0 and s.y[3] == 0.0
    assert s.missing.tolist() == [False, True, False, True, False, False]
    assert_allclose(s.precision, [0.5, 0, 1, 0, 1.5, 2])


def test_summary_validation(space23):
    with pytest.raises(DomainError):
        TaskSummary(np.zeros(5), np.ones(6), 1.0, space23)
    with pytest.raises(DomainError):
        TaskSummary(np.zeros(6), np.ones(6), 0.0, space23)
    with pytest.raises(DomainError):
        TaskSummary(np.zeros(6), -np.ones(6), 1.0, space23)


def test_ground_truth_threshold(space2):
    classes = np.array([[1]] * 40 + [[2]] * 39)
    values = np.concatenate([np.full(40, 1.0), np.full(39, 2.0)])
    truth = ground_truth(RecordBatch(classes, values), space2)
    assert truth.included.tolist() == [True, False]
    assert_allclose(truth.mu, [1.0, 2.0])

import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import DomainError
from methods.registry import METHOD_NAMES, RunContext, get_method, load_methods, run_method
from model.summary import TaskSummary
from optimizer.fit import FitConfig


def test_every_method_is_registered():
    assert set(METHOD_NAMES) == {
        "naive", "pooled", "bock", "bock-pooled", "mt-global", "mt-offset", "mt-bock", "suremap", "mt-suremap",
    }
    assert [m.method_id for m in load_methods()] == list(METHOD_NAMES)
    assert {m.method_id for m in load_methods() if m.tunable} == {"suremap", "mt-suremap"}


def test_unknown_method_lists_known_names():
    with pytest.raises(DomainError, match="mt-suremap"):
        get_method("james-stein")


@pytest.mark.parametrize("method", METHOD_NAMES)
def test_one_estimate_per_task(method, make_summaries, structure23, rng):
    tasks = make_summaries(rng, tasks=3)
    out = run_method(method, tasks, RunContext(structure23, FitConfig(max_iterations=30)))
    assert [e.task_id for e in out.estimates] == ["0", "1", "2"]
    assert all(np.all(np.isfinite(e.mu_hat)) for e in out.estimates)
    assert bool(out.fits) == get_method(method).tunable


def test_mt_global_is_shared(make_summaries, structure23, rng):
    tasks = make_summaries(rng, tasks=2)
    out = run_method("mt-global", tasks, RunContext(structure23))
    assert_allclose(out.estimates[0].mu_hat, out.estimates[1].mu_hat)


def test_fallback_flag_reaches_multi_task_baselines(space23, structure23):
    n = np.array([1, 1, 1, 1, 1, 0])
    tasks = [TaskSummary(np.ones(6), n, 1.0, space23, "a"), TaskSummary(np.ones(6), n, 1.0, space23, "b")]
    with pytest.raises(DomainError):
        run_method("mt-offset", tasks, RunContext(structure23))
    out = run_method("mt-offset", tasks, RunContext(structure23, fallback_pooled=True))
    assert_allclose(out.estimates[0].mu_hat, np.ones(6))

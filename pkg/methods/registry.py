"""
Method registry: every estimator the CLI and benchmark harness can dispatch to.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence

import numpy as np

from baselines import estimators
from baselines.estimators import EstimatorOutput
from errors import DomainError
from model.summary import TaskSummary
from optimizer.fit import FitConfig, FitResult, fit_multi, fit_single
from prior.structure import PriorStructure


@dataclass(frozen=True)
class RunContext:
    structure: PriorStructure
    config: FitConfig = FitConfig()
    fallback_pooled: bool = False


@dataclass
class MethodOutput:
    estimates: List[EstimatorOutput]
    fits: List[FitResult] = field(default_factory=list)


@dataclass
class Method:
    method_id: str
    description: str
    multi_task: bool
    tunable: bool
    run: Callable[[Sequence[TaskSummary], RunContext], MethodOutput]


def _per_task(fn: Callable[[TaskSummary], EstimatorOutput]):
    def run(summaries: Sequence[TaskSummary], ctx: RunContext) -> MethodOutput:
        return MethodOutput([fn(s) for s in summaries])

    return run


def _zero_center_bock(summary: TaskSummary) -> EstimatorOutput:
    return estimators.bock(summary, np.zeros(summary.d))


def _mt_global(summaries: Sequence[TaskSummary], ctx: RunContext) -> MethodOutput:
    shared = estimators.mt_global(summaries, ctx.fallback_pooled)
    # one shared vector, reported once per task
    return MethodOutput([EstimatorOutput(shared.mu_hat, shared.method, shared.fallback, s.task_id) for s in summaries])


def _suremap(summaries: Sequence[TaskSummary], ctx: RunContext) -> MethodOutput:
    fits = [fit_single(s, ctx.structure, ctx.config) for s in summaries]
    return MethodOutput([f.estimates[0] for f in fits], fits)


def _mt_suremap(summaries: Sequence[TaskSummary], ctx: RunContext) -> MethodOutput:
    fit = fit_multi(summaries, ctx.structure, ctx.config)
    return MethodOutput(list(fit.estimates), [fit])


_METHODS: Dict[str, Method] = {
    m.method_id: m
    for m in (
        Method("naive", "per-group sample means", False, False, _per_task(estimators.naive)),
        Method("pooled", "overall precision-weighted mean for every group", False, False, _per_task(estimators.pooled)),
        Method("bock", "positive-part Bock shrinkage toward zero", False, False, _per_task(_zero_center_bock)),
        Method("bock-pooled", "Bock shrinkage toward the pooled mean", False, False, _per_task(estimators.bock_pooled)),
        Method("mt-global", "per-group means over all tasks", True, False, _mt_global),
        Method(
            "mt-offset",
            "global means shifted to each task's pooled mean",
            True,
            False,
            lambda ss, ctx: MethodOutput(estimators.mt_offset(ss, ctx.fallback_pooled)),
        ),
        Method("mt-bock", "Bock shrinkage toward leave-one-task-out means", True, False, lambda ss, ctx: MethodOutput(estimators.mt_bock(ss))),
        Method("suremap", "single-task SureMap fitted per task", False, True, _suremap),
        Method("mt-suremap", "multi-task SureMap", True, True, _mt_suremap),
    )
}

METHOD_NAMES = tuple(_METHODS)


def load_methods() -> List[Method]:
    return list(_METHODS.values())


def get_method(method_id: str) -> Method:
    try:
        return _METHODS[method_id]
    except KeyError:
        raise DomainError(f"unknown method '{method_id}' (known: {', '.join(METHOD_NAMES)})") from None


def run_method(method_id: str, summaries: Sequence[TaskSummary], ctx: RunContext) -> MethodOutput:
    return get_method(method_id).run(list(summaries), ctx)

"""
Subsample-with-replacement benchmark: ground truth from the full data, then
for every (trial, rate) draw rows per task, summarize, run each method and
score it on the groups the ground truth includes.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import DegenerateVarianceError, DomainError, SureMapError
from methods.registry import RunContext, get_method, run_method
from model.lattice import AttributeSpace
from model.metrics import METRICS
from model.summary import GroundTruth, RecordBatch, TaskSummary, ground_truth, summarize_multi
from settings import DEFAULT_SETTINGS, Settings
from workers import run_jobs

logger = logging.getLogger(__name__)

Z_95 = 1.96
SINGLE_TASK_TRIALS = 200
MULTI_TASK_TRIALS = 40


@dataclass(frozen=True)
class BenchmarkSpec:
    methods: Tuple[str, ...]
    rates: Tuple[float, ...]
    trials: Optional[int] = None  # None: 200 single-task, 40 multi-task
    seed: int = 0
    truth_threshold: int = DEFAULT_SETTINGS.truth_threshold
    metric: str = "mae"
    fallback_pooled: bool = False

    def __post_init__(self) -> None:
        if not self.methods:
            raise DomainError("at least one method is required")
        for m in self.methods:
            get_method(m)
        rates = tuple(sorted({float(r) for r in self.rates}))
        if not rates or rates[0] <= 0 or rates[-1] > 1:
            raise DomainError("rates must lie in (0, 1]")
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "rates", rates)
        if self.trials is not None and self.trials < 1:
            raise DomainError("trials must be positive")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        if self.truth_threshold < 1:
            raise DomainError("truth_threshold must be positive")
        if self.metric not in METRICS:
            raise DomainError(f"unknown metric '{self.metric}' (expected one of {', '.join(METRICS)})")

    def trial_count(self, multi_task: bool) -> int:
        if self.trials is not None:
            return self.trials
        return MULTI_TASK_TRIALS if multi_task else SINGLE_TASK_TRIALS

    @classmethod
    def from_document(cls, doc: Dict[str, Any]) -> "BenchmarkSpec":
        return cls(
            methods=tuple(doc.get("methods", ())),
            rates=tuple(doc.get("rates", ())),
            trials=doc.get("trials"),
            seed=int(doc.get("seed", 0)),
            truth_threshold=int(doc.get("truth_threshold", DEFAULT_SETTINGS.truth_threshold)),
            metric=doc.get("metric", "mae"),
            fallback_pooled=bool(doc.get("fallback_pooled", False)),
        )


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent counter-based stream for one (trial, rate, task, ...) key."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(key))))


@dataclass
class CellResult:
    """All trials of one (method, rate) cell."""

    method: str
    rate: float
    values: np.ndarray  # (trials,), NaN where the method failed or the trial was skipped
    per_task: np.ndarray  # (trials, T)

    @property
    def finite(self) -> np.ndarray:
        return self.values[np.isfinite(self.values)]

    @property
    def mean(self) -> Optional[float]:
        v = self.finite
        return float(v.mean()) if v.size else None

    @property
    def ci_halfwidth(self) -> Optional[float]:
        v = self.finite
        if v.size < 2:
            return None
        return Z_95 * float(v.std(ddof=1)) / math.sqrt(v.size)

    def task_means(self) -> List[Optional[float]]:
        out = []
        for col in self.per_task.T:
            col = col[np.isfinite(col)]
            out.append(float(col.mean()) if col.size else None)
        return out


@dataclass
class TrialReport:
    metric: str
    seed: int
    trials: int
    task_ids: List[str]
    cells: List[CellResult]
    skipped: Dict[float, int] = field(default_factory=dict)

    def cell(self, method: str, rate: float) -> CellResult:
        for c in self.cells:
            if c.method == method and c.rate == rate:
                return c
        raise KeyError((method, rate))

    def improvement(self, cell: CellResult) -> List[Optional[float]]:
        """Per task, naive mean metric over the method's mean metric."""
        try:
            base = self.cell("naive", cell.rate).task_means()
        except KeyError:
            return [None] * len(self.task_ids)
        out = []
        for b, m in zip(base, cell.task_means()):
            out.append(b / m if b is not None and m is not None and m > 0 else None)
        return out


def score(
    estimates: Sequence[np.ndarray],
    summaries: Sequence[TaskSummary],
    truths: Sequence[GroundTruth],
    metric: str,
) -> np.ndarray:
    """Metric per task; NaN for tasks whose ground truth includes no group."""
    fn = METRICS[metric]
    out = np.full(len(truths), np.nan)
    for t, (mu, s, truth) in enumerate(zip(estimates, summaries, truths)):
        if truth.included.any():
            out[t] = fn(mu, truth, s.n)
    return out


def evaluate_methods(
    methods: Sequence[str],
    summaries: Sequence[TaskSummary],
    truths: Sequence[GroundTruth],
    ctx: RunContext,
    metric: str,
) -> Dict[str, np.ndarray]:
    """Per-task scores of every method; a failing method scores NaN."""
    out = {}
    for m in methods:
        try:
            result = run_method(m, summaries, ctx)
            out[m] = score([e.mu_hat for e in result.estimates], summaries, truths, metric)
        except SureMapError as e:
            logger.warning("%s failed: %s", m, e)
            out[m] = np.full(len(truths), np.nan)
    return out


def rate_key(rate: float) -> int:
    """Stream key for a subsampling rate: its float64 bit pattern, stable under edits to the rate list."""
    return int(np.float64(rate).view(np.uint64))


def _draw(parts: Sequence[RecordBatch], rate: float, seed: int, trial: int) -> List[RecordBatch]:
    drawn = []
    for t, part in enumerate(parts):
        m = math.ceil(rate * len(part))
        rows = stream(seed, trial, rate_key(rate), t).integers(0, len(part), size=m)
        drawn.append(part.take(rows))
    return drawn


def run_benchmark(
    batch: RecordBatch,
    space: AttributeSpace,
    spec: BenchmarkSpec,
    ctx: RunContext,
    settings: Settings = DEFAULT_SETTINGS,
    threads: int = 1,
) -> TrialReport:
    split = batch.split_by_task()
    task_ids = [tid for tid, _ in split]
    parts = [b for _, b in split]
    truths = [ground_truth(p, space, spec.truth_threshold) for p in parts]
    if not any(t.included.any() for t in truths):
        raise DomainError(f"no group has at least {spec.truth_threshold} rows; lower the truth threshold")
    multi = batch.tasks is not None
    trials = spec.trial_count(multi)
    logger.info(
        "benchmark: %d methods, %d rates, %d trials, %d task(s), metric %s",
        len(spec.methods), len(spec.rates), trials, len(parts), spec.metric,
    )

    def job(trial: int, rate_idx: int):
        rate = spec.rates[rate_idx]
        drawn = _draw(parts, rate, spec.seed, trial)
        try:
            summaries = summarize_multi(drawn, space, settings, task_ids)
        except DegenerateVarianceError as e:
            logger.warning("trial %d at rate %g skipped: %s", trial, rate, e)
            return None
        return evaluate_methods(spec.methods, summaries, truths, ctx, spec.metric)

    jobs = [(lambda tr=tr, ri=ri: job(tr, ri)) for tr in range(trials) for ri in range(len(spec.rates))]
    results = run_jobs(jobs, threads)

    cells = []
    skipped: Dict[float, int] = {}
    for ri, rate in enumerate(spec.rates):
        skipped[rate] = sum(1 for tr in range(trials) if results[tr * len(spec.rates) + ri] is None)
        for m in spec.methods:
            per_task = np.full((trials, len(parts)), np.nan)
            for tr in range(trials):
                res = results[tr * len(spec.rates) + ri]
                if res is not None:
                    per_task[tr] = res[m]
            values = np.full(trials, np.nan)
            rows = np.isfinite(per_task).any(axis=1)
            values[rows] = np.nanmean(per_task[rows], axis=1)
            cells.append(CellResult(m, rate, values, per_task))
    return TrialReport(spec.metric, spec.seed, trials, task_ids, cells, skipped)

"""
Ablation sweeps over the interaction order, the number of tasks and the
similarity between tasks, on raw records or on synthetic hierarchical data.
"""
from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from cli.benchmark import Z_95, score, stream
from cli.simulate import SyntheticSpec, draw_records, simulate
from errors import DegenerateVarianceError, DomainError, SureMapError
from methods.registry import RunContext, run_method
from model.lattice import AttributeSpace
from model.summary import GroundTruth, RecordBatch, TaskSummary, ground_truth, summarize_multi
from prior.structure import build_structure
from settings import DEFAULT_SETTINGS, Settings
from workers import run_jobs

logger = logging.getLogger(__name__)

SWEEPS = ("max-order", "tasks", "similarity")
TABLE_COLUMNS = ("sweep", "value", "method", "mean", "ci_halfwidth", "finite_trials", "active_entries")

# stream keys, one namespace per random quantity
_SIMULATE, _SUBSAMPLE, _REASSIGN = range(3)

Trial = Tuple[List[TaskSummary], List[GroundTruth]]


@dataclass(frozen=True)
class AblationSpec:
    sweep: str
    values: Tuple[float, ...]
    methods: Tuple[str, ...]
    trials: int = 40
    seed: int = 0
    metric: str = "mae"
    rate: float = 0.1  # subsampling rate for raw records
    truth_threshold: int = DEFAULT_SETTINGS.truth_threshold

    def __post_init__(self) -> None:
        if self.sweep not in SWEEPS:
            raise DomainError(f"unknown sweep '{self.sweep}' (expected one of {', '.join(SWEEPS)})")
        if not self.values:
            raise DomainError("at least one sweep value is required")
        if self.sweep == "similarity" and any(not 0.0 <= v <= 1.0 for v in self.values):
            raise DomainError("similarity values must lie in [0, 1]")
        if self.sweep == "tasks" and any(v < 1 or v != int(v) for v in self.values):
            raise DomainError("task counts must be positive integers")
        if self.sweep == "max-order" and any(v != int(v) for v in self.values):
            raise DomainError("max-order values must be integers")
        if self.trials < 1:
            raise DomainError("trials must be positive")
        if not 0 < self.rate <= 1:
            raise DomainError("rate must lie in (0, 1]")


@dataclass
class AblationRow:
    sweep: str
    value: float
    method: str
    values: np.ndarray
    active: Optional[float] = None

    def as_row(self) -> list:
        v = self.values[np.isfinite(self.values)]
        mean = float(v.mean()) if v.size else float("nan")
        ci = Z_95 * float(v.std(ddof=1)) / math.sqrt(v.size) if v.size >= 2 else float("nan")
        active = "" if self.active is None else self.active
        value = self.value if self.sweep == "similarity" else int(self.value)
        return [self.sweep, value, self.method, mean, ci, int(v.size), active]


def reassign_tasks(batch: RecordBatch, alpha: float, task_ids: Sequence[str], rng: np.random.Generator) -> RecordBatch:
    """Move each record to a uniformly random task with probability alpha."""
    if not 0.0 <= alpha <= 1.0:
        raise DomainError("alpha must lie in [0, 1]")
    if batch.tasks is None:
        raise DomainError("task reassignment needs a task column")
    ids = np.asarray(task_ids, dtype=str)
    move = rng.random(len(batch)) < alpha
    target = ids[rng.integers(0, ids.size, size=len(batch))]
    return RecordBatch(batch.classes, batch.values, np.where(move, target, batch.tasks))


def mixed_truth(mu: np.ndarray, counts: np.ndarray, alpha: float) -> List[GroundTruth]:
    """Expected group means of every task after reassignment with probability alpha."""
    T = mu.shape[0]
    stay = (1.0 - alpha) + alpha / T
    out = []
    for t in range(T):
        w = np.full(counts.shape, alpha / T) * counts
        w[t] = stay * counts[t]
        total = w.sum(axis=0)
        m = np.where(total > 0, (w * mu).sum(axis=0) / np.where(total > 0, total, 1.0), mu[t])
        out.append(GroundTruth(m, np.ones(mu.shape[1], dtype=bool)))
    return out


def _subsample(parts: Sequence[Tuple[str, RecordBatch]], spec: AblationSpec, settings: Settings, space: AttributeSpace, key: Tuple[int, ...]) -> Trial:
    truths, drawn = [], []
    for t, (_, b) in enumerate(parts):
        truths.append(ground_truth(b, space, spec.truth_threshold))
        rows = stream(spec.seed, *key, t).integers(0, len(b), size=math.ceil(spec.rate * len(b)))
        drawn.append(b.take(rows))
    return summarize_multi(drawn, space, settings, [tid for tid, _ in parts]), truths


def raw_source(batch: RecordBatch, space: AttributeSpace, spec: AblationSpec, settings: Settings) -> Callable[[float, int], Trial]:
    parts = batch.split_by_task()
    ids = [tid for tid, _ in parts]
    if spec.sweep in ("tasks", "similarity") and batch.tasks is None:
        raise DomainError(f"the {spec.sweep} sweep needs a task column")
    if spec.sweep == "tasks" and max(spec.values) > len(ids):
        raise DomainError(f"the data has only {len(ids)} tasks")

    def trial(value: float, index: int) -> Trial:
        vi = spec.values.index(value)
        key = (index, _SUBSAMPLE, vi) if spec.sweep == "similarity" else (index, _SUBSAMPLE)
        if spec.sweep == "tasks":
            chosen = parts[: int(value)]
        elif spec.sweep == "similarity":
            mixed = reassign_tasks(batch, value, ids, stream(spec.seed, index, _REASSIGN, vi))
            by_task = dict(mixed.split_by_task())
            chosen = [(tid, by_task[tid]) for tid in ids if tid in by_task]
        else:
            chosen = parts
        return _subsample(chosen, spec, settings, space, key)

    return trial


def synthetic_source(synthetic: SyntheticSpec, spec: AblationSpec, settings: Settings) -> Callable[[float, int], Trial]:
    structure = build_structure(synthetic.space)
    if spec.sweep == "tasks":
        synthetic = dataclasses.replace(synthetic, tasks=int(max(spec.values)))

    def trial(value: float, index: int) -> Trial:
        # shared draw across sweep values, so values are compared on the same data
        draw = simulate(synthetic, structure, stream_key=(index, _SIMULATE))
        if spec.sweep == "tasks":
            T = int(value)
            return list(draw.summaries[:T]), draw.truths()[:T]
        if spec.sweep == "similarity":
            records = draw_records(synthetic, draw, stream_key=(index, _SIMULATE))
            ids = [s.task_id for s in draw.summaries]
            mixed = reassign_tasks(records, value, ids, stream(synthetic.seed, index, _REASSIGN, spec.values.index(value)))
            by_task = dict(mixed.split_by_task())
            batches = [by_task.get(tid) for tid in ids]
            counts = np.stack([s.n for s in draw.summaries])
            nonempty = [i for i, b in enumerate(batches) if b is not None]
            summaries = summarize_multi([batches[i] for i in nonempty], draw.space, settings, [ids[i] for i in nonempty])
            truths = mixed_truth(draw.mu, counts, value)
            return summaries, [truths[i] for i in nonempty]
        return list(draw.summaries), draw.truths()

    return trial


def run_ablation(
    source: Callable[[float, int], Trial],
    spec: AblationSpec,
    ctx: RunContext,
    threads: int = 1,
) -> List[AblationRow]:
    logger.info("ablation over %s: %s", spec.sweep, ", ".join(repr(v) for v in spec.values))

    def job(value: float, index: int):
        config = ctx.config
        if spec.sweep == "max-order":
            config = dataclasses.replace(config, max_order=int(value))
        local = dataclasses.replace(ctx, config=config)
        try:
            summaries, truths = source(value, index)
        except DegenerateVarianceError as e:
            logger.warning("trial %d at %s=%g skipped: %s", index, spec.sweep, value, e)
            return None
        out = {}
        for m in spec.methods:
            try:
                result = run_method(m, summaries, local)
            except SureMapError as e:
                logger.warning("%s failed: %s", m, e)
                out[m] = (float("nan"), None)
                continue
            per_task = score([e.mu_hat for e in result.estimates], summaries, truths, spec.metric)
            value_ = float(np.nanmean(per_task)) if np.isfinite(per_task).any() else float("nan")
            active = float(np.mean([np.count_nonzero(f.tau2) for f in result.fits])) if result.fits else None
            out[m] = (value_, active)
        return out

    jobs = [(lambda v=v, i=i: job(v, i)) for v in spec.values for i in range(spec.trials)]
    results = run_jobs(jobs, threads)

    rows = []
    for vi, v in enumerate(spec.values):
        block = results[vi * spec.trials:(vi + 1) * spec.trials]
        for m in spec.methods:
            vals = np.array([r[m][0] if r is not None else np.nan for r in block])
            actives = [r[m][1] for r in block if r is not None and r[m][1] is not None]
            rows.append(AblationRow(spec.sweep, v, m, vals, float(np.mean(actives)) if actives else None))
    return rows

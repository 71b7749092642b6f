"""
Subcommand implementations. Each command takes already-parsed options and
returns the text to emit; argument parsing and exit codes live in app.py.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from cli.ablation import TABLE_COLUMNS, AblationSpec, raw_source, run_ablation, synthetic_source
from cli.benchmark import BenchmarkSpec, run_benchmark
from cli.reports import report_csv, report_document, table_csv
from cli.simulate import SyntheticSpec, draw_document, draw_records, simulate
from dataio.codec import dumps_document, estimates_to_document, load_space, load_summaries, summaries_to_document
from dataio.intake import read_auc_table, read_records, records_to_text
from errors import DomainError
from methods.registry import RunContext, run_method
from model.lattice import AttributeSpace
from model.summary import TaskSummary, summarize_batch
from objectives.multi_task import mt_estimate
from objectives.sure import map_estimate
from optimizer.fit import FitConfig, FitResult
from oracle.ridge import max_discrepancy, ridge_multi, ridge_single
from prior.structure import PriorStructure, build_covariance, build_structure
from settings import DEFAULT_SETTINGS, Settings

logger = logging.getLogger(__name__)

FORMATS = ("json", "csv")

# keeps the oracle on interior parameters, where K^{-1} exists
ORACLE_OFFSET = 1e-3


def _space(space_path: Optional[str | Path]) -> Optional[AttributeSpace]:
    return load_space(space_path) if space_path is not None else None


def cmd_summarize(
    input_path: str | Path,
    space_path: Optional[str | Path] = None,
    attributes: Optional[Sequence[str]] = None,
    settings: Settings = DEFAULT_SETTINGS,
    auc: bool = False,
) -> str:
    """Summary document from raw records, or from a per-group AUC table when `auc` is set."""
    if auc:
        summaries, _ = read_auc_table(input_path, _space(space_path), attributes)
        return dumps_document(summaries_to_document(summaries))
    batch, space = read_records(input_path, _space(space_path), attributes)
    summaries = summarize_batch(batch, space, settings)
    logger.info("summarized %d rows into %d task(s) over %d groups", len(batch), len(summaries), space.d)
    return dumps_document(summaries_to_document(summaries))


def _interior(values: Optional[np.ndarray]) -> Optional[np.ndarray]:
    if values is None:
        return None
    return values + ORACLE_OFFSET * max(1.0, float(values.max()))


def oracle_check(
    method: str,
    summaries: Sequence[TaskSummary],
    structure: PriorStructure,
    fits: Sequence[FitResult],
    config: FitConfig,
) -> float:
    """Largest gap between the closed-form estimates and the ridge oracle at the
    fitted parameters moved slightly into the interior."""
    threshold = config.condition_threshold
    if method == "suremap":
        gaps = []
        for s, fit in zip(summaries, fits):
            tau2 = _interior(fit.tau2)
            direct = map_estimate(s, np.zeros(s.d), build_covariance(structure, tau2), threshold)
            gaps.append(max_discrepancy([direct], [ridge_single(s, structure, tau2)]))
        return max(gaps)
    if method == "mt-suremap" and config.variant == "metamap":
        fit = fits[0]
        tau2, ups = _interior(fit.tau2), _interior(fit.upsilon2)
        direct, _ = mt_estimate(summaries, structure, tau2, ups, "metamap", nonneg=False, threshold=threshold)
        return max_discrepancy(direct, ridge_multi(summaries, structure, tau2, ups))
    raise DomainError("the ridge oracle covers suremap and mt-suremap with the metamap variant")


def cmd_estimate(
    summary_path: str | Path,
    method: str,
    config: FitConfig = FitConfig(),
    settings: Settings = DEFAULT_SETTINGS,
    verify_oracle: bool = False,
    fallback_pooled: bool = False,
) -> str:
    space, summaries = load_summaries(summary_path)
    structure = build_structure(space, settings.max_groups)
    ctx = RunContext(structure, config, fallback_pooled)
    result = run_method(method, summaries, ctx)
    gap = None
    if verify_oracle:
        gap = oracle_check(method, summaries, structure, result.fits, config)
        logger.info("ridge oracle discrepancy %.3g", gap)
    return dumps_document(estimates_to_document(method, space, result.estimates, result.fits, gap))


def cmd_benchmark(
    input_path: str | Path,
    spec: BenchmarkSpec,
    config: FitConfig = FitConfig(),
    settings: Settings = DEFAULT_SETTINGS,
    space_path: Optional[str | Path] = None,
    attributes: Optional[Sequence[str]] = None,
    fmt: str = "json",
    threads: int = 1,
) -> str:
    batch, space = read_records(input_path, _space(space_path), attributes)
    ctx = RunContext(build_structure(space, settings.max_groups), config, spec.fallback_pooled)
    report = run_benchmark(batch, space, spec, ctx, settings, threads)
    if fmt == "csv":
        return report_csv(report)
    return dumps_document(report_document(report))


def cmd_simulate(spec: SyntheticSpec, records: bool = False) -> str:
    draw = simulate(spec)
    if records:
        return records_to_text(draw_records(spec, draw), draw.space)
    return dumps_document(draw_document(draw))


def cmd_ablation(
    spec: AblationSpec,
    config: FitConfig = FitConfig(),
    settings: Settings = DEFAULT_SETTINGS,
    input_path: Optional[str | Path] = None,
    synthetic: Optional[SyntheticSpec] = None,
    space_path: Optional[str | Path] = None,
    attributes: Optional[Sequence[str]] = None,
    fmt: str = "json",
    threads: int = 1,
    fallback_pooled: bool = False,
) -> str:
    if (input_path is None) == (synthetic is None):
        raise DomainError("ablation needs exactly one of a record file or a synthetic spec")
    if synthetic is not None:
        space = synthetic.space
        source = synthetic_source(synthetic, spec, settings)
    else:
        batch, space = read_records(input_path, _space(space_path), attributes)
        source = raw_source(batch, space, spec, settings)
    ctx = RunContext(build_structure(space, settings.max_groups), config, fallback_pooled)
    rows = [r.as_row() for r in run_ablation(source, spec, ctx, threads)]
    if fmt == "csv":
        return table_csv(TABLE_COLUMNS, rows)
    doc: List[Dict[str, object]] = []
    for row in rows:
        entry = dict(zip(TABLE_COLUMNS, row))
        for key in ("mean", "ci_halfwidth"):
            if not np.isfinite(entry[key]):
                entry[key] = None
        if entry["active_entries"] == "":
            entry["active_entries"] = None
        doc.append(entry)
    return dumps_document({"sweep": spec.sweep, "metric": spec.metric, "trials": spec.trials, "rows": doc})

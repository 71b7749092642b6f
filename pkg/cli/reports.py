"""
Report writers: deterministic JSON documents and flat CSV tables.
"""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

from cli.benchmark import TrialReport

CSV_COLUMNS = ("method", "rate", "trial", "metric_value")


def _num(x: Optional[float]) -> Optional[float]:
    if x is None or not math.isfinite(x):
        return None
    return float(x)


def report_document(report: TrialReport) -> Dict[str, Any]:
    cells = []
    for c in report.cells:
        entry: Dict[str, Any] = {
            "method": c.method,
            "rate": c.rate,
            "mean": _num(c.mean),
            "ci_halfwidth": _num(c.ci_halfwidth),
            "finite_trials": int(c.finite.size),
            "values": [_num(v) for v in c.values],
        }
        if len(report.task_ids) > 1:
            entry["tasks"] = [
                {"id": tid, "mean": _num(m), "improvement_vs_naive": _num(r)}
                for tid, m, r in zip(report.task_ids, c.task_means(), report.improvement(c))
            ]
        cells.append(entry)
    return {
        "metric": report.metric,
        "seed": report.seed,
        "trials": report.trials,
        "tasks": report.task_ids,
        "skipped_trials": {repr(rate): n for rate, n in report.skipped.items()},
        "results": cells,
    }


def report_csv(report: TrialReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for c in report.cells:
        for trial, v in enumerate(c.values):
            writer.writerow([c.method, repr(c.rate), trial, repr(float(v))])
    return out.getvalue()


def table_csv(columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return out.getvalue()


def emit(text: str, output: Optional[str | Path]) -> None:
    """Write to the output path, or stdout when none is given."""
    if output is None:
        print(text, end="")
        return
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")

"""
Intake of raw per-record CSV files and per-group AUC tables: parse, validate,
and map level labels onto the attribute lattice.
"""
from __future__ import annotations

import csv
import io
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import DataError
from model.lattice import AttributeSpace, group_index
from model.metrics import auc_summary
from model.summary import RecordBatch, TaskSummary
from validators import (
    AUC_COLUMN,
    NEGATIVES_COLUMN,
    POSITIVES_COLUMN,
    TASK_COLUMN,
    VALUE_COLUMN,
    AucTableValidator,
    CsvTable,
    RecordValidator,
)

AUC_RESERVED = (AUC_COLUMN, NEGATIVES_COLUMN, POSITIVES_COLUMN, TASK_COLUMN)

logger = logging.getLogger(__name__)


def parse_table(text: str) -> CsvTable:
    if "\x00" in text:
        raise DataError("input contains NUL bytes")
    reader = csv.reader(io.StringIO(text))
    header: Optional[List[str]] = None
    rows: List[Tuple[int, List[str]]] = []
    for fields in reader:
        line = reader.line_num
        if not fields or all(f.strip() == "" for f in fields):
            continue
        fields = [f.strip() for f in fields]
        if header is None:
            header = fields
        else:
            rows.append((line, fields))
    if header is None:
        raise DataError("input is empty")
    return CsvTable(header, rows)


def infer_attributes(table: CsvTable, reserved: Sequence[str] = (VALUE_COLUMN, TASK_COLUMN)) -> List[str]:
    """Every column except the reserved ones, in header order."""
    return [c for c in table.header if c not in reserved]


def _infer_space(table: CsvTable, attributes: Sequence[str]) -> AttributeSpace:
    spec = []
    for name in attributes:
        col = table.column(name)
        spec.append((name, sorted({fields[col] for _, fields in table.rows})))
    return AttributeSpace.from_levels(spec)


def records_from_text(
    text: str,
    space: Optional[AttributeSpace] = None,
    attributes: Optional[Sequence[str]] = None,
) -> Tuple[RecordBatch, AttributeSpace]:
    """Parse CSV text into a RecordBatch.

    With a space, labels must be among its levels; without one the levels of
    each attribute column are inferred from the data and sorted.
    """
    table = parse_table(text)
    if space is not None:
        names = space.names
        levels = {a.name: a.levels for a in space.attributes}
    else:
        names = list(attributes) if attributes is not None else infer_attributes(table)
        levels = None
    result = RecordValidator(names, levels).validate(table)
    if not result.is_ok:
        raise DataError("invalid record file", result.as_lines())
    if space is None:
        space = _infer_space(table, names)
        logger.info("Inferred %d attributes with %d groups", space.k, space.d)

    lookup = space.level_index()
    cols = [table.column(n) for n in names]
    classes = np.empty((len(table.rows), space.k), dtype=np.int64)
    values = np.empty(len(table.rows))
    vcol = table.column(VALUE_COLUMN)
    for r, (_, fields) in enumerate(table.rows):
        for a, c in enumerate(cols):
            classes[r, a] = lookup[a][fields[c]]
        values[r] = float(fields[vcol])
    tasks = None
    if TASK_COLUMN in table.header:
        tcol = table.column(TASK_COLUMN)
        tasks = np.array([fields[tcol] for _, fields in table.rows], dtype=str)
    return RecordBatch(classes, values, tasks), space


def _read_text(path: str | Path) -> str:
    path = Path(path)
    try:
        return path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise DataError(f"cannot read {path}: {e}") from e


def read_records(
    path: str | Path,
    space: Optional[AttributeSpace] = None,
    attributes: Optional[Sequence[str]] = None,
) -> Tuple[RecordBatch, AttributeSpace]:
    return records_from_text(_read_text(path), space, attributes)


def auc_from_text(
    text: str,
    space: Optional[AttributeSpace] = None,
    attributes: Optional[Sequence[str]] = None,
) -> Tuple[List[TaskSummary], AttributeSpace]:
    """Per-group AUC table (attribute columns, auc, n0, n1, optional task) to summaries.

    Groups without a row, or with a single class, are missing in that task.
    """
    table = parse_table(text)
    if space is not None:
        names = space.names
        levels = {a.name: a.levels for a in space.attributes}
    else:
        names = list(attributes) if attributes is not None else infer_attributes(table, AUC_RESERVED)
        levels = None
    result = AucTableValidator(names, levels).validate(table)
    if not result.is_ok:
        raise DataError("invalid AUC table", result.as_lines())
    if space is None:
        space = _infer_space(table, names)

    lookup = space.level_index()
    cols = [table.column(n) for n in names]
    acol, ncol, pcol = (table.column(c) for c in (AUC_COLUMN, NEGATIVES_COLUMN, POSITIVES_COLUMN))
    tcol = table.column(TASK_COLUMN) if TASK_COLUMN in table.header else None
    per_task: Dict[str, Tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
    for _, fields in table.rows:
        tid = fields[tcol] if tcol is not None else "0"
        auc, n0, n1 = per_task.setdefault(tid, (np.zeros(space.d), np.zeros(space.d, np.int64), np.zeros(space.d, np.int64)))
        g = group_index(space, tuple(lookup[a][fields[c]] for a, c in enumerate(cols))) - 1
        auc[g] = float(fields[acol])
        n0[g] = int(fields[ncol])
        n1[g] = int(fields[pcol])
    summaries = [auc_summary(auc, n0, n1, space, tid) for tid, (auc, n0, n1) in per_task.items()]
    missing = sum(int(np.count_nonzero(s.missing)) for s in summaries)
    logger.info("Read AUC for %d task(s); %d group entries missing or single-class", len(summaries), missing)
    return summaries, space


def read_auc_table(
    path: str | Path,
    space: Optional[AttributeSpace] = None,
    attributes: Optional[Sequence[str]] = None,
) -> Tuple[List[TaskSummary], AttributeSpace]:
    return auc_from_text(_read_text(path), space, attributes)


def records_to_text(batch: RecordBatch, space: AttributeSpace) -> str:
    """Inverse of records_from_text, used by the simulator record mode."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    header = list(space.names) + [VALUE_COLUMN]
    if batch.tasks is not None:
        header.append(TASK_COLUMN)
    writer.writerow(header)
    for r in range(len(batch)):
        row = [space.attributes[a].levels[batch.classes[r, a] - 1] for a in range(space.k)]
        row.append(repr(float(batch.values[r])))
        if batch.tasks is not None:
            row.append(str(batch.tasks[r]))
        writer.writerow(row)
    return out.getvalue()

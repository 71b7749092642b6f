"""
JSON/YAML documents exchanged by the CLI: attribute spaces, summaries and
estimates. Every document read from disk is checked against its bundled schema.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml

from baselines.estimators import EstimatorOutput
from errors import DataError, DomainError
from model.lattice import AttributeSpace
from model.summary import TaskSummary
from optimizer.fit import FitResult
from prior.structure import subset_labels
from schemas.loader import SCHEMA_DIR, require_valid, validate_document

SPACE_SCHEMA = SCHEMA_DIR.parent / "common" / "Space_v1.json"


def load_document(path: str | Path) -> Any:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise DataError(f"cannot read {path}: {e}") from e
    try:
        if path.suffix.lower() in {".yaml", ".yml"}:
            return yaml.safe_load(text)
        return json.loads(text)
    except (yaml.YAMLError, json.JSONDecodeError) as e:
        raise DataError(f"cannot parse {path}: {e}") from e


def dumps_document(doc: Any) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def space_from_document(doc: Any) -> AttributeSpace:
    errors = validate_document(doc, str(SPACE_SCHEMA))
    if errors:
        raise DataError("attribute space does not match Space_v1", errors)
    return AttributeSpace.from_levels([(a["name"], a["levels"]) for a in doc["attributes"]])


def load_space(path: str | Path) -> AttributeSpace:
    return space_from_document(load_document(path))


def summaries_to_document(summaries: Sequence[TaskSummary]) -> Dict[str, Any]:
    if not summaries:
        raise DomainError("no summaries to serialize")
    space = summaries[0].space
    shared = summaries[0].sigma2
    tasks = []
    for s in summaries:
        entry: Dict[str, Any] = {"id": s.task_id, "y": s.y.tolist(), "n": s.n.tolist()}
        if s.group_var is not None:
            entry["group_var"] = s.group_var.tolist()
        if s.sigma2 != shared:
            entry["sigma2"] = s.sigma2
        tasks.append(entry)
    return {**space.to_dict(), "tasks": tasks, "sigma2": shared}


def summaries_from_document(doc: Any) -> Tuple[AttributeSpace, List[TaskSummary]]:
    require_valid(doc, "Summary_v1", "summary document")
    space = space_from_document({"attributes": doc["attributes"]})
    out = []
    for t in doc["tasks"]:
        if len(t["y"]) != space.d or len(t["n"]) != space.d:
            raise DataError(f"task {t['id']}: y and n must have {space.d} entries")
        out.append(
            TaskSummary(
                np.array(t["y"], dtype=float),
                np.array(t["n"], dtype=np.int64),
                float(t.get("sigma2", doc["sigma2"])),
                space,
                str(t["id"]),
                np.array(t["group_var"], dtype=float) if "group_var" in t else None,
            )
        )
    return space, out


def load_summaries(path: str | Path) -> Tuple[AttributeSpace, List[TaskSummary]]:
    return summaries_from_document(load_document(path))


def _fit_fields(fit: FitResult) -> Dict[str, Any]:
    return {
        "tau2_hat": fit.tau2.tolist(),
        "objective": fit.objective,
        "status": fit.status,
        "iterations": fit.iterations,
    }


def estimates_to_document(
    method: str,
    space: AttributeSpace,
    estimates: Sequence[EstimatorOutput],
    fits: Sequence[FitResult] = (),
    oracle_discrepancy: Optional[float] = None,
) -> Dict[str, Any]:
    doc: Dict[str, Any] = {
        "method": method,
        "tasks": [
            {"id": e.task_id, "mu_hat": e.mu_hat.tolist(), "fallback": e.fallback.tolist()} for e in estimates
        ],
    }
    if fits:
        doc["subsets"] = subset_labels(space)
    if method == "mt-suremap" and fits:
        # one joint fit shared by all tasks
        fit = fits[0]
        doc.update(_fit_fields(fit))
        if fit.upsilon2 is not None:
            doc["upsilon2_hat"] = fit.upsilon2.tolist()
        doc["theta_hat"] = fit.theta.tolist()
    else:
        for entry, fit in zip(doc["tasks"], fits):
            entry.update(_fit_fields(fit))
    if oracle_discrepancy is not None:
        doc["oracle_discrepancy"] = float(oracle_discrepancy)
    require_valid(doc, "Estimates_v1", "estimates document")
    return doc

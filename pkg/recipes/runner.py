"""
Recipe loader and runner for JSON/YAML experiment workflows: an ordered list
of benchmark, simulate and ablate steps, each writing its own output file.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from cli.ablation import AblationSpec
from cli.benchmark import BenchmarkSpec
from cli.commands import cmd_ablation, cmd_benchmark, cmd_simulate
from cli.reports import emit
from cli.simulate import SyntheticSpec
from errors import DataError, SureMapError
from optimizer.fit import FitConfig
from schemas.loader import require_valid
from settings import DEFAULT_SETTINGS, Settings

logger = logging.getLogger(__name__)

FIT_KEYS = ("max_iterations", "gradient_tolerance", "memory_pairs", "max_order", "variant", "nonneg_center", "multistart")


@dataclass
class StepResult:
    index: int
    action: str
    ok: bool
    message: str
    outputs: List[str]


def _load_recipe_file(path: Path) -> Dict[str, Any]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
        if path.suffix.lower() in {".yaml", ".yml"}:
            data = yaml.safe_load(text)
        else:
            data = json.loads(text)
    except (OSError, yaml.YAMLError, json.JSONDecodeError) as e:
        raise DataError(f"Cannot load recipe {path}: {e}") from e
    if not isinstance(data, dict):
        raise DataError("Recipe must be a JSON/YAML object at top level")
    require_valid(data, "Recipe_v1", "recipe")
    return data


def _path(base: Path, value: Optional[str]) -> Optional[Path]:
    if value is None:
        return None
    p = Path(value)
    return p if p.is_absolute() else base / p


def _fit_config(step: Dict[str, Any], settings: Settings) -> FitConfig:
    options = {k: step[k] for k in FIT_KEYS if k in step}
    return FitConfig(condition_threshold=settings.condition_threshold, **options)


def _run_step(step: Dict[str, Any], base: Path, seed: int, settings: Settings, threads: int) -> str:
    action = step["action"]
    fmt = step.get("format", "json")
    if action == "benchmark":
        spec = BenchmarkSpec(
            methods=tuple(step["methods"]),
            rates=tuple(step["rates"]),
            trials=step.get("trials"),
            seed=int(step.get("seed", seed)),
            truth_threshold=int(step.get("truth_threshold", settings.truth_threshold)),
            metric=step.get("metric", "mae"),
            fallback_pooled=bool(step.get("fallback_pooled", False)),
        )
        return cmd_benchmark(
            _path(base, step["input"]), spec, _fit_config(step, settings), settings,
            _path(base, step.get("space")), step.get("attributes"), fmt, threads,
        )
    if action == "simulate":
        doc = dict(step["spec"])
        doc.setdefault("seed", seed)
        require_valid(doc, "SyntheticSpec_v1", "synthetic spec")
        return cmd_simulate(SyntheticSpec.from_document(doc), bool(doc.get("records", False)))
    if action == "ablate":
        synthetic = None
        if "synthetic" in step:
            doc = dict(step["synthetic"])
            doc.setdefault("seed", seed)
            require_valid(doc, "SyntheticSpec_v1", "synthetic spec")
            synthetic = SyntheticSpec.from_document(doc)
        spec = AblationSpec(
            sweep=step["sweep"],
            values=tuple(float(v) for v in step["values"]),
            methods=tuple(step["methods"]),
            trials=int(step.get("trials", 40)),
            seed=int(step.get("seed", seed)),
            metric=step.get("metric", "mae"),
            rate=float(step.get("rate", 0.1)),
            truth_threshold=int(step.get("truth_threshold", settings.truth_threshold)),
        )
        return cmd_ablation(
            spec, _fit_config(step, settings), settings, _path(base, step.get("input")), synthetic,
            _path(base, step.get("space")), step.get("attributes"), fmt, threads,
        )
    raise DataError(f"Unknown action '{action}'")


def run_recipe_file(path: Path, settings: Settings = DEFAULT_SETTINGS, threads: int = 1) -> List[StepResult]:
    """Run every step in order; a failing step is reported and the next one still runs."""
    path = Path(path)
    recipe = _load_recipe_file(path)
    base = path.resolve().parent
    seed = int(recipe.get("seed", 0))
    results: List[StepResult] = []
    for idx, step in enumerate(recipe["steps"]):
        action = step["action"]
        try:
            text = _run_step(step, base, seed, settings, threads)
            out = _path(base, step.get("output"))
            emit(text, out)
            outputs = [str(out)] if out is not None else []
            results.append(StepResult(idx, action, True, "ok", outputs))
            logger.info("recipe step %d (%s) ok", idx, action)
        except (SureMapError, KeyError, TypeError, ValueError, OSError) as e:
            message = f"missing field {e}" if isinstance(e, KeyError) else str(e)
            logger.warning("recipe step %d (%s) failed: %s", idx, action, message)
            results.append(StepResult(idx, action, False, message, []))
    return results

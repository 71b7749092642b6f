from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from cli.ablation import SWEEPS, AblationSpec
from cli.benchmark import BenchmarkSpec
from cli.commands import FORMATS, cmd_ablation, cmd_benchmark, cmd_estimate, cmd_simulate, cmd_summarize
from cli.reports import emit
from cli.simulate import SyntheticSpec
from dataio.codec import load_document
from errors import SureMapError
from metadata.manifest import create_for_run, write_sidecars
from methods.registry import METHOD_NAMES
from model.metrics import METRICS
from optimizer.fit import FitConfig
from recipes.runner import run_recipe_file
from schemas.loader import require_valid
from settings import Settings, load_settings

logger = logging.getLogger("suremap")

TUNABLE = ("suremap", "mt-suremap")


def _csv_list(text: str) -> List[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _float_list(text: str) -> List[float]:
    try:
        return [float(t) for t in _csv_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> List[int]:
    try:
        return [int(t) for t in _csv_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=None, help="random seed (unsigned 64-bit)")
    common.add_argument("--output", "-o", default=None, help="write the result here instead of stdout")
    common.add_argument("--format", choices=FORMATS, default="json")
    common.add_argument("--settings", default=None, help="YAML/JSON settings file")
    common.add_argument("--threads", type=int, default=None, help="worker threads for trials")
    common.add_argument("--manifest", action="store_true", help="write <output>.run.json/.run.yaml sidecars")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")
    return common


def _add_space_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--space", default=None, help="YAML/JSON attribute space with level labels")
    p.add_argument("--attributes", type=_csv_list, default=None, help="attribute columns; levels inferred")


def _add_fit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--gtol", type=float, default=None)
    p.add_argument("--max-order", type=int, default=None)
    p.add_argument("--variant", choices=("metamap", "suresolve"), default=None)
    p.add_argument("--allow-negative-center", action="store_true")
    p.add_argument("--multistart", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="suremap", description="Disaggregated evaluation with SureMap")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("summarize", parents=[common], help="summarize a raw record CSV")
    p.add_argument("input")
    p.add_argument("--auc", action="store_true", help="input is a per-group AUC table with n0 and n1 columns")
    _add_space_flags(p)

    p = sub.add_parser("estimate", parents=[common], help="run one estimator on a summary")
    p.add_argument("summary")
    p.add_argument("--method", required=True, choices=METHOD_NAMES)
    p.add_argument("--verify-oracle", action="store_true")
    p.add_argument("--fallback-pooled", action="store_true")
    _add_fit_flags(p)

    p = sub.add_parser("benchmark", parents=[common], help="subsampling benchmark on raw records")
    p.add_argument("input")
    p.add_argument("--config", default=None, help="YAML/JSON benchmark spec")
    p.add_argument("--methods", type=_csv_list, default=None)
    p.add_argument("--rates", type=_float_list, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--truth-threshold", type=int, default=None)
    p.add_argument("--metric", choices=tuple(METRICS), default=None)
    p.add_argument("--fallback-pooled", action="store_true")
    _add_space_flags(p)
    _add_fit_flags(p)

    p = sub.add_parser("simulate", parents=[common], help="draw synthetic hierarchical data")
    p.add_argument("--config", default=None, help="YAML/JSON synthetic spec")
    p.add_argument("--level-counts", type=_int_list, default=None)
    p.add_argument("--tasks", type=int, default=None)
    p.add_argument("--count-range", type=_int_list, default=None)
    p.add_argument("--tau2", type=_float_list, default=None)
    p.add_argument("--upsilon2", type=_float_list, default=None)
    p.add_argument("--sigma2", type=float, default=None)
    p.add_argument("--records", action="store_true", help="emit per-row CSV records instead of summaries")

    p = sub.add_parser("ablate", parents=[common], help="sweep max order, task count or task similarity")
    p.add_argument("input", nargs="?", default=None)
    p.add_argument("--synthetic", default=None, help="YAML/JSON synthetic spec instead of a record file")
    p.add_argument("--sweep", required=True, choices=SWEEPS)
    p.add_argument("--values", required=True, type=_float_list)
    p.add_argument("--methods", type=_csv_list, default=["naive", "mt-global", "mt-suremap"])
    p.add_argument("--trials", type=int, default=40)
    p.add_argument("--metric", choices=tuple(METRICS), default="mae")
    p.add_argument("--rate", type=float, default=0.1)
    p.add_argument("--truth-threshold", type=int, default=None)
    p.add_argument("--fallback-pooled", action="store_true")
    _add_space_flags(p)
    _add_fit_flags(p)

    p = sub.add_parser("run-recipe", parents=[common], help="run a YAML/JSON recipe of steps")
    p.add_argument("recipe")
    return parser


def _fit_config(args: argparse.Namespace, settings: Settings) -> FitConfig:
    options: Dict[str, Any] = {"condition_threshold": settings.condition_threshold}
    for flag, key in (("max_iter", "max_iterations"), ("gtol", "gradient_tolerance"), ("max_order", "max_order"), ("variant", "variant")):
        if getattr(args, flag, None) is not None:
            options[key] = getattr(args, flag)
    if getattr(args, "allow_negative_center", False):
        options["nonneg_center"] = False
    if getattr(args, "multistart", False):
        options["multistart"] = True
    return FitConfig(**options)


def _check_usage(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    if getattr(args, "space", None) and getattr(args, "attributes", None):
        parser.error("--space and --attributes are mutually exclusive")
    if args.command == "estimate":
        if args.variant is not None and args.method != "mt-suremap":
            parser.error(f"--variant only applies to mt-suremap, not {args.method}")
        tuning = args.max_iter, args.gtol, args.max_order
        if args.method not in TUNABLE and (any(v is not None for v in tuning) or args.multistart):
            parser.error(f"fit options do not apply to {args.method}")
        if args.allow_negative_center and args.method != "mt-suremap":
            parser.error("--allow-negative-center only applies to mt-suremap")
        if args.verify_oracle and (args.method not in TUNABLE or args.variant == "suresolve"):
            parser.error("--verify-oracle needs suremap or mt-suremap with the metamap variant")
    if args.command == "ablate":
        if (args.input is None) == (args.synthetic is None):
            parser.error("ablate needs either a record file or --synthetic")
        if args.sweep == "similarity" and any(not 0.0 <= v <= 1.0 for v in args.values):
            parser.error("similarity values must lie in [0, 1]")
    if getattr(args, "threads", None) is not None and args.threads < 1:
        parser.error("--threads must be positive")
    if args.manifest and args.output is None:
        parser.error("--manifest needs --output")


def _benchmark_spec(args: argparse.Namespace, settings: Settings) -> BenchmarkSpec:
    doc: Dict[str, Any] = {}
    if args.config:
        doc = load_document(args.config) or {}
        require_valid(doc, "BenchmarkSpec_v1", "benchmark spec")
    overrides = {
        "methods": args.methods,
        "rates": args.rates,
        "trials": args.trials,
        "seed": args.seed,
        "truth_threshold": args.truth_threshold,
        "metric": args.metric,
    }
    doc.update({k: v for k, v in overrides.items() if v is not None})
    doc.setdefault("truth_threshold", settings.truth_threshold)
    if args.fallback_pooled:
        doc["fallback_pooled"] = True
    return BenchmarkSpec.from_document(doc)


def _synthetic_spec(args: argparse.Namespace) -> SyntheticSpec:
    doc: Dict[str, Any] = {}
    if args.config:
        doc = load_document(args.config) or {}
    overrides = {
        "level_counts": args.level_counts,
        "tasks": args.tasks,
        "count_range": args.count_range,
        "tau2": args.tau2,
        "upsilon2": args.upsilon2,
        "sigma2": args.sigma2,
        "seed": args.seed,
    }
    doc.update({k: v for k, v in overrides.items() if v is not None})
    if args.records:
        doc["records"] = True
    require_valid(doc, "SyntheticSpec_v1", "synthetic spec")
    return SyntheticSpec.from_document(doc)


def _run(args: argparse.Namespace, settings: Settings) -> tuple[str, List[Path]]:
    threads = args.threads or settings.threads
    space_args = (getattr(args, "space", None), getattr(args, "attributes", None))
    if args.command == "summarize":
        return cmd_summarize(args.input, *space_args, settings=settings, auc=args.auc), [Path(args.input)]
    if args.command == "estimate":
        text = cmd_estimate(args.summary, args.method, _fit_config(args, settings), settings, args.verify_oracle, args.fallback_pooled)
        return text, [Path(args.summary)]
    if args.command == "benchmark":
        spec = _benchmark_spec(args, settings)
        text = cmd_benchmark(args.input, spec, _fit_config(args, settings), settings, *space_args, args.format, threads)
        return text, [Path(args.input)]
    if args.command == "simulate":
        spec = _synthetic_spec(args)
        return cmd_simulate(spec, args.records), []
    if args.command == "ablate":
        synthetic = None
        if args.synthetic:
            doc = load_document(args.synthetic) or {}
            if args.seed is not None:
                doc["seed"] = args.seed
            require_valid(doc, "SyntheticSpec_v1", "synthetic spec")
            synthetic = SyntheticSpec.from_document(doc)
        spec = AblationSpec(
            sweep=args.sweep,
            values=tuple(args.values),
            methods=tuple(args.methods),
            trials=args.trials,
            seed=args.seed or 0,
            metric=args.metric,
            rate=args.rate,
            truth_threshold=args.truth_threshold or settings.truth_threshold,
        )
        text = cmd_ablation(
            spec, _fit_config(args, settings), settings, args.input, synthetic, *space_args,
            args.format, threads, args.fallback_pooled,
        )
        return text, [Path(p) for p in (args.input, args.synthetic) if p]
    if args.command == "run-recipe":
        results = run_recipe_file(Path(args.recipe), settings, threads)
        lines = [f"[{'OK' if r.ok else 'FAILED'}] step {r.index} {r.action}: {r.message}" for r in results]
        if not all(r.ok for r in results):
            raise SureMapError("recipe finished with failed steps:\n" + "\n".join(lines))
        return "\n".join(lines) + "\n", [Path(args.recipe)]
    raise AssertionError(args.command)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _check_usage(parser, args)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        settings = load_settings(args.settings)
        text, inputs = _run(args, settings)
        emit(text, args.output)
        if args.manifest:
            arguments = {k: v for k, v in vars(args).items() if k not in ("verbose", "quiet")}
            manifest = create_for_run(Path(args.output), args.command, arguments, args.seed, inputs)
            write_sidecars(manifest, Path(args.output))
    except SureMapError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line front end: validate data, run experiment grids, compare runs.

Exit codes are a stable contract: 0 success, 2 data/schema problems (also
used by argparse for usage errors), 3 when any experiment in a run failed
(partial reports are still written), 4 for statistics problems.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dataset, pipeline
from . import eval as evaluation
from .errors import (
    AllZeroDifferences,
    ExperimentError,
    SleepScreenError,
)

TARGETS = ("baseline", "pipeline1", "pipeline2", "ablation1", "ablation2", "all")
FORMATS = ("json", "csv", "md")
MD_HEADER = "| Model | Configuration | Accuracy | F1 | Recall | Precision |"
MD_RULE = "| --- | --- | --- | --- | --- | --- |"

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_EXPERIMENT = 3
EXIT_STATS = 4


@dataclass
class CliConfig:
    data: str = "data/sleep_synth.csv"
    seeds: tuple = (0,)
    out: str = "reports"
    formats: tuple = ("json", "md")
    cv: bool | None = None  # None = per-target default (on except ablations)


def _parse_formats(text: str) -> tuple:
    formats = tuple(part.strip() for part in text.split(",") if part.strip())
    for fmt in formats:
        if fmt not in FORMATS:
            raise ValueError(f"unknown format {fmt!r}; choose from {FORMATS}")
    if not formats:
        raise ValueError("need at least one output format")
    return formats


def _parse_seeds(text: str) -> tuple:
    try:
        seeds = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ValueError(f"seeds must be integers, got {text!r}") from None
    if not seeds:
        raise ValueError("need at least one seed")
    return seeds


def _load_cli_config(path: str) -> dict:
    """Key=value overrides, one per line; # starts a comment."""
    allowed = {"data", "seed", "seeds", "out", "format", "cv"}
    values = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, rest = line.partition("=")
        key, rest = key.strip(), rest.strip()
        if not eq or key not in allowed:
            raise ValueError(f"{path}:{lineno}: expected one of {sorted(allowed)} = value")
        values[key] = rest
    return values


def _merge_config(args) -> CliConfig:
    cfg = CliConfig()
    file_values = _load_cli_config(args.config) if args.config else {}
    if "data" in file_values:
        cfg.data = file_values["data"]
    if "out" in file_values:
        cfg.out = file_values["out"]
    if "format" in file_values:
        cfg.formats = _parse_formats(file_values["format"])
    if "seeds" in file_values:
        cfg.seeds = _parse_seeds(file_values["seeds"])
    elif "seed" in file_values:
        cfg.seeds = (int(file_values["seed"]),)
    if "cv" in file_values:
        cfg.cv = file_values["cv"].lower() in ("true", "1", "yes", "on")
    if args.data is not None:
        cfg.data = args.data
    if args.out is not None:
        cfg.out = args.out
    if args.format is not None:
        cfg.formats = _parse_formats(args.format)
    if args.seeds is not None:
        cfg.seeds = _parse_seeds(args.seeds)
    elif args.seed is not None:
        cfg.seeds = (args.seed,)
    if args.cv is not None:
        cfg.cv = args.cv
    return cfg


# -- validate ---------------------------------------------------------------------

def cmd_validate(path: str) -> int:
    try:
        table = dataset.load_encoded(path)
    except (SleepScreenError, OSError) as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    counts = table.class_counts()
    ordered = sorted(counts.items(), key=lambda item: -item[1])
    summary = ", ".join(f"{dataset.TARGET_NAMES[code]}={count}" for code, count in ordered)
    print(f"{table.n_rows} rows; classes {summary}")
    print("columns:")
    for name in dataset.EXPECTED_HEADER:
        print(f"  [ok] {name}")
    return EXIT_OK


# -- run --------------------------------------------------------------------------

def _median_metrics(runs) -> dict:
    return {
        metric: float(np.median([getattr(r.test_report, metric) for r in runs]))
        for metric in ("accuracy", "f1", "recall", "precision")
    }


def _pct(value: float) -> str:
    return f"{100 * value:.3f}%"


def _model_envelope(spec, runs, seeds) -> dict:
    return {
        "name": spec.name,
        "model": spec.model_label,
        "configuration": spec.configuration,
        "seeds": list(seeds),
        "median_metrics": _median_metrics(runs),
        "runs": [r.to_dict() for r in runs],
    }


def _write_model_files(outdir: Path, spec, runs, seeds, formats) -> None:
    envelope = _model_envelope(spec, runs, seeds)
    config_line = json.dumps(
        {"config": runs[0].config, "seeds": list(seeds)}, sort_keys=True)
    base = outdir / spec.name
    if "json" in formats:
        base.with_suffix(".json").write_text(
            json.dumps(envelope, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    if "csv" in formats:
        lines = [f"# {config_line}"]
        lines.append("model,configuration,seed,accuracy,f1,recall,precision,"
                     "train_seconds,test_ms_total")
        for seed, run in zip(seeds, runs):
            m = run.test_report
            lines.append(",".join([
                f'"{spec.model_label}"', f'"{spec.configuration}"', str(seed),
                f"{m.accuracy:.6f}", f"{m.f1:.6f}", f"{m.recall:.6f}",
                f"{m.precision:.6f}", f"{run.timing.train_seconds:.6f}",
                f"{run.timing.test_ms_total:.6f}"]))
        med = envelope["median_metrics"]
        lines.append(",".join([
            f'"{spec.model_label}"', f'"{spec.configuration}"', "median",
            f"{med['accuracy']:.6f}", f"{med['f1']:.6f}", f"{med['recall']:.6f}",
            f"{med['precision']:.6f}", "", ""]))
        base.with_suffix(".csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    if "md" in formats:
        lines = [f"<!-- {config_line} -->", MD_HEADER, MD_RULE]
        lines.extend(run.markdown_row() for run in runs)
        base.with_suffix(".md").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_summary_files(outdir: Path, group: str, cfg: CliConfig, rows, formats) -> None:
    run_config = {
        "target": group,
        "data": cfg.data,
        "seeds": list(cfg.seeds),
        "formats": list(formats),
    }
    config_line = json.dumps(run_config, sort_keys=True)
    base = outdir / "summary"
    if "json" in formats:
        base.with_suffix(".json").write_text(
            json.dumps({"config": run_config, "rows": rows}, sort_keys=True, indent=2) + "\n",
            encoding="utf-8")
    if "csv" in formats:
        lines = [f"# {config_line}",
                 "model,configuration,accuracy,f1,recall,precision"]
        for row in rows:
            lines.append(",".join([
                f'"{row["model"]}"', f'"{row["configuration"]}"',
                f"{row['accuracy']:.6f}", f"{row['f1']:.6f}",
                f"{row['recall']:.6f}", f"{row['precision']:.6f}"]))
        base.with_suffix(".csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    if "md" in formats:
        lines = [f"<!-- {config_line} -->", MD_HEADER, MD_RULE]
        for row in rows:
            cells = [row["model"], row["configuration"]]
            cells += [_pct(row[k]) for k in ("accuracy", "f1", "recall", "precision")]
            lines.append("| " + " | ".join(cells) + " |")
        base.with_suffix(".md").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _run_group(group: str, table, cfg: CliConfig) -> list:
    """Run one spec group; returns the names of failed specs."""
    cv = cfg.cv if cfg.cv is not None else not group.startswith("ablation")
    outdir = Path(cfg.out) / group
    outdir.mkdir(parents=True, exist_ok=True)
    failures = []
    rows = []
    for spec in pipeline.specs_for_group(group):
        try:
            runs = []
            for seed in cfg.seeds:
                train, test = dataset.stratified_split(table, 0.8, seed=seed)
                runs.append(pipeline.run_experiment(spec, train, test, seed, cv=cv))
        except ExperimentError as exc:
            failures.append(spec.name)
            partial = {"name": spec.name, "error": str(exc),
                       "partial": exc.partial_report}
            (outdir / f"{spec.name}.json").write_text(
                json.dumps(partial, sort_keys=True, indent=2) + "\n", encoding="utf-8")
            print(f"experiment failed: {spec.name}: {exc}", file=sys.stderr)
            continue
        _write_model_files(outdir, spec, runs, cfg.seeds, cfg.formats)
        medians = _median_metrics(runs)
        rows.append({"model": spec.model_label,
                     "configuration": spec.configuration, **medians})
        print(f"{group}/{spec.name}: accuracy {_pct(medians['accuracy'])}")
    _write_summary_files(outdir, group, cfg, rows, cfg.formats)
    if group == "baseline":
        print("note: XGBoost and LightGBM run through the generic gradient-boosting "
              "family; see the pipeline proxy rows.")
    return failures


def cmd_run(target: str, cfg: CliConfig) -> int:
    try:
        table = dataset.load_encoded(cfg.data)
    except (SleepScreenError, OSError) as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    groups = TARGETS[:-1] if target == "all" else (target,)
    failures = []
    for group in groups:
        failures.extend(_run_group(group, table, cfg))
    if failures:
        print(f"{len(failures)} experiment(s) failed: {', '.join(failures)}",
              file=sys.stderr)
        return EXIT_EXPERIMENT
    return EXIT_OK


# -- stats ------------------------------------------------------------------------

def _load_report_runs(path: str) -> dict:
    blob = json.loads(Path(path).read_text(encoding="utf-8"))
    runs = blob.get("runs", [])
    by_seed = {}
    for run in runs:
        seed = run.get("seeds", {}).get("experiment")
        if run.get("cv") and seed is not None:
            by_seed[seed] = run
    return by_seed


def _plan_signature(run: dict):
    cv = run["cv"]
    return (cv["k"], cv["seed"], cv["n_rows"], tuple(cv["fold_sizes"]))


def cmd_stats(report_a: str, report_b: str, alternative: str,
              alpha: float = 0.05) -> int:
    try:
        runs_a = _load_report_runs(report_a)
        runs_b = _load_report_runs(report_b)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"stats error: cannot read reports: {exc}", file=sys.stderr)
        return EXIT_STATS
    common = [seed for seed in runs_a if seed in runs_b]
    if not common:
        print("stats error: reports share no seed with a CV trace "
              "(re-run without --no-cv)", file=sys.stderr)
        return EXIT_STATS
    seed = common[0]
    run_a, run_b = runs_a[seed], runs_b[seed]
    if _plan_signature(run_a) != _plan_signature(run_b):
        print("stats error: fold plans differ; accuracies are not paired",
              file=sys.stderr)
        return EXIT_STATS
    acc_a = [m["accuracy"] for m in run_a["cv"]["fold_metrics"]]
    acc_b = [m["accuracy"] for m in run_b["cv"]["fold_metrics"]]
    try:
        result = evaluation.wilcoxon(acc_a, acc_b, alternative)
    except AllZeroDifferences:
        print("stats error: every paired fold accuracy is identical "
              "(are these the same report?)", file=sys.stderr)
        return EXIT_STATS
    print(f"seed {seed}: {run_a['name']} vs {run_b['name']} ({alternative})")
    print(f"W = {result.statistic_reported}  R+ = {result.r_plus}  "
          f"R- = {result.r_minus}  n = {result.n_effective}  method = {result.method}")
    print(f"p-value = {result.p_value:.10g}")
    if result.p_value < alpha:
        print(f"significant at {alpha:g}")
    else:
        print(f"not significant at {alpha:g}")
    return EXIT_OK


# -- entry point --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sleepscreen",
        description="Sleep-disorder screening experiment harness.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check a survey CSV against the schema")
    p_validate.add_argument("path")

    p_run = sub.add_parser("run", help="run an experiment grid and write reports")
    p_run.add_argument("target", choices=TARGETS)
    p_run.add_argument("--data", default=None, help="survey CSV path")
    p_run.add_argument("--seed", type=int, default=None, help="single experiment seed")
    p_run.add_argument("--seeds", default=None,
                       help="comma-separated seeds; reports medians across them")
    p_run.add_argument("--out", default=None, help="output directory (default: reports)")
    p_run.add_argument("--format", default=None,
                       help=f"comma-separated subset of {','.join(FORMATS)}")
    p_run.add_argument("--config", default=None, help="key=value overrides file")
    p_run.add_argument("--cv", dest="cv", action="store_true", default=None,
                       help="force per-fold CV traces on")
    p_run.add_argument("--no-cv", dest="cv", action="store_false",
                       help="skip CV traces (faster; stats needs them)")

    p_stats = sub.add_parser("stats", help="signed-rank test between two run reports")
    p_stats.add_argument("report_a")
    p_stats.add_argument("report_b")
    p_stats.add_argument("--alternative", choices=evaluation.ALTERNATIVES,
                         default="greater")
    p_stats.add_argument("--alpha", type=float, default=0.05)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        return cmd_validate(args.path)
    if args.command == "run":
        try:
            cfg = _merge_config(args)
        except (ValueError, OSError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_SCHEMA
        return cmd_run(args.target, cfg)
    if args.command == "stats":
        return cmd_stats(args.report_a, args.report_b, args.alternative, args.alpha)
    raise AssertionError(f"unhandled command {args.command!r}")


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

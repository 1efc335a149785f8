"""Command-line entry point: ``balmix <subcommand> ...``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from .data import generate_longtail, load_csv, save_csv
from .errors import ConfigError, IngestionError, ParameterError
from .harness import (
    METHODS,
    ExperimentConfig,
    RunSpec,
    emit_beta_pdf,
    emit_class_histogram,
    execute_run,
    load_dataset,
    load_records,
    prepare_output,
    run_experiment,
    write_summary,
)

log = logging.getLogger("balmix")


def _load_config(args, **overrides) -> ExperimentConfig:
    raw = {}
    if args.config:
        raw = ExperimentConfig.load(args.config).to_dict()
    if getattr(args, "seed", None) is not None:
        raw["seeds"] = [args.seed]
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(raw)


def _write_or_print(text: str, out, default_name: str) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    if path.suffix != ".csv":
        path.mkdir(parents=True, exist_ok=True)
        path = path / default_name
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    log.info("wrote %s", path)


def cmd_gen_data(args) -> None:
    ds = generate_longtail(args.K, args.dim, args.n_max, args.ratio, args.noise, args.seed or 0,
                           radius=args.radius)
    out = Path(args.out)
    if out.suffix != ".csv":
        out.mkdir(parents=True, exist_ok=True)
        out = out / "data.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    save_csv(ds, out)
    log.info("wrote %s (N=%d, counts=%s)", out, ds.N, ds.class_counts.tolist())


def cmd_train(args) -> None:
    config = _load_config(args, methods=[args.method])
    out = prepare_output(args.out or config.out_dir)
    alpha = args.alpha
    if args.method in ("balanced_mixup", "mixup") and alpha is None:
        alpha = config.alphas[0]
    spec = RunSpec(args.method, alpha, config.seeds[0], None)
    record = execute_run(dataclasses.replace(config, folds=None), spec, out_dir=out)
    path = out / "runs" / record.run_id
    path.mkdir(parents=True, exist_ok=True)
    (path / "record.json").write_text(json.dumps(record.to_dict(), indent=2) + "\n")
    print(path / "record.json")


def _run_and_summarize(config: ExperimentConfig, out) -> None:
    records = run_experiment(config, out)
    rows = write_summary(records, out)
    log.info("%d runs, %d summary rows -> %s", len(records), len(rows), Path(out) / "summary.csv")
    sys.stdout.write((Path(out) / "summary.txt").read_text())


def cmd_cv(args) -> None:
    config = _load_config(args, folds=args.folds)
    if config.folds is None:
        config = dataclasses.replace(config, folds=5)
    _run_and_summarize(config, args.out or config.out_dir)


def cmd_sweep(args) -> None:
    config = _load_config(args)
    _run_and_summarize(config, args.out or config.out_dir)


def cmd_summarize(args) -> None:
    records = load_records(args.runs)
    if not records:
        raise ConfigError(f"no run records under {args.runs}")
    out = args.out or args.runs
    Path(out).mkdir(parents=True, exist_ok=True)
    write_summary(records, out, tuple(args.group_by.split(",")))
    sys.stdout.write((Path(out) / "summary.txt").read_text())


def cmd_beta_pdf(args) -> None:
    _write_or_print(emit_beta_pdf(args.alpha, args.points), args.out, f"beta_pdf_alpha{args.alpha:g}.csv")


def cmd_class_hist(args) -> None:
    if args.data:
        ds = load_csv(args.data)
    else:
        ds = load_dataset(_load_config(args), args.seed or 0)
    _write_or_print(emit_class_histogram(ds), args.out, "class_hist.csv")


def build_parser() -> argparse.ArgumentParser:
    verbosity = argparse.ArgumentParser(add_help=False)
    verbosity.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser = argparse.ArgumentParser(prog="balmix", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help):
        return sub.add_parser(name, parents=[verbosity], help=help)

    def common(p, config=True):
        if config:
            p.add_argument("--config", help="experiment JSON file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="override the seed list with a single seed")
        return p

    p = common(add("gen-data", "write a synthetic long-tail dataset as CSV"), config=False)
    p.add_argument("--K", type=int, default=5)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--n-max", type=int, default=2000)
    p.add_argument("--ratio", type=float, default=100.0)
    p.add_argument("--noise", type=float, default=0.7)
    p.add_argument("--radius", type=float, default=1.0)
    p.set_defaults(func=cmd_gen_data, out="data")

    p = common(add("train", "train and evaluate a single run"))
    p.add_argument("--method", choices=METHODS, default="balanced_mixup")
    p.add_argument("--alpha", type=float)
    p.set_defaults(func=cmd_train)

    p = common(add("cv", "stratified k-fold run of every configured method"))
    p.add_argument("--folds", type=int)
    p.set_defaults(func=cmd_cv)

    p = common(add("sweep", "run the full configured grid and summarize"))
    p.set_defaults(func=cmd_sweep)

    p = add("summarize", "summarize existing run records")
    p.add_argument("--runs", required=True, help="directory holding runs/<id>/record.json")
    p.add_argument("--out", help="where to write summary.csv / summary.txt (default: --runs)")
    p.add_argument("--group-by", default="method,alpha")
    p.set_defaults(func=cmd_summarize)

    p = add("beta-pdf", "Beta(alpha, 1) density curve as CSV")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--out", help="CSV file or directory (default: stdout)")
    p.set_defaults(func=cmd_beta_pdf)

    p = common(add("class-hist", "per-class example counts as CSV"))
    p.add_argument("--data", help="dataset CSV (default: the config's data source)")
    p.set_defaults(func=cmd_class_hist)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (ConfigError, IngestionError, ParameterError, OSError) as exc:
        print(f"balmix {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

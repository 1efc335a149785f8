"""Directional check on generated long-tail data.

Trains instance sampling, class sampling and Balanced-MixUp (alpha=0.1) on
K=5 Gaussian blobs with counts [2000, 632, 200, 63, 20] for 7 seeds and
compares the medians of test balanced accuracy and macro-F1.

    python3 scripts/directional_check.py [--noise 0.7] [--out results/directional]
"""

import argparse
import sys
import time

import numpy as np

from balmix.harness import ExperimentConfig, run_experiment, write_summary


def make_config(noise: float, seeds=range(7), **overrides) -> ExperimentConfig:
    return ExperimentConfig(
        data={"generator": {"K": 5, "dim": 2, "n_max": 2000, "imbalance_ratio": 100.0,
                            "noise_sigma": noise, "seed": None}},
        methods=["instance_sampling", "class_sampling", "balanced_mixup"],
        alphas=[0.1],
        seeds=list(seeds),
        epochs=30,
        batch_size=8,
        lr0=0.01,
        n_bootstrap=0,
        save_checkpoints=False,
        **overrides,
    )


def medians(records) -> dict:
    out = {}
    for method in ("instance_sampling", "class_sampling", "balanced_mixup"):
        recs = [r for r in records if r.method == method]
        out[method] = {m: float(np.median([r.report.value(m) for r in recs]))
                       for m in ("balanced_acc", "macro_f1")}
    return out


def check(med: dict) -> tuple[bool, bool]:
    a = med["balanced_mixup"]["balanced_acc"] >= med["instance_sampling"]["balanced_acc"]
    b = med["class_sampling"]["macro_f1"] <= med["balanced_mixup"]["macro_f1"]
    return a, b


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--noise", type=float, default=0.7)
    ap.add_argument("--seeds", type=int, default=7)
    ap.add_argument("--orientation", default="instance_major", choices=["instance_major", "literal"])
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/directional")
    args = ap.parse_args(argv)

    config = make_config(args.noise, range(args.seeds), orientation=args.orientation, workers=args.workers)
    start = time.perf_counter()
    records = run_experiment(config, args.out)
    write_summary(records, args.out)
    med = medians(records)
    for method, vals in med.items():
        print(f"{method:18s} balanced_acc {vals['balanced_acc']:.4f}  macro_f1 {vals['macro_f1']:.4f}")
    a, b = check(med)
    print(f"(a) balanced_mixup >= instance_sampling on balanced accuracy: {a}")
    print(f"(b) class_sampling <= balanced_mixup on macro-F1:           {b}")
    print(f"{len(records)} runs in {time.perf_counter() - start:.1f}s")
    return 0 if a and b else 1


if __name__ == "__main__":
    sys.exit(main())

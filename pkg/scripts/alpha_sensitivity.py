"""Balanced-MixUp alpha sweep against the sampling baselines.

Runs every method on the default long-tail generator for alpha in
{0.1, 0.2, 0.3} and prints the min <- median -> max table.

    python3 scripts/alpha_sensitivity.py [--seeds 5] [--out results/alpha]
"""

import argparse

from balmix.harness import METHODS, ExperimentConfig, run_experiment, write_summary


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.1, 0.2, 0.3])
    ap.add_argument("--epochs", type=int, default=30)
    ap.add_argument("--n-bootstrap", type=int, default=200)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/alpha")
    args = ap.parse_args(argv)

    config = ExperimentConfig(methods=list(METHODS), alphas=args.alphas, seeds=list(range(args.seeds)),
                              epochs=args.epochs, n_bootstrap=args.n_bootstrap, save_checkpoints=False,
                              workers=args.workers, out_dir=args.out)
    records = run_experiment(config)
    write_summary(records, args.out)
    print(open(f"{args.out}/summary.txt").read(), end="")


if __name__ == "__main__":
    main()

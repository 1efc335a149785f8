"""Beta(alpha, 1) densities next to empirical histograms of the sampler.

Writes one CSV per alpha with columns x, pdf, empirical (histogram density
of 100,000 draws on the same grid) and prints the mean of each sampler
against alpha / (alpha + 1).

    python3 scripts/beta_curves.py [--alphas 0.1 0.2 0.3] [--out results/beta]
"""

import argparse
from pathlib import Path

import numpy as np

from balmix.mixing import beta1_pdf, sample_beta


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.1, 0.2, 0.3])
    ap.add_argument("--bins", type=int, default=50)
    ap.add_argument("--draws", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/beta")
    args = ap.parse_args(argv)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    edges = np.linspace(0, 1, args.bins + 1)
    mids = (edges[:-1] + edges[1:]) / 2
    rng = np.random.default_rng(args.seed)
    for alpha in args.alphas:
        draws = sample_beta(alpha, 1.0, rng, size=args.draws)
        hist, _ = np.histogram(draws, bins=edges, density=True)
        rows = ["x,pdf,empirical"] + [f"{x:.6f},{p:.6f},{h:.6f}"
                                     for x, p, h in zip(mids, beta1_pdf(mids, alpha), hist)]
        (out / f"beta_alpha{alpha:g}.csv").write_text("\n".join(rows) + "\n")
        print(f"alpha={alpha:g}  mean {draws.mean():.5f}  expected {alpha / (alpha + 1):.5f}  "
              f"P(lambda < 0.1) {np.mean(draws < 0.1):.3f}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Ensemble entropy map on synthetic high-dimensional data.

Projects synth_gaussian data onto two principal components, trains an MLP
ensemble with random hidden widths on the projection and writes the entropy
heatmap (darker = more uncertain) with the samples overlaid.
"""

import argparse
from pathlib import Path

import numpy as np

from tluq.data import synth_gaussian
from tluq.plots import render_svg
from tluq.reduction import fit_pca, transform
from tluq.uq import LN2, EnsembleConfig, build_ensemble, entropy_field, padded_bounds, save_field


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="uq_demo")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--dim", type=int, default=500)
    parser.add_argument("--separation", type=float, default=4.0)
    parser.add_argument("--models", type=int, default=20)
    parser.add_argument("--epochs", type=int, default=200)
    parser.add_argument("--resolution", type=int, default=100)
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ds = synth_gaussian(87, 99, args.dim, args.separation, seed=args.seed)
    pca = fit_pca(ds.features, 2)
    z = transform(pca, ds.features)
    share = pca.explained_variance / np.var(ds.features, axis=0, ddof=1).sum()
    print(f"PC1/PC2 explain {100 * share[0]:.1f}% / {100 * share[1]:.1f}% of the variance")

    cfg = EnsembleConfig(n_models=args.models, epochs=args.epochs, base_seed=args.seed)
    ens = build_ensemble(ds.with_features(z), cfg, jobs=args.jobs)
    print("hidden widths:", [h for h, _ in ens.members])

    bounds = padded_bounds(z, 0.1)
    field = entropy_field(ens, bounds, (args.resolution, args.resolution))
    save_field(field, out / "entropy_field.csv")
    pts = [(a, b, int(c)) for (a, b), c in zip(z, ds.labels)]
    render_svg("heatmap", {"values": field.values, "bounds": bounds, "vmax": LN2, "points": pts,
                           "title": "ensemble predictive entropy (nats)"}, out / "entropy_heatmap.svg")
    v = field.values
    print(f"entropy range [{v.min():.4f}, {v.max():.4f}] of ln 2 = {LN2:.4f}; "
          f"{100 * np.mean(v > 0.5 * LN2):.1f}% of the plane above ln2/2")
    print(f"wrote {out / 'entropy_heatmap.svg'} and {out / 'entropy_field.csv'}")


if __name__ == "__main__":
    main()

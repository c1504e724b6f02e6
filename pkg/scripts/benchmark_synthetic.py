#!/usr/bin/env python3
"""Repeated-split benchmark of all classifiers on the two synthetic regimes.

"moderate" is synth_gaussian(25, 75, 100, 6): linear SVM and the MLP lead.
"wide" is synth_gaussian(87, 99, 5000, 3): RBF SVM (sigma 1) and the GP
collapse to the majority class. Prints mean +- std (percent) per metric.
"""

import argparse
import time

from tluq.classifiers import KINDS, ClassifierConfig
from tluq.data import SplitSpec, synth_gaussian
from tluq.evaluation import METRICS, repeated_runs

REGIMES = {"moderate": (25, 75, 100, 6.0), "wide": (87, 99, 5000, 3.0)}


def fmt(summary):
    if summary["mean"] is None:
        return "undefined"
    return f"{100 * summary['mean']:6.2f} ± {100 * summary['std']:5.2f}"


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--regime", choices=[*REGIMES, "all"], default="all")
    parser.add_argument("--runs", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--classifiers", default=",".join(KINDS))
    args = parser.parse_args()

    regimes = REGIMES if args.regime == "all" else {args.regime: REGIMES[args.regime]}
    for name, (n_pos, n_neg, dim, sep) in regimes.items():
        ds = synth_gaussian(n_pos, n_neg, dim, sep, seed=args.seed)
        print(f"\n{name}: synth_gaussian({n_pos}, {n_neg}, {dim}, {sep}), {args.runs} runs, seed {args.seed}")
        print(f"{'classifier':<14}" + "".join(f"{m:>18}" for m in METRICS) + f"{'time':>8}")
        for kind in args.classifiers.split(","):
            t = time.perf_counter()
            stats = repeated_runs(ds, ClassifierConfig(kind), SplitSpec(), n_runs=args.runs,
                                  base_seed=args.seed, jobs=args.jobs)
            cells = "".join(f"{fmt(stats.summary[m]):>18}" for m in METRICS)
            print(f"{kind:<14}{cells}{time.perf_counter() - t:7.1f}s")


if __name__ == "__main__":
    main()

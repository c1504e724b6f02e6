#!/usr/bin/env python3
"""Write a seeded random weight file for an architecture preset or spec file.

Useful for exercising `tluq extract` end to end without pretrained weights.

    python3 scripts/make_random_weights.py vgg16 weights_vgg16_seed0.fzwt --seed 0
"""

import argparse

from tluq.extractor import load_architecture, random_weights, save_weights


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("architecture", help="preset name (vgg16) or architecture spec file")
    parser.add_argument("out", help="output .fzwt path")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    arch = load_architecture(args.architecture)
    store = random_weights(arch, args.seed)
    save_weights(store, args.out)
    n = sum(t.size for t in store.tensors.values())
    print(f"{arch.name}: {len(store)} tensors, {n:,} parameters -> {args.out} (sha256 {store.digest()[:16]})")


if __name__ == "__main__":
    main()

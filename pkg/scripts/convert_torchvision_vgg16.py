#!/usr/bin/env python3
"""Convert torchvision's ImageNet VGG16 convolution weights into a .fzwt store.

Needs torch and torchvision, which tluq itself does not depend on. The 13
conv layers map in order onto block{b}_conv{i}; the kernel layout
(out, in, kh, kw) is the same on both sides. tluq feeds pixels scaled to
[0, 1] without ImageNet mean/std normalisation, so features will differ
from a torchvision pipeline that normalises.

    python3 scripts/convert_torchvision_vgg16.py vgg16_imagenet.fzwt
"""

import argparse

import numpy as np

from tluq.extractor import PRESETS, WeightStore, save_weights


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out")
    args = parser.parse_args()

    import torch  # noqa: F401  (imported here so --help works without torch)
    from torchvision.models import VGG16_Weights, vgg16

    net = vgg16(weights=VGG16_Weights.IMAGENET1K_V1).eval()
    convs = [m for m in net.features if isinstance(m, torch.nn.Conv2d)]
    names = [layer.weight_name for layer in PRESETS["vgg16"].layers if layer.kind == "conv"]
    assert len(convs) == len(names) == 13

    store = WeightStore()
    for name, conv in zip(names, convs):
        store.add(f"{name}/kernel", conv.weight.detach().numpy().astype(np.float32))
        store.add(f"{name}/bias", conv.bias.detach().numpy().astype(np.float32))
    save_weights(store, args.out)
    print(f"wrote {len(store)} tensors to {args.out}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Build a small demo dataset from scikit-image's bundled photographs.

Writes 96x96 natural crops both as a directory of PPM files and as one
planar binary file (the dataset layout the loader expects), plus a ready
to run config. Requires scikit-image (`pip install coabench[test]` or
`pip install scikit-image`).

    python scripts/make_demo_data.py --out demo --count 120
"""

import argparse
import json
from pathlib import Path

import numpy as np

from coabench.images import save_ppm, save_stl10

SOURCES = ("astronaut", "coffee", "rocket", "chelsea", "cat", "immunohistochemistry", "retina")


def natural_crops(count, size=96):
    import skimage.data

    per_source = []
    for name in SOURCES:
        img = np.asarray(getattr(skimage.data, name)())
        crops = [
            np.ascontiguousarray(img[r : r + size, c : c + size, :3])
            for r in range(0, img.shape[0] - size + 1, size)
            for c in range(0, img.shape[1] - size + 1, size)
        ]
        per_source.append(crops)
    out, i = [], 0
    while len(out) < count:
        added = False
        for crops in per_source:
            if i < len(crops):
                out.append(crops[i])
                added = True
                if len(out) == count:
                    return out
        if not added:
            raise SystemExit(f"only {len(out)} crops available, asked for {count}")
        i += 1
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="demo")
    ap.add_argument("--count", type=int, default=120)
    args = ap.parse_args()

    out = Path(args.out)
    ppm_dir = out / "ppm"
    ppm_dir.mkdir(parents=True, exist_ok=True)
    crops = natural_crops(args.count)
    for i, img in enumerate(crops):
        (ppm_dir / f"{i:04d}.ppm").write_bytes(save_ppm(img))
    (out / "images.bin").write_bytes(save_stl10(crops))

    config = {
        "dataset": {"kind": "stl10", "path": str(out / "images.bin"), "count": args.count},
        "desk": {"image_size": 32, "train_count": 64, "test_count": 50},
        "scheme": {"kind": "pixelwise", "policy": "same"},
        "attack": {"kind": "itn", "solver": "closed", "train_count": 16},
        "seeds": {"cipher": 1, "split": 2, "training": 3},
    }
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n")
    print(f"{args.count} crops -> {ppm_dir}/ and {out / 'images.bin'}")
    print(f"example config -> {out / 'config.json'}")
    print(f"run: coabench report --config {out / 'config.json'} --out {out / 'run'}")


if __name__ == "__main__":
    main()

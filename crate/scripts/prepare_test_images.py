#!/usr/bin/env python3
"""Normalize the standard test images for the acceptance suite and benches.

The images are not shipped with this repository. Obtain Barbara, Boat,
Fence and Parrot from the usual image-processing test collections, then run

    python3 scripts/prepare_test_images.py --out images \
        barbara=/path/to/barbara.tif boat=/path/to/boat.png \
        fence=/path/to/fence.jpg parrot=/path/to/parrot.bmp

Each input is converted to 8-bit grayscale, center-cropped to a square and
resampled to 256x256, then written as <name>.png. Point DEJASP_TEST_IMAGES at
the output directory to enable the image-based acceptance criteria.
"""

import argparse
import pathlib
import sys

from PIL import Image

NAMES = ("barbara", "boat", "fence", "parrot")


def normalize(src: pathlib.Path, size: int) -> Image.Image:
    img = Image.open(src).convert("L")
    w, h = img.size
    side = min(w, h)
    left, top = (w - side) // 2, (h - side) // 2
    img = img.crop((left, top, left + side, top + side))
    if side != size:
        img = img.resize((size, size), Image.Resampling.LANCZOS)
    return img


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("pairs", nargs="+", metavar="NAME=PATH")
    parser.add_argument("--out", type=pathlib.Path, default=pathlib.Path("images"))
    parser.add_argument("--size", type=int, default=256)
    args = parser.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    for pair in args.pairs:
        name, sep, path = pair.partition("=")
        if not sep or name not in NAMES:
            parser.error(f"expected one of {', '.join(NAMES)} as NAME=PATH, got {pair!r}")
        dst = args.out / f"{name}.png"
        normalize(pathlib.Path(path), args.size).save(dst)
        print(dst)
    missing = [n for n in NAMES if not (args.out / f"{n}.png").exists()]
    if missing:
        print(f"still missing: {', '.join(missing)}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())

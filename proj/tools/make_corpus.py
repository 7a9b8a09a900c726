#!/usr/bin/env python3
"""Regenerates data/corpus/ from scikit-image's bundled sample images.

Each image is converted to 8-bit luma, center-cropped to a square and
resized to 512x512 with bilinear interpolation, then written as binary PGM.
"""
import pathlib

import numpy as np
import skimage.data as data
from skimage.color import rgb2gray
from skimage.transform import resize

NAMES = [
    "astronaut", "brick", "camera", "cell", "chelsea", "clock", "coffee",
    "coins", "hubble_deep_field", "immunohistochemistry", "retina", "rocket",
]
SIZE = 512


def load(name):
    img = getattr(data, name)()
    if img.ndim == 3:
        img = rgb2gray(img[..., :3]) * 255.0
    img = img.astype(np.float64)
    h, w = img.shape
    s = min(h, w)
    top, left = (h - s) // 2, (w - s) // 2
    img = img[top:top + s, left:left + s]
    img = resize(img, (SIZE, SIZE), order=1, anti_aliasing=s > SIZE, preserve_range=True)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "corpus"
    out.mkdir(parents=True, exist_ok=True)
    for name in NAMES:
        img = load(name)
        with open(out / f"{name}.pgm", "wb") as f:
            f.write(f"P5\n{SIZE} {SIZE}\n255\n".encode())
            f.write(img.tobytes())
        print(name, img.shape)


if __name__ == "__main__":
    main()

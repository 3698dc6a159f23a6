#!/usr/bin/env python3
"""Regenerate the grayscale test image sets under tests/data/.

Sources are photographic samples bundled with scikit-image and matplotlib,
so the sets can be rebuilt offline. Images are converted to luma, resized
with anti-aliasing to 256x256 and written as binary PGM (P5).

  suite/  - evaluation set used by the acceptance suite
  calib/  - held-out set used only for parameter calibration
"""

import os
import sys

import numpy as np
import skimage.data as skd
from skimage.color import rgb2gray
from skimage.transform import resize


def to_gray_u8(img):
    a = np.asarray(img)
    if a.ndim == 3:
        a = rgb2gray(a)  # [0,1] float
        a = (a * 255.0)
    a = a.astype(np.float64)
    if a.max() > 255.0:
        a = a * (255.0 / a.max())
    return a


def square_crop(a):
    h, w = a.shape
    s = min(h, w)
    y0 = (h - s) // 2
    x0 = (w - s) // 2
    return a[y0:y0 + s, x0:x0 + s]


def make_256(a):
    a = square_crop(a)
    out = resize(a, (256, 256), anti_aliasing=True, preserve_range=True)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def write_pgm(path, a):
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (a.shape[1], a.shape[0]))
        f.write(a.tobytes())


def grace_hopper():
    import matplotlib
    from PIL import Image
    p = os.path.join(os.path.dirname(matplotlib.__file__),
                     "mpl-data", "sample_data", "grace_hopper.jpg")
    return np.asarray(Image.open(p))


SUITE = {
    "camera": lambda: skd.camera(),
    "portrait": lambda: skd.astronaut(),
    "moon": lambda: skd.moon(),
    "coffee": lambda: skd.coffee(),
    "cat": lambda: skd.chelsea(),
    "rocket": lambda: skd.rocket(),
    "coins": lambda: skd.coins(),
    "grass": lambda: skd.grass(),
    "gravel": lambda: skd.gravel(),
    "motorcycle": lambda: skd.stereo_motorcycle()[0],
}

CALIB = {
    "brick": lambda: skd.brick(),
    "text": lambda: skd.text(),
    "page": lambda: skd.page(),
    "ihc": lambda: skd.immunohistochemistry(),
    "hubble": lambda: skd.hubble_deep_field(),
    "hopper": grace_hopper,
}


def main():
    root = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                        "..", "tests", "data")
    for sub, images in (("suite", SUITE), ("calib", CALIB)):
        d = os.path.join(root, sub)
        os.makedirs(d, exist_ok=True)
        for name, loader in images.items():
            try:
                img = loader()
            except Exception as e:
                print(f"skip {name}: {e}", file=sys.stderr)
                continue
            a = make_256(to_gray_u8(img))
            write_pgm(os.path.join(d, name + ".pgm"), a)
            print(f"{sub}/{name}.pgm")


if __name__ == "__main__":
    main()

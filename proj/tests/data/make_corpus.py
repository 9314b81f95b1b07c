#!/usr/bin/env python3
"""Regenerates tests/data/corpus from the sample images bundled with scikit-image."""
import os

import numpy as np
import skimage.data as data
import skimage.io as io
from skimage.transform import resize

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "corpus")

IMAGES = {
    "astronaut": lambda: data.astronaut(),
    "chelsea": lambda: data.chelsea(),
    "coffee": lambda: data.coffee()[:, 44:556],
    "ihc": lambda: data.immunohistochemistry(),
    "motorcycle": lambda: data.stereo_motorcycle()[0][:, 100:612],
    "rocket": lambda: data.rocket()[:, 64:576],
    "hubble": lambda: data.hubble_deep_field()[180:692, 240:752],
    "retina": lambda: (resize(data.retina(), (512, 512), anti_aliasing=True) * 255).round().astype(np.uint8),
    "camera": lambda: data.camera(),
    "moon": lambda: data.moon(),
    "coins": lambda: data.coins(),
    "brick": lambda: data.brick(),
}


def main():
    os.makedirs(OUT, exist_ok=True)
    for name, load in IMAGES.items():
        img = np.ascontiguousarray(load())
        io.imsave(os.path.join(OUT, name + ".png"), img, check_contrast=False)
        print(name, img.shape)


if __name__ == "__main__":
    main()

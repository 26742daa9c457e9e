#!/usr/bin/env python3
"""Generate the desk-scale handwritten-digit fixture under data/digits_pool/.

Produces MNIST-format IDX files (28x28 grayscale, gzip-compressed) from the
scikit-learn bundled digits corpus (1797 genuine handwritten digits, 8x8).
Originals are split per class into disjoint train/test pools before
augmentation, so no source image contributes to both files. Augmentation
(small rotation, 1-px shifts, additive noise) brings each pool up to size
and is calibrated so that raw-pixel 1NN difficulty at 2000 train / 1000
test is in the ballpark of MNIST at the same scale.

Deterministic: fixed seed, fixed gzip mtime. Regenerate with:
    python3 scripts/make_digits_fixture.py
"""

import gzip
import struct
from pathlib import Path

import numpy as np
from scipy.ndimage import rotate, shift, zoom
from sklearn.datasets import load_digits

SEED = 20260825
TRAIN_PER_CLASS = 600
TEST_PER_CLASS = 200
ROT_DEG = 12.0
NOISE_SIGMA = 1.3
OUT_DIR = Path(__file__).resolve().parent.parent / "data" / "digits_pool"


def augment(img, rng):
    ang = rng.uniform(-ROT_DEG, ROT_DEG)
    a = rotate(img, ang, reshape=False, order=1, mode="constant", cval=0.0)
    dy, dx = rng.integers(-1, 2, size=2)
    a = shift(a, (dy, dx), order=0, mode="constant", cval=0.0)
    a = a + rng.normal(0.0, NOISE_SIGMA, a.shape)
    return np.clip(a, 0.0, 16.0)


def upscale(img8):
    big = zoom(img8, 28.0 / 8.0, order=1)
    assert big.shape == (28, 28)
    return np.clip(big * (255.0 / 16.0), 0, 255).astype(np.uint8)


def build_pool(originals, target, rng):
    pool = [upscale(img) for img in originals]
    i = 0
    while len(pool) < target:
        pool.append(upscale(augment(originals[i % len(originals)], rng)))
        i += 1
    order = rng.permutation(target)
    return [pool[j] for j in order[:target]]


def write_idx_images(path, images):
    payload = struct.pack(">iiii", 0x803, len(images), 28, 28)
    payload += b"".join(img.tobytes() for img in images)
    with open(path, "wb") as f:
        with gzip.GzipFile(filename="", mode="wb", fileobj=f, mtime=0) as gz:
            gz.write(payload)


def write_idx_labels(path, labels):
    payload = struct.pack(">ii", 0x801, len(labels)) + bytes(labels)
    with open(path, "wb") as f:
        with gzip.GzipFile(filename="", mode="wb", fileobj=f, mtime=0) as gz:
            gz.write(payload)


def main():
    rng = np.random.default_rng(SEED)
    d = load_digits()
    images, labels = d.images, d.target

    train_images, train_labels, test_images, test_labels = [], [], [], []
    for c in range(10):
        idx = rng.permutation(np.where(labels == c)[0])
        n_tr = int(round(0.6 * len(idx)))
        tr_orig = [images[i] for i in idx[:n_tr]]
        te_orig = [images[i] for i in idx[n_tr:]]
        train_images += build_pool(tr_orig, TRAIN_PER_CLASS, rng)
        train_labels += [c] * TRAIN_PER_CLASS
        test_images += build_pool(te_orig, TEST_PER_CLASS, rng)
        test_labels += [c] * TEST_PER_CLASS

    tr_order = rng.permutation(len(train_images))
    te_order = rng.permutation(len(test_images))
    train_images = [train_images[i] for i in tr_order]
    train_labels = [train_labels[i] for i in tr_order]
    test_images = [test_images[i] for i in te_order]
    test_labels = [test_labels[i] for i in te_order]

    OUT_DIR.mkdir(parents=True, exist_ok=True)
    write_idx_images(OUT_DIR / "train-images-idx3-ubyte.gz", train_images)
    write_idx_labels(OUT_DIR / "train-labels-idx1-ubyte.gz", train_labels)
    write_idx_images(OUT_DIR / "test-images-idx3-ubyte.gz", test_images)
    write_idx_labels(OUT_DIR / "test-labels-idx1-ubyte.gz", test_labels)
    print(f"wrote {len(train_images)} train / {len(test_images)} test to {OUT_DIR}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Write a small MNIST subset as IDX files.

Source: the digit JSON files of the npm package `mnist` (1.1.0), which
store ~1000 MNIST images per digit as 784 floats (pixel / 255, rounded to
three decimals). Pixels are mapped back to bytes with round(v * 255).

    npm pack mnist@1.1.0 && tar xzf mnist-1.1.0.tgz
    python3 tools/make_mnist_subset.py package/src/digits tests/data/mnist
"""
import json
import random
import struct
import sys
from pathlib import Path

TRAIN_PER_DIGIT = 200
TEST_PER_DIGIT = 100
SEED = 20240611


def write_idx(path, magic, dims, payload):
    with open(path, "wb") as f:
        f.write(struct.pack(">I", magic))
        for d in dims:
            f.write(struct.pack(">I", d))
        f.write(bytes(payload))


def main():
    src, dst = Path(sys.argv[1]), Path(sys.argv[2])
    dst.mkdir(parents=True, exist_ok=True)
    rng = random.Random(SEED)
    train, test = [], []
    for digit in range(10):
        data = json.loads((src / f"{digit}.json").read_text())["data"]
        images = [data[i:i + 784] for i in range(0, len(data), 784)]
        rng.shuffle(images)
        train += [(digit, im) for im in images[:TRAIN_PER_DIGIT]]
        test += [(digit, im) for im in images[TRAIN_PER_DIGIT:TRAIN_PER_DIGIT + TEST_PER_DIGIT]]
    for name, rows in (("train", train), ("test", test)):
        rng.shuffle(rows)
        pixels = [min(255, max(0, round(v * 255))) for _, im in rows for v in im]
        write_idx(dst / f"{name}-images.idx3-ubyte", 0x803, (len(rows), 28, 28), pixels)
        write_idx(dst / f"{name}-labels.idx1-ubyte", 0x801, (len(rows),), [d for d, _ in rows])


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Fetch a 10k-digit MNIST sample and write it as IDX files.

The npm package `mnist` ships 1000+ real MNIST digits per class as JSON
arrays of pixel/255 values rounded to three decimals. This script pulls the
package through `npm pack`, restores the byte pixels, and writes

    <out>/mnist-10k-images-idx3-ubyte
    <out>/mnist-10k-labels-idx1-ubyte

in the standard big-endian IDX layout. Pass --images-dir to convert an
already unpacked package instead of calling npm.
"""

import argparse
import json
import pathlib
import struct
import subprocess
import tarfile
import tempfile

ROWS = COLS = 28


def load_digits(digits_dir: pathlib.Path):
    images, labels = [], []
    for label in range(10):
        data = json.loads((digits_dir / f"{label}.json").read_text())["data"]
        count = len(data) // (ROWS * COLS)
        for k in range(count):
            chunk = data[k * ROWS * COLS:(k + 1) * ROWS * COLS]
            images.append(bytes(min(255, max(0, round(v * 255))) for v in chunk))
            labels.append(label)
    return images, labels


def write_idx(out: pathlib.Path, images, labels):
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "mnist-10k-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), ROWS, COLS))
        for img in images:
            f.write(img)
    with open(out / "mnist-10k-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="data/mnist")
    parser.add_argument("--images-dir", help="unpacked package src/digits directory")
    args = parser.parse_args()

    if args.images_dir:
        images, labels = load_digits(pathlib.Path(args.images_dir))
    else:
        with tempfile.TemporaryDirectory() as tmp:
            subprocess.run(["npm", "pack", "mnist@1.1.0"], cwd=tmp, check=True,
                           stdout=subprocess.DEVNULL)
            tgz = next(pathlib.Path(tmp).glob("mnist-*.tgz"))
            with tarfile.open(tgz) as tar:
                tar.extractall(tmp)
            images, labels = load_digits(pathlib.Path(tmp) / "package" / "src" / "digits")

    write_idx(pathlib.Path(args.out), images, labels)
    print(f"wrote {len(images)} digits to {args.out}")


if __name__ == "__main__":
    main()

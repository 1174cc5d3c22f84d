#!/usr/bin/env python3
"""Rebuild MNIST IDX files from the digits bundled in the npm `mnist` package.

The package ships 10,000 MNIST digits as per-class JSON arrays of 784 floats
quantized to three decimals (pixel / 255). This script restores the uint8
pixels, interleaves the classes with a fixed seed, and writes gzip-compressed
IDX files split into a train and a test pool.

    npm pack mnist && tar xzf mnist-*.tgz
    python3 tools/mnist_from_npm.py package/dist/mnist.js data/mnist
"""
import gzip
import json
import random
import re
import struct
import sys
from pathlib import Path


def load_digits(bundle_path):
    text = Path(bundle_path).read_text()
    blobs = re.findall(r'module\.exports=(\{ "data": \[[^\]]*\]\s*\})', text)
    if len(blobs) < 10:
        raise SystemExit(f"expected 10 digit tables, found {len(blobs)}")
    samples = []
    for digit, blob in enumerate(blobs[:10]):
        values = json.loads(blob)["data"]
        if len(values) % 784:
            raise SystemExit(f"digit {digit}: {len(values)} values is not a multiple of 784")
        for i in range(0, len(values), 784):
            pixels = bytes(min(255, max(0, round(v * 255))) for v in values[i:i + 784])
            samples.append((pixels, digit))
    return samples


def write_idx(prefix, samples):
    with gzip.GzipFile(f"{prefix}-images-idx3-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x803, len(samples), 28, 28))
        for pixels, _ in samples:
            f.write(pixels)
    with gzip.GzipFile(f"{prefix}-labels-idx1-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x801, len(samples)))
        f.write(bytes(d for _, d in samples))


def main():
    if len(sys.argv) != 3:
        raise SystemExit(__doc__)
    samples = load_digits(sys.argv[1])
    random.Random(20190601).shuffle(samples)
    out = Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)
    write_idx(out / "train", samples[:8000])
    write_idx(out / "test", samples[8000:])
    print(f"wrote {len(samples)} samples to {out}")


if __name__ == "__main__":
    main()

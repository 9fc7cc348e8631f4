#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Times the two hot paths under both backends:

* potential-table accumulation (field simulation), and
* full-dataset network evaluation (neuron-state sums + tournament).

Uses the MNIST test files when given, otherwise synthetic random images.

    python scripts/benchmark.py --images data/t10k-images-idx3-ubyte.gz \
        --labels data/t10k-labels-idx1-ubyte.gz --per-class 3
"""

import argparse
import time

import numpy as np

from fieldnet import (HAVE_COMPILED, PhysicalConfig, binarize, build_kernel,
                      build_network, evaluate, load_idx_images,
                      load_idx_labels, potential_table_fast,
                      references_from_spec, select_references)
from fieldnet.mnist_io import BinaryImage


def synthetic_dataset(n: int, rng: np.random.Generator):
    images = np.zeros((n, 28, 28), dtype=np.uint8)
    for i in range(n):
        idx = rng.choice(784, size=int(rng.integers(60, 200)), replace=False)
        flat = images[i].reshape(-1)
        flat[idx] = 255
    labels = rng.integers(0, 10, size=n).astype(np.uint8)
    return images, labels


def bench_accumulation(images, cfg, backend: str, n: int) -> float:
    kernel = build_kernel(cfg)
    imgs = [binarize(images[i % len(images)], cfg.bin_threshold)
            for i in range(n)]
    import fieldnet.backends as backends
    t0 = time.perf_counter()
    for img in imgs:
        rows, cols = np.divmod(img.active_flat, 28)
        out = np.zeros((28, 28))
        backends.accumulate_potentials(kernel.values, rows, cols, out,
                                       backend=backend)
    return time.perf_counter() - t0


def bench_evaluation(net, images, labels, backend: str) -> float:
    t0 = time.perf_counter()
    evaluate(net, images, labels, backend=backend)
    return time.perf_counter() - t0


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--images")
    parser.add_argument("--labels")
    parser.add_argument("--per-class", type=int, default=3)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--accum-images", type=int, default=500)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    if args.images and args.labels:
        images = load_idx_images(args.images)
        labels = load_idx_labels(args.labels)
        source = f"{len(images)} dataset images"
    else:
        images, labels = synthetic_dataset(2000, rng)
        source = "2000 synthetic images"

    cfg = PhysicalConfig()
    spec = select_references(labels, args.per_class, args.seed)
    refs = references_from_spec(spec, images, labels, cfg.bin_threshold)
    net = build_network(refs, cfg)

    backends_to_run = ["numpy"] + (["cython"] if HAVE_COMPILED else [])
    if not HAVE_COMPILED:
        print("note: compiled extension not available, timing numpy only")
    print(f"benchmark over {source}, {net.n_refs} references "
          f"({net.n_neurons} pair neurons)\n")
    print(f"{'path':<28}{'backend':<10}{'time':>10}")
    results = {}
    for backend in backends_to_run:
        dt = bench_accumulation(images, cfg, backend, args.accum_images)
        results[("accum", backend)] = dt
        print(f"{'potential accumulation':<28}{backend:<10}{dt:>9.3f}s"
              f"   ({args.accum_images} images)")
    for backend in backends_to_run:
        dt = bench_evaluation(net, images, labels, backend)
        results[("eval", backend)] = dt
        print(f"{'full evaluation':<28}{backend:<10}{dt:>9.3f}s"
              f"   ({len(images)} images)")
    if HAVE_COMPILED:
        for path in ("accum", "eval"):
            ratio = results[(path, "numpy")] / results[(path, "cython")]
            print(f"\n{path}: cython is {ratio:.1f}x the numpy fallback")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from projinv import _pykernels

try:
    from projinv import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def cases(rng: np.random.Generator):
    img = rng.random((512, 512))
    xs, ys = rng.uniform(1, 510, 200_000), rng.uniform(1, 510, 200_000)
    hinv = np.array([[1.02, 0.01, -3.0], [-0.01, 0.99, 2.0], [1e-5, -2e-5, 1.0]])
    cfgs = np.concatenate([rng.uniform(-1, 1, (50_000, 5, 2)), rng.normal(size=(50_000, 5, 2))], axis=-1)
    return {
        "bilinear 2e5 pts": lambda k: k.bilinear(img, xs, ys),
        "sobel 2e5 pts": lambda k: k.sobel(img, xs, ys),
        "warp 512x512": lambda k: k.warp(img, hinv, 512, 512),
        "frame+C 5e4 cfgs (n=5)": lambda k: k.frame_jacobian_batch(cfgs, 1e-8),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'kernel':<26}{'numpy [ms]':>12}{'cython [ms]':>13}{'speedup':>9}")
    for name, fn in cases(np.random.default_rng(0)).items():
        t_py = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat)) * 1e3
        if _ckernels is None:
            print(f"{name:<26}{t_py:>12.2f}{'n/a':>13}{'':>9}")
            continue
        t_c = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<26}{t_py:>12.2f}{t_c:>13.2f}{t_py / t_c:>8.1f}x")


if __name__ == "__main__":
    main()

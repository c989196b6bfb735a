"""Time the numba kernels against the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 20] [--batch 8] [--size 32]

Shapes follow one training batch at the default image size: the widest
encoder layer for im2col/col2im and the SSIM blur over a 3-channel batch.
Outputs of the two backends are compared bit for bit before timing.
"""

import argparse
import timeit

import numpy as np

from tscl.autodiff.ops import gaussian_taps
from tscl.kernels import numba_impl, numpy_impl


def cases(batch: int, size: int, rng: np.random.Generator):
    x = rng.standard_normal((batch, 64, size, size))
    cols = rng.standard_normal((batch * size * size, 64 * 9))
    img = rng.standard_normal((batch * 3, size, size))
    taps = gaussian_taps(11, 1.5)
    n, c, h, w = x.shape
    return {
        "im2col3x3": (lambda m: m.im2col3x3(x)),
        "col2im3x3": (lambda m: m.col2im3x3(cols, n, c, h, w)),
        "blur_w": (lambda m: m.blur_w(img, taps)),
        "blur_h": (lambda m: m.blur_h(img, taps)),
        "blur_w_adjoint": (lambda m: m.blur_w_adjoint(img, taps)),
        "blur_h_adjoint": (lambda m: m.blur_h_adjoint(img, taps)),
    }


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=20)
    p.add_argument("--batch", type=int, default=8)
    p.add_argument("--size", type=int, default=32)
    args = p.parse_args(argv)

    table = cases(args.batch, args.size, np.random.default_rng(0))
    print(f"{'kernel':<16}{'numpy ms':>10}{'numba ms':>10}{'speedup':>9}  identical")
    for name, fn in table.items():
        same = fn(numpy_impl).tobytes() == fn(numba_impl).tobytes()  # also triggers compilation
        t_np = min(timeit.repeat(lambda: fn(numpy_impl), number=1, repeat=args.repeat)) * 1e3
        t_nb = min(timeit.repeat(lambda: fn(numba_impl), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<16}{t_np:>10.3f}{t_nb:>10.3f}{t_np / t_nb:>8.2f}x  {same}")


if __name__ == "__main__":
    main()

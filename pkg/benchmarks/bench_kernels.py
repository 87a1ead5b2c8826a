"""Benchmark the compiled kernels against the numpy fallback.

Times the conv/pool hot kernels on the four stage shapes of a chosen
input profile, forward and backward, and prints per-call medians plus
the native-vs-numpy ratio.

    python benchmarks/bench_kernels.py [--side 64] [--repeat 30]
"""

import argparse
import statistics
import time

import numpy as np

from specklecnn.kernels import available_backends, get_backend
from specklecnn.model import CONV_CHANNELS, shape_chain


def stage_shapes(side):
    """(input_side, cin, cout) of each conv stage for an input profile."""
    chain = shape_chain(side)
    shapes = []
    cin = 1
    current = side
    for (conv_side, pool_side), cout in zip(chain, CONV_CHANNELS):
        shapes.append((current, cin, cout))
        current = pool_side
        cin = cout
    return shapes


def bench(fn, args, repeat):
    fn(*args)  # warmup
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--side", type=int, default=64,
                        help="input profile side (default: 64)")
    parser.add_argument("--repeat", type=int, default=30,
                        help="timed repetitions per case (default: 30)")
    parser.add_argument("--dtype", choices=["float32", "float64"],
                        default="float32")
    args = parser.parse_args()

    names = available_backends()
    if len(names) < 2:
        print("note: only the numpy backend is installed; build the "
              "extension to compare")
    backends = {name: get_backend(name) for name in names}
    dtype = np.dtype(args.dtype)
    rng = np.random.default_rng(0)

    header = f"{'case':<26}" + "".join(f"{n:>12}" for n in names)
    if len(names) == 2:
        header += f"{'nat/np':>9}"
    print(f"profile side {args.side}, {args.dtype}, median of "
          f"{args.repeat} runs (ms)")
    print(header)
    print("-" * len(header))

    for stage, (side, cin, cout) in enumerate(stage_shapes(args.side), 1):
        x = rng.standard_normal((side, side, cin)).astype(dtype)
        k = rng.standard_normal((3, 3, cin, cout)).astype(dtype)
        b = rng.standard_normal(cout).astype(dtype)
        gy = rng.standard_normal((side - 2, side - 2, cout)).astype(dtype)
        pooled_in = rng.standard_normal(
            (side - 2, side - 2, cout)).astype(dtype)

        cases = [
            (f"conv{stage} fwd {side}x{side}x{cin}->{cout}",
             "conv2d_forward", (x, k, b)),
            (f"conv{stage} bwd {side}x{side}x{cin}->{cout}",
             "conv2d_backward", (x, k, gy)),
            (f"pool{stage} fwd {side - 2}x{side - 2}x{cout}",
             "maxpool2_forward", (pooled_in,)),
        ]
        for label, fn_name, fn_args in cases:
            times = {n: bench(getattr(mod, fn_name), fn_args, args.repeat)
                     for n, mod in backends.items()}
            row = f"{label:<26}" + "".join(
                f"{times[n] * 1e3:>12.3f}" for n in names)
            if len(names) == 2:
                row += f"{times['native'] / times['numpy']:>9.2f}"
            print(row)


if __name__ == "__main__":
    main()

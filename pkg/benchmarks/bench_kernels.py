"""Time the numba and numpy kernel paths on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--scale 1.0]

Each kernel is called once untimed (numba compiles on first call), then
the best of ``--repeat`` wall-clock runs is reported.  Outputs of the two
paths are compared bit for bit before timing.
"""

import argparse
import time

import numpy as np

from mediafuse.numkit import kernels


def _inputs(rng, scale):
    n = int(20_000 * scale)
    e = int(200_000 * scale)
    src = rng.integers(0, n, e)
    dst = rng.integers(0, n, e)
    return {
        "scatter_add_rows": (rng.standard_normal((e, 64)), src, n),
        "edge_aggregate": (rng.standard_normal((n, 64)), src, dst, rng.random(e), n),
        "components": (n, src[: e // 20], dst[: e // 20]),
        "confusion_counts": (rng.integers(0, 5, e * 5), rng.integers(0, 5, e * 5), 5),
    }


def _best(fn, args, repeat):
    fn(*args)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scale", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not kernels.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<18} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}  identical")
    for name, inp in _inputs(rng, args.scale).items():
        np_fn = getattr(kernels, name + "_np")
        nb_fn = getattr(kernels, name + "_nb")
        same = np.array_equal(np_fn(*inp), nb_fn(*inp))
        t_np = _best(np_fn, inp, args.repeat)
        t_nb = _best(nb_fn, inp, args.repeat)
        print(f"{name:<18} {t_np * 1e3:>10.2f} {t_nb * 1e3:>10.2f} {t_np / t_nb:>7.1f}x  {same}")


if __name__ == "__main__":
    main()

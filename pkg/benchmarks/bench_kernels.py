"""Compare the compiled and pure-Python kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--sizes 250 2500 25000] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from gazefuse import _backend


def _system(n, rng):
    bp = rng.uniform(0.01, 2.0, n)
    bi = rng.uniform(0.0, 2.0, n - 1)
    diag = bp.copy()
    diag[:-1] += bi
    diag[1:] += bi
    return diag, -bi, rng.normal(size=(n, 2))


def fusion_solve(kern, diag, off, rhs):
    n = len(diag)
    piv, low, var = np.empty(n), np.empty(n - 1), np.empty(n)
    kern.ldl_factor(diag, off, piv, low)
    x = rhs.copy()
    kern.ldl_solve(piv, low, x)
    kern.ldl_inverse_diagonal(piv, low, var)
    return x


def tv(kern, y, lam):
    out = np.empty_like(y)
    kern.tv1d_denoise(y, lam, out)
    return out


def best_of(fn, repeat):
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[250, 2500, 25000])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    backends = {"python": _backend.pykernels}
    if _backend.ckernels is not None:
        backends["cython"] = _backend.ckernels
    else:
        print("compiled extension not built; timing the Python kernels only")

    rng = np.random.default_rng(0)
    print(f"{'kernel':14s}{'n':>8s}" + "".join(f"{b + ' (ms)':>15s}" for b in backends) + f"{'speedup':>10s}")
    for n in args.sizes:
        diag, off, rhs = _system(n, rng)
        y = np.cumsum(rng.normal(size=n)) * 0.01
        cases = {
            "fusion solve": lambda k: fusion_solve(k, diag, off, rhs),
            "tv denoise": lambda k: tv(k, y, 0.05),
        }
        for name, case in cases.items():
            times = {b: best_of(lambda k=k: case(k), args.repeat) for b, k in backends.items()}
            if len(backends) == 2:
                ref = [case(k) for k in backends.values()]
                assert np.allclose(ref[0], ref[1], rtol=0, atol=1e-9), "backends disagree"
            speedup = times["python"] / times["cython"] if "cython" in times else float("nan")
            cells = "".join(f"{t * 1e3:15.4f}" for t in times.values())
            print(f"{name:14s}{n:8d}{cells}{speedup:9.1f}x")


if __name__ == "__main__":
    main()

"""Compare the compiled and numpy kernel backends on the canonical pair.

    python benchmarks/bench_kernels.py [--points N] [--tol T] [--repeat R]
"""
import argparse
import time

import numpy as np

from eislab import kernels
from eislab.eisenstein import build_context
from eislab.schottky import GeneratorSpec, build_group


def canonical_context(tol):
    group = build_group([GeneratorSpec.axis(-1, 1, 4.0), GeneratorSpec.axis(-1j, 1j, 4.0)])
    return build_context(group, np.exp(0.25j * np.pi), tol)


def timed(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--points", type=int, default=2000)
    ap.add_argument("--tol", type=float, default=0.05)
    ap.add_argument("--lam", type=float, default=50.0)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    ctx = canonical_context(args.tol)
    rng = np.random.default_rng(0)
    rad = 0.9 * np.sqrt(rng.random(args.points))
    z = rad * np.exp(2j * np.pi * rng.random(args.points))
    x, y = z.real.copy(), z.imag.copy()
    er, ei = ctx.eta.real.copy(), ctx.eta.imag.copy()
    terms = args.points * ctx.size
    print(f"L={ctx.L} words={ctx.size} points={args.points} lambda={args.lam} "
          f"threads={args.threads}")

    cases = {
        "wave_sum": lambda: kernels.wave_sum(x, y, er, ei, ctx.c, args.lam, False, args.threads),
        "e1_sum": lambda: kernels.e1_sum(x, y, er, ei, ctx.c, args.threads),
    }
    results = {}
    for backend in kernels.available_backends():
        kernels.use_backend(backend)
        for name, fn in cases.items():
            t, out = timed(fn, args.repeat)
            results[(backend, name)] = (t, np.asarray(out[0] if isinstance(out, tuple) else out))
            print(f"{backend:7s} {name:9s} {t * 1e3:10.2f} ms  {t / terms * 1e9:8.2f} ns/term")
    if "cython" in kernels.available_backends():
        for name in cases:
            tc, vc = results[("cython", name)]
            tp, vp = results[("python", name)]
            err = np.max(np.abs(vc - vp)) / max(np.max(np.abs(vp)), 1e-300)
            print(f"{name}: speedup {tp / tc:6.1f}x  max rel diff {err:.2e}")
        kernels.use_backend("cython")


if __name__ == "__main__":
    main()

"""Timing comparison of the jitted kernels against their numpy twins.

Run:  python benchmarks/bench_kernels.py
The same comparison at the library level can be had by running anything
with PROXSAMP_DISABLE_NUMBA=1 in the environment.
"""

import time

import numpy as np

from proxsamp import _kernels
from proxsamp.bundle import ProxObjective, prox_bundle
from proxsamp.potentials import RegularizedTarget, make_l1


def time_fn(fn, args, repeat):
    fn(*args)  # warm-up (and JIT compile for the numba path)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def bench_dual_ascent():
    print("dual simplex-QP ascent (per solve)")
    print(f"{'J':>4} {'d':>5} {'numpy':>12} {'numba':>12} {'speedup':>8}")
    rng = np.random.default_rng(0)
    for j in (2, 4, 8, 16):
        for d in (2, 20, 100):
            S = rng.standard_normal((j, d))
            gram = S @ S.T
            lin = rng.standard_normal(j)
            curv = 0.3
            step = 1.0 / (curv * np.linalg.eigvalsh(gram)[-1])
            w0 = np.full(j, 1.0 / j)
            args = (gram, lin, curv, step, 1e-12, 100_000, w0)
            t_np = time_fn(_kernels._dual_ascent_py, args, 200)
            if _kernels.NUMBA_ENABLED:
                t_jit = time_fn(_kernels.dual_ascent, args, 200)
                print(f"{j:>4} {d:>5} {t_np * 1e6:>10.1f}us {t_jit * 1e6:>10.1f}us {t_np / t_jit:>7.1f}x")
            else:
                print(f"{j:>4} {d:>5} {t_np * 1e6:>10.1f}us {'—':>12} {'—':>8}")


def bench_simplex_projection():
    print("\nsimplex projection (per call)")
    rng = np.random.default_rng(1)
    for n in (4, 16, 64):
        v = rng.standard_normal(n)
        t_np = time_fn(_kernels._simplex_project_py, (v,), 2000)
        if _kernels.NUMBA_ENABLED:
            t_jit = time_fn(_kernels.simplex_project, (v,), 2000)
            print(f"  n={n:>3}: numpy {t_np * 1e6:8.2f}us   numba {t_jit * 1e6:8.2f}us   {t_np / t_jit:5.1f}x")
        else:
            print(f"  n={n:>3}: numpy {t_np * 1e6:8.2f}us   (numba disabled)")


def bench_bundle_end_to_end():
    print("\ncutting-plane solve, l1 target d=20 (per call, current kernel path)")
    pot = make_l1(20, 1.0)
    target = RegularizedTarget(pot, 0.0, np.zeros(20))
    rng = np.random.default_rng(2)
    ys = [2.0 * rng.standard_normal(20) for _ in range(50)]
    # force a few iterations with a demanding gap at a generous step size
    t0 = time.perf_counter()
    iters = 0
    for y in ys:
        res = prox_bundle(ProxObjective(target, 0.5, y), delta=1e-6)
        iters += res.iterations
    dt = (time.perf_counter() - t0) / len(ys)
    print(f"  {dt * 1e3:.2f} ms/solve at {iters / len(ys):.1f} iterations avg "
          f"(numba={'on' if _kernels.NUMBA_ENABLED else 'off'})")


if __name__ == "__main__":
    print(f"numba enabled: {_kernels.NUMBA_ENABLED}\n")
    bench_dual_ascent()
    bench_simplex_projection()
    bench_bundle_end_to_end()

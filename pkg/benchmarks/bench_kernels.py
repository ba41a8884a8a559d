"""Compiled vs pure-Python kernels.

Run ``python3 benchmarks/bench_kernels.py``. Prints the best-of-repeats time
per call for each kernel and backend, plus the speedup.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from fibernls import _kernels_py
from fibernls.field import make_gaussian, make_grid
from fibernls.solver import ModelKind, SplitStepConfig, evolve

try:
    from fibernls import _kernels
except ImportError:  # extension not built
    _kernels = None


def _time(fn, repeat: int, number: int) -> float:
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def kernel_cases(n: int, m: int):
    rng = np.random.default_rng(0)
    values = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    t4 = np.linspace(-20, 20, n) ** 4
    coeffs = np.fft.fftshift(np.fft.fft(values)) / n
    x = np.linspace(-19.0, 19.0, m)
    dk = 2 * np.pi / 40.0
    k_first = -(n // 2) * dk

    def cases(mod):
        return {
            "phase_rotate": lambda: mod.phase_rotate(values.copy(), 0.01, None),
            "weighted_sq_sum": lambda: mod.weighted_sq_sum(values, t4),
            "max_abs2": lambda: mod.max_abs2(values),
            "trig_sum": lambda: mod.trig_sum(coeffs, k_first, dk, x),
        }
    return cases


def evolve_case(n: int, steps: int, backend: str):
    import fibernls.solver as S
    grid = make_grid(-20, 20, n)
    u0 = make_gaussian(grid, 1.0, 1.0)
    model = ModelKind.dissipative(1, 1.0)
    mod = _kernels if backend == "compiled" else _kernels_py

    def run():
        saved = S.kernels
        S.kernels = mod
        try:
            evolve(model, u0, steps * 1e-3, SplitStepConfig(1e-3, snapshot_every=steps))
        finally:
            S.kernels = saved
    return run


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2048)
    ap.add_argument("--m", type=int, default=2048, help="interpolation points")
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    cases = kernel_cases(args.n, args.m)
    backends = {"python": cases(_kernels_py)}
    if _kernels is not None:
        backends["compiled"] = cases(_kernels)
    print(f"n={args.n} m={args.m}")
    print(f"{'kernel':<18}{'python [s]':>14}{'compiled [s]':>14}{'speedup':>10}")
    for name in backends["python"]:
        tp = _time(backends["python"][name], args.repeat, 5)
        if "compiled" in backends:
            tc = _time(backends["compiled"][name], args.repeat, 5)
            print(f"{name:<18}{tp:>14.3e}{tc:>14.3e}{tp / tc:>10.2f}")
        else:
            print(f"{name:<18}{tp:>14.3e}{'n/a':>14}")
    tp = _time(evolve_case(args.n, args.steps, "python"), args.repeat, 1)
    line = f"{'evolve x' + str(args.steps):<18}{tp:>14.3e}"
    if _kernels is not None:
        tc = _time(evolve_case(args.n, args.steps, "compiled"), args.repeat, 1)
        line += f"{tc:>14.3e}{tp / tc:>10.2f}"
    print(line)


if __name__ == "__main__":
    main()

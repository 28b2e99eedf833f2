"""Time the compiled kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Each workload mirrors a call made by the library: normalization series over
a lambda grid, coherent-state kernels, and Haar conjugation in the matrix
Monte Carlo. Both backends are checked for agreement before timing.
"""

import argparse
import timeit

import numpy as np

from csduality import _backend
from csduality import seqcore


def workloads(rng):
    seq = seqcore.poisson_sequence(256)
    lam = np.linspace(0.01, 50.0, 400)
    t = seqcore.log_terms(seq, lam)
    phase = np.ascontiguousarray(np.outer(rng.uniform(0, 2 * np.pi, 400), np.arange(t.shape[1])))
    U = np.ascontiguousarray(
        np.linalg.qr(rng.standard_normal((1024, 3, 3)) + 1j * rng.standard_normal((1024, 3, 3)))[0]
    )
    w = np.ascontiguousarray(rng.standard_normal((1024, 3)) + 0j)
    x = rng.standard_normal(100_000)
    vals = rng.uniform(0.5, 2.0, 100_000)
    return {
        "neumaier_sum (1e5)": ("neumaier_sum", (x,)),
        "cumulative_log (1e5)": ("cumulative_log", (vals,)),
        "log_series_rows (400x257)": ("log_series_rows", (t,)),
        "complex_series_rows (400x257)": ("complex_series_rows", (t, phase)),
        "batch_conjugate (1024 x 3x3)": ("batch_conjugate", (U, w)),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    py = _backend.python_kernels
    cy = _backend.compiled_kernels
    if cy is None:
        print("compiled extension not available; showing the NumPy fallback only")
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s} {'numpy [ms]':>11s} {'cython [ms]':>12s} {'speedup':>8s}")
    for label, (name, call_args) in workloads(rng).items():
        f_py = getattr(py, name)
        t_py = min(timeit.repeat(lambda: f_py(*call_args), number=1, repeat=args.repeat)) * 1e3
        if cy is None:
            print(f"{label:32s} {t_py:11.3f} {'-':>12s} {'-':>8s}")
            continue
        f_cy = getattr(cy, name)
        a, b = f_cy(*call_args), f_py(*call_args)
        if name == "complex_series_rows":
            # oscillating sums are only accurate relative to the modulus series
            scale = np.exp(py.log_series_rows(call_args[0]))
            assert np.max(np.abs(a - b) / scale) <= 1e-13
        else:
            np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12)
        t_cy = min(timeit.repeat(lambda: f_cy(*call_args), number=1, repeat=args.repeat)) * 1e3
        print(f"{label:32s} {t_py:11.3f} {t_cy:12.3f} {t_py / t_cy:7.1f}x")


if __name__ == "__main__":
    main()

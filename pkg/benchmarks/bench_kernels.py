#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the two flat segment kernels on solver-shaped workloads, then one
end-to-end feasibility solve under each implementation:

    python benchmarks/bench_kernels.py
"""

import os
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np  # noqa: E402

from fairdiv import _kernels_py  # noqa: E402

try:
    from fairdiv import _speedups
except ImportError:
    _speedups = None


def timeit(fn, repeat=7):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_table():
    rng = np.random.default_rng(0)
    rows = []
    for n, avg_cover in [(500, 40), (2000, 60), (8000, 80)]:
        n_nodes = 2 * n - 1
        total = n * avg_cover
        values = rng.random(n)
        owners = np.repeat(np.arange(n, dtype=np.int64), avg_cover)
        nodes = rng.integers(0, n_nodes, total).astype(np.int64)
        offsets = np.arange(0, total + 1, avg_cover, dtype=np.int64)
        node_vals = rng.random(n_nodes)

        impls = [("python", _kernels_py)] + ([("compiled", _speedups)] if _speedups else [])
        timings = {}
        for name, impl in impls:
            loops = max(1, 200_000 // total)
            timings[f"scatter/{name}"] = timeit(
                lambda impl=impl: [impl.scatter_add(values, owners, nodes, n_nodes) for _ in range(loops)]
            ) / loops
            timings[f"segments/{name}"] = timeit(
                lambda impl=impl: [impl.segment_sums(node_vals, nodes, offsets) for _ in range(loops)]
            ) / loops
        rows.append((n, total, timings))
    print(f"{'n':>6} {'slots':>8}  " + "  ".join(f"{k:>18}" for k in rows[0][2]))
    for n, total, timings in rows:
        cells = "  ".join(f"{v * 1e6:>15.1f}us" for v in timings.values())
        print(f"{n:>6} {total:>8}  {cells}")
    if _speedups:
        base = rows[-1][2]
        print(
            f"\nspeedup at n={rows[-1][0]}: "
            f"scatter x{base['scatter/python'] / base['scatter/compiled']:.1f}, "
            f"segments x{base['segments/python'] / base['segments/compiled']:.1f}"
        )


def end_to_end():
    import subprocess

    script = (
        "import time, numpy as np\n"
        "import fairdiv as fd\n"
        "from fairdiv.solver import MwuParams\n"
        "pts = fd.generate_synthetic(seed=1, n=600, d=2, m=4, spread=400.0)\n"
        "spec = fd.make_spec(np.bincount([p.color for p in pts]), 'equal', 40)\n"
        "params = MwuParams(epsilon=0.25, g=0.3)\n"
        "t0 = time.perf_counter()\n"
        "sol = fd.mfd(pts, spec, params=params, rng=0)\n"
        "print(f'  {fd.IMPLEMENTATION:>8}: full solve {time.perf_counter() - t0:.2f}s '\n"
        "      f'({sol.iterations_used} oracle calls, diversity {sol.diversity:.2f})')\n"
    )
    env = dict(os.environ, PYTHONPATH=str(Path(__file__).resolve().parents[1] / "src"))
    print("\nend-to-end feasibility solve (n=600, k=40):", flush=True)
    for pure in ("0", "1"):
        env["FAIRDIV_PURE"] = pure
        subprocess.run([sys.executable, "-c", script], env=env, check=True)


if __name__ == "__main__":
    if _speedups is None:
        print("compiled kernels not built; timing the pure fallback only\n")
    kernel_table()
    end_to_end()

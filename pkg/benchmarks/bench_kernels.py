"""Compare the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py            # kernels + end-to-end
    python3 benchmarks/bench_kernels.py --quick    # smaller sizes, fewer repeats

Kernel timings call both implementations directly in this process.  The
end-to-end timings (Sinkhorn solve and a short Monte Carlo run on the SO(2)
preset) run in two subprocesses, one with LIEBRIDGE_DISABLE_NUMBA=1, since the
flag is read at import time.
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from liebridge import _accel

E2E_SCRIPT = r"""
import json, time
from liebridge import _accel
from liebridge.config import load_config
from liebridge.control import build_solution
from liebridge.runner import build_problem
from liebridge.sde import simulate_bridge
from liebridge.sinkhorn import solve

cfg = load_config("so2_paper.cfg")
problem = build_problem(cfg)
pot, _ = solve(problem)                      # warm-up (JIT, operator cache)
sol = build_solution(problem, pot)
simulate_bridge(sol, 1000, 2, seed=0)

def best(fn, repeat=3):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter(); fn(); times.append(time.perf_counter() - t0)
    return min(times)

t_solve = best(lambda: solve(problem))
t_sim = best(lambda: simulate_bridge(sol, {n_particles}, {n_steps}, seed=0))
print(json.dumps({{"numba": _accel.NUMBA_ENABLED, "solve": t_solve, "simulate": t_sim}}))
"""


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_kernels(sizes, n_points, repeat):
    rng = np.random.default_rng(0)
    rows = []
    for n in sizes:
        a = rng.normal(size=(n, n)) * 20
        g = rng.normal(size=n)
        ref = _accel.lse_matvec_numpy(a, g)
        if _accel.NUMBA_ENABLED:
            assert np.allclose(_accel._lse_matvec_numba(a, g), ref, rtol=1e-13)
            _accel._lse_matvec_numba(a, g)
            t_nb = best_of(lambda: _accel._lse_matvec_numba(a, g), repeat)
        else:
            t_nb = float("nan")
        t_np = best_of(lambda: _accel.lse_matvec_numpy(a, g), repeat)
        rows.append(("lse_matvec", f"N={n}", t_np, t_nb))

    values = rng.normal(size=512)
    x = rng.uniform(0, 2 * np.pi, size=n_points)
    h = 2 * np.pi / 512
    if _accel.NUMBA_ENABLED:
        _accel._interp_uniform_numba(x, 0.0, h, values, True)
        t_nb = best_of(lambda: _accel._interp_uniform_numba(x, 0.0, h, values, True), repeat)
    else:
        t_nb = float("nan")
    t_np = best_of(lambda: _accel.interp_uniform_numpy(x, 0.0, h, values, True), repeat)
    rows.append(("interp_uniform", f"n={n_points}", t_np, t_nb))
    return rows


def bench_end_to_end(n_particles, n_steps):
    script = E2E_SCRIPT.format(n_particles=n_particles, n_steps=n_steps)
    out = {}
    for label, disable in (("numpy", "1"), ("numba", "0")):
        env = dict(os.environ, LIEBRIDGE_DISABLE_NUMBA=disable)
        proc = subprocess.run([sys.executable, "-c", script], env=env, capture_output=True, text=True,
                              check=True)
        out[label] = json.loads(proc.stdout.strip().splitlines()[-1])
    return out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--quick", action="store_true")
    p.add_argument("--skip-e2e", action="store_true", help="only time the kernels")
    args = p.parse_args(argv)

    sizes = (128, 512) if args.quick else (128, 512, 1024)
    n_points = 20_000 if args.quick else 100_000
    repeat = 3 if args.quick else 7

    print(f"numba enabled in this process: {_accel.NUMBA_ENABLED}")
    print(f"{'kernel':<16s}{'size':>10s}{'numpy [ms]':>14s}{'numba [ms]':>14s}{'speedup':>10s}")
    for name, size, t_np, t_nb in bench_kernels(sizes, n_points, repeat):
        print(f"{name:<16s}{size:>10s}{1e3 * t_np:>14.3f}{1e3 * t_nb:>14.3f}{t_np / t_nb:>9.1f}x")

    if not args.skip_e2e:
        n_particles, n_steps = (20_000, 50) if args.quick else (100_000, 200)
        res = bench_end_to_end(n_particles, n_steps)
        print(f"\nend to end, SO(2) preset ({n_particles} particles, {n_steps} steps)")
        for stage in ("solve", "simulate"):
            t_np, t_nb = res["numpy"][stage], res["numba"][stage]
            print(f"{stage:<16s}{'':>10s}{1e3 * t_np:>14.1f}{1e3 * t_nb:>14.1f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()

"""Time the numba RK4 kernel against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--runs 200] [--horizon 250]

Both backends integrate the same batch; the script also reports the largest
difference between their recorded samples.
"""
import argparse
import time

import numpy as np

from minskylab import _accel
from minskylab.dynamics import IntegrationConfig, alpha_table
from minskylab.experiments import get_scenario
from minskylab.kernels import integrate_batch


def _batch(n_runs, horizon):
    sc = get_scenario("fig1-row1-alpha0.02")
    cfg = IntegrationConfig(horizon=horizon)
    table, spb = alpha_table(sc.driver, cfg)
    pvec = np.tile(sc.params.as_vector(), (n_runs, 1))
    x0 = np.tile(sc.initial_state().as_array(), (n_runs, 1))
    # Spread initial employment so the runs are not identical.
    x0[:, 2] += np.linspace(-0.01, 0.005, n_runs)
    return pvec, x0, table[None, :], spb, cfg


def _time(backend, args, repeat):
    pvec, x0, table, spb, cfg = args
    best, res = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        res = integrate_batch(pvec, x0, table, spb, cfg.dt, cfg.n_steps, cfg.record_stride, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, res


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--runs", type=int, default=200)
    ap.add_argument("--horizon", type=float, default=250.0)
    ap.add_argument("--repeat", type=int, default=3)
    a = ap.parse_args()

    for n in (1, a.runs):
        batch = _batch(n, a.horizon)
        line = [f"runs={n:<5d}"]
        results = {}
        if _accel.HAVE_NUMBA:
            _time("numba", _batch(1, 1.0), 1)  # compile / load cache
            t, results["numba"] = _time("numba", batch, a.repeat)
            line.append(f"numba {t * 1e3:9.1f} ms ({t / n * 1e3:7.2f} ms/run)")
        t, results["numpy"] = _time("numpy", batch, 1 if n == 1 else a.repeat)
        line.append(f"numpy {t * 1e3:9.1f} ms ({t / n * 1e3:7.2f} ms/run)")
        if len(results) == 2:
            diff = np.nanmax(np.abs(results["numba"].samples - results["numpy"].samples))
            line.append(f"max |diff| {diff:.2e}")
        print("  ".join(line))


if __name__ == "__main__":
    main()

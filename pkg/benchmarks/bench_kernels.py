#!/usr/bin/env python3
"""Compare the numba kernels with the interpreted fallback.

Each backend runs in its own subprocess (TVS_DISABLE_NUMBA=0 / 1) on the
same simulated dataset:

  search     one full inner search at the generating parameters
  objective  a population of candidates scored in one call
  fit        a short differential-evolution fit

    python benchmarks/bench_kernels.py [--population 12] [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys
import time

WORKER = r"""
import json, sys, time
import numpy as np
from tvsreg import FitConfig, ModelParams, SearchConfig, SimConfig, decompose, fit, simulate
from tvsreg._accel import HAS_NUMBA
from tvsreg.fit import _population, prepare_fit, standardize_params

pop, repeat = int(sys.argv[1]), int(sys.argv[2])
sim = simulate(SimConfig(rng_seed=0))
imp = decompose(sim.x)
cfg = FitConfig(rng_seed=0, population_size=pop, max_generations=2)
*_, rec, inner, prep = prepare_fit(sim.x, sim.y, cfg)
theta = standardize_params(ModelParams(2.0, 6.5, 0.2, 2.0), rec).as_array()
thetas = theta + np.random.default_rng(0).normal(0, 0.01, (pop, 4)) * [1, 1, 0.1, 10]
thetas[:, 2] = np.abs(thetas[:, 2]) + 1e-3
thetas[:, 3] = np.abs(thetas[:, 3])

def best_of(fn):
    fn()  # warm-up / compile
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)

out = {
    "numba": HAS_NUMBA,
    "search": best_of(lambda: _population(thetas[:1], prep)),
    "objective": best_of(lambda: _population(thetas, prep)),
    "fit": best_of(lambda: fit(sim.x, sim.y, cfg)),
    "check": float(_population(thetas[:1], prep)[0]),
}
print(json.dumps(out))
"""


def run(disable: bool, population: int, repeat: int) -> dict:
    env = dict(os.environ, TVS_DISABLE_NUMBA="1" if disable else "0")
    proc = subprocess.run([sys.executable, "-c", WORKER, str(population), str(repeat)],
                          env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--population", type=int, default=12)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    t0 = time.perf_counter()
    fast = run(False, args.population, args.repeat)
    slow = run(True, args.population, args.repeat)
    if not fast["numba"]:
        print("numba unavailable: both runs used the fallback", file=sys.stderr)

    print(f"{'kernel':<12}{'numba [s]':>12}{'python [s]':>14}{'speedup':>10}")
    for key in ("search", "objective", "fit"):
        print(f"{key:<12}{fast[key]:>12.4f}{slow[key]:>14.4f}{slow[key] / fast[key]:>9.1f}x")
    same = abs(fast["check"] - slow["check"]) <= 1e-9 * abs(fast["check"])
    print(f"objective agrees across backends: {same} ({fast['check']:.10g} vs {slow['check']:.10g})")
    print(f"total wall time {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()

"""Time the numba kernels against the numpy fallback.

Each backend runs in its own interpreter because the backend is fixed at
import time by ``SYMORBIT_DISABLE_NUMBA``. Compilation is excluded: every
kernel is called once before timing.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, timeit
import numpy as np
from symorbit import kernels
from symorbit._accel import BACKEND

repeat = int(sys.argv[1])
rng = np.random.default_rng(0)
golden = np.array([1, 0] * 20, dtype=np.int64)
words = rng.integers(0, 2, size=(20000, 24))
seq = rng.integers(0, 2, size=200000)
nstates, nedges = 64, 256
src = rng.integers(0, nstates, size=nedges)
dst = rng.integers(0, nstates, size=nedges)
factor = rng.random(nedges)
ones = np.ones(nstates)

cases = {
    "parry_admissible_mask 20000x24": lambda: kernels.parry_admissible_mask(words, golden),
    "distinct_factor_count n=16 len=2e5": lambda: kernels.distinct_factor_count(seq, 16, 2),
    "walk_log_sums 64 states 2000 steps": lambda: kernels.walk_log_sums(ones, src, dst, factor, ones, 2000),
}
out = {"backend": BACKEND, "times": {}}
for name, fn in cases.items():
    fn()
    out["times"][name] = min(timeit.repeat(fn, number=1, repeat=repeat))
print(json.dumps(out))
"""


def run(disable: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("SYMORBIT_DISABLE_NUMBA", None)
    if disable:
        env["SYMORBIT_DISABLE_NUMBA"] = "1"
    proc = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    fast, slow = run(False, args.repeat), run(True, args.repeat)
    print(f"{'kernel':<38}{fast['backend']:>12}{slow['backend']:>12}{'speedup':>10}")
    for name, t_fast in fast["times"].items():
        t_slow = slow["times"][name]
        print(f"{name:<38}{t_fast * 1e3:>10.2f}ms{t_slow * 1e3:>10.2f}ms{t_slow / t_fast:>9.1f}x")


if __name__ == "__main__":
    main()

"""Run every built-in experiment preset and print its result table.

Each preset solves a nonlinear integral equation from noisy data over a
range of relative noise levels and reports iterations-to-stop and the
relative reconstruction error.  Expect errors to shrink as delta does.
"""

import time

from dsm import PRESETS, format_table, run_experiment

for name in ("exp1", "exp2", "exp1-const", "exp2-const"):
    config = PRESETS[name]
    tic = time.perf_counter()
    rows = run_experiment(config)
    toc = time.perf_counter()
    print(f"== {name}: model={config.model}, exact={config.exact}, "
          f"n={config.n_points}, noise={config.noise} "
          f"({toc - tic:.2f}s) ==")
    print(format_table(rows))
    print()

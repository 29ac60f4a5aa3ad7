"""Error against data length for d in the configured sweep."""

import argparse
from dataclasses import replace

from dualiop import experiments as ex

p = argparse.ArgumentParser()
p.add_argument("--config", default="configs/benchmark.ini")
p.add_argument("--out", default="results/sweep")
p.add_argument("--trials", type=int, default=20)
p.add_argument("--workers", type=int, default=4)
a = p.parse_args()

cfg = replace(ex.load_config(a.config), trials=a.trials, workers=a.workers).validate()
rows, _ = ex.run_sweep_n(cfg, a.out)
for r in rows:
    print(f"{r.method:<16} d={r.d:<3} mean err_sum {r.mean_err_sum:12.5g}  per point {r.mean_err_sum / ((r.N + 1) // 2):10.4g}")

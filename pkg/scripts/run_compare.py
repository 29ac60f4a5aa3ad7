"""Monte Carlo comparison of all estimators on the benchmark loop."""

import argparse

from dualiop import experiments as ex

p = argparse.ArgumentParser()
p.add_argument("--config", default="configs/benchmark.ini")
p.add_argument("--out", default="results/compare")
p.add_argument("--trials", type=int)
p.add_argument("--workers", type=int, default=4)
a = p.parse_args()

cfg = ex.load_config(a.config)
cfg.workers = a.workers
if a.trials:
    cfg.trials = a.trials
res = ex.run_compare(cfg.validate(), a.out)
for s in res.summary.values():
    print(f"{s.method:<16} median {s.median:12.5g}  IQR {s.iqr:12.5g}  mean err/L {s.median_err_mean:10.4g}")
print(f"{res.elapsed_s:.1f} s, results in {a.out}")

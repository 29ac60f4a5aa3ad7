"""Bode data of the true plant and a few trial estimates per method."""

import argparse

from dualiop import experiments as ex

p = argparse.ArgumentParser()
p.add_argument("--config", default="configs/benchmark.ini")
p.add_argument("--out", default="results/bode")
p.add_argument("--trials", type=int, default=10)
a = p.parse_args()

files = ex.run_bode(ex.load_config(a.config), a.out, a.trials)
for name, paths in files.items():
    print(f"{name}: {len(paths)} csv files")

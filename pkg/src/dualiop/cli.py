"""Command-line entry point: ``dualiop {simulate,identify,compare,sweep-n,bode}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import experiments as ex
from .export import write_solution
from .lti import internal_stability
from .signals import read_signal_csv, write_signal_csv

log = logging.getLogger("dualiop")


def _config(args) -> ex.ExperimentConfig:
    cfg = ex.load_config(args.config) if args.config else ex.ExperimentConfig().validate()
    if args.trials is not None:
        cfg.trials = args.trials
    if args.workers is not None:
        cfg.workers = args.workers
    return cfg.validate()


def _out(args, cfg) -> Path:
    d = Path(args.out or cfg.output)
    d.mkdir(parents=True, exist_ok=True)
    (d / "config.ini").write_text(ex.dump_config(cfg))
    return d


def cmd_simulate(args, cfg) -> int:
    d = _out(args, cfg)
    data = ex.trial_data(cfg, ex.excitation(cfg), cfg.base_seed)
    for name in ("r", "u", "y", "e"):
        write_signal_csv(d / f"{name}.csv", getattr(data, name))
    log.info("wrote %d samples to %s", data.r.shape[0], d)
    return 0


def cmd_identify(args, cfg) -> int:
    d = _out(args, cfg)
    if args.data:
        src = Path(args.data)
        data = ex.TrialData(*(read_signal_csv(src / f"{n}.csv") for n in ("r", "u", "y")), None)
    else:
        data = ex.trial_data(cfg, ex.excitation(cfg), cfg.base_seed)
    aux = ex.trial_data(cfg, data.r, [cfg.base_seed, 1])
    K = cfg.plant().effective_K
    unstable = 0
    for name in cfg.run_names():
        sol = ex.estimate(name, cfg, data, aux)
        stab = internal_stability(sol.g_hat, K)
        sol.diagnostics["stabilized"] = stab
        unstable += not stab
        write_solution(d / name, sol)
        print(f"{name}: stabilized={stab} cost={sol.diagnostics['cost']:.6g}")
    return 1 if (args.strict and unstable) else 0


def _strict_code(args, records) -> int:
    bad = [r for r in records if not r.stabilized]
    if bad:
        log.warning("%d estimates not stabilized by K", len(bad))
    return 1 if (args.strict and bad) else 0


def cmd_compare(args, cfg) -> int:
    res = ex.run_compare(cfg, _out(args, cfg))
    print(f"{'method':<16}{'median':>14}{'q1':>14}{'q3':>14}{'mean':>14}{'failed':>8}")
    for s in res.summary.values():
        print(f"{s.method:<16}{s.median:>14.6g}{s.q1:>14.6g}{s.q3:>14.6g}{s.mean:>14.6g}{s.n_failed:>8}")
    print(f"elapsed {res.elapsed_s:.1f} s")
    return _strict_code(args, res.records)


def cmd_sweep(args, cfg) -> int:
    rows, recs = ex.run_sweep_n(cfg, _out(args, cfg))
    for r in rows:
        print(f"{r.method:<16}d={r.d:<3}N={r.N:<6}mean={r.mean_err_sum:.6g} median={r.median_err_sum:.6g}")
    return _strict_code(args, recs)


def cmd_bode(args, cfg) -> int:
    files = ex.run_bode(cfg, _out(args, cfg))
    for name, paths in files.items():
        print(f"{name}: {len(paths)} files")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "identify": cmd_identify,
    "compare": cmd_compare,
    "sweep-n": cmd_sweep,
    "bode": cmd_bode,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualiop", description="closed-loop identification experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="INI experiment file")
        p.add_argument("--out", help="output directory (defaults to [output] output)")
        p.add_argument("--strict", action="store_true", help="nonzero exit if any estimate is not stabilized")
        p.add_argument("--trials", type=int, help="override [runs] trials")
        p.add_argument("--workers", type=int, help="override [runs] workers")
        if name == "identify":
            p.add_argument("--data", help="directory with r.csv, u.csv, y.csv")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
    except ex.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return COMMANDS[args.command](args, cfg)


if __name__ == "__main__":
    sys.exit(main())

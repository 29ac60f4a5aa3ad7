"""Monte Carlo harness: configuration, per-trial runs, summaries and CSV output.

Trial ``t`` draws its noise from seed ``base_seed + t``; auxiliary data for the
two-stage nominal plant uses the seed pair ``[base_seed + t, 1]``. One PRBS
realization is shared by all trials of a given length.
"""

from __future__ import annotations

import configparser
import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import diop, dslp, dyp, presets
from .errors import ConfigError
from .lti import RationalTf, TfMatrix, as_tfmatrix, internal_stability, parse_coeffs
from .metrics import err, freq_grid
from .signals import PrbsSpec, gaussian, prbs
from .simulate import ClosedLoopPlant, simulate

METHODS = ("diop", "dslp", "dyp")
GX_PRESETS = ("zero", "two_stage", "gc", "custom")
ERRORS_HEADER = [
    "method", "trial", "seed", "N", "tau", "err_sum", "err_mean", "err_ratio", "stabilized", "solve_time_s",
]
SWEEP_HEADER = ["method", "d", "N", "mean_err_sum", "median_err_sum", "std_err_sum"]


@dataclass
class ExperimentConfig:
    preset: str = "benchmark"
    g_num: tuple = ()
    g_den: tuple = (1.0,)
    k_num: tuple = ()
    k_den: tuple = (1.0,)
    h_num: tuple = (1.0,)
    h_den: tuple = (1.0,)
    feedback_sign: int = 1
    order: int = 14
    amplitude: float = 1.0
    prbs_seed: int | None = None
    sigma: float = 1.0
    base_seed: int = 0
    methods: tuple = METHODS
    tau: int = 14
    dyp_gx: tuple = ("zero",)
    gx_num: tuple = ()
    gx_den: tuple = (1.0,)
    trials: int = 100
    d_sweep: tuple = (8, 9, 10, 11, 12, 13, 14)
    workers: int = 1
    output: str = "out"

    def validate(self) -> "ExperimentConfig":
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        for d in (self.order,) + tuple(self.d_sweep):
            if not 2 <= d <= 16:
                raise ConfigError(f"PRBS order {d} outside [2, 16]")
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise ConfigError(f"unknown methods {sorted(bad)}")
        bad = set(self.dyp_gx) - set(GX_PRESETS)
        if bad:
            raise ConfigError(f"unknown dyp_gx presets {sorted(bad)}")
        if "custom" in self.dyp_gx and not self.gx_num:
            raise ConfigError("dyp_gx = custom needs gx_num")
        if self.feedback_sign not in (1, -1):
            raise ConfigError("feedback_sign must be 1 or -1")
        if self.preset not in ("benchmark", "explicit"):
            raise ConfigError("preset must be 'benchmark' or 'explicit'")
        if self.preset == "explicit" and not (self.g_num and self.k_num):
            raise ConfigError("explicit system needs g_num and k_num")
        order = max(len(self.k_num), len(self.k_den)) if self.preset == "explicit" else 3
        if self.tau < order:
            raise ConfigError(f"tau={self.tau} below controller order {order}")
        return self

    def plant(self) -> ClosedLoopPlant:
        if self.preset == "benchmark":
            return presets.benchmark_plant(self.feedback_sign)
        return ClosedLoopPlant(
            TfMatrix.siso(RationalTf(self.g_num, self.g_den)),
            TfMatrix.siso(RationalTf(self.k_num, self.k_den)),
            TfMatrix.siso(RationalTf(self.h_num, self.h_den)),
            self.feedback_sign,
        )

    def run_names(self) -> list[str]:
        names = []
        for m in self.methods:
            if m == "dyp":
                names.extend(f"dyp_{gx}" for gx in self.dyp_gx)
            else:
                names.append(m)
        return names


_SECTIONS = {
    "system": ("preset", "g_num", "g_den", "k_num", "k_den", "h_num", "h_den", "feedback_sign"),
    "excitation": ("order", "amplitude", "prbs_seed"),
    "noise": ("sigma", "base_seed"),
    "identification": ("methods", "tau", "dyp_gx", "gx_num", "gx_den"),
    "runs": ("trials", "d_sweep", "workers"),
    "output": ("output",),
}
_COEFFS = {"g_num", "g_den", "k_num", "k_den", "h_num", "h_den", "gx_num", "gx_den"}


def _convert(key: str, raw: str):
    raw = raw.strip()
    if key in _COEFFS:
        return tuple(parse_coeffs(raw).tolist())
    if key in ("methods", "dyp_gx"):
        return tuple(t for t in raw.replace(",", " ").split() if t)
    if key == "d_sweep":
        if ".." in raw:
            lo, hi = raw.split("..")
            return tuple(range(int(lo), int(hi) + 1))
        return tuple(int(t) for t in raw.replace(",", " ").split())
    if key == "prbs_seed":
        return None if raw.lower() in ("", "none") else int(raw, 0)
    if key in ("preset", "output"):
        return raw
    if key in ("amplitude", "sigma"):
        return float(raw)
    return int(raw)


def load_config(path) -> ExperimentConfig:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ConfigError(f"cannot read config {path}")
    values = {}
    for section in cp.sections():
        allowed = _SECTIONS.get(section)
        if allowed is None:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in allowed:
                raise ConfigError(f"unknown key {key} in [{section}]")
            try:
                values[key] = _convert(key, raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return ExperimentConfig(**values).validate()


def dump_config(cfg: ExperimentConfig) -> str:
    lines = []
    data = asdict(cfg)
    for section, keys in _SECTIONS.items():
        lines.append(f"[{section}]")
        for k in keys:
            v = data[k]
            if isinstance(v, (tuple, list)):
                v = " ".join(str(x) for x in v)
            lines.append(f"{k} = {'none' if v is None else v}")
        lines.append("")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# trials


@dataclass
class TrialRecord:
    method: str
    trial: int
    seed: int
    N: int
    tau: int
    err_sum: float
    err_mean: float
    err_ratio: float
    stabilized: bool
    solve_time_s: float
    error: str = ""
    constraint_residual: float = math.nan  # kept in memory, not written to CSV

    def row(self) -> list[str]:
        return [
            self.method, str(self.trial), str(self.seed), str(self.N), str(self.tau),
            repr(self.err_sum), repr(self.err_mean), repr(self.err_ratio),
            "true" if self.stabilized else "false", f"{self.solve_time_s:.6f}",
        ]


@dataclass
class TrialData:
    r: np.ndarray
    u: np.ndarray
    y: np.ndarray
    e: np.ndarray


def trial_data(cfg: ExperimentConfig, r: np.ndarray, seed) -> TrialData:
    plant = cfg.plant()
    p = plant.dims[0]
    e = gaussian(r.shape[0], p, cfg.sigma, seed)
    u, y = simulate(plant, r, e)
    return TrialData(r, u, y, e)


def _nominal(cfg: ExperimentConfig, gx: str):
    if gx == "zero":
        return presets.G_A
    if gx == "gc":
        return presets.G_C
    return RationalTf(cfg.gx_num, cfg.gx_den)


def estimate(method: str, cfg: ExperimentConfig, data: TrialData, aux: TrialData | None = None):
    """Run one identifier; returns the solution object."""
    K = cfg.plant().effective_K
    tau = cfg.tau
    if method == "diop":
        return diop.identify(data.y, data.r, K, tau)
    if method == "dslp":
        return dslp.identify_slp(data.y, data.r, K, tau)
    gx = method.split("_", 1)[1]
    kf = dyp.trivial_factorization(K)
    if gx == "two_stage":
        if aux is None:
            raise ConfigError("two-stage nominal plant needs auxiliary data")
        return dyp.two_stage_gb(aux.y, aux.u, aux.r, data.y, data.u, data.r, kf, tau)
    return dyp.identify_yp(data.y, data.u, data.r, kf, dyp.trivial_factorization(_nominal(cfg, gx)), tau)


def run_trial(cfg: ExperimentConfig, r: np.ndarray, trial: int) -> list[TrialRecord]:
    seed = cfg.base_seed + trial
    data = trial_data(cfg, r, seed)
    names = cfg.run_names()
    aux = trial_data(cfg, r, [seed, 1]) if "dyp_two_stage" in names else None
    plant = cfg.plant()
    K = plant.effective_K
    grid = freq_grid(r.shape[0])
    out = []
    for name in names:
        t0 = time.perf_counter()
        try:
            sol = estimate(name, cfg, data, aux)
            elapsed = time.perf_counter() - t0
            rep = err(plant.G, sol.g_hat, grid)
            stab = internal_stability(sol.g_hat, K)
            out.append(TrialRecord(name, trial, seed, r.shape[0], cfg.tau, rep.err_sum, rep.err_mean,
                                   rep.err_ratio, stab, elapsed,
                                   constraint_residual=sol.diagnostics.get("constraint_residual", 0.0)))
        except Exception as exc:  # recorded, not fatal
            out.append(TrialRecord(name, trial, seed, r.shape[0], cfg.tau, math.nan, math.nan, math.nan,
                                   False, time.perf_counter() - t0, f"{type(exc).__name__}: {exc}"))
    return out


def _run_many(cfg: ExperimentConfig, r: np.ndarray) -> list[TrialRecord]:
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            chunks = list(pool.map(run_trial, [cfg] * cfg.trials, [r] * cfg.trials, range(cfg.trials)))
    else:
        chunks = [run_trial(cfg, r, t) for t in range(cfg.trials)]
    order = {name: i for i, name in enumerate(cfg.run_names())}
    recs = [rec for chunk in chunks for rec in chunk]
    return sorted(recs, key=lambda rec: (order[rec.method], rec.trial))


def excitation(cfg: ExperimentConfig, order: int | None = None) -> np.ndarray:
    return prbs(PrbsSpec(order or cfg.order, cfg.prbs_seed, cfg.amplitude))


# --------------------------------------------------------------------------
# summaries


@dataclass
class Summary:
    method: str
    n: int
    n_failed: int
    median: float
    q1: float
    q3: float
    whisker_lo: float
    whisker_hi: float
    mean: float
    variance: float
    median_err_mean: float
    median_err_ratio: float

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1


def summarize(records: list[TrialRecord]) -> dict[str, Summary]:
    out = {}
    for name in dict.fromkeys(r.method for r in records):
        rs = [r for r in records if r.method == name]
        v = np.array([r.err_sum for r in rs if math.isfinite(r.err_sum)])
        if v.size == 0:
            out[name] = Summary(name, len(rs), len(rs), *([math.nan] * 9))
            continue
        q1, med, q3 = np.percentile(v, [25, 50, 75])
        lo, hi = q1 - 1.5 * (q3 - q1), q3 + 1.5 * (q3 - q1)
        inside = v[(v >= lo) & (v <= hi)]
        out[name] = Summary(
            name, len(rs), len(rs) - v.size, float(med), float(q1), float(q3),
            float(inside.min()), float(inside.max()), float(v.mean()), float(v.var(ddof=1)) if v.size > 1 else 0.0,
            float(np.median([r.err_mean for r in rs if math.isfinite(r.err_mean)])),
            float(np.median([r.err_ratio for r in rs if math.isfinite(r.err_ratio)])),
        )
    return out


def write_errors_csv(path, records: list[TrialRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ERRORS_HEADER)
        for rec in records:
            w.writerow(rec.row())


def write_summary_csv(path, summary: dict[str, Summary]) -> None:
    names = [f.name for f in fields(Summary)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for s in summary.values():
            w.writerow([getattr(s, k) if isinstance(getattr(s, k), str) else repr(getattr(s, k)) for k in names])


def _write_failures(path, records) -> None:
    bad = [r for r in records if r.error]
    if bad:
        Path(path).write_text("".join(f"{r.method},{r.trial},{r.error}\n" for r in bad))


@dataclass
class CompareResult:
    records: list[TrialRecord]
    summary: dict[str, Summary]
    elapsed_s: float = 0.0
    paths: dict = field(default_factory=dict)


def run_compare(cfg: ExperimentConfig, out_dir=None) -> CompareResult:
    cfg.validate()
    t0 = time.perf_counter()
    records = _run_many(cfg, excitation(cfg))
    res = CompareResult(records, summarize(records), time.perf_counter() - t0)
    if out_dir is not None:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        write_errors_csv(d / "errors.csv", records)
        write_summary_csv(d / "summary.csv", res.summary)
        _write_failures(d / "failures.txt", records)
        res.paths = {"errors": d / "errors.csv", "summary": d / "summary.csv"}
    return res


@dataclass
class SweepRow:
    method: str
    d: int
    N: int
    mean_err_sum: float
    median_err_sum: float
    std_err_sum: float


def run_sweep_n(cfg: ExperimentConfig, out_dir=None) -> tuple[list[SweepRow], list[TrialRecord]]:
    cfg.validate()
    rows, all_recs = [], []
    for d in cfg.d_sweep:
        sub = replace(cfg, order=d)
        recs = _run_many(sub, excitation(sub))
        all_recs.extend(recs)
        for name in cfg.run_names():
            v = np.array([r.err_sum for r in recs if r.method == name and math.isfinite(r.err_sum)])
            rows.append(SweepRow(
                name, d, 2**d - 1,
                float(v.mean()) if v.size else math.nan,
                float(np.median(v)) if v.size else math.nan,
                float(v.std(ddof=1)) if v.size > 1 else 0.0,
            ))
    if out_dir is not None:
        dd = Path(out_dir)
        dd.mkdir(parents=True, exist_ok=True)
        with open(dd / "sweep.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SWEEP_HEADER)
            for row in rows:
                w.writerow([row.method, row.d, row.N, repr(row.mean_err_sum), repr(row.median_err_sum),
                            repr(row.std_err_sum)])
        _write_failures(dd / "failures.txt", all_recs)
    return rows, all_recs


BODE_POINTS = 512


def run_bode(cfg: ExperimentConfig, out_dir, trials: int | None = None) -> dict[str, list[Path]]:
    """Bode CSVs of ``G0`` and of every trial's estimate, per method."""
    from .metrics import bode_data, uniform_grid, write_bode_csv

    cfg = replace(cfg, trials=trials or cfg.trials).validate()
    grid = uniform_grid(BODE_POINTS)
    r = excitation(cfg)
    plant = cfg.plant()
    root = Path(out_dir) / "bode"
    files: dict[str, list[Path]] = {}
    failures = []
    for name in cfg.run_names():
        d = root / name
        d.mkdir(parents=True, exist_ok=True)
        write_bode_csv(d / "g0.csv", bode_data(plant.G, grid))
        files[name] = [d / "g0.csv"]
    for t in range(cfg.trials):
        seed = cfg.base_seed + t
        data = trial_data(cfg, r, seed)
        aux = trial_data(cfg, r, [seed, 1]) if "dyp_two_stage" in files else None
        for name in files:
            path = root / name / f"trial_{t:03d}.csv"
            try:
                write_bode_csv(path, bode_data(estimate(name, cfg, data, aux).g_hat, grid))
                files[name].append(path)
            except Exception as exc:
                failures.append(f"{name},{t},{type(exc).__name__}: {exc}\n")
    if failures:
        (root / "failures.txt").write_text("".join(failures))
    return files

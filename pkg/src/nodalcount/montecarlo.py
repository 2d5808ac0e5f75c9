"""Monte Carlo experiments: many seeded realizations against the Kac-Rice value.

Each trial draws its coefficients from its own counter-based stream, so the
per-trial results depend only on ``(seed, trial)``. Workers process
contiguous blocks of trials and the results are folded in trial order, which
makes reports identical for any worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .domain import DomainLike, Disk, Rectangle, SpectralWindow, TrigPolynomial
from .ensemble import GAUSSIAN_TRANSFORM, PRNG_ALGORITHM, WaveModel
from .kacrice import (DEGENERATE_C11, GRAM_TOLERANCE, EmptyWindow, asymptotic_prediction,
                      expected_zero_count)
from .zerocount import (DEFAULT_OVERSAMPLING, DEFAULT_REFINE_TOL, LOCAL_REFINEMENT,
                        SUSPICIOUS_LEVEL, UnresolvedZeros, count_zeros, regularized_count)

MAX_EXCLUDED_FRACTION = 0.01
DEFAULT_KACRICE_GRID = 2048


class ExcessExclusions(RuntimeError):
    """Too many trials had zero counts that could not be resolved."""


def sig(x: Optional[float]) -> Optional[float]:
    """Round to 12 significant digits for serialization."""
    if x is None:
        return None
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.12g}")


def fmt(x: Optional[float]) -> str:
    return "null" if x is None else f"{float(x):.12g}"


@dataclass(frozen=True)
class ExperimentConfig:
    domain: DomainLike
    window: Optional[SpectralWindow]
    trials: int
    seed: int = 0
    grid_n: Optional[int] = None
    refine_tol: Optional[float] = None
    eps: Tuple[float, ...] = ()
    kacrice_grid: int = DEFAULT_KACRICE_GRID
    out: Optional[str] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        object.__setattr__(self, "eps", tuple(float(e) for e in self.eps))
        if any(not e > 0 for e in self.eps):
            raise ValueError("eps values must be positive")
        if self.refine_tol is not None and not self.refine_tol > 0:
            raise ValueError("refine_tol must be positive")

    def effective_grid(self, model: WaveModel) -> int:
        n = DEFAULT_OVERSAMPLING * model.min_grid() if self.grid_n is None else int(self.grid_n)
        if n < model.min_grid():
            raise ValueError(f"grid {n} is below the sampling floor {model.min_grid()}")
        return n

    def effective_tol(self) -> float:
        if self.refine_tol is not None:
            return float(self.refine_tol)
        return DEFAULT_REFINE_TOL * self.domain.boundary_length

    def describe(self, model: WaveModel) -> Dict:
        return {
            "domain": self.domain.describe(),
            "window": self.window.describe() if self.window is not None else None,
            "modes": model.size,
            "trials": self.trials,
            "seed": self.seed,
            "grid_n": self.effective_grid(model),
            "refine_tol": sig(self.effective_tol()),
            "eps_relative_to_sup_norm": [sig(e) for e in self.eps],
            "kacrice_grid": self.kacrice_grid,
        }


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    count: Optional[int]
    suspicious: bool = False
    min_condition: Optional[float] = None
    regularized: Tuple[Optional[float], ...] = ()


@dataclass
class ExperimentReport:
    config: Dict
    manifest: Dict
    records: List[TrialRecord]
    kacrice_z: float
    prediction: float
    per_trial_path: Optional[str] = None

    @property
    def counts(self) -> np.ndarray:
        return np.array([r.count for r in self.records if r.count is not None], dtype=float)

    @property
    def excluded(self) -> List[int]:
        return [r.trial for r in self.records if r.count is None]

    @property
    def summary(self) -> Dict:
        return summarize(self.counts, len(self.excluded), self.kacrice_z, self.prediction)

    def to_dict(self) -> Dict:
        s = self.summary
        return {
            "config": self.config,
            "manifest": self.manifest,
            "per_trial": self.per_trial_path,
            "summary": {k: sig(v) if isinstance(v, float) else v for k, v in s.items()
                        if k in ("mean", "var", "se", "kacrice_z", "prediction", "excluded")},
            "excluded_trials": self.excluded,
            "discrepancies": {k: sig(v) for k, v in discrepancies(s).items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def per_trial_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        eps = self.config.get("eps_relative_to_sup_norm", [])
        w.writerow(["trial", "count", "suspicious", "min_condition"] +
                   [f"regularized_eps_{fmt(e)}" for e in eps])
        for r in self.records:
            w.writerow([r.trial, "null" if r.count is None else r.count, int(r.suspicious),
                        fmt(r.min_condition)] + [fmt(x) for x in r.regularized])
        return buf.getvalue()

    def write(self, path) -> Tuple[Path, Path]:
        """Write the JSON report and its per-trial CSV next to it."""
        path = Path(path)
        csv_path = path.with_suffix(".trials.csv")
        self.per_trial_path = csv_path.name
        csv_path.write_text(self.per_trial_csv())
        path.write_text(self.to_json())
        return path, csv_path


def summarize(counts: np.ndarray, excluded: int, kacrice_z: float, prediction: float) -> Dict:
    t = counts.size
    mean = float(np.mean(counts)) if t else float("nan")
    var = float(np.var(counts, ddof=1)) if t > 1 else 0.0
    se = math.sqrt(var / t) if t else float("nan")
    return {"mean": mean, "var": var, "se": se, "kacrice_z": float(kacrice_z),
            "prediction": float(prediction), "excluded": int(excluded), "trials_used": t}


def discrepancies(summary: Dict) -> Dict[str, Optional[float]]:
    """Pairwise differences of the three estimates, raw and in standard errors."""
    mean, z, pred, se = summary["mean"], summary["kacrice_z"], summary["prediction"], summary["se"]
    out = {"mc_minus_kacrice": mean - z, "mc_minus_prediction": mean - pred,
           "kacrice_minus_prediction": z - pred}
    for key in list(out):
        out[key + "_in_se"] = out[key] / se if se and se > 0 else None
    return out


def read_per_trial_csv(path) -> List[TrialRecord]:
    out = []
    with open(path, newline="") as fh:
        rows = csv.reader(fh)
        header = next(rows)
        for row in rows:
            vals = dict(zip(header, row))
            count = None if vals["count"] == "null" else int(vals["count"])
            cond = None if vals["min_condition"] == "null" else float(vals["min_condition"])
            reg = tuple(None if row[i] == "null" else float(row[i]) for i in range(4, len(row)))
            out.append(TrialRecord(int(vals["trial"]), count, vals["suspicious"] == "1", cond, reg))
    return out


def manifest(config: ExperimentConfig, model: WaveModel) -> Dict:
    return {
        "code": "nodalcount",
        "code_version": __version__,
        "numpy_version": np.__version__,
        "python_implementation": platform.python_implementation(),
        "prng": PRNG_ALGORITHM,
        "gaussian_transform": GAUSSIAN_TRANSFORM,
        "grid_n": config.effective_grid(model),
        "grid_escalation": "recount at 2n; on disagreement compare 4n with 2n; else excluded",
        "refine_tol": sig(config.effective_tol()),
        "suspicious_level": SUSPICIOUS_LEVEL,
        "local_refinement": LOCAL_REFINEMENT,
        "kacrice_rule": "periodic midpoint" if not isinstance(config.domain, Rectangle)
        else "per-side midpoint",
        "kacrice_grid": config.kacrice_grid,
        "gram_tolerance": GRAM_TOLERANCE,
        "degenerate_c11": DEGENERATE_C11,
        "max_excluded_fraction": MAX_EXCLUDED_FRACTION,
    }


# --------------------------------------------------------------------------
# trial execution
# --------------------------------------------------------------------------

_WORKER_MODELS: Dict = {}


def _worker_model(domain, window) -> WaveModel:
    key = (domain, window)
    if key not in _WORKER_MODELS:
        _WORKER_MODELS.clear()
        _WORKER_MODELS[key] = WaveModel(domain, window)
    return _WORKER_MODELS[key]


def run_trial(model: WaveModel, config: ExperimentConfig, trial: int) -> TrialRecord:
    wave = model.draw(config.seed, trial)
    try:
        zs = count_zeros(wave, config.effective_grid(model), config.effective_tol())
    except UnresolvedZeros:
        return TrialRecord(trial, None)
    cond = float(zs.condition.min()) if zs.count else None
    reg = tuple(regularized_count(wave, e * zs.sup_norm, config.effective_grid(model))
                if zs.sup_norm > 0 else None for e in config.eps)
    return TrialRecord(trial, zs.count, zs.suspicious, cond, reg)


def _run_block(args) -> List[TrialRecord]:
    config, start, stop = args
    model = _worker_model(config.domain, config.window)
    return [run_trial(model, config, t) for t in range(start, stop)]


def _blocks(trials: int, workers: int) -> List[Tuple[int, int]]:
    size = max(1, math.ceil(trials / (4 * workers)))
    return [(s, min(trials, s + size)) for s in range(0, trials, size)]


def run_experiment(config: ExperimentConfig, workers: int = 1,
                   model: Optional[WaveModel] = None) -> ExperimentReport:
    model = model or WaveModel(config.domain, config.window)
    if model.size == 0:
        raise EmptyWindow(f"no eigenvalues in window {config.window!r}")
    kr = expected_zero_count(model, grid_n=config.kacrice_grid)
    prediction = asymptotic_prediction(config.domain, config.window)

    if workers <= 1:
        records = [run_trial(model, config, t) for t in range(config.trials)]
    else:
        blocks = _blocks(config.trials, workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_run_block, [(config, a, b) for a, b in blocks])
            records = [r for part in parts for r in part]

    report = ExperimentReport(config.describe(model), manifest(config, model), records,
                              kr.z, prediction)
    if len(report.excluded) > MAX_EXCLUDED_FRACTION * config.trials:
        raise ExcessExclusions(
            f"{len(report.excluded)} of {config.trials} trials excluded (limit "
            f"{MAX_EXCLUDED_FRACTION:.0%})")
    if config.out:
        report.write(config.out)
    return report


# --------------------------------------------------------------------------
# growth rate in lambda
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SlopeRow:
    lam: float
    kacrice_z: float
    mc_mean: Optional[float]
    mc_se: Optional[float]
    prediction: float
    excluded: int = 0

    @property
    def ratio(self) -> float:
        return self.kacrice_z / self.lam


@dataclass(frozen=True)
class SlopeStudy:
    rows: List[SlopeRow]
    kind: str
    target_slope: float

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([r.lam for r in self.rows])

    @property
    def z(self) -> np.ndarray:
        return np.array([r.kacrice_z for r in self.rows])

    @property
    def slope(self) -> float:
        """Least-squares slope of ``Z = c * lambda`` (a line through the origin)."""
        lam = self.lambdas
        return float(np.dot(lam, self.z) / np.dot(lam, lam))

    @property
    def slope_with_intercept(self) -> Tuple[float, float]:
        """Least-squares ``(slope, intercept)`` of ``Z = c * lambda + d``."""
        c, d = np.polyfit(self.lambdas, self.z, 1)
        return float(c), float(d)

    def to_dict(self) -> Dict:
        c, d = self.slope_with_intercept
        return {
            "window": self.kind,
            "rows": [{"lambda": sig(r.lam), "kacrice_z": sig(r.kacrice_z),
                      "mc_mean": sig(r.mc_mean), "mc_se": sig(r.mc_se),
                      "prediction": sig(r.prediction), "z_over_lambda": sig(r.ratio),
                      "excluded": r.excluded}
                     for r in self.rows],
            "slope": sig(self.slope),
            "slope_with_intercept": sig(c),
            "intercept": sig(d),
            "target_slope": sig(self.target_slope),
            "relative_error": sig(self.slope / self.target_slope - 1.0),
            "tolerance_note": "the 10% band on the slope is an empirical tolerance; "
                              "the limit law gives the leading term only",
        }


def slope_study(domain: DomainLike, kind: str, lambdas: Sequence[float], trials: int = 0,
                seed: int = 0, grid_n: Optional[int] = None,
                kacrice_grid: int = DEFAULT_KACRICE_GRID, workers: int = 1) -> SlopeStudy:
    """Kac-Rice ``Z(lambda)``, optional Monte Carlo means, and the limiting slope."""
    rows = []
    for lam in lambdas:
        window = SpectralWindow(kind, float(lam))
        model = WaveModel(domain, window)
        pred = asymptotic_prediction(domain, window)
        if trials > 0:
            rep = run_experiment(ExperimentConfig(domain, window, trials, seed, grid_n,
                                                  kacrice_grid=kacrice_grid),
                                 workers=workers, model=model)
            s = rep.summary
            rows.append(SlopeRow(float(lam), rep.kacrice_z, s["mean"], s["se"], pred,
                                 s["excluded"]))
        else:
            z = expected_zero_count(model, grid_n=kacrice_grid).z
            rows.append(SlopeRow(float(lam), z, None, None, pred))
    target = asymptotic_prediction(domain, SpectralWindow(kind, 1.0))
    return SlopeStudy(rows, kind, target)

"""Monte Carlo risk experiments.

Every replication draws its noise from ``SeedSequence(master_seed, spawn_key=(rep,))``
and aggregates are formed with ``math.fsum`` over per-replication values kept in
replication order, so reports do not depend on the number of worker processes.

CSV columns
-----------
RiskReport:  normalized_risk, std_error, predicted, first_order,
             second_order_predicted, second_order_measured, n_effective,
             outlier_count, normalized_risk_all
Curve table: T, rate_value, predicted_second_order, measured_second_order,
             measured_std_error
"""
from __future__ import annotations

import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Sequence

import numpy as np

from .estimator import EstimatorConfig, estimate_period, one_step_oracle
from .observation import SimulationConfig, simulate_observation
from .signal import deriv_norm_sq, sobolev_norm
from .weights import (
    PinskerSolution,
    WeightSequence,
    fisher_information,
    pinsker_solution,
    projection_weights,
    risk_functional,
)

OUTLIER_CUT = 10.0
ESTIMATORS = ("theta_star", "one_step_oracle")


@dataclass(frozen=True)
class ExperimentConfig:
    sim: SimulationConfig
    weights: WeightSequence | PinskerSolution
    est: EstimatorConfig
    n_reps: int
    master_seed: int = 0
    estimator_kind: str = "theta_star"

    def __post_init__(self):
        if self.n_reps < 2:
            raise ValueError("n_reps must be >= 2")
        if self.estimator_kind not in ESTIMATORS:
            raise ValueError(f"estimator_kind must be one of {ESTIMATORS}")

    @property
    def weight_seq(self) -> WeightSequence:
        w = self.weights
        return w.weights() if isinstance(w, PinskerSolution) else w


def rep_seed(master_seed: int, rep: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(rep,))


def default_workers() -> int:
    return int(os.environ.get("PERIODAX_WORKERS", "1"))


def _one_rep(args) -> tuple[float, float]:
    cfg, rep, want = args
    sim = replace(cfg.sim, seed=rep_seed(cfg.master_seed, rep), keep_dw=cfg.sim.keep_dw or "tau_hat" in want)
    obs = simulate_observation(sim)
    w = cfg.weight_seq
    theta_star = tau_hat = math.nan
    if "theta_star" in want:
        theta_star = estimate_period(obs, w, cfg.est).theta_star
    if "tau_hat" in want:
        tau_hat = one_step_oracle(obs, sim.f, sim.theta, w)
    return theta_star, tau_hat


def _run_reps(cfg: ExperimentConfig, want: tuple[str, ...], workers: int | None) -> np.ndarray:
    workers = default_workers() if workers is None else workers
    tasks = [(cfg, r, want) for r in range(cfg.n_reps)]
    if workers <= 1:
        res = [_one_rep(t) for t in tasks]
    else:
        chunk = max(1, cfg.n_reps // (4 * workers))
        with ProcessPoolExecutor(workers) as pool:
            res = list(pool.map(_one_rep, tasks, chunksize=chunk))
    return np.array(res, dtype=float)


@dataclass
class RiskReport:
    normalized_risk: float
    std_error: float
    predicted: float
    first_order: float
    second_order_predicted: float
    second_order_measured: float
    n_effective: int
    outlier_count: int
    normalized_risk_all: float
    values: np.ndarray = field(repr=False, compare=False, default=None)

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("values")
        return d

    def to_csv(self, header: str = "") -> str:
        return _rows_to_csv([self.to_json()], [f.name for f in fields(self) if f.name != "values"], header)


def _mean_se(v: np.ndarray) -> tuple[float, float]:
    n = v.size
    m = math.fsum(v) / n
    var = math.fsum((v - m) ** 2) / (n - 1) if n > 1 else math.nan
    return m, math.sqrt(var / n)


def prediction(cfg: ExperimentConfig) -> tuple[float, float]:
    """``(R_T, ||f'||^2)`` for the configured signal and weights."""
    f = cfg.sim.f
    return risk_functional(f, cfg.weight_seq, cfg.sim.T), deriv_norm_sq(f, 1)


def summarize(cfg: ExperimentConfig, estimates: np.ndarray) -> RiskReport:
    f, theta, T = cfg.sim.f, cfg.sim.theta, cfg.sim.T
    I_T = fisher_information(f, theta, T)
    err = estimates - theta
    z = np.abs(err) * math.sqrt(I_T)
    keep = z <= OUTLIER_CUT
    vals = err**2 * I_T
    m, se = _mean_se(vals[keep])
    R, fp2 = prediction(cfg)
    second = R / fp2
    return RiskReport(
        normalized_risk=m,
        std_error=se,
        predicted=1.0 + second,
        first_order=1.0,
        second_order_predicted=second,
        second_order_measured=m - 1.0,
        n_effective=int(keep.sum()),
        outlier_count=int((~keep).sum()),
        normalized_risk_all=math.fsum(vals) / vals.size,
        values=vals,
    )


def replicate(cfg: ExperimentConfig, workers: int | None = None) -> np.ndarray:
    """Raw per-replication estimates of the configured estimator, in replication order."""
    want = ("theta_star",) if cfg.estimator_kind == "theta_star" else ("tau_hat",)
    col = 0 if cfg.estimator_kind == "theta_star" else 1
    return _run_reps(cfg, want, workers)[:, col]


def run_mc_risk(cfg: ExperimentConfig, workers: int | None = None) -> RiskReport:
    return summarize(cfg, replicate(cfg, workers))


@dataclass
class PairedReport:
    theta_star: RiskReport
    tau_hat: RiskReport
    mean_diff_sq: float
    diff_std_error: float
    ratio_to_second_order: float
    error_correlation: float
    n_paired: int
    mean_diff_sq_all: float

    def to_json(self) -> dict:
        return {
            "theta_star": self.theta_star.to_json(),
            "tau_hat": self.tau_hat.to_json(),
            "mean_diff_sq": self.mean_diff_sq,
            "diff_std_error": self.diff_std_error,
            "ratio_to_second_order": self.ratio_to_second_order,
            "error_correlation": self.error_correlation,
            "n_paired": self.n_paired,
            "mean_diff_sq_all": self.mean_diff_sq_all,
        }


def compare_estimators(cfg: ExperimentConfig, workers: int | None = None) -> PairedReport:
    """Run ``theta*`` and the one-step oracle on the same replications.

    Paired statistics use replications where neither estimate is an outlier.
    """
    res = _run_reps(cfg, ("theta_star", "tau_hat"), workers)
    rs, rt = summarize(cfg, res[:, 0]), summarize(cfg, res[:, 1])
    I_T = fisher_information(cfg.sim.f, cfg.sim.theta, cfg.sim.T)
    err = res - cfg.sim.theta
    keep = np.all(np.abs(err) * math.sqrt(I_T) <= OUTLIER_CUT, axis=1)
    d = (res[:, 0] - res[:, 1]) ** 2 * I_T
    md, se = _mean_se(d[keep])
    e1, e2 = err[keep, 0], err[keep, 1]
    if np.std(e1) == 0 or np.std(e2) == 0:
        corr = math.nan
    else:
        corr = float(np.corrcoef(e1, e2)[0, 1])
    return PairedReport(rs, rt, md, se, md / rs.second_order_predicted, corr, int(keep.sum()), math.fsum(d) / d.size)


@dataclass
class CurveRow:
    T: float
    rate_value: float
    predicted_second_order: float
    measured_second_order: float = math.nan
    measured_std_error: float = math.nan


@dataclass
class CurveTable:
    scheme: str
    rows: list[CurveRow]
    slope: float

    def to_csv(self, header: str = "") -> str:
        cols = [f.name for f in fields(CurveRow)]
        return _rows_to_csv([asdict(r) for r in self.rows], cols, header + f"\nscheme={self.scheme}\nslope={self.slope!r}")

    def to_json(self) -> dict:
        return {"scheme": self.scheme, "slope": self.slope, "rows": [asdict(r) for r in self.rows]}


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def second_order_curve(
    base_cfg: ExperimentConfig,
    T_list: Sequence[float],
    weight_scheme: str = "pinsker",
    beta: float = 2.0,
    L: float | None = None,
    N: int | None = None,
    n_reps: int = 0,
    workers: int | None = None,
) -> CurveTable:
    """Predicted (and optionally simulated) second-order term across ``T_list``.

    ``pinsker``: rate value is ``r_T`` for ``(beta, L)``; ``projection``: rate
    value is ``R_T(f, projection_weights(N))``.  Simulations are run when
    ``n_reps >= 2``.
    """
    T_list = [float(t) for t in T_list]
    if len(T_list) < 3 or any(b <= a for a, b in zip(T_list, T_list[1:])):
        raise ValueError("T_list must be increasing with at least 3 entries")
    f = base_cfg.sim.f
    fp2 = deriv_norm_sq(f, 1)
    rows = []
    for T in T_list:
        if weight_scheme == "pinsker":
            sol = pinsker_solution(beta, L if L is not None else 1.1 * sobolev_norm(f, beta), T)
            rate, weights = sol.r_T, sol
        elif weight_scheme == "projection":
            w = projection_weights(N if N is not None else base_cfg.weight_seq.N_T)
            rate, weights = risk_functional(f, w, T), w
        else:
            raise ValueError("weight_scheme must be 'pinsker' or 'projection'")
        row = CurveRow(T, rate, rate / fp2)
        if n_reps >= 2:
            ws = weights.weights() if isinstance(weights, PinskerSolution) else weights
            K = max(ws.K_eff, f.K_f)
            cfg = replace(
                base_cfg,
                sim=replace(base_cfg.sim, T=T, K_max=K),
                weights=weights,
                n_reps=n_reps,
            )
            rep = run_mc_risk(cfg, workers)
            row.measured_second_order = rep.second_order_measured
            row.measured_std_error = rep.std_error
        rows.append(row)
    slope = loglog_slope([r.T for r in rows], [r.rate_value for r in rows])
    return CurveTable(weight_scheme, rows, slope)


def _rows_to_csv(rows: list[dict], cols: list[str], header: str = "") -> str:
    buf = io.StringIO()
    for line in header.splitlines():
        if line:
            buf.write(f"# {line}\n")
    buf.write(",".join(cols) + "\n")
    for r in rows:
        buf.write(",".join(repr(float(r[c])) if not isinstance(r[c], str) else r[c] for c in cols) + "\n")
    return buf.getvalue()

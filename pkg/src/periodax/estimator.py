"""Three-stage period estimator: coarse scan, threshold set, local refinement."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .criterion import (
    CriterionProfile,
    criterion_derivs,
    criterion_L,
    criterion_values,
    gamma_curvature_check,
)
from .observation import ObservationRecord
from .signal import PeriodicSignal
from .weights import WeightSequence

INV_PHI = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class EstimatorConfig:
    theta_lo: float
    theta_hi: float
    grid_step_divisor: float = 8.0
    threshold_exponent: float = 0.25
    threshold_override: float | None = None
    refine_rel_tol: float = 1e-9
    max_grid_points: int = 10**7
    scan_workers: int = 1

    def __post_init__(self):
        if not 0 < self.theta_lo < self.theta_hi:
            raise ValueError("need 0 < theta_lo < theta_hi")
        if self.threshold_override is not None and not 0 < self.threshold_override < 1:
            raise ValueError("threshold_override must lie in (0, 1)")

    def growth_advisories(self, T: float) -> dict[str, float]:
        """Quantities whose boundedness in T the asymptotics assume; informational only."""
        return {"T_theta_lo": T * self.theta_lo, "theta_hi_over_logT": self.theta_hi / math.log(T)}


def in_ball(center: float, tau, radius: float = 0.25):
    """Multiplicative ball ``|center / tau - 1| < radius``."""
    return np.abs(center / np.asarray(tau, dtype=float) - 1.0) < radius


def ball_bounds(center: float, radius: float = 0.25) -> tuple[float, float]:
    return center / (1.0 + radius), center / (1.0 - radius)


def grid_step(theta_lo: float, T: float, K_eff: int, c_grid: float = 8.0) -> float:
    return theta_lo**2 / (c_grid * T * max(K_eff, 1))


def tau_grid(T: float, w: WeightSequence, cfg: EstimatorConfig) -> np.ndarray:
    step = grid_step(cfg.theta_lo, T, w.K_eff, cfg.grid_step_divisor)
    n = int(math.ceil((cfg.theta_hi - cfg.theta_lo) / step)) + 1
    if n > cfg.max_grid_points:
        raise ValueError(f"scan grid of {n} points exceeds budget {cfg.max_grid_points}")
    return np.linspace(cfg.theta_lo, cfg.theta_hi, n)


def scan_criterion(obs: ObservationRecord, w: WeightSequence, cfg: EstimatorConfig, workers: int | None = None) -> CriterionProfile:
    taus = tau_grid(obs.T, w, cfg)
    workers = cfg.scan_workers if workers is None else workers
    if workers <= 1:
        values = criterion_values(obs, w, taus)
    else:
        parts = np.array_split(taus, workers)
        with ThreadPoolExecutor(workers) as pool:
            values = np.concatenate(list(pool.map(lambda p: criterion_values(obs, w, p), parts)))
    return CriterionProfile(taus, values)


def threshold_factor(T: float, cfg: EstimatorConfig) -> float:
    if cfg.threshold_override is not None:
        return cfg.threshold_override
    return 1.0 - math.log(T) ** (-cfg.threshold_exponent)


def threshold_set(profile: CriterionProfile, T: float, cfg: EstimatorConfig):
    """Return ``(threshold_value, members, e_T)`` with ``e_T`` the smallest member."""
    if profile.taus.size == 0:
        raise ValueError("empty profile")
    thr = threshold_factor(T, cfg) * profile.sup_value
    members = profile.taus[profile.values >= thr]
    return thr, members, float(members.min())


def golden_max(fn, a: float, b: float, tol: float) -> tuple[float, float, int]:
    """Golden-section search for a maximum of ``fn`` on ``[a, b]``."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    iters = 0
    while b - a > tol:
        iters += 1
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = fn(d)
    return (c, fc, iters) if fc >= fd else (d, fd, iters)


@dataclass
class EstimatorTrace:
    profile: CriterionProfile = field(repr=False)
    threshold_value: float
    E_T_members: np.ndarray = field(repr=False)
    e_T: float
    search_ball: tuple[float, float]
    grid_best: float
    theta_star: float
    L_star: float
    refine_iters: int

    def to_json(self) -> dict:
        return {
            "theta_star": self.theta_star,
            "L_star": self.L_star,
            "e_T": self.e_T,
            "threshold_value": self.threshold_value,
            "search_ball": list(self.search_ball),
            "grid_best": self.grid_best,
            "refine_iters": self.refine_iters,
            "n_grid": int(self.profile.taus.size),
            "n_E_T": int(self.E_T_members.size),
            "sup_value": self.profile.sup_value,
            "argmax_tau": self.profile.argmax_tau,
        }


def estimate_period(obs: ObservationRecord, w: WeightSequence, cfg: EstimatorConfig, workers: int | None = None) -> EstimatorTrace:
    profile = scan_criterion(obs, w, cfg, workers)
    thr, members, e_T = threshold_set(profile, obs.T, cfg)
    ball = ball_bounds(e_T)
    mask = in_ball(e_T, profile.taus)
    idx = np.flatnonzero(mask)
    best_i = idx[int(np.argmax(profile.values[idx]))]
    best_tau = float(profile.taus[best_i])
    best_val = float(profile.values[best_i])

    step = profile.taus[1] - profile.taus[0] if profile.taus.size > 1 else 0.0
    lo = max(best_tau - step, cfg.theta_lo, ball[0])
    hi = min(best_tau + step, cfg.theta_hi, ball[1])
    theta_star, L_star, iters = best_tau, best_val, 0
    if hi > lo:
        t, v, iters = golden_max(lambda x: criterion_L(obs, w, x), lo, hi, cfg.refine_rel_tol * best_tau)
        if v >= best_val and in_ball(e_T, t):
            theta_star, L_star = t, v
    return EstimatorTrace(profile, thr, members, e_T, ball, best_tau, theta_star, L_star, iters)


def one_step_oracle(
    obs: ObservationRecord,
    f: PeriodicSignal,
    theta: float,
    w: WeightSequence,
    interval: tuple[float, float] | None = None,
) -> float:
    """``theta - L'(theta) / E L''(theta)`` with ``E L'' = Gamma''(theta) / 2``.

    Needs the true ``(f, theta)``; a diagnostic, not an estimator.
    """
    if interval is not None and not interval[0] < theta < interval[1]:
        raise ValueError("theta outside the probed range")
    d1 = criterion_derivs(obs, w, theta, order=1)
    curv = gamma_curvature_check(f, theta, w, obs.T)
    return theta - d1 / (curv.gamma_second / 2.0)


def config_to_json(cfg: EstimatorConfig) -> dict:
    return asdict(cfg)

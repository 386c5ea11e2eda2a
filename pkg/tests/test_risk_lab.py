import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from periodax.criterion import gamma_oracle
from periodax.estimator import EstimatorConfig
from periodax.observation import SimulationConfig
from periodax.risk_lab import (
    ExperimentConfig,
    compare_estimators,
    loglog_slope,
    rep_seed,
    run_mc_risk,
    second_order_curve,
)
from periodax.signal import deriv_norm_sq, sobolev_norm
from periodax.weights import fisher_information, pinsker_solution, projection_weights, risk_functional

NARROW = EstimatorConfig(0.9, 1.1)
P3 = projection_weights(3)


def desk_cfg(f, n_reps, seed, w=P3, T=50.0, **kw):
    sim = SimulationConfig(f, 1.0, T, K_max=3, alpha_lo=0.9, **kw)
    return ExperimentConfig(sim, w, NARROW, n_reps=n_reps, master_seed=seed)


def test_config_validation(f1):
    with pytest.raises(ValueError):
        desk_cfg(f1, 1, 0)
    with pytest.raises(ValueError):
        ExperimentConfig(desk_cfg(f1, 2, 0).sim, P3, NARROW, 2, estimator_kind="mle")


def test_rep_seeds_distinct():
    s = {tuple(rep_seed(7, r).generate_state(2)) for r in range(1000)}
    assert len(s) == 1000
    assert rep_seed(7, 3).generate_state(2).tolist() == rep_seed(7, 3).generate_state(2).tolist()


def test_noiseless_degenerate(f1):
    T = 50.0
    rep = run_mc_risk(desk_cfg(f1, 3, 0, w=projection_weights(4), noise_on=False))
    assert rep.n_effective == 3 and rep.outlier_count == 0
    # every rep lands on the Gamma stationary point; its offset from theta sets the floor
    x = minimize_scalar(lambda t: -gamma_oracle(f1, 1.0, projection_weights(4), T, t), bounds=(0.99, 1.01), method="bounded", options={"xatol": 1e-12}).x
    floor = (x - 1) ** 2 * fisher_information(f1, 1.0, T)
    assert rep.normalized_risk == pytest.approx(floor, rel=0.05)
    assert rep.normalized_risk < 1e-2
    assert rep.std_error < 1e-12


def test_determinism_and_workers(f13):
    cfg = desk_cfg(f13, 40, 5)
    a = run_mc_risk(cfg, workers=1)
    b = run_mc_risk(cfg, workers=1)
    c = run_mc_risk(cfg, workers=4)
    assert a.to_json() == b.to_json() == c.to_json()
    assert a.values.tobytes() == c.values.tobytes()
    d = run_mc_risk(desk_cfg(f13, 40, 6), workers=1)
    assert d.to_json() != a.to_json()


def test_report_fields(f13):
    rep = run_mc_risk(desk_cfg(f13, 30, 2))
    assert rep.normalized_risk >= 0 and rep.std_error > 0
    assert rep.n_effective + rep.outlier_count == 30
    R, fp2 = risk_functional(f13, P3, 50.0), deriv_norm_sq(f13, 1)
    assert rep.second_order_predicted == pytest.approx(R / fp2, rel=1e-14)
    assert rep.predicted == pytest.approx(1 + R / fp2)
    assert rep.second_order_measured == pytest.approx(rep.normalized_risk - 1)
    lines = rep.to_csv(header="x=1").splitlines()
    assert lines[0] == "# x=1"
    assert lines[1].split(",")[:3] == ["normalized_risk", "std_error", "predicted"]
    assert set(rep.to_json()) >= {"normalized_risk", "outlier_count", "normalized_risk_all"}


def test_desk_constants(f13):
    assert risk_functional(f13, P3, 50.0) == pytest.approx(15.89, abs=0.01)
    assert deriv_norm_sq(f13, 1) == pytest.approx(4 * math.pi**2 * (1 + 9 * 0.0225), rel=1e-14)
    assert deriv_norm_sq(f13, 1) == pytest.approx(47.47, abs=0.01)
    assert risk_functional(f13, P3, 50.0) / deriv_norm_sq(f13, 1) == pytest.approx(0.335, abs=1e-3)


def test_std_error_scaling(f1):
    # per-rep values are chi-square-like, so the SE itself is noisy; the cheap
    # one-step estimator affords n large enough for the ratio to be resolved
    def run(n, seed):
        cfg = desk_cfg(f1, n, seed, w=projection_weights(2))
        return run_mc_risk(ExperimentConfig(cfg.sim, cfg.weights, cfg.est, n, seed, "one_step_oracle"))

    small, big = run(2000, 11), run(8000, 12)
    assert 0.4 <= big.std_error / small.std_error <= 0.6


def test_pinsker_curve_slope(f13):
    base = desk_cfg(f13, 2, 0)
    tab = second_order_curve(base, [1e3, 1e4, 1e5, 1e6], "pinsker", beta=2)
    assert tab.slope == pytest.approx(-0.4, abs=0.05)
    L = 1.1 * sobolev_norm(f13, 2)
    assert tab.rows[0].rate_value == pytest.approx(pinsker_solution(2, L, 1e3).r_T)
    assert tab.to_csv(header="h").splitlines()[3] == "T,rate_value,predicted_second_order,measured_second_order,measured_std_error"


def test_projection_curve_flat(f13):
    tab = second_order_curve(desk_cfg(f13, 2, 0), [1e3, 1e4, 1e5, 1e6], "projection", N=3)
    assert abs(tab.slope) < 0.05
    with pytest.raises(ValueError):
        second_order_curve(desk_cfg(f13, 2, 0), [1e2, 1e3], "projection")
    with pytest.raises(ValueError):
        second_order_curve(desk_cfg(f13, 2, 0), [1e2, 1e3, 1e4], "bogus")


def test_curve_with_simulation(f1):
    tab = second_order_curve(desk_cfg(f1, 2, 3), [40.0, 60.0, 80.0], "projection", N=2, n_reps=20)
    assert all(math.isfinite(r.measured_second_order) and r.measured_std_error > 0 for r in tab.rows)


def test_lambda_star_beats_cut_projection(f13):
    sol = pinsker_solution(2, 1.1 * sobolev_norm(f13, 2), 50.0)
    assert risk_functional(f13, sol.weights(), 50.0) < risk_functional(f13, P3, 50.0)


def test_loglog_slope():
    x = np.array([1.0, 10.0, 100.0])
    assert loglog_slope(x, 3 * x**-0.7) == pytest.approx(-0.7)


def test_compare_noiseless(f1):
    rep = compare_estimators(desk_cfg(f1, 2, 0, w=projection_weights(4), noise_on=False))
    assert rep.mean_diff_sq < 1e-6
    assert rep.theta_star.normalized_risk == pytest.approx(rep.tau_hat.normalized_risk, rel=0.05)


def test_paired_desk_study(f13):
    rep = compare_estimators(desk_cfg(f13, 2000, 43))
    assert rep.error_correlation > 0.9
    lo, hi = 0.5 * (1 + 0.335), 1.5 * (1 + 0.335)
    assert lo <= rep.tau_hat.normalized_risk <= hi
    js = rep.to_json()
    assert js["tau_hat"]["n_effective"] + js["tau_hat"]["outlier_count"] == 2000

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from periodax.signal import PeriodicSignal, deriv_norm_sq
from periodax.weights import (
    WeightSequence,
    fisher_information,
    pinsker_lhs,
    pinsker_lhs_excess,
    pinsker_solution,
    projection_weights,
    risk_functional,
    solve_WT,
    solve_WT_excess,
    validate_weights,
    weighted_fisher,
)

TWO_PI = 2 * math.pi


def lhs_beta2_closed(W, T):
    m = math.floor(W)
    s3 = (m * (m + 1) // 2) ** 2
    s4 = m * (m + 1) * (2 * m + 1) * (3 * m * m + 3 * m - 1) // 30
    return TWO_PI**4 * (W * s3 - s4) * 2 / T


def ellipsoid_sup(lam, beta, L, T, kmax):
    """Exact sup of R_T over {2 sum (2 pi k)^(2 beta) |c_k|^2 <= L}: bias is linear in |c|^2."""
    k = np.arange(1, kmax + 1)
    lamk = np.zeros(kmax)
    n = min(kmax, lam.size - 1)
    lamk[:n] = lam[1 : n + 1]
    var = 2 / T * math.fsum((TWO_PI * k) ** 2 * lamk**2)
    return var + L * np.max((1 - lamk) ** 2 / (TWO_PI * k) ** (2 * beta - 2))


def test_projection_examples():
    np.testing.assert_array_equal(projection_weights(4).padded(6), [0, 1, 1, 1, 0, 0])
    assert projection_weights(2).lam.tolist() == [0.0, 1.0]
    assert projection_weights(7).is_valid()
    with pytest.raises(ValueError):
        projection_weights(1)


def test_weight_sequence_invariants():
    with pytest.raises(ValueError):
        WeightSequence([0, 0.5, 0.2])
    with pytest.raises(ValueError):
        WeightSequence([0, 1, 1.2])
    w = WeightSequence([0, 1, 0.5, 0, 0])
    assert w.N_T == 3 and w.K_eff == 2
    back = WeightSequence.from_json(json.dumps(w.to_json()))
    assert back == w
    assert w != projection_weights(3)


def test_lhs_closed_form_beta2():
    for W in (1.0, 1.5, 3.7, 12.2, 40.01):
        assert pinsker_lhs(W, 2, 1e4) == pytest.approx(lhs_beta2_closed(W, 1e4), rel=1e-12, abs=1e-12)


def test_solve_example():
    L, T = TWO_PI**4, 1e4
    W = solve_WT(2, L, T)
    assert W > 1
    assert abs(lhs_beta2_closed(W, T) - L) <= 1e-10 * L
    assert solve_WT(2, L / 2, T) < W


def test_solve_random_residuals():
    rng = np.random.default_rng(0)
    for _ in range(200):
        beta = rng.uniform(2, 4)
        L = 10 ** rng.uniform(-2, 4)
        T = 10 ** rng.uniform(1, 7)
        u = solve_WT_excess(beta, L, T)
        assert u > 0
        assert abs(pinsker_lhs_excess(u, beta, T) - L) <= 1e-10 * L


def test_root_near_one_keeps_precision():
    beta, L, T = 3.88, 0.0668, 10.74
    u = solve_WT_excess(beta, L, T)
    assert 0 < u < 1e-6
    # only k = 1 contributes: 2 ((1+u)^(beta-1) - 1) (2 pi)^(2 beta) / T = L
    exact = math.expm1(math.log1p(L * T / (2 * TWO_PI ** (2 * beta))) / (beta - 1))
    assert u == pytest.approx(exact, rel=1e-9)
    sol = pinsker_solution(beta, L, 3.5)
    assert sol.residual <= 1e-10 * L
    assert sol.W_excess == pytest.approx(sol.W_T - 1, abs=1e-15)


def test_solution_structure():
    sol = pinsker_solution(2, TWO_PI**4, 1e4)
    assert sol.residual <= 1e-10 * sol.L
    assert np.all((sol.q >= 0) & (sol.q <= 1))
    k = np.arange(sol.q.size)
    assert np.all(sol.q[k >= sol.W_T] == 0)
    assert np.all(sol.lambda_star[(k >= 1) & (k <= sol.gamma_T * sol.W_T)] == 1)
    assert sol.gamma_T == pytest.approx(1 / math.log(1e4))
    assert sol.weights().is_valid()
    with pytest.raises(ValueError):
        pinsker_solution(2, 1.0, 2.5)


def test_rate_slope():
    Ts = [1e3, 1e4, 1e5, 1e6]
    r = [pinsker_solution(2, TWO_PI**4, T).r_T for T in Ts]
    slope = np.polyfit(np.log(Ts), np.log(r), 1)[0]
    assert slope == pytest.approx(-0.4, abs=0.05)


def test_r_T_reverse_summation():
    sol = pinsker_solution(2.5, 300.0, 1e5)
    total = 0.0
    for kk in range(sol.q.size - 1, 0, -1):
        total += (TWO_PI * kk) ** 2 * sol.q[kk]
    assert sol.r_T == pytest.approx(2 * total / sol.T, rel=1e-12)


def test_risk_examples(f13):
    f = PeriodicSignal.from_cosines({1: 0.4, 2: 0.7, 3: 0.2})
    assert risk_functional(f, projection_weights(4), 100) == pytest.approx(8 * math.pi**2 / 100 * 14, rel=1e-12)
    assert risk_functional(f, projection_weights(4), 100) == pytest.approx(11.054, abs=5e-4)
    expect = 2 * (6 * math.pi) ** 2 * 0.01125 + 2 / 50 * TWO_PI**2 * 5
    assert risk_functional(f13, projection_weights(3), 50) == pytest.approx(expect, rel=1e-12)
    assert expect == pytest.approx(15.89, abs=0.01)


def test_risk_zero_weights_is_derivative_norm(f13):
    zero = WeightSequence([0.0], relaxed=True)
    assert risk_functional(f13, zero, 77.0) == pytest.approx(deriv_norm_sq(f13, 1), rel=1e-14)


def test_risk_nonnegative():
    rng = np.random.default_rng(3)
    for _ in range(100):
        c = rng.normal(size=6) + 1j * rng.normal(size=6)
        c[0] = c[0].real
        lam = rng.uniform(size=8)
        lam[:2] = [0, 1]
        assert risk_functional(PeriodicSignal(c), WeightSequence(lam), rng.uniform(1, 1e4)) >= 0


def test_fisher_examples(f1):
    assert fisher_information(f1, 1.0, 100.0) == pytest.approx(1e6 / 12 * 4 * math.pi**2, rel=1e-14)
    assert fisher_information(f1, 1.0, 100.0) == pytest.approx(3.28987e6, rel=1e-5)
    assert fisher_information(f1, 1.7, 30.0) == pytest.approx(fisher_information(f1, 1.0, 30.0) / 1.7**4, rel=1e-14)
    assert fisher_information(f1, 1.0, 60.0) == pytest.approx(8 * fisher_information(f1, 1.0, 30.0), rel=1e-14)
    with pytest.raises(ValueError):
        fisher_information(f1, 0.0, 10.0)


def test_fisher_cross_module(f13):
    assert fisher_information(f13, 1.3, 55.0) == pytest.approx(55.0**3 / 12 / 1.3**4 * deriv_norm_sq(f13, 1), rel=1e-15)


@settings(max_examples=60)
@given(st.lists(st.floats(0, 1), min_size=0, max_size=6), st.floats(0.5, 2), st.floats(5, 500))
def test_weighted_fisher_ordering(tail, theta, T):
    f = PeriodicSignal.from_cosines({1: 1.0, 2: 0.5, 4: 0.3, 6: 0.1})
    w = WeightSequence([0.0, 1.0] + tail)
    i1 = weighted_fisher(f, theta, T, w, 1)
    i2 = weighted_fisher(f, theta, T, w, 2)
    it = fisher_information(f, theta, T)
    assert i2 <= i1 * (1 + 1e-12) and i1 <= it * (1 + 1e-12)


def test_weighted_fisher_examples(f1, f13):
    assert weighted_fisher(f13, 1, 40, projection_weights(4)) == pytest.approx(fisher_information(f13, 1, 40), rel=1e-14)
    w = WeightSequence([0, 1, 0.3])
    assert weighted_fisher(f1, 1.2, 40, w, 1) == pytest.approx(fisher_information(f1, 1.2, 40), rel=1e-14)
    assert weighted_fisher(f1, 1.2, 40, w, 2) == pytest.approx(fisher_information(f1, 1.2, 40), rel=1e-14)


def test_validate_w1_example(f1):
    rep = validate_weights(projection_weights(256), f1, [math.exp(4)], rho1=0.5)
    assert rep.verdicts["W1"] == "pass"
    row = next(r for r in rep.rows if r.assumption == "W1")
    assert row.lhs == pytest.approx(TWO_PI * math.sqrt(2 * sum(k * k for k in range(256))), rel=1e-12)


def test_validate_vacuous_and_structural(f13):
    grid = [1e3, 1e4, 1e5]
    rep = validate_weights(lambda T: projection_weights(max(4, math.ceil(math.log(T)))), f13, grid)
    assert rep.verdicts["T"] == "vacuous pass"
    assert rep.verdicts["bias_log"] == "vacuous pass"
    bad = WeightSequence([0, 0.5, 1], relaxed=True)
    rep2 = validate_weights(bad, f13, grid)
    assert not rep2.structural_ok and not rep2.passed and rep2.rows == []


def test_validate_fixed_cut_fails_T(f13):
    rep = validate_weights(projection_weights(3), f13, [1e2, 1e3, 1e4])
    assert rep.verdicts["T"] == "fail"
    assert rep.verdicts["bias_log"] == "fail"


def test_validate_reproducible(f13):
    a = validate_weights(projection_weights(5), f13, [50, 500]).to_json()
    b = validate_weights(projection_weights(5), f13, [50, 500]).to_json()
    assert a == b


def _boundary_signal(rng, beta, L, kmax):
    a = rng.exponential(size=kmax) * (rng.uniform(size=kmax) < 0.6)
    if not a.any():
        a[0] = 1.0
    k = np.arange(1, kmax + 1)
    a *= L / (2 * math.fsum(a * (TWO_PI * k) ** (2 * beta)))
    phase = np.exp(1j * rng.uniform(0, TWO_PI, size=kmax))
    return PeriodicSignal(np.concatenate([[0.0], np.sqrt(a) * phase]))


def test_saddle_value_pure_weights():
    beta, L, T = 2.0, TWO_PI**4, 1e4
    sol = pinsker_solution(beta, L, T)
    q = sol.saddle_weights()
    kmax = q.lam.size + 10
    assert ellipsoid_sup(sol.q, beta, L, T, kmax) == pytest.approx(sol.r_T, rel=1e-6)
    rng = np.random.default_rng(17)
    for _ in range(500):
        f = _boundary_signal(rng, beta, L, kmax)
        assert sol.r_T >= risk_functional(f, q, T) * (1 - 1e-6)
    # single-harmonic f at k=1 attains it
    c1 = math.sqrt(L / (2 * TWO_PI ** (2 * beta)))
    assert risk_functional(PeriodicSignal([0, c1]), q, T) == pytest.approx(sol.r_T, rel=1e-6)


def test_saddle_value_clamped_weights_large_T():
    beta, L, T = 2.0, TWO_PI**4, 1e6
    sol = pinsker_solution(beta, L, T)
    sup = ellipsoid_sup(sol.lambda_star, beta, L, T, sol.lambda_star.size + 10)
    assert abs(sup - sol.r_T) <= 1e-3 * sol.r_T


def test_lambda_star_not_pointwise_dominant(f1):
    sol = pinsker_solution(2.0, TWO_PI**4, 50.0)
    # f1 lives on k = 1; projection(2) pays no bias and the least variance
    assert risk_functional(f1, sol.weights(), 50.0) > risk_functional(f1, projection_weights(2), 50.0) + 1e-12

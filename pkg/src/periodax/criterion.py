"""The weighted periodogram criterion ``L(tau)`` and its analytic deterministic part."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .observation import ObservationRecord, exponential_sums_grid
from .signal import PeriodicSignal
from .weights import WeightSequence, weighted_fisher

# Below this |x| the closed forms cancel badly (order 3 loses ~1e-2 near 1e-4);
# the power series converges to machine precision here with 16 terms.
_SERIES_CUT = 0.5
_N_TERMS = 16
_SERIES_A = [(-1) ** n / math.factorial(2 * n + 1) for n in range(_N_TERMS)]


def _series(u: np.ndarray, order: int) -> np.ndarray:
    out = np.zeros_like(u)
    for n in range(_N_TERMS - 1, -1, -1):
        m = 2 * n - order
        if m < 0:
            continue
        coef = _SERIES_A[n] * math.perm(2 * n, order)
        out = out + coef * u**m
    return out


def phi_hat(x, order: int = 0):
    """``sin(pi x) / (pi x)`` and its first three derivatives."""
    if order not in (0, 1, 2, 3):
        raise ValueError("order must be 0..3")
    x = np.asarray(x, dtype=float)
    u = np.pi * x
    small = np.abs(x) < _SERIES_CUT
    us = np.where(small, 1.0, u)
    s, c = np.sin(us), np.cos(us)
    if order == 0:
        big = s / us
    elif order == 1:
        big = c / us - s / us**2
    elif order == 2:
        big = -s / us - 2 * c / us**2 + 2 * s / us**3
    else:
        big = -c / us + 3 * s / us**2 + 6 * c / us**3 - 6 * s / us**4
    out = np.pi**order * np.where(small, _series(np.where(small, u, 0.0), order), big)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GammaEvalContext:
    a_kl: float
    b_kl: float
    nearest_l: int
    dist: float

    @classmethod
    def make(cls, k: int, l: int, theta: float, tau: float, T: float) -> "GammaEvalContext":
        x = k * theta / tau
        nearest = int(math.floor(x + 0.5))
        return cls((T / theta) * (l - x), (T / theta) * (l - k), nearest, abs(x - nearest))


@dataclass
class CriterionProfile:
    taus: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    @property
    def sup_value(self) -> float:
        return float(np.max(self.values))

    @property
    def argmax_tau(self) -> float:
        return float(self.taus[int(np.argmax(self.values))])

    def to_csv(self, path=None, header: str = "") -> str:
        buf = io.StringIO()
        if header:
            for line in header.splitlines():
                buf.write(f"# {line}\n")
        buf.write("tau,L\n")
        for t, v in zip(self.taus, self.values):
            buf.write(f"{float(t)!r},{float(v)!r}\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text


def _weights_row(w: WeightSequence) -> np.ndarray:
    return np.asarray(w.lam[1:], dtype=float)


def criterion_values(obs: ObservationRecord, w: WeightSequence, taus) -> np.ndarray:
    """``L(tau) = sum_{k>=1} lam_k |S_k(tau)|^2 / T`` for each tau."""
    K = w.K_eff
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    if K < 1:
        return np.zeros(taus.size)
    S = exponential_sums_grid(obs, taus, K, "data")
    lam = _weights_row(w)
    return (np.abs(S) ** 2 * lam).sum(axis=1) / obs.T


def criterion_L(obs: ObservationRecord, w: WeightSequence, tau: float) -> float:
    if tau <= 0:
        raise ValueError("tau must be positive")
    return float(criterion_values(obs, w, [tau])[0])


def gamma_oracle(f: PeriodicSignal, theta: float, w: WeightSequence, T: float, tau, lobe_window: int | None = None):
    """Closed-form deterministic part ``sum_{k in Z} lam_k T |sum_l c_l phi_hat(a_{k,l})|^2``.

    Exact for band-limited ``f``; ``lobe_window`` is accepted for API
    compatibility with truncated variants and ignored.
    """
    if theta <= 0:
        raise ValueError("theta must be positive")
    tau = np.asarray(tau, dtype=float)
    if np.any(tau <= 0):
        raise ValueError("tau must be positive")
    l = np.arange(-f.K_f, f.K_f + 1)
    c = np.array([f.coeff(j) for j in l])
    total = np.zeros(tau.shape)
    for k in range(1, w.K_eff + 1):
        lam = w.lam[k]
        if lam == 0:
            continue
        for kk in (k, -k):
            a = (T / theta) * (l[None, :] - kk * theta / tau.reshape(-1, 1))
            inner = (c[None, :] * phi_hat(a)).sum(axis=1)
            total = total + lam * T * np.abs(inner.reshape(tau.shape)) ** 2
    return float(total) if total.ndim == 0 else total


def _k_eff(w: WeightSequence) -> int:
    return max(w.K_eff, 1)


def fd_step(tau: float, T: float, w: WeightSequence) -> float:
    """Finite-difference step ``tau^2 / (100 T K_eff)``."""
    return tau**2 / (100.0 * T * _k_eff(w))


class CurvatureCheck(NamedTuple):
    gamma_second: float
    minus_two_I_lambda: float
    rel_err: float
    gamma_first: float


def gamma_curvature_check(f: PeriodicSignal, theta: float, w: WeightSequence, T: float) -> CurvatureCheck:
    """Compare a central second difference of the oracle at ``theta`` with ``-2 I(lambda)``."""
    h = fd_step(theta, T, w)
    g = gamma_oracle(f, theta, w, T, np.array([theta - h, theta, theta + h]))
    second = (g[2] - 2 * g[1] + g[0]) / h**2
    first = (g[2] - g[0]) / (2 * h)
    target = -2.0 * weighted_fisher(f, theta, T, w, power=1)
    return CurvatureCheck(second, target, abs(second - target) / abs(target), first)


class Decomposition(NamedTuple):
    Gamma_hat: float
    X_hat: float
    Psi_hat: float


def decompose(obs: ObservationRecord, f: PeriodicSignal, theta: float, w: WeightSequence, tau: float) -> Decomposition:
    """Split ``2 L(tau)`` into deterministic, cross and pure-noise parts of a simulated record."""
    if obs.dw is None:
        raise ValueError("decompose needs a record with retained noise increments")
    if obs.theta_true is not None and not math.isclose(obs.theta_true, theta, rel_tol=1e-12):
        raise ValueError("record was not generated at this theta")
    K = w.K_eff
    if K < 1:
        return Decomposition(0.0, 0.0, 0.0)
    D = exponential_sums_grid(obs, [tau], K, "deterministic")[0]
    N = exponential_sums_grid(obs, [tau], K, "noise")[0]
    lam = _weights_row(w) / obs.T
    return Decomposition(
        float(2 * np.sum(lam * np.abs(D) ** 2)),
        float(4 * np.sum(lam * (D * np.conj(N)).real)),
        float(2 * np.sum(lam * np.abs(N) ** 2)),
    )


def criterion_derivs(
    obs: ObservationRecord,
    w: WeightSequence,
    tau: float,
    order: int = 1,
    interval: tuple[float, float] | None = None,
    h: float | None = None,
) -> float:
    """Central-difference ``L'(tau)`` or ``L''(tau)``."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    h = fd_step(tau, obs.T, w) if h is None else h
    if interval is not None and not (interval[0] + 2 * h <= tau <= interval[1] - 2 * h):
        raise ValueError("tau too close to the edge of the probed interval")
    v = criterion_values(obs, w, np.array([tau - h, tau, tau + h]))
    if order == 1:
        return float((v[2] - v[0]) / (2 * h))
    return float((v[2] - 2 * v[1] + v[0]) / h**2)

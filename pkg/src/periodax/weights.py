"""Weight sequences, the Pinsker minimax solution and the risk functional."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .signal import TWO_PI, PeriodicSignal, deriv_norm_sq


@dataclass(frozen=True, eq=False)
class WeightSequence:
    """Symmetric weights ``lam[k]`` for ``k = 0 .. N_T - 1``; zero from ``N_T`` on.

    ``relaxed=True`` skips the ``lam_0 = 0, lam_1 = 1`` constraints; useful
    only for pure-math evaluations of the risk functional.
    """

    lam: np.ndarray = field(repr=False)
    relaxed: bool = field(default=False, compare=False)

    def __post_init__(self):
        lam = np.array(self.lam, dtype=float).ravel()
        if np.any(lam < 0) or np.any(lam > 1) or not np.all(np.isfinite(lam)):
            raise ValueError("weights must lie in [0, 1]")
        if not self.relaxed:
            if lam.size < 2 or lam[0] != 0 or lam[1] != 1:
                raise ValueError("weights need lambda_0 = 0 and lambda_1 = 1")
        nz = np.flatnonzero(lam)
        lam = lam[: (int(nz[-1]) + 1 if nz.size else 1)].copy()
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)

    def __eq__(self, other):
        if not isinstance(other, WeightSequence):
            return NotImplemented
        return np.array_equal(self.lam, other.lam)

    __hash__ = None

    @property
    def N_T(self) -> int:
        return self.lam.size

    @property
    def K_eff(self) -> int:
        """Largest frequency carrying a nonzero weight."""
        return self.lam.size - 1

    def padded(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        m = min(n, self.lam.size)
        out[:m] = self.lam[:m]
        return out

    def is_valid(self) -> bool:
        lam = self.lam
        return lam.size >= 2 and lam[0] == 0 and lam[1] == 1

    def to_json(self) -> dict:
        return {"lambda": [float(v) for v in self.lam], "N_T": self.N_T}

    @classmethod
    def from_json(cls, obj: Mapping | str) -> "WeightSequence":
        if isinstance(obj, str):
            obj = json.loads(obj)
        lam = list(obj["lambda"])
        n = int(obj.get("N_T", len(lam)))
        lam = (lam + [0.0] * n)[:n]
        return cls(np.array(lam))


def projection_weights(N: int) -> WeightSequence:
    """``lam_k = 1`` for ``1 <= k < N``."""
    if N < 2:
        raise ValueError("projection weights need N >= 2 so that lambda_1 = 1")
    lam = np.ones(N)
    lam[0] = 0.0
    return WeightSequence(lam)


def _pinsker_terms(u: float, beta: float, T: float) -> list[float]:
    # (W/k)^(beta-1) - 1 via expm1/log1p in the excess u = W - 1, so that
    # roots with W barely above 1 keep full relative precision
    lw = math.log1p(u)
    terms = []
    for k in range(1, int(math.ceil(1.0 + u)) + 1):
        g = math.expm1((beta - 1) * (lw - math.log(k)))
        if g > 0:
            terms.append(2.0 * g * (TWO_PI * k) ** (2 * beta) / T)
    return terms


def pinsker_lhs_excess(u: float, beta: float, T: float) -> float:
    """``pinsker_lhs`` as a function of the excess ``u = W - 1``."""
    return math.fsum(_pinsker_terms(u, beta, T)) if u > 0 else 0.0


def pinsker_lhs(W: float, beta: float, T: float) -> float:
    """Left side of the Pinsker root equation: ``T^-1 sum_{k != 0} [(W/|k|)^(beta-1) - 1]_+ (2 pi |k|)^(2 beta)``."""
    return pinsker_lhs_excess(W - 1.0, beta, T)


def solve_WT_excess(beta: float, L: float, T: float, rtol: float = 1e-10) -> float:
    """Excess ``u = W_T - 1 > 0`` of the Pinsker root, by bracketed bisection on ``u``."""
    if beta < 2 or L <= 0 or T <= 0:
        raise ValueError("need beta >= 2, L > 0, T > 0")
    lo, hi = 0.0, 1.0
    while pinsker_lhs_excess(hi, beta, T) <= L:
        lo, hi = hi, 2.0 * hi
    while True:
        mid = 0.5 * (lo + hi)
        val = pinsker_lhs_excess(mid, beta, T)
        if abs(val - L) <= rtol * L or mid in (lo, hi):
            return mid
        if val < L:
            lo = mid
        else:
            hi = mid


def solve_WT(beta: float, L: float, T: float, rtol: float = 1e-10) -> float:
    """Root ``W_T > 1`` of ``pinsker_lhs(W) = L``.

    When ``W_T`` is within ~1e-6 of 1 the returned double cannot carry the
    root to 1e-10 in the residual; ``solve_WT_excess`` keeps ``W_T - 1`` exactly.
    """
    return 1.0 + solve_WT_excess(beta, L, T, rtol)


@dataclass(frozen=True)
class PinskerSolution:
    beta: float
    L: float
    T: float
    W_T: float
    W_excess: float
    q: np.ndarray = field(repr=False)
    lambda_star: np.ndarray = field(repr=False)
    r_T: float
    gamma_T: float

    @property
    def residual(self) -> float:
        return abs(pinsker_lhs_excess(self.W_excess, self.beta, self.T) - self.L)

    def weights(self) -> WeightSequence:
        """Clamped weights as a ``WeightSequence``; ``lambda_1`` is pinned to 1."""
        lam = self.lambda_star.copy()
        if lam.size < 2:
            lam = np.array([0.0, 1.0])
        lam[1] = 1.0
        return WeightSequence(lam)

    def saddle_weights(self) -> WeightSequence:
        return WeightSequence(self.q, relaxed=True)

    def to_json(self) -> dict:
        return {
            "beta": self.beta,
            "L": self.L,
            "T": self.T,
            "W_T": self.W_T,
            "W_excess": self.W_excess,
            "r_T": self.r_T,
            "gamma_T": self.gamma_T,
            "residual": self.residual,
            "lambda_star": [float(v) for v in self.lambda_star],
        }


def pinsker_solution(beta: float, L: float, T: float) -> PinskerSolution:
    if T < 3:
        raise ValueError("T must be >= 3 so that 1/log T < 1")
    u = solve_WT_excess(beta, L, T)
    W = 1.0 + u
    kmax = int(math.ceil(W))
    k = np.arange(kmax + 1, dtype=float)
    q = np.zeros(kmax + 1)
    q[1:] = np.clip(-np.expm1((beta - 1) * (np.log(k[1:]) - math.log1p(u))), 0.0, None)
    gamma = 1.0 / math.log(T)
    lam = q.copy()
    lam[1:][k[1:] <= gamma * W] = 1.0
    r = math.fsum(2.0 * (TWO_PI * k[1:]) ** 2 * q[1:] / T)
    q.setflags(write=False)
    lam.setflags(write=False)
    return PinskerSolution(beta, L, T, W, u, q, lam, r, gamma)


def risk_functional(f: PeriodicSignal, w: WeightSequence, T: float) -> float:
    """``sum_k (2 pi k)^2 ((1 - lam_k)^2 |c_k|^2 + lam_k^2 / T)`` over all of Z."""
    n = max(f.K_f, w.K_eff) + 1
    lam = w.padded(n)
    c2 = f.abs2(n)
    k2 = (TWO_PI * np.arange(n)) ** 2
    terms = k2[1:] * ((1 - lam[1:]) ** 2 * c2[1:] + lam[1:] ** 2 / T)
    return 2.0 * math.fsum(terms)


def fisher_information(f: PeriodicSignal, theta: float, T: float) -> float:
    """Leading term ``T^3 / (12 theta^4) ||f'||^2``."""
    if theta <= 0:
        raise ValueError("theta must be positive")
    return T**3 / (12.0 * theta**4) * deriv_norm_sq(f, 1)


def weighted_fisher(f: PeriodicSignal, theta: float, T: float, w: WeightSequence, power: int = 1) -> float:
    if theta <= 0:
        raise ValueError("theta must be positive")
    if power not in (1, 2):
        raise ValueError("power must be 1 or 2")
    n = max(f.K_f, w.K_eff) + 1
    lam = w.padded(n) ** power
    k2 = (TWO_PI * np.arange(n)) ** 2
    s = 2.0 * math.fsum(lam[1:] * k2[1:] * f.abs2(n)[1:])
    return T**3 / (12.0 * theta**4) * s


# --- assumption validators ---------------------------------------------------


@dataclass
class AssumptionRow:
    assumption: str
    T: float
    lhs: float
    rhs: float
    passed: bool

    @property
    def ratio(self) -> float:
        if self.rhs == 0:
            return 0.0 if self.lhs == 0 else math.inf
        return self.lhs / self.rhs


@dataclass
class WeightValidationReport:
    rho1: float
    C1: float
    structural_ok: bool
    rows: list[AssumptionRow] = field(default_factory=list)
    verdicts: dict[str, str] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.structural_ok and all(v in ("pass", "vacuous pass") for v in self.verdicts.values())

    def to_json(self) -> dict:
        return {
            "rho1": self.rho1,
            "C1": self.C1,
            "structural_ok": self.structural_ok,
            "verdicts": dict(self.verdicts),
            "rows": [
                {"assumption": r.assumption, "T": r.T, "lhs": r.lhs, "rhs": r.rhs, "ratio": r.ratio, "passed": r.passed}
                for r in self.rows
            ],
        }


def _nonincreasing(vals: Sequence[float], rtol: float = 1e-12) -> bool:
    return all(b <= a * (1 + rtol) + 1e-300 for a, b in zip(vals, vals[1:]))


def validate_weights(
    w: WeightSequence | Callable[[float], WeightSequence],
    f: PeriodicSignal,
    T_grid: Sequence[float],
    rho1: float = 0.5,
    C1: float = 1e5,
) -> WeightValidationReport:
    """Finite-T checks of (W0), (W1), (W2), (T) and the bias consequence (11).

    ``w`` may be a fixed sequence or a map ``T -> WeightSequence``.  The
    little-o conditions only have a meaning along ``T_grid``; they pass when
    the measured ratio is nonincreasing over the grid.
    """
    T_grid = [float(t) for t in T_grid]
    if not T_grid or any(b <= a for a, b in zip(T_grid, T_grid[1:])):
        raise ValueError("T_grid must be nonempty and increasing")
    get = w if callable(w) else (lambda T: w)
    seqs = [get(T) for T in T_grid]
    report = WeightValidationReport(rho1, C1, all(s.is_valid() for s in seqs))
    if not report.structural_ok:
        report.verdicts["structure"] = "fail"
        return report

    w0, t_ratio, bias_log = [], [], []
    vac_T = True
    for T, s in zip(T_grid, seqs):
        n = max(f.K_f, s.K_eff) + 1
        lam = s.padded(n)
        k = TWO_PI * np.arange(n)
        c2 = f.abs2(n)
        logT = math.log(T)

        r0 = s.N_T**4 / T
        w0.append(r0)
        report.rows.append(AssumptionRow("W0", T, s.N_T**4, T, True))

        lam_prime = math.sqrt(2.0 * math.fsum(lam**2 * k**2))
        rhs1 = rho1 * logT**2 * float(np.max(lam * k))
        report.rows.append(AssumptionRow("W1", T, lam_prime, rhs1, lam_prime >= rhs1))

        lhs2 = 2.0 * math.fsum(lam * k**4)
        report.rows.append(AssumptionRow("W2", T, lhs2, C1 * T, lhs2 <= C1 * T))

        b1 = 2.0 * math.fsum((1 - lam[1:]) * k[1:] ** 2 * c2[1:])
        b2 = 2.0 * math.fsum((1 - lam[1:]) ** 2 * k[1:] ** 2 * c2[1:])
        lhsT = b1**2 * logT
        vac = lhsT == 0 and b2 == 0
        vac_T &= vac
        report.rows.append(AssumptionRow("T", T, lhsT, b2, vac or lhsT <= b2))
        t_ratio.append(0.0 if vac else lhsT / b2)
        bias_log.append(b1 * logT)
        report.rows.append(AssumptionRow("bias_log", T, b1 * logT, bias_log[0], True))

    def verdict(name: str, ok: bool) -> None:
        report.verdicts[name] = "pass" if ok else "fail"

    verdict("W0", _nonincreasing(w0) and (len(w0) == 1 or w0[-1] < w0[0]))
    verdict("W1", all(r.passed for r in report.rows if r.assumption == "W1"))
    verdict("W2", all(r.passed for r in report.rows if r.assumption == "W2"))
    if vac_T:
        report.verdicts["T"] = "vacuous pass"
        report.verdicts["bias_log"] = "vacuous pass"
    else:
        verdict("T", all(r.passed for r in report.rows if r.assumption == "T") and _nonincreasing(t_ratio))
        verdict("bias_log", bias_log[-1] <= bias_log[0] * (1 + 1e-12))
    return report

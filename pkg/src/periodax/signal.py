"""Band-limited 1-periodic signals stored by their complex Fourier coefficients.

Only the non-negative frequencies are stored; ``c_{-k}`` is the complex
conjugate of ``c_k`` so the signal is real-valued by construction.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PeriodicSignal:
    """Real 1-periodic function ``f(x) = sum_k c_k exp(2 i pi k x)``.

    ``pos[k]`` holds ``c_k`` for ``k = 0 .. K_f``.
    """

    pos: np.ndarray = field(repr=False)

    def __post_init__(self):
        pos = np.array(self.pos, dtype=complex).ravel()
        if pos.size == 0:
            raise ValueError("signal needs at least the k=0 coefficient")
        if abs(pos[0].imag) > 1e-14 * max(1.0, abs(pos[0])):
            raise ValueError("c_0 must be real for a real-valued signal")
        pos[0] = pos[0].real
        # trim trailing zeros so K_f is the largest nonzero frequency
        nz = np.flatnonzero(pos)
        last = int(nz[-1]) if nz.size else 0
        pos = pos[: last + 1].copy()
        pos.setflags(write=False)
        object.__setattr__(self, "pos", pos)

    @classmethod
    def from_coeffs(cls, coeffs: Mapping[int, complex]) -> "PeriodicSignal":
        """Build from ``{k: c_k}``; negative keys must be conjugates of positive ones."""
        kmax = max((abs(int(k)) for k in coeffs), default=0)
        pos = np.zeros(kmax + 1, dtype=complex)
        for k, c in coeffs.items():
            k = int(k)
            if k >= 0:
                pos[k] = c
        for k, c in coeffs.items():
            k = int(k)
            if k < 0 and not np.isclose(c, np.conj(pos[-k]), rtol=1e-12, atol=1e-15):
                raise ValueError(f"c_{k} is not the conjugate of c_{-k}")
        return cls(pos)

    @classmethod
    def from_cosines(cls, amps: Mapping[int, float], offset: float = 0.0) -> "PeriodicSignal":
        """``offset + sum_k amps[k] * cos(2 pi k x)``."""
        coeffs = {0: offset}
        coeffs.update({int(k): a / 2.0 for k, a in amps.items() if k > 0})
        return cls.from_coeffs(coeffs)

    @property
    def K_f(self) -> int:
        return self.pos.size - 1

    def coeff(self, k: int) -> complex:
        k = int(k)
        if abs(k) > self.K_f:
            return 0j
        return complex(self.pos[k]) if k >= 0 else complex(np.conj(self.pos[-k]))

    def abs2(self, n: int | None = None) -> np.ndarray:
        """``|c_k|^2`` for ``k = 0 .. n-1`` (zero-padded beyond ``K_f``)."""
        n = self.pos.size if n is None else n
        out = np.zeros(n)
        m = min(n, self.pos.size)
        out[:m] = np.abs(self.pos[:m]) ** 2
        return out

    def real_basis(self) -> np.ndarray:
        """Coefficients ``a_1, a_2, ...`` on the basis ``1, sqrt2 cos, sqrt2 sin, ...``."""
        a = np.zeros(2 * self.K_f + 1)
        a[0] = self.pos[0].real
        a[1::2] = math.sqrt(2) * self.pos[1:].real
        a[2::2] = -math.sqrt(2) * self.pos[1:].imag
        return a

    def __call__(self, x):
        return eval_signal(self, x)

    def to_json(self) -> dict:
        return {"coeffs": [[k, float(c.real), float(c.imag)] for k, c in enumerate(self.pos) if c != 0 or k == 0]}

    @classmethod
    def from_json(cls, obj: Mapping | str) -> "PeriodicSignal":
        if isinstance(obj, str):
            obj = json.loads(obj)
        coeffs = {}
        for k, re, im in obj["coeffs"]:
            if int(k) < 0:
                raise ValueError("serialized signals store k >= 0 only")
            coeffs[int(k)] = complex(re, im)
        return cls.from_coeffs(coeffs)


@dataclass(frozen=True)
class FunctionClassParams:
    rho: float
    C0: float

    def __post_init__(self):
        if not 0 < self.rho <= self.C0:
            raise ValueError("need 0 < rho <= C0")

    @property
    def h(self) -> float:
        return self.rho / self.C0


@dataclass(frozen=True)
class SobolevBall:
    beta: float
    L: float

    def __post_init__(self):
        if self.beta < 2 or self.L <= 0:
            raise ValueError("need beta >= 2 and L > 0")

    def contains(self, f: PeriodicSignal) -> bool:
        return sobolev_norm(f, self.beta) <= self.L


def eval_signal(f: PeriodicSignal, x):
    """Evaluate ``f`` at ``x`` (scalar or array)."""
    x = np.asarray(x, dtype=float)
    k = np.arange(1, f.K_f + 1)
    z = np.exp(2j * np.pi * np.multiply.outer(x, k))
    c = f.pos[1:]
    total = f.pos[0] + z @ c + np.conj(z) @ np.conj(c)
    tol = 1e-10 * max(float(np.sum(np.abs(f.pos))), 1e-300)
    if np.any(np.abs(np.imag(total)) > tol):
        raise ArithmeticError("imaginary residual exceeds tolerance; coefficients not Hermitian")
    out = np.real(total)
    return float(out) if out.ndim == 0 else out


def _weighted_sum(f: PeriodicSignal, power: float) -> float:
    k = np.arange(1, f.K_f + 1, dtype=float)
    terms = (TWO_PI * k) ** (2 * power) * np.abs(f.pos[1:]) ** 2
    return 2.0 * math.fsum(terms)


def deriv_norm_sq(f: PeriodicSignal, m: int) -> float:
    """``sum_k (2 pi k)^{2m} |c_k|^2`` over all of Z; ``m = 1`` is ``||f'||^2``."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    s = _weighted_sum(f, m)
    if m == 0:
        s += abs(f.pos[0]) ** 2
    return s


def sobolev_norm(f: PeriodicSignal, beta: float) -> float:
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    return _weighted_sum(f, beta)


@dataclass
class ClassCheck:
    name: str
    passed: bool
    lhs: float
    rhs: float


@dataclass
class ClassReport:
    checks: list[ClassCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> ClassCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def validate_class(f: PeriodicSignal, params: FunctionClassParams) -> ClassReport:
    """Check (F1), (F2) and the harmonic separation inequality for every p in 2..K_f."""
    checks = []
    c1 = f.abs2(2)[1]
    checks.append(ClassCheck("F1", c1 >= params.rho, c1, params.rho))
    d2 = deriv_norm_sq(f, 2)
    checks.append(ClassCheck("F2", d2 <= params.C0, d2, params.C0))
    a2 = f.abs2()
    total = 2.0 * math.fsum(a2[1:])
    h = params.h
    for p in range(2, max(f.K_f, 2) + 1):
        lhs = 2.0 * math.fsum(a2[p::p])
        rhs = (1.0 - h) * total
        checks.append(ClassCheck(f"sep[{p}]", lhs <= rhs, lhs, rhs))
    return ClassReport(checks)

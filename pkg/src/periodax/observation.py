"""Simulation of ``dx(t) = f(t/theta) dt + dW(t)`` on a uniform midpoint grid and
the exponential-sum kernel shared by every criterion evaluation."""
from __future__ import annotations

import io
import math
import dataclasses
from dataclasses import dataclass, field

import numba
import numpy as np

from .signal import PeriodicSignal, eval_signal

SOURCES = ("data", "noise", "deterministic")

# samples between exact re-evaluations of the phase
_ANCHOR = 64


class CapacityError(ValueError):
    """Requested frequency exceeds what the grid step resolves."""


@dataclass(frozen=True)
class ObservationRecord:
    T: float
    dt: float
    midpoints: np.ndarray = field(repr=False)
    dx: np.ndarray = field(repr=False)
    dw: np.ndarray | None = field(default=None, repr=False)
    theta_true: float | None = None
    seed: int | None = None

    @property
    def n(self) -> int:
        return self.dx.size

    def capacity(self, tau: float) -> int:
        """Largest K with ``dt * K / tau <= 1/8``."""
        return int(math.floor(tau / (8.0 * self.dt) * (1 + 1e-12)))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write(f"# T={self.T!r}\n# dt={self.dt!r}\n# seed={self.seed!r}\n")
        if self.theta_true is not None:
            buf.write(f"# theta_true={self.theta_true!r}\n")
        cols = [self.midpoints, self.dx] + ([self.dw] if self.dw is not None else [])
        buf.write("t_mid,dx" + (",dw" if self.dw is not None else "") + "\n")
        for row in zip(*cols):
            buf.write(",".join(repr(float(v)) for v in row) + "\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text_or_path: str) -> "ObservationRecord":
        if "\n" not in text_or_path:
            with open(text_or_path, encoding="utf-8") as fh:
                text = fh.read()
        else:
            text = text_or_path
        meta = {}
        lines = text.splitlines()
        body = []
        for line in lines:
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key] = val
            else:
                body.append(line)
        header = body[0].split(",")
        data = np.array([[float(v) for v in row.split(",")] for row in body[1:]])
        seed = None if meta.get("seed", "None") == "None" else int(meta["seed"])
        theta = float(meta["theta_true"]) if "theta_true" in meta else None
        return cls(
            T=float(meta["T"]),
            dt=float(meta["dt"]),
            midpoints=data[:, 0],
            dx=data[:, 1],
            dw=data[:, 2] if "dw" in header else None,
            theta_true=theta,
            seed=seed,
        )


@dataclass(frozen=True)
class SimulationConfig:
    """``dt`` defaults to ``alpha_lo / (oversample * K_max)`` and is then shrunk
    slightly so that an integer number of steps covers ``[-T/2, T/2]``."""

    f: PeriodicSignal
    theta: float
    T: float
    K_max: int
    oversample: int = 16
    noise_on: bool = True
    seed: int | np.random.SeedSequence | None = 0
    alpha_lo: float | None = None
    keep_dw: bool = False
    dt: float | None = None

    def grid(self) -> tuple[int, float]:
        if self.dt is not None:
            target = self.dt
        else:
            lo = self.theta if self.alpha_lo is None else self.alpha_lo
            target = lo / (self.oversample * self.K_max)
        n = max(1, int(round(self.T / target)))
        return n, self.T / n

    def replace(self, **kw) -> "SimulationConfig":
        return dataclasses.replace(self, **kw)


def simulate_observation(cfg: SimulationConfig) -> ObservationRecord:
    if cfg.theta <= 0 or cfg.T <= 0 or cfg.K_max < 1:
        raise ValueError("theta, T must be positive and K_max >= 1")
    n, dt = cfg.grid()
    if dt >= cfg.theta / (8.0 * cfg.K_max):
        raise ValueError(f"dt={dt:g} too coarse for K_max={cfg.K_max} at theta={cfg.theta:g} (aliasing risk)")
    t = -cfg.T / 2 + (np.arange(n) + 0.5) * dt
    drift = eval_signal(cfg.f, t / cfg.theta) * dt
    if cfg.noise_on:
        rng = np.random.default_rng(cfg.seed)
        dw = rng.standard_normal(n) * math.sqrt(dt)
    else:
        dw = np.zeros(n)
    dx = drift + dw
    seed = cfg.seed if isinstance(cfg.seed, (int, type(None))) else None
    for a in (t, dx, dw):
        a.setflags(write=False)
    return ObservationRecord(
        T=cfg.T,
        dt=dt,
        midpoints=t,
        dx=dx,
        dw=dw if (cfg.keep_dw or not cfg.noise_on) else None,
        theta_true=cfg.theta,
        seed=seed,
    )


def _source_values(obs: ObservationRecord, source: str) -> np.ndarray:
    if source not in SOURCES:
        raise ValueError(f"unknown source {source!r}")
    if source == "data":
        return obs.dx
    if obs.dw is None:
        raise ValueError(f"source={source!r} needs retained noise increments")
    if source == "noise":
        return obs.dw
    return obs.dx - obs.dw


@numba.njit(cache=True)
def _sums_kernel(t, y, inv_tau, dt, K, out):
    n = t.size
    acc = np.zeros(K, dtype=np.complex128)
    for j in range(inv_tau.size):
        step = 2.0 * np.pi * dt * inv_tau[j]
        w = complex(math.cos(step), math.sin(step))
        z = 0j
        acc[:] = 0j
        for i in range(n):
            if i % _ANCHOR == 0:
                ph = 2.0 * np.pi * t[i] * inv_tau[j]
                z = complex(math.cos(ph), math.sin(ph))
            else:
                z = z * w
            p = z
            yi = y[i]
            for k in range(K):
                acc[k] += p * yi
                p = p * z
        for k in range(K):
            out[j, k] = acc[k]


def exponential_sums_grid(obs: ObservationRecord, taus, K: int, source: str = "data") -> np.ndarray:
    """``S[j, k-1] = sum_i exp(2 i pi k t_i / taus[j]) y_i`` for ``k = 1..K``.

    Powers in k come from repeated multiplication by ``z_i``; along the uniform
    time grid ``z_i`` is advanced by the step phase and re-anchored to an exact
    cos/sin every ``_ANCHOR`` samples.  Sums run index-ascending, one tau at a
    time, so a value never depends on how the tau grid is partitioned.
    """
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    if K < 1:
        raise ValueError("K must be >= 1")
    if np.any(taus <= 0):
        raise ValueError("tau must be positive")
    if obs.dt * K / taus.min() > 0.125 * (1 + 1e-12):
        raise CapacityError(f"K={K} exceeds grid capacity {obs.capacity(taus.min())} at tau={taus.min():g}")
    y = np.ascontiguousarray(_source_values(obs, source), dtype=float)
    out = np.empty((taus.size, K), dtype=complex)
    _sums_kernel(np.ascontiguousarray(obs.midpoints, dtype=float), y, 1.0 / taus, float(obs.dt), int(K), out)
    return out


def exponential_sums(obs: ObservationRecord, tau: float, K: int, source: str = "data") -> np.ndarray:
    """``S_1 .. S_K`` at a single trial period ``tau``."""
    return exponential_sums_grid(obs, [tau], K, source)[0]

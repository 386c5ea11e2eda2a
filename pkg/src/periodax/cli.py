"""``periodax`` command line: one JSON config per run, CSV/JSON outputs.

Exit codes: 0 success, 2 configuration error, 3 runtime fault.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .criterion import CriterionProfile, gamma_oracle
from .estimator import EstimatorConfig, estimate_period
from .observation import SimulationConfig, simulate_observation
from .risk_lab import ExperimentConfig, run_mc_risk, second_order_curve
from .signal import PeriodicSignal
from .weights import (
    PinskerSolution,
    WeightSequence,
    pinsker_solution,
    projection_weights,
    validate_weights,
)

log = logging.getLogger("periodax")

SUBCOMMANDS = ("simulate", "estimate", "pinsker", "mc-risk", "rate-curve", "gamma-scan", "validate-weights")


class ConfigError(Exception):
    pass


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]


def _req(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigError(f"missing key {key!r}")
    return cfg[key]


def _signal(cfg: dict) -> PeriodicSignal:
    return PeriodicSignal.from_json(_req(cfg, "signal"))


def _weights(spec: Any, T: float) -> WeightSequence | PinskerSolution:
    """``{"projection": N}``, ``{"lambda": [...]}`` or ``{"pinsker": {"beta": b, "L": l}}``."""
    if not isinstance(spec, dict):
        raise ConfigError("weights must be an object")
    if "projection" in spec:
        return projection_weights(int(spec["projection"]))
    if "lambda" in spec:
        return WeightSequence.from_json(spec)
    if "pinsker" in spec:
        p = spec["pinsker"]
        return pinsker_solution(float(p["beta"]), float(p["L"]), T)
    raise ConfigError("weights need one of 'projection', 'lambda', 'pinsker'")


def _as_seq(w: WeightSequence | PinskerSolution) -> WeightSequence:
    return w.weights() if isinstance(w, PinskerSolution) else w


def _est(cfg: dict) -> EstimatorConfig:
    return EstimatorConfig(
        theta_lo=float(_req(cfg, "theta_lo")),
        theta_hi=float(_req(cfg, "theta_hi")),
        grid_step_divisor=float(cfg.get("grid_step_divisor", 8.0)),
        threshold_exponent=float(cfg.get("threshold_exponent", 0.25)),
        threshold_override=cfg.get("threshold_override"),
        refine_rel_tol=float(cfg.get("refine_rel_tol", 1e-9)),
        max_grid_points=int(cfg.get("max_grid_points", 10**7)),
    )


def _sim(cfg: dict, f: PeriodicSignal, w: WeightSequence, alpha_lo: float | None) -> SimulationConfig:
    K = int(cfg.get("K_max", max(w.K_eff, f.K_f)))
    return SimulationConfig(
        f=f,
        theta=float(_req(cfg, "theta")),
        T=float(_req(cfg, "T")),
        K_max=K,
        oversample=int(cfg.get("oversample", 16)),
        noise_on=bool(cfg.get("noise_on", True)),
        seed=int(cfg.get("seed", 0)),
        alpha_lo=alpha_lo if alpha_lo is not None else cfg.get("alpha_lo"),
        keep_dw=bool(cfg.get("keep_dw", False)),
    )


def _write(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _json_text(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# each builder parses the config (errors -> exit 2) and returns a runner (errors -> exit 3)


def _build_simulate(cfg, args):
    f = _signal(cfg)
    K = int(cfg.get("K_max", f.K_f or 1))
    sim = _sim({**cfg, "K_max": K}, f, projection_weights(2), None)

    def run():
        obs = simulate_observation(sim)
        text = obs.to_csv()
        return f"# config_hash={config_hash(cfg)}\n" + text

    return run


def _build_estimate(cfg, args):
    f = _signal(cfg)
    T = float(_req(cfg, "T"))
    w = _as_seq(_weights(_req(cfg, "weights"), T))
    est = _est(cfg)
    sim = _sim(cfg, f, w, est.theta_lo)

    def run():
        obs = simulate_observation(sim)
        trace = estimate_period(obs, w, est)
        if args.profile_out:
            _write(args.profile_out, trace.profile.to_csv(header=f"config_hash={config_hash(cfg)}"))
        return _json_text({"config_hash": config_hash(cfg), **trace.to_json()})

    return run


def _build_pinsker(cfg, args):
    beta, L, T = float(_req(cfg, "beta")), float(_req(cfg, "L")), float(_req(cfg, "T"))
    if beta < 2 or L <= 0 or T < 3:
        raise ConfigError("need beta >= 2, L > 0, T >= 3")
    return lambda: _json_text({"config_hash": config_hash(cfg), **pinsker_solution(beta, L, T).to_json()})


def _experiment(cfg) -> ExperimentConfig:
    f = _signal(cfg)
    T = float(_req(cfg, "T"))
    weights = _weights(_req(cfg, "weights"), T)
    w = _as_seq(weights)
    est = _est(cfg)
    return ExperimentConfig(
        sim=_sim(cfg, f, w, est.theta_lo),
        weights=weights,
        est=est,
        n_reps=int(_req(cfg, "n_reps")),
        master_seed=int(cfg.get("master_seed", 0)),
        estimator_kind=cfg.get("estimator_kind", "theta_star"),
    )


def _build_mc_risk(cfg, args):
    exp = _experiment(cfg)

    def run():
        rep = run_mc_risk(exp, args.workers)
        if args.out.endswith(".csv"):
            return rep.to_csv(header=f"config_hash={config_hash(cfg)}")
        return _json_text({"config_hash": config_hash(cfg), **rep.to_json()})

    return run


def _build_rate_curve(cfg, args):
    T_list = [float(t) for t in _req(cfg, "T_list")]
    exp = _experiment({**cfg, "T": T_list[0], "n_reps": max(2, int(cfg.get("n_reps", 2)))})
    scheme = cfg.get("scheme", "pinsker")
    kw = dict(
        weight_scheme=scheme,
        beta=float(cfg.get("beta", 2.0)),
        L=cfg.get("L"),
        N=cfg.get("N"),
        n_reps=int(cfg.get("n_reps", 0)),
    )

    def run():
        table = second_order_curve(exp, T_list, workers=args.workers, **kw)
        return table.to_csv(header=f"config_hash={config_hash(cfg)}")

    return run


def _build_gamma_scan(cfg, args):
    f = _signal(cfg)
    T, theta = float(_req(cfg, "T")), float(_req(cfg, "theta"))
    w = _as_seq(_weights(_req(cfg, "weights"), T))
    taus = np.linspace(float(_req(cfg, "tau_lo")), float(_req(cfg, "tau_hi")), int(cfg.get("n_points", 200)))

    def run():
        g = gamma_oracle(f, theta, w, T, taus)
        return CriterionProfile(taus, np.asarray(g)).to_csv(header=f"config_hash={config_hash(cfg)}").replace("tau,L\n", "tau,Gamma\n", 1)

    return run


def _build_validate(cfg, args):
    f = _signal(cfg)
    T_grid = [float(t) for t in _req(cfg, "T_grid")]
    spec = _req(cfg, "weights")
    if isinstance(spec, dict) and spec.get("projection") == "log4":
        w = lambda T: projection_weights(max(2, math.ceil(math.log(T) ** 4)))  # noqa: E731
    elif isinstance(spec, dict) and "pinsker" in spec:
        w = lambda T: _as_seq(_weights(spec, T))  # noqa: E731
    else:
        w = _as_seq(_weights(spec, T_grid[0]))
    rho1, C1 = float(cfg.get("rho1", 0.5)), float(cfg.get("C1", 1e5))

    def run():
        rep = validate_weights(w, f, T_grid, rho1, C1)
        return _json_text({"config_hash": config_hash(cfg), **rep.to_json()})

    return run


BUILDERS: dict[str, Callable] = {
    "simulate": _build_simulate,
    "estimate": _build_estimate,
    "pinsker": _build_pinsker,
    "mc-risk": _build_mc_risk,
    "rate-curve": _build_rate_curve,
    "gamma-scan": _build_gamma_scan,
    "validate-weights": _build_validate,
}


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="periodax", description="Semi-parametric period estimation toolkit")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("config", help="JSON config file")
    p.add_argument("-o", "--out", required=True, help="output path (CSV or JSON)")
    p.add_argument("--profile-out", help="estimate: also write the criterion profile CSV here")
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: $PERIODAX_WORKERS or 1)")
    p.add_argument("--log-level", default="WARNING")
    return p


def dispatch(argv: list[str] | None = None) -> int:
    try:
        args = make_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=args.log_level.upper(), stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    if args.workers is None and "PERIODAX_WORKERS" in os.environ:
        args.workers = int(os.environ["PERIODAX_WORKERS"])
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        runner = BUILDERS[args.subcommand](cfg, args)
    except (OSError, json.JSONDecodeError, ConfigError, KeyError, TypeError, ValueError) as e:
        print(f"error: config: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    try:
        text = runner()
    except Exception as e:  # noqa: BLE001
        log.debug("runtime fault", exc_info=True)
        print(f"error: runtime: {type(e).__name__}: {e}", file=sys.stderr)
        return 3
    _write(args.out, text)
    log.info("wrote %s", args.out)
    return 0


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()

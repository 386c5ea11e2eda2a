"""Predicted second-order term against T for Pinsker and fixed projection weights.

    python scripts/rate_curve.py --T 1e3 1e4 1e5 1e6
    python scripts/rate_curve.py --T 50 100 200 --reps 500   # adds simulated values
"""
import argparse
import math

from periodax import EstimatorConfig, PeriodicSignal, SimulationConfig, projection_weights
from periodax.risk_lab import ExperimentConfig, second_order_curve


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T", type=float, nargs="+", default=[1e3, 1e4, 1e5, 1e6])
    ap.add_argument("--beta", type=float, default=2.0)
    ap.add_argument("--N", type=int, default=3)
    ap.add_argument("--reps", type=int, default=0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()

    f = PeriodicSignal.from_cosines({1: math.sqrt(2), 3: 0.15 * math.sqrt(2)})
    sim = SimulationConfig(f, 1.0, args.T[0], K_max=3, alpha_lo=0.9)
    base = ExperimentConfig(sim, projection_weights(args.N), EstimatorConfig(0.9, 1.1), 2, args.seed)
    for scheme in ("pinsker", "projection"):
        tab = second_order_curve(base, args.T, scheme, beta=args.beta, N=args.N, n_reps=args.reps, workers=args.workers)
        print(f"{scheme}: log-log slope {tab.slope:+.4f}")
        print(f"  {'T':>10} {'rate':>12} {'predicted':>10} {'measured':>10} {'se':>8}")
        for r in tab.rows:
            print(f"  {r.T:10.4g} {r.rate_value:12.5g} {r.predicted_second_order:10.4f} {r.measured_second_order:10.4f} {r.measured_std_error:8.4f}")


if __name__ == "__main__":
    main()

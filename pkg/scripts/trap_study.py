"""How often theta* locks onto the 2 theta subharmonic, as a function of the threshold factor.

With lambda_2 = 1 the k=2 term gives Gamma(2 theta) = Gamma(theta). The
smallest-candidate rule should still pick tau ~ theta.

    python scripts/trap_study.py --reps 500 --factors 0.3 0.6 0.9 0.99
"""
import argparse
import math

import numpy as np

from periodax import EstimatorConfig, PeriodicSignal, SimulationConfig, WeightSequence
from periodax.risk_lab import ExperimentConfig, replicate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T", type=float, default=50.0)
    ap.add_argument("--reps", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--factors", type=float, nargs="*", default=[], help="threshold overrides; default rule always included")
    args = ap.parse_args()

    f = PeriodicSignal.from_cosines({1: math.sqrt(2)})
    w = WeightSequence([0, 1, 1])
    sim = SimulationConfig(f, 1.0, args.T, K_max=2, alpha_lo=0.9)
    print(f"T={args.T:g}  reps={args.reps}  default factor 1 - log(T)^(-1/4) = {1 - math.log(args.T) ** -0.25:.4f}")
    for factor in [None, *args.factors]:
        est = EstimatorConfig(0.9, 2.3, threshold_override=factor)
        est_vals = replicate(ExperimentConfig(sim, w, est, args.reps, args.seed), args.workers)
        trapped = np.mean(np.abs(est_vals - 2.0) < 0.1)
        near = np.mean(np.abs(est_vals - 1.0) < 0.1)
        label = "default" if factor is None else f"{factor:.3f}"
        print(f"  factor {label:>8}: near 2 theta {trapped:7.2%}   near theta {near:7.2%}")


if __name__ == "__main__":
    main()

"""Covariances of the 2x2 second-order example at T = 0.3 s, plus a Monte Carlo check.

    python3 scripts/reproduce_mimo.py [--trials 10000] [--seed 12345]
"""

import argparse
import time

import numpy as np

from covkit import metrics, oracles, scenarios


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--exposure", type=float, default=0.3)
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=12345)
    ap.add_argument("--step", type=float, default=1e-3)
    args = ap.parse_args()

    sys_ = scenarios.mimo_model()
    t0 = time.perf_counter()
    pc, _ = metrics.pointing_covariances(sys_, args.exposure)
    print(f"analytic ({(time.perf_counter() - t0) * 1e3:.1f} ms)")
    np.set_printoptions(precision=5, suppress=True)
    for name, m in (("Sigma_A", pc.sigma_A), ("Sigma_D", pc.sigma_D),
                    ("Sigma_S", pc.sigma_S), ("Sigma_J", pc.sigma_J)):
        print(f"{name} =\n{m}")

    if args.trials:
        t0 = time.perf_counter()
        rep = oracles.monte_carlo_metrics(sys_, args.exposure, args.step, args.trials, args.seed)
        print(f"\nMonte Carlo, {args.trials} trials ({time.perf_counter() - t0:.1f} s)")
        for key, z in rep.z_scores(pc).items():
            print(f"Sigma_{key}: estimate\n{rep.estimates()[key]}\n  z =\n{z}")


if __name__ == "__main__":
    main()

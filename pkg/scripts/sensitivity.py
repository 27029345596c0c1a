"""Input sensitivity magnitude of the nominal and the slower satellite controller.

Prints the x- and z-axis gains at the disturbance peak and optionally writes the
curves as CSV.

    python3 scripts/sensitivity.py --out sensitivity.csv
"""

import argparse

import numpy as np

from covkit import scenarios
from covkit.cli import write_csv
from covkit.ss import freq_response


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--slow-scale", type=float, default=0.25)
    ap.add_argument("--points", type=int, default=300)
    ap.add_argument("--out")
    args = ap.parse_args()

    models = {"nominal": scenarios.satellite_input_sensitivity(1.0),
              "slow": scenarios.satellite_input_sensitivity(args.slow_scale)}
    w0 = scenarios.PEAK_FREQ
    for name, m in models.items():
        g = np.abs(np.diag(freq_response(m, [w0]).gains[0]))
        print(f"{name:8s} |S_i(j{w0})|  x {20 * np.log10(g[0]):+.2f} dB   "
              f"z {20 * np.log10(g[2]):+.2f} dB")

    if args.out:
        w = np.logspace(-1, np.log10(30.0), args.points)
        curves = {k: freq_response(m, w).magnitude_db() for k, m in models.items()}
        rows = [[w[i], curves["nominal"][i, 0, 0], curves["slow"][i, 0, 0],
                 curves["nominal"][i, 2, 2], curves["slow"][i, 2, 2]] for i in range(w.size)]
        write_csv(args.out, ["omega", "x_nominal_dB", "x_slow_dB", "z_nominal_dB", "z_slow_dB"], rows)


if __name__ == "__main__":
    main()

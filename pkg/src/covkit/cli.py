"""Command-line interface: ``covkit {analyze,sweep,freqresp,simulate,validate}``.

Exit codes: 0 success, 1 balance/internal-consistency failure, 2 model parse
error, 3 stability error, 4 feedthrough error, 5 frequency-response
singularity, 6 other input errors.
"""

import argparse
import io
import os
import sys

import numpy as np

from . import metrics, modelio, oracles
from .errors import (
    CovkitError,
    ConsistencyError,
    FeedthroughError,
    InputError,
    ModelParseError,
    SingularityError,
    StabilityError,
)
from .linalg import eigenvalues, is_hurwitz, stability_margin
from .ss import freq_response

EXIT_OK, EXIT_BALANCE, EXIT_PARSE, EXIT_STABILITY, EXIT_FEEDTHROUGH, EXIT_SINGULAR, EXIT_INPUT = range(7)
TOL_ENV = "COVKIT_TOL_BALANCE"


def tol_balance():
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return metrics.DEFAULT_TOL_BALANCE
    try:
        tol = float(raw)
    except ValueError:
        raise InputError(f"{TOL_ENV}={raw!r} is not a number")
    if not tol > 0:
        raise InputError(f"{TOL_ENV} must be positive")
    return tol


def fmt(x):
    return f"{x:.16e}"


def result_header(n_p):
    cols = ["T"]
    for tag in ("SigmaA", "SigmaD", "SigmaS12", "SigmaJ"):
        cols += [f"{tag}_{i + 1}{j + 1}" for i in range(n_p) for j in range(n_p)]
    cols.append("balance_residual")
    return cols


def result_row(pc):
    vals = [pc.T]
    for m in (pc.sigma_A, pc.sigma_D, pc.smear12, pc.sigma_J):
        vals += list(m.ravel())
    vals.append(pc.balance_residual)
    return vals


def write_csv(path, header, rows):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")
    if path is None or path == "-":
        sys.stdout.write(buf.getvalue())
    else:
        modelio.atomic_write_text(path, buf.getvalue())


def print_matrix(name, M, out=None):
    out = sys.stdout if out is None else out
    print(f"{name} =", file=out)
    for row in np.atleast_2d(M):
        print("  [" + "  ".join(f"{v: .6g}" for v in row) + "]", file=out)


def _load(args):
    mf = modelio.load_model(args.model)
    if getattr(args, "dump_model", None):
        modelio.dump_model(mf.model, args.dump_model)
    return mf


def cmd_analyze(args):
    mf = _load(args)
    cfg = metrics.ExposureConfig(args.exposure, tol_balance=tol_balance())
    pc, _ = metrics.pointing_covariances(mf.model, cfg)
    print(f"model {mf.path}  n_x={mf.model.n_x} n_p={mf.model.n_p}  T={cfg.T:g} s")
    print_matrix("Sigma_A (accuracy)", pc.sigma_A)
    print_matrix("Sigma_D (displacement)", pc.sigma_D)
    print_matrix("Sigma_S (smear)", pc.sigma_S)
    print_matrix("Sigma_J (jitter)", pc.sigma_J)
    print(f"balance residual {pc.balance_residual:.3e}")
    if args.out:
        write_csv(args.out, result_header(pc.n_p), [result_row(pc)])
    return EXIT_OK if pc.balance_residual <= cfg.tol_balance else EXIT_BALANCE


def cmd_sweep(args):
    if not 0 < args.tmin < args.tmax:
        raise InputError("need 0 < tmin < tmax")
    if args.points < 2:
        raise InputError("need at least 2 points")
    mf = _load(args)
    tol = tol_balance()
    T_list = np.logspace(np.log10(args.tmin), np.log10(args.tmax), args.points)
    T_list[0], T_list[-1] = args.tmin, args.tmax
    results = metrics.exposure_sweep(mf.model, T_list, tol_balance=tol)
    write_csv(args.out, result_header(mf.model.n_p), [result_row(pc) for pc in results])
    worst = max(pc.balance_residual for pc in results)
    print(f"{len(results)} exposures, worst balance residual {worst:.3e}", file=sys.stderr)
    return EXIT_OK if worst <= tol else EXIT_BALANCE


def cmd_freqresp(args):
    if not 0 < args.wmin < args.wmax:
        raise InputError("need 0 < wmin < wmax")
    if args.points < 2:
        raise InputError("need at least 2 points")
    mf = _load(args)
    model = mf.model
    omegas = np.logspace(np.log10(args.wmin), np.log10(args.wmax), args.points)
    omegas[0], omegas[-1] = args.wmin, args.wmax
    header = ["omega"] + [f"G_{i + 1}{j + 1}_dB" for i in range(model.n_p)
                          for j in range(model.n_u)] + ["singular"]
    rows, n_bad = [], 0
    for w in omegas:
        try:
            db = freq_response(model, [w]).magnitude_db()[0].ravel()
            rows.append([w, *db, "0"])
        except SingularityError as exc:
            n_bad += 1
            print(f"warning: {exc}", file=sys.stderr)
            rows.append([w, *(["nan"] * (model.n_p * model.n_u)), "1"])
    write_csv(args.out, header, rows)
    return EXIT_SINGULAR if n_bad else EXIT_OK


def cmd_simulate(args):
    mf = _load(args)
    model = mf.model
    rep = oracles.monte_carlo_metrics(model, args.exposure, args.step, args.trials, args.seed)
    pc, _ = metrics.pointing_covariances(model, metrics.ExposureConfig(args.exposure,
                                                                       tol_balance=tol_balance()))
    ref = {"A": pc.sigma_A, "D": pc.sigma_D, "S": pc.sigma_S, "J": pc.sigma_J}
    z = rep.z_scores(pc)
    rows = []
    for key in "ADSJ":
        est, se = rep.estimates()[key], rep.stderrs()[key]
        for i in range(model.n_p):
            for j in range(model.n_p):
                rows.append([f"Sigma{key}", str(i + 1), str(j + 1), est[i, j], se[i, j],
                             ref[key][i, j], z[key][i, j]])
    write_csv(args.out, ["metric", "i", "j", "estimate", "stderr", "analytic", "z"], rows)
    zmax = max(float(np.abs(v).max()) for v in z.values())
    print(f"{rep.n_trials} trials, seed {rep.seed}, h={rep.h:g} s, T={rep.T:g} s")
    for key in "ADSJ":
        print_matrix(f"Sigma_{key} estimate", rep.estimates()[key])
        print_matrix("  z-scores", z[key])
    print(f"max |z| = {zmax:.2f}")
    return EXIT_OK


def cmd_validate(args):
    mf = _load(args)
    model = mf.model
    print(f"model {mf.path}")
    print(f"  n_x = {model.n_x}, n_u = {model.n_u}, n_p = {model.n_p}")
    for name, sub in mf.named.items():
        if name != "output":
            print(f"  {name}: n_x={sub.n_x} ({sub.n_p}x{sub.n_u})")
    status = EXIT_OK
    if model.n_x:
        lam = eigenvalues(model.A)
        order = np.argsort(-lam.real)
        print("  eigenvalues (largest real part first):")
        for k in order:
            print(f"    {lam[k].real: .6e} {lam[k].imag:+.6e}j")
        if is_hurwitz(model.A):
            print(f"  stability: stable (max Re = {lam.real.max():.3e}, "
                  f"margin {stability_margin(model.A):.1e})")
        else:
            worst = lam[order[0]]
            print(f"  stability: UNSTABLE, eigenvalue {worst.real:.6g}{worst.imag:+.6g}j "
                  f"has non-negative real part")
            status = EXIT_STABILITY
    else:
        print("  stability: static model (no states)")
    if np.any(model.D != 0):
        print(f"  WARNING feedthrough: D is nonzero (max |D| = {np.abs(model.D).max():.3g}); "
              "white noise would reach the output directly")
    else:
        print("  feedthrough: D = 0")
    for name, det in mf.loops:
        verdict = "well-posed" if abs(det) > 1e-12 else "ILL-POSED"
        print(f"  loop {name}: det(I - sign*D_fb*D) = {det:.6g} ({verdict})")
    return status


def build_parser():
    p = argparse.ArgumentParser(prog="covkit", description=(
        "Accuracy, displacement, smear and jitter covariances of LTI systems driven by white noise"))
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--model", required=True,
                        help="model JSON file (or the name of a bundled scenario)")
        sp.add_argument("--dump-model", metavar="PATH",
                        help="also write the assembled realization as JSON")
        sp.set_defaults(func=func)
        return sp

    sp = add("analyze", cmd_analyze, "covariances for one exposure time")
    sp.add_argument("--exposure", type=float, required=True, help="exposure time T [s]")
    sp.add_argument("--out", help="CSV output path")

    sp = add("sweep", cmd_sweep, "covariances over log-spaced exposure times")
    sp.add_argument("--tmin", type=float, required=True)
    sp.add_argument("--tmax", type=float, required=True)
    sp.add_argument("--points", type=int, default=30)
    sp.add_argument("--out", default="-")

    sp = add("freqresp", cmd_freqresp, "magnitude response in dB per channel")
    sp.add_argument("--wmin", type=float, required=True, help="rad/s")
    sp.add_argument("--wmax", type=float, required=True, help="rad/s")
    sp.add_argument("--points", type=int, default=200)
    sp.add_argument("--out", default="-")

    sp = add("simulate", cmd_simulate, "Monte Carlo estimates with z-scores")
    sp.add_argument("--exposure", type=float, required=True)
    sp.add_argument("--step", type=float, required=True)
    sp.add_argument("--trials", type=int, default=10000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default="-")

    add("validate", cmd_validate, "dimensions, eigenvalues, stability and feedthrough report")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ModelParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except StabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STABILITY
    except FeedthroughError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FEEDTHROUGH
    except ConsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BALANCE
    except CovkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""Command-line driver: writes CSV arrays and JSON reports into ``--out``.

Exit status is 0 on success, 1 when a verification fails and 2 when an
argument is rejected.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io
from .acceptance import CRITERIA, Z_MAX, run_check
from .evolution import (
    CovarianceQuery,
    apply_semigroup,
    cov_space_time,
    cov_time,
    covariance_tail_bound,
    jump_kernel,
)
from .fields import estimate_spectrum, sample_field
from .harmonics import SpherePoint, SphereGrid, analyze, synthesize
from .rng import make_rng, map_chunks, mean_and_se
from .spectra import effective_spectrum, parse_spectrum
from .sphere_walk import mc_cov_space, mc_cov_time, sample_subordinate_path
from .subordinators import parse_psi, psi, sample as sample_subordinator

# stream keys so each command draws from its own family of streams
_KEY = {"synth": 1, "evolve": 2, "cov-check": 3, "walk": 4, "subord-test": 5}


class UsageError(ValueError):
    pass


def _seed(text):
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def _pos_int(text):
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _time(text):
    value = float(text)
    if not (value >= 0) or math.isnan(value):
        raise argparse.ArgumentTypeError("times must be non-negative")
    return value


def _cos(text):
    value = float(text)
    if not -1 <= value <= 1:
        raise argparse.ArgumentTypeError("cos-angle must lie in [-1, 1]")
    return value


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser():
    p = argparse.ArgumentParser(prog="sphaera", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, *, seed=True, spectrum=False, psi_=False, out=True, threads=False):
        if seed:
            sp.add_argument("--seed", type=_seed, default=0)
        if spectrum:
            sp.add_argument("--spectrum", default="power:A=1,gamma=3")
            sp.add_argument("--L", type=_nonneg_int, default=16)
        if psi_:
            sp.add_argument("--psi", default="stable:alpha=0.5")
        if out:
            sp.add_argument("--out", type=Path, default=Path("."))
        if threads:
            sp.add_argument("--threads", type=_pos_int, default=1)
        return sp

    sp = common(sub.add_parser("synth", help="sample coefficients and a gridded map"), spectrum=True)
    sp.add_argument("--nphi", type=_pos_int, default=None)

    sp = common(sub.add_parser("evolve", help="apply the subordinate semigroup"), spectrum=True, psi_=True)
    sp.add_argument("--t", type=_time, default=1.0)
    sp.add_argument("--coefficients", type=Path, default=None,
                    help="input coefficients CSV (default: sample one from --spectrum)")

    sp = common(sub.add_parser("spectrum", help="estimate C_l from coefficients or a map"), seed=False)
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--coefficients", type=Path)
    src.add_argument("--map", type=Path)

    sp = common(sub.add_parser("cov-check", help="Monte-Carlo covariance against the series"),
                spectrum=True, psi_=True, threads=True)
    sp.set_defaults(L=8)
    sp.add_argument("--mode", choices=("space", "time"), default="space")
    sp.add_argument("--t1", type=_time, default=0.5)
    sp.add_argument("--t2", type=_time, default=0.5)
    sp.add_argument("--cos-angle", type=_cos, default=0.5)
    sp.add_argument("--N", type=_pos_int, default=20_000)

    sp = common(sub.add_parser("cov", help="covariance series value"), seed=False, spectrum=True, psi_=True)
    sp.add_argument("--t1", type=_time, default=0.0)
    sp.add_argument("--t2", type=_time, default=0.0)
    sp.add_argument("--cos-angle", type=_cos, default=1.0)

    sp = common(sub.add_parser("walk", help="one subordinate Brownian path"), psi_=True)
    sp.add_argument("--times", type=_floats, default=None, help="comma-separated observation times")
    sp.add_argument("--t", type=_time, default=1.0, help="final time when --times is absent")
    sp.add_argument("--steps", type=_pos_int, default=100)
    sp.add_argument("--theta0", type=float, default=0.0)
    sp.add_argument("--phi0", type=float, default=0.0)

    sp = common(sub.add_parser("kernel", help="tabulate the jump kernel"), seed=False, psi_=True)
    sp.add_argument("--L", type=_nonneg_int, default=64, help="truncation degree")
    sp.add_argument("--l-min", type=_nonneg_int, default=1)
    sp.add_argument("--angles", type=_pos_int, default=181)

    sp = common(sub.add_parser("subord-test", help="Laplace-transform check of the sampler"),
                psi_=True, threads=True)
    sp.add_argument("--t", type=_time, default=1.0)
    sp.add_argument("--mu", type=_floats, default=[0.5, 1.0, 2.0])
    sp.add_argument("--N", type=_pos_int, default=100_000)

    common(sub.add_parser("verify-all", help="run the acceptance suite"), threads=True)
    return p


def _meta(args, **extra):
    meta = {"version": __version__, "command": args.command}
    if hasattr(args, "seed"):
        meta["seed"] = args.seed
    return {**meta, **extra}


def _write_json(path, payload):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------


def cmd_synth(args):
    s = parse_spectrum(args.spectrum, args.L)
    c = sample_field(s, make_rng(args.seed, _KEY["synth"]))
    nphi = 2 * args.L + 1 if args.nphi is None else args.nphi
    grid = SphereGrid.gauss_legendre(args.L, args.L + 1, nphi)
    meta = _meta(args, spectrum=args.spectrum)
    io.write_coefficients(args.out / "coefficients.csv", c, **meta)
    io.write_map(args.out / "map.csv", synthesize(c, grid), **meta)
    return 0


def cmd_evolve(args):
    exp = parse_psi(args.psi)
    s = parse_spectrum(args.spectrum, args.L)
    if args.coefficients is not None:
        c, src_meta = io.read_coefficients(args.coefficients)
        args.seed = int(src_meta.get("seed", args.seed))
        if c.bandlimit != args.L:
            s = parse_spectrum(args.spectrum, c.bandlimit)
    else:
        c = sample_field(s, make_rng(args.seed, _KEY["synth"]))
    meta = _meta(args, spectrum=args.spectrum, psi=exp.spec, t=args.t)
    io.write_coefficients(args.out / "evolved_coefficients.csv", apply_semigroup(c, exp, args.t), **meta)
    io.write_spectrum(args.out / "effective_spectrum.csv", effective_spectrum(s, exp, args.t), **meta)
    return 0


def cmd_spectrum(args):
    if args.coefficients is not None:
        c, meta = io.read_coefficients(args.coefficients)
    else:
        fmap, meta = io.read_map(args.map)
        c = analyze(fmap)
    extra = {k: v for k, v in meta.items() if k in ("seed", "spectrum")}
    io.write_spectrum(args.out / "spectrum.csv", estimate_spectrum(c), **_meta(args, **extra))
    return 0


def cmd_cov_check(args):
    s = parse_spectrum(args.spectrum, args.L)
    exp = parse_psi(args.psi)
    rng = make_rng(args.seed, _KEY["cov-check"])
    x = SpherePoint(0.0, 0.0)
    if args.mode == "space":
        if args.cos_angle == 1.0:
            raise UsageError("space mode needs distinct points: use --cos-angle < 1 or --mode time")
        y = SpherePoint(math.acos(args.cos_angle), 0.0)
        oracle = cov_space_time(CovarianceQuery(s, exp, args.t1, args.t2, args.cos_angle))
        est, se = mc_cov_space(s, exp, x, y, args.t1, args.t2, args.N, rng, args.threads)
    else:
        if args.t2 < args.t1:
            raise UsageError("time mode needs t1 <= t2")
        oracle = cov_time(CovarianceQuery(s, exp, args.t1, args.t2))
        est, se = mc_cov_time(s, exp, x, args.t1, args.t2, args.N, rng, args.threads)
    z = (est - oracle) / se
    report = {
        "oracle": oracle, "estimate": est, "se": se, "z_score": z, "pass": abs(z) <= Z_MAX,
        "params": _meta(args, mode=args.mode, spectrum=args.spectrum, L=args.L, psi=exp.spec,
                        t1=args.t1, t2=args.t2, cos_angle=args.cos_angle, N=args.N),
    }
    _write_json(args.out / "cov_check.json", report)
    print(json.dumps(report, sort_keys=True))
    return 0 if report["pass"] else 1


def cmd_cov(args):
    s = parse_spectrum(args.spectrum, args.L)
    exp = parse_psi(args.psi)
    q = CovarianceQuery(s, exp, args.t1, args.t2, args.cos_angle)
    report = {
        "t1": args.t1, "t2": args.t2, "cos_angle": args.cos_angle,
        "gamma": cov_space_time(q),
        "tail_bound": covariance_tail_bound(s, exp, args.t1 + args.t2),
        "params": _meta(args, spectrum=args.spectrum, L=args.L, psi=exp.spec),
    }
    _write_json(args.out / "cov.json", report)
    print(json.dumps(report, sort_keys=True))
    return 0


def cmd_walk(args):
    exp = parse_psi(args.psi)
    times = np.asarray(args.times if args.times else np.linspace(0, args.t, args.steps + 1)[1:])
    if times.size == 0 or times[0] <= 0 or np.any(np.diff(times) <= 0):
        raise UsageError("times must be positive and strictly increasing")
    x = SpherePoint(args.theta0, args.phi0)
    walk = sample_subordinate_path(x, exp, times, make_rng(args.seed, _KEY["walk"]))
    io.write_path(args.out / "walk.csv", walk, **_meta(args, psi=exp.spec))
    return 0


def cmd_kernel(args):
    exp = parse_psi(args.psi)
    if args.l_min > args.L:
        raise UsageError("--l-min exceeds --L")
    angle = np.linspace(0.0, np.pi, args.angles)
    cos_angle = np.cos(angle)
    J = np.atleast_1d(jump_kernel(exp, cos_angle, args.L, args.l_min))
    head = io.format_header("kernel", **_meta(args, psi=exp.spec, L=args.L, l_min=args.l_min))
    with open(args.out / "kernel.csv", "w") as fh:
        fh.write(head + "\nangle,cos_angle,J\n")
        np.savetxt(fh, np.column_stack([angle, cos_angle, J]), delimiter=",", fmt=io.FMT)
    return 0


def cmd_subord_test(args):
    exp = parse_psi(args.psi)
    if not args.mu or min(args.mu) < 0:
        raise UsageError("--mu needs non-negative values")
    rng = make_rng(args.seed, _KEY["subord-test"])
    D = map_chunks(lambda n, s: sample_subordinator(exp, args.t, s, size=n), args.N, rng, args.threads)
    rows = []
    for mu in args.mu:
        est, se = mean_and_se(np.exp(-mu * D))
        oracle = math.exp(-args.t * psi(exp, mu))
        z = (est - oracle) / se if se > 0 else 0.0
        rows.append({"mu": mu, "oracle": oracle, "estimate": est, "se": se, "z_score": z,
                     "pass": abs(z) <= Z_MAX})
    report = {"checks": rows, "pass": all(r["pass"] for r in rows),
              "params": _meta(args, psi=exp.spec, t=args.t, N=args.N)}
    _write_json(args.out / "subord_test.json", report)
    print(json.dumps(report, sort_keys=True))
    return 0 if report["pass"] else 1


def cmd_verify_all(args):
    checks = []
    for fn in CRITERIA:
        check = run_check(fn, args.seed, args.threads)
        print(check.line(), flush=True)
        checks.append(check)
    passed = all(c.passed for c in checks)
    report = {"seed": args.seed, "version": __version__, "pass": passed,
              "criteria": [c.as_dict() for c in checks]}
    _write_json(args.out / "report.json", report)
    print("ALL PASS" if passed else "FAILURES: " + ", ".join(str(c.number) for c in checks if not c.passed))
    return 0 if passed else 1


COMMANDS = {
    "synth": cmd_synth,
    "evolve": cmd_evolve,
    "spectrum": cmd_spectrum,
    "cov-check": cmd_cov_check,
    "cov": cmd_cov,
    "walk": cmd_walk,
    "kernel": cmd_kernel,
    "subord-test": cmd_subord_test,
    "verify-all": cmd_verify_all,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.out is not None:
            args.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"sphaera {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

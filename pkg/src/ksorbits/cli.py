"""Command-line front end.

Subcommands: explore | solve | continue | validate | stability | plotdata.
Parameters may come from flags or from a flat ``key = value`` config file
(``--config``); flags win.  The parameter is exposed as 1/nu everywhere on
the surface (matching the usual bifurcation-diagram axis) and converted to
nu internally.

Exit codes: 0 success, 1 method failure (no convergence, validation
rejected, no periodicity), 2 usage or parse errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys

import numpy as np

from . import flow as fl
from . import newton as nt
from . import orbitio as oio
from . import stability as st
from . import validator as vd
from .fourier import WeightParams, eval_grid

log = logging.getLogger("ksorbits")

EXIT_OK = 0
EXIT_METHOD = 1
EXIT_USAGE = 2


# ---------------------------------------------------------------------------
# configuration plumbing

def _read_config_file(path: str) -> list[str]:
    """Flat key = value lines -> argv tokens (inserted before real flags)."""
    tokens: list[str] = []
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as ex:
        raise SystemExit(f"cannot read config file: {ex}")
    for ln, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SystemExit(f"{path}:{ln}: expected key = value")
        key, _, val = line.partition("=")
        flag = "--" + key.strip().replace("_", "-")
        val = val.strip()
        if val.lower() in ("true", "false"):
            if val.lower() == "true":
                tokens.append(flag)
        else:
            tokens.extend([flag, val])
    return tokens


def _splice_config(argv: list[str]) -> list[str]:
    """Pull --config FILE out of argv and splice its tokens after the
    subcommand, so explicit flags (later) override file values."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise SystemExit("--config needs a file argument")
    tokens = _read_config_file(argv[i + 1])
    rest = argv[:i] + argv[i + 2:]
    if not rest:
        raise SystemExit("--config without a subcommand")
    return rest[:1] + tokens + rest[1:]


def _weights(text: str) -> WeightParams:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected r,s1,s2")
    r, s1, s2 = (float(p) for p in parts)
    return WeightParams(r, s1, s2)


def _positive(kind):
    def convert(text: str):
        val = kind(text)
        if not np.isfinite(val) or val <= 0:
            raise argparse.ArgumentTypeError(f"{text!r} must be positive")
        return val
    return convert


def _resolved(args: argparse.Namespace) -> dict:
    """The full resolved configuration, for output-file headers."""
    out = {}
    for key, val in sorted(vars(args).items()):
        if key in ("func", "config") or val is None:
            continue
        if isinstance(val, WeightParams):
            val = f"{val.r:g},{val.s1:g},{val.s2:g}"
        out[key] = val
    return out


def _nu_of(args) -> float:
    if getattr(args, "inv_nu", None) is not None:
        return 1.0 / args.inv_nu
    if getattr(args, "nu", None) is not None:
        return args.nu
    raise SystemExit("need --inv-nu (or --nu)")


def _load_orbit_arg(path: str) -> nt.OrbitCandidate:
    obj = oio.load_orbit(path)
    if isinstance(obj, fl.OrbitSeed):
        raise SystemExit(f"{path} holds a flow seed, not a solved orbit")
    return obj


# ---------------------------------------------------------------------------
# subcommands

def cmd_explore(args) -> int:
    if not args.inv_nu_min < args.inv_nu_max:
        raise SystemExit("--inv-nu-min must be below --inv-nu-max")
    values = np.linspace(args.inv_nu_min, args.inv_nu_max, args.steps)
    try:
        points = fl.cascade_scan(values, N=args.modes,
                                 transient_time=args.transient_time,
                                 observe_time=args.observe_time,
                                 threads=args.threads)
    except fl.StepSizeUnderflow as ex:
        log.error("integration failed: %s", ex)
        return EXIT_METHOD
    oio.write_cascade_csv(args.out, points, config=_resolved(args))
    n_windows = len({len(p.minima) for p in points if p.minima})
    log.info("wrote %s (%d parameter points, %d distinct cluster counts)",
             args.out, len(points), n_windows)
    return EXIT_OK


def cmd_solve(args) -> int:
    if args.seed_file:
        obj = oio.load_orbit(args.seed_file)
        if isinstance(obj, fl.OrbitSeed):
            cand = fl.seed_to_orbit_candidate(obj, args.d1, args.d2)
        else:
            cand = obj
            if args.d1 > cand.u.d1 or args.d2 > cand.u.d2:
                cand = nt.OrbitCandidate(cand.nu, cand.f,
                                         cand.u.pad(max(args.d1, cand.u.d1),
                                                    max(args.d2, cand.u.d2)))
    else:
        nu = _nu_of(args)
        try:
            seed = fl.find_attracting_orbit(nu, N=args.modes)
        except (fl.NoPeriodicityDetected, fl.InsufficientSamples) as ex:
            log.error("no periodic seed at 1/nu = %g: %s", 1.0 / nu, ex)
            return EXIT_METHOD
        cand = fl.seed_to_orbit_candidate(seed, args.d1, args.d2)
    try:
        report = nt.newton_solve(cand, tol=args.tol, max_iter=args.max_iter)
    except (nt.MaxIterExceeded, nt.SingularLinearSystem,
            nt.DegenerateSeed) as ex:
        log.error("Newton failed: %s", ex)
        return EXIT_METHOD
    final = nt.fix_theta_phase(report.final)
    cfg = _resolved(args)
    oio.save_orbit(args.out, final, binary=args.binary,
                   header=None if args.binary else cfg)
    oio.write_newton_report(args.out + ".newton.txt", report, config=cfg)
    log.info("wrote %s: period %.12g, residual %.3e", args.out,
             final.period, report.iterates[-1][0])
    return EXIT_OK


def cmd_continue(args) -> int:
    start = _load_orbit_arg(args.seed_file)
    lo, hi = args.inv_nu_min, args.inv_nu_max
    targets = np.linspace(lo, hi, args.steps)
    # walk outward from the end nearest the starting orbit
    if abs(1.0 / start.nu - hi) < abs(1.0 / start.nu - lo):
        targets = targets[::-1]
    os.makedirs(args.out, exist_ok=True)
    cfg = _resolved(args)
    rows = []
    cur = start
    code = EXIT_OK
    for inv in targets:
        try:
            cur = nt.continue_orbit(cur, 1.0 / inv, dnu_max=args.dnu_max,
                                    tol=args.tol)[-1]
        except (nt.StepUnderflow, nt.MaxIterExceeded) as ex:
            log.warning("continuation stopped at 1/nu = %.6f: %s", inv, ex)
            break
        rep = st.operator_spectrum(cur, cur.u.d1, cur.u.d2)
        name = os.path.join(args.out, f"orbit_{inv:.6f}.json")
        oio.save_orbit(name, cur, header=cfg)
        rows.append((inv, cur.period, rep.unstable_dimension))
        if args.validate_each:
            try:
                cert = vd.validate(vd.ValidationInput(cur, w=args.weights))
                oio.write_certificate(name + ".cert.txt", cert, config=cfg)
            except vd.ValidationFailed as ex:
                log.warning("validation failed at 1/nu = %.6f: %s", inv, ex)
        log.info("1/nu = %.6f  period %.9f  unstable_dim %d",
                 inv, cur.period, rep.unstable_dimension)
    with open(os.path.join(args.out, "branch.csv"), "w") as fh:
        for k in sorted(cfg):
            fh.write(f"# {k} = {cfg[k]}\n")
        fh.write("one_over_nu,period,unstable_dim\n")
        for inv, per, dim in rows:
            fh.write(f"{inv:.17g},{per:.17g},{dim}\n")
    return code


def cmd_validate(args) -> int:
    try:
        cand = _load_orbit_arg(args.seed_file)
    except oio.OrbitFormatError as ex:
        raise SystemExit(f"cannot parse {args.seed_file}: {ex}")
    vin = vd.ValidationInput(cand, w=args.weights, d1t=args.d1t,
                             d2t=args.d2t, k3_mode=args.k3_mode)
    try:
        cert = vd.validate(vin)
    except vd.ValidationFailed as ex:
        log.error("validation FAILED at stage %s (bound %.6e)",
                  ex.stage, ex.bound)
        return EXIT_METHOD
    if args.improve_radius:
        r_hat, e_rhat = vd.improve_analyticity(cert, cand.u.d1, cand.u.d2)
        cert = dataclasses.replace(cert, r_hat=r_hat, E_rhat=e_rhat)
    oio.write_certificate(args.out, cert, config=_resolved(args))
    print(f"validated: 1/nu = {1.0 / cand.nu:.6f}  alpha = {cert.alpha:.6f}"
          f"  E = {cert.E:.6e}" +
          (f"  r^ = {cert.r_hat:.6e}" if cert.r_hat is not None else ""))
    return EXIT_OK


def cmd_stability(args) -> int:
    cand = _load_orbit_arg(args.seed_file)
    mono = st.monodromy(cand, N_x=args.n_x)
    spec = st.operator_spectrum(cand, cand.u.d1, cand.u.d2, a=args.strip_base)
    if mono.unstable_dimension != spec.unstable_dimension:
        log.warning("count disagreement: monodromy %d vs spectrum %d",
                    mono.unstable_dimension, spec.unstable_dimension)
    cfg = _resolved(args)
    oio.write_stability_report(args.out + ".txt", [mono, spec], config=cfg)
    oio.write_eigenvalue_csv(args.out + ".monodromy.csv", mono.eigenvalues,
                             config=cfg)
    oio.write_eigenvalue_csv(args.out + ".spectrum.csv", spec.eigenvalues,
                             config=cfg)
    print(f"unstable dimension: monodromy {mono.unstable_dimension}, "
          f"spectrum {spec.unstable_dimension}")
    return EXIT_OK


def cmd_plotdata(args) -> int:
    cand = _load_orbit_arg(args.seed_file)
    grid = eval_grid(cand.u, args.n_theta, args.n_x)
    theta = 2.0 * np.pi * np.arange(args.n_theta) / args.n_theta
    x = 2.0 * np.pi * np.arange(args.n_x) / args.n_x
    oio.write_heatmap_csv(args.out, theta, x, grid.values,
                          config=_resolved(args))
    log.info("wrote %s (%d rows)", args.out, args.n_theta * args.n_x)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def _add_shared(p: argparse.ArgumentParser, out_default: str) -> None:
    p.add_argument("--d1", type=_positive(int), default=32,
                   help="space degree (modes sin(k1 x), k1 <= d1)")
    p.add_argument("--d2", type=_positive(int), default=16,
                   help="time degree (modes up to cos/sin(d2 theta))")
    p.add_argument("--tol", type=_positive(float), default=5e-11)
    p.add_argument("--weights", type=_weights,
                   default=WeightParams(1e-12, 1e-12, 1e-12),
                   metavar="R,S1,S2", help="norm weights r,s1,s2")
    p.add_argument("--threads", type=_positive(int), default=1)
    p.add_argument("--out", default=out_default)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ksorbits",
        description="periodic orbits of the Kuramoto-Sivashinsky equation: "
                    "exploration, Newton solving, stability, validation")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("explore", help="period-doubling cascade scan")
    p.add_argument("--inv-nu-min", type=_positive(float), required=True)
    p.add_argument("--inv-nu-max", type=_positive(float), required=True)
    p.add_argument("--steps", type=_positive(int), default=100)
    p.add_argument("--modes", type=_positive(int), default=20)
    p.add_argument("--transient-time", type=_positive(float), default=200.0)
    p.add_argument("--observe-time", type=_positive(float), default=40.0)
    _add_shared(p, "cascade.csv")
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("solve", help="Newton-solve one periodic orbit")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--inv-nu", type=_positive(float))
    g.add_argument("--nu", type=_positive(float))
    p.add_argument("--seed-file", help="orbit/seed document to refine")
    p.add_argument("--modes", type=_positive(int), default=20,
                   help="Galerkin modes for the exploratory seed run")
    p.add_argument("--max-iter", type=_positive(int), default=25)
    p.add_argument("--binary", action="store_true",
                   help="write the binary orbit format")
    _add_shared(p, "orbit.ksorb")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("continue", help="continue a branch in 1/nu")
    p.add_argument("--seed-file", required=True)
    p.add_argument("--inv-nu-min", type=_positive(float), required=True)
    p.add_argument("--inv-nu-max", type=_positive(float), required=True)
    p.add_argument("--steps", type=_positive(int), default=11)
    p.add_argument("--dnu-max", type=_positive(float), default=1e-4)
    p.add_argument("--validate-each", action="store_true")
    _add_shared(p, "family")
    p.set_defaults(func=cmd_continue)

    p = sub.add_parser("validate", help="rigorous a-posteriori validation")
    p.add_argument("--seed-file", required=True)
    p.add_argument("--d1t", type=_positive(int),
                   help="matrix-stage space degree (default: automatic)")
    p.add_argument("--d2t", type=_positive(int))
    p.add_argument("--k3-mode", choices=("sup", "conservative"),
                   default="sup")
    p.add_argument("--improve-radius", action="store_true",
                   help="also certify an improved analyticity radius")
    _add_shared(p, "certificate.txt")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stability", help="Floquet stability, both methods")
    p.add_argument("--seed-file", required=True)
    p.add_argument("--n-x", type=_positive(int), default=40,
                   help="space modes for the monodromy integration")
    p.add_argument("--strip-base", type=float, default=None,
                   help="lower edge a of the strip Im in [a, a+f)")
    _add_shared(p, "stability")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("plotdata", help="dump u(theta, x) on a uniform grid")
    p.add_argument("--seed-file", required=True)
    p.add_argument("--n-theta", type=_positive(int), default=128)
    p.add_argument("--n-x", type=_positive(int), default=128)
    _add_shared(p, "heatmap.csv")
    p.set_defaults(func=cmd_plotdata)

    for sp in sub.choices.values():
        sp.add_argument("--config", help=argparse.SUPPRESS)
    return ap


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _splice_config(argv)
        args = build_parser().parse_args(argv)
    except SystemExit as ex:
        # argparse exits with 2 on usage errors; config errors carry text
        code = ex.code
        if isinstance(code, str) or code is None:
            print(code or "", file=sys.stderr)
            return EXIT_USAGE
        return EXIT_USAGE if code != 0 else 0

    try:
        from threadpoolctl import threadpool_limits
        with threadpool_limits(limits=args.threads):
            return args.func(args)
    except oio.OrbitFormatError as ex:
        print(f"error: {ex}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as ex:
        if isinstance(ex.code, str):
            print(f"error: {ex.code}", file=sys.stderr)
            return EXIT_USAGE
        return ex.code if isinstance(ex.code, int) else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

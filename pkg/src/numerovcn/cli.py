"""Command-line interface.

Subcommands: ``base-mesh``, ``replicate``, ``eig``, ``run``, ``mass-sweep``,
``converge``, ``check``.  All numeric output uses 17 significant digits so
doubles round-trip exactly; identical invocations produce byte-identical
files.  Exit code is 0 on success and 2 with a one-line reason on rejection.
"""

import argparse
import sys

import numpy as np

from . import __version__
from .eigen import generalized_eigenvalues
from .experiments import (PacketParams, convergence_study, default_base_mesh,
                          mass_sweep, write_convergence_csv, write_mass_csv,
                          write_sweep_csv, _packet_report)
from .mesh import ReplicationSpec, read_mesh_steps, replicate, write_mesh_steps
from .solver import FOLD_FULL, FOLD_LAPLACIAN
from .stability import (amplification_factor, min_kappa, necessary_condition,
                        spectral_condition)


def _fmt(x):
    return f"{x:.17g}"


def _load_base(args):
    if args.mesh_base == "-":
        return default_base_mesh()
    return read_mesh_steps(args.mesh_base)


def _add_packet_options(sub):
    sub.add_argument("--xc", type=float, default=5.0, help="packet center (default 5)")
    sub.add_argument("--wavenumber", type=float, default=4.0,
                     help="packet wave number (default 4)")
    sub.add_argument("--tmax", type=float, default=1.0, help="final time (default 1)")
    sub.add_argument("--no-filter", action="store_true",
                     help="keep the growing-cluster content of the initial data")
    sub.add_argument("--fold", choices=[FOLD_FULL, FOLD_LAPLACIAN], default=FOLD_FULL,
                     help="boundary folding variant (default: full)")


def _meta(base, k, params, args):
    return {
        "base_intervals": base.intervals,
        "base_length": _fmt(base.length),
        "replication_K": k,
        "packet": f"x_c={_fmt(params.x_c)} k={_fmt(params.k)} t_max={_fmt(params.t_max)}",
        "filter_unstable": str(not args.no_filter).lower(),
        "fold": args.fold,
    }


def cmd_base_mesh(args):
    mesh = default_base_mesh()
    if args.out:
        write_mesh_steps(mesh, args.out)
    else:
        for h in mesh.steps:
            sys.stdout.write(f"{_fmt(h)}\n")
    return 0


def cmd_replicate(args):
    base = read_mesh_steps(args.mesh)
    mesh = replicate(ReplicationSpec(base, args.k))
    write_mesh_steps(mesh, args.out)
    return 0


def cmd_eig(args):
    mesh = read_mesh_steps(args.mesh)
    report = generalized_eigenvalues(mesh)
    sys.stdout.write("index,lambda_re,lambda_im,residual\n")
    for i, pair in enumerate(report.pairs):
        sys.stdout.write(f"{i},{_fmt(pair.lam.real)},{_fmt(pair.lam.imag)},"
                         f"{_fmt(pair.residual)}\n")
    if report.n_discarded:
        sys.stdout.write(f"# discarded (infinite) modes: {report.n_discarded}\n")
    return 0


def cmd_run(args):
    base = _load_base(args)
    params = PacketParams(x_c=args.xc, k=args.wavenumber, t_max=args.tmax)
    report, info = _packet_report(args.k, args.steps, params, base,
                                  not args.no_filter, args.fold)
    j = base.intervals * args.k
    meta = _meta(base, args.k, params, args)
    if info is not None:
        meta["filter_removed_fraction"] = _fmt(info.removed_fraction)
    out = args.out or f"mass_{j}_{args.steps}.csv"
    write_mass_csv(out, report, meta)
    sys.stdout.write(f"err({j},{args.steps}) = {_fmt(report.max_error)}\n")
    sys.stdout.write(f"mass max/initial = "
                     f"{_fmt(report.mass_series.max() / report.mass_series[0])}\n")
    sys.stdout.write(f"wrote {out}\n")
    return 0


def cmd_mass_sweep(args):
    base = _load_base(args)
    params = PacketParams(x_c=args.xc, k=args.wavenumber, t_max=args.tmax)
    step_counts = [int(s) for s in args.steps.split(",") if s]
    sweep = mass_sweep(args.k, step_counts, params, base, not args.no_filter,
                       args.fold)
    j = base.intervals * args.k
    out = args.out or f"mass_sweep_J{j}.csv"
    write_sweep_csv(out, sweep, _meta(base, args.k, params, args))
    for m, report in sweep:
        sys.stdout.write(f"M={m}: mass max/initial = "
                         f"{_fmt(report.mass_series.max() / report.mass_series[0])}\n")
    sys.stdout.write(f"wrote {out}\n")
    return 0


def cmd_converge(args):
    base = _load_base(args)
    params = PacketParams(x_c=args.xc, k=args.wavenumber, t_max=args.tmax)
    ks = [int(s) for s in args.ks.split(",") if s]
    cases = convergence_study(ks, (args.bracket_lo, args.bracket_hi), args.stride,
                              params, base, not args.no_filter, args.fold)
    meta = _meta(base, ",".join(str(k) for k in ks), params, args)
    meta["bracket"] = f"[{args.bracket_lo}, {args.bracket_hi}] stride {args.stride}"
    write_convergence_csv(args.out, cases, meta)
    for case in cases:
        p = "" if case.rate is None else f" p={_fmt(case.rate)}"
        sys.stdout.write(f"J={case.intervals} M*={case.m_star} "
                         f"err={_fmt(case.err)}{p}\n")
    sys.stdout.write(f"wrote {args.out}\n")
    return 0


def cmd_check(args):
    re_s, im_s = args.lam.split(",")
    lam = complex(float(re_s), float(im_s))
    q = amplification_factor(lam, args.tau, args.a)
    ok = spectral_condition(lam, args.tau, args.kappa, args.a)
    sys.stdout.write(f"|q| = {_fmt(abs(q))}\n")
    sys.stdout.write(f"|q| <= 1 + kappa*tau: {str(ok).lower()}\n")
    sys.stdout.write(f"min_kappa = {_fmt(min_kappa(lam, args.tau, args.a))}\n")
    if lam.imag != 0.0 and args.h_omega0 is not None:
        consts = necessary_condition(lam, args.h_omega0, args.a, args.kappa,
                                     args.tau0 if args.tau0 else args.tau)
        sys.stdout.write(f"c1 = {_fmt(consts.c1)}\n")
        sys.stdout.write(f"c2 = {_fmt(consts.c2)}\n")
        sys.stdout.write(f"c0 = {_fmt(consts.c0)}\n")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="numerovcn",
        description="Compact implicit scheme on non-uniform meshes: spectra, "
                    "stability checks and packet experiments.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("base-mesh", help="write the bundled 14-interval base mesh")
    p.add_argument("--out", help="output mesh file (default: stdout)")
    p.set_defaults(func=cmd_base_mesh)

    p = sub.add_parser("replicate", help="mirror-replicate a mesh K times")
    p.add_argument("--mesh", required=True, help="base mesh file (one step per line)")
    p.add_argument("--k", type=int, required=True, help="replication count")
    p.add_argument("--out", required=True, help="output mesh file")
    p.set_defaults(func=cmd_replicate)

    p = sub.add_parser("eig", help="pencil spectrum of a mesh as CSV")
    p.add_argument("--mesh", required=True, help="mesh file (one step per line)")
    p.set_defaults(func=cmd_eig)

    p = sub.add_parser("run", help="one packet run; writes mass_<J>_<M>.csv")
    p.add_argument("--mesh-base", required=True,
                   help="base mesh file ('-' for the bundled default)")
    p.add_argument("--k", type=int, required=True, help="replication count")
    p.add_argument("--steps", type=int, required=True, help="number of time steps M")
    p.add_argument("--out", help="output CSV (default mass_<J>_<M>.csv)")
    _add_packet_options(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("mass-sweep", help="mass histories for several step counts")
    p.add_argument("--mesh-base", required=True,
                   help="base mesh file ('-' for the bundled default)")
    p.add_argument("--k", type=int, required=True, help="replication count")
    p.add_argument("--steps", required=True, help="comma-separated step counts")
    p.add_argument("--out", help="output CSV (default mass_sweep_J<J>.csv)")
    _add_packet_options(p)
    p.set_defaults(func=cmd_mass_sweep)

    p = sub.add_parser("converge", help="refinement study with optimal-M search")
    p.add_argument("--mesh-base", required=True,
                   help="base mesh file ('-' for the bundled default)")
    p.add_argument("--ks", required=True, help="comma-separated replication counts")
    p.add_argument("--bracket-lo", type=int, required=True,
                   help="low end of the first M search bracket")
    p.add_argument("--bracket-hi", type=int, required=True,
                   help="high end of the first M search bracket")
    p.add_argument("--stride", type=int, default=100, help="search stride (default 100)")
    p.add_argument("--out", default="convergence.csv", help="output CSV")
    _add_packet_options(p)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("check", help="per-mode stability quantities for one eigenvalue")
    p.add_argument("--lambda", dest="lam", required=True, metavar="RE,IM",
                   help="eigenvalue as re,im")
    p.add_argument("--tau", type=float, required=True, help="time step")
    p.add_argument("--kappa", type=float, required=True, help="growth allowance")
    p.add_argument("--a", type=float, default=1.0, help="scaling constant (default 1)")
    p.add_argument("--h-omega0", type=float,
                   help="base mean step: also print the constants c1, c2, c0")
    p.add_argument("--tau0", type=float, help="maximal time step (default: tau)")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())

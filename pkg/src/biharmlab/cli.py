"""Command-line surface: every module as a subcommand with machine-readable output.

Outputs are JSON (nested: config echo, library version, results) or CSV
(config echoed as leading '# key=value' comment lines, single header row).
All sampled quantities take their randomness from --seed, and reports carry
no timestamps, so identical invocations produce byte-identical files.

Exit codes: 0 success, 1 verification failure (a PASS-expected check failed),
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import __version__
from .core import emden_coeffs, special_exponents, validate_params
from .indicial import indicial_roots, verify_ordering, weight_window

DEFAULT_EPS = "0.125,0.0625,0.03125,0.015625,0.0078125"


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, complex):
        return f"{x.real!r}{x.imag:+}j" if x.imag else repr(x.real)
    return x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, int, float, str)) or obj is None:
        return obj
    return str(obj)


def emit(config: dict, results, args) -> None:
    """Write the report in the requested format with config provenance."""
    if args.format == "json":
        payload = {"config": _jsonable(config), "version": __version__,
                   "results": _jsonable(results)}
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        rows = results if isinstance(results, list) else [results]
        rows = [_jsonable(r) for r in rows]
        keys = sorted({k for r in rows for k in r})
        buf = io.StringIO()
        for k in sorted(config):
            buf.write(f"# {k}={_fmt(config[k])}\n")
        buf.write(f"# version={__version__}\n")
        writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: _fmt(r.get(k, "")) for k in keys})
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_echo(args, fields) -> dict:
    return {k: getattr(args, k) for k in fields if getattr(args, k, None) is not None}


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_constants(args) -> int:
    params = validate_params(args.N, args.p)
    K = emden_coeffs(params)
    sp = special_exponents(args.N)
    results = {
        "N": params.N, "p": params.p, "k_const": params.k_const, "c_p": params.c_p,
        "A_p": params.A_p, "alpha_w": params.alpha_w,
        "K0": K.K0, "K1": K.K1, "K2": K.K2, "K3": K.K3,
        "serrin": sp.serrin, "sobolev": sp.sobolev,
        "p0": sp.p0, "p1_plus": sp.p1_plus, "p1_minus": sp.p1_minus,
        "p2_plus": sp.p2_plus, "p2_minus": sp.p2_minus,
        "char_roots": sorted(np.roots([1.0, K.K3, K.K2, K.K1, K.K0]).real.tolist()),
    }
    emit(_config_echo(args, ["N", "p", "format", "out"]), results, args)
    return 0


def cmd_indicial(args) -> int:
    params = validate_params(args.N, args.p)
    rows = []
    for j in range(args.jmax + 1):
        d = indicial_roots(params, j)
        row = {"j": j, "lambda_j": d.lambda_j}
        for tag, g in zip(("pp", "pm", "mp", "mm"), d.roots_at_zero):
            row[f"zero_{tag}_re"], row[f"zero_{tag}_im"] = g.real, g.imag
        for tag, g in zip(("pp", "pm", "mp", "mm"), d.roots_at_infinity):
            row[f"inf_{tag}_re"], row[f"inf_{tag}_im"] = g.real, g.imag
        row["max_residual"] = max(d.residuals(params.N, params.A_p))
        rows.append(row)
    rep = verify_ordering(params, args.jmax)
    ww = weight_window(params)
    summary = {"j": "summary", "ordering_ok": rep.all_ok,
               "ordering_failures": ";".join(rep.failures()),
               "nu_lo": ww.nu_lo, "nu_hi": ww.nu_hi, "mu_lo": ww.mu_lo,
               "nu_default": ww.nu, "mu_default": ww.mu}
    emit(_config_echo(args, ["N", "p", "jmax", "format", "out"]), rows + [summary], args)
    return 0


def cmd_symbol(args) -> int:
    from .symbol import symbol_indicial_identity, theta_cylinder

    xi = np.linspace(0.0, args.xi_max, args.xi_points)
    rows = []
    worst = 0.0
    for j in range(args.jmax + 1):
        th = theta_cylinder(args.N, args.gamma, j, xi)
        resid = symbol_indicial_identity(args.N, j, xi) if args.gamma == 2.0 else None
        row = {"j": j, "theta_xi0": th[0], "theta_ximax": th[-1]}
        if resid is not None:
            row["max_identity_residual"] = float(np.max(resid))
            worst = max(worst, row["max_identity_residual"])
        rows.append(row)
    emit(_config_echo(args, ["N", "gamma", "jmax", "xi_max", "xi_points", "format", "out"]),
         rows, args)
    return 0 if (args.gamma != 2.0 or worst <= 1e-8) else 1


def cmd_delaunay(args) -> int:
    from .delaunay import export_profile, monotonicity_report, solve_singular

    params = validate_params(args.N, args.p)
    prof = solve_singular(params, beta=args.beta, tol=args.tol, t_left=args.t_left)
    rep = monotonicity_report(prof)
    tt = np.linspace(prof.t_lo + 0.2, prof.t_hi - 0.2, 4001)
    results = {
        "beta": prof.beta,
        "c_p": params.c_p,
        "endpoint_rel": prof.diagnostics["endpoint_rel"],
        "max_scaled_residual": float(np.max(prof.scaled_residual(tt))),
        "sup_ubar_pm1_over_bound": float(
            np.max(prof.ubar(tt) ** (params.p - 1.0)) / ((params.p + 1.0) / 2.0 * params.k_const)),
        "signs_ok": rep.signs_ok,
        "slopes_far": rep.slopes_far,
        "slopes_near": rep.slopes_near,
        "bisections": prof.diagnostics["bisections"],
        "bvp_nodes": prof.diagnostics["bvp_nodes"],
    }
    if args.profile_out:
        export_profile(prof, args.profile_out)
        results["profile_out"] = args.profile_out
    emit(_config_echo(args, ["N", "p", "beta", "tol", "format", "out"]), results, args)
    return 0


def cmd_modes(args) -> int:
    from .delaunay import solve_singular
    from .linearized import (injectivity_scan, quadratic_certificates,
                             translation_kernel_residual)

    params = validate_params(args.N, args.p)
    rows = []
    for j in range(args.jmax + 1):
        C, Cbar = quadratic_certificates(params, j)
        rows.append({"j": j, "C": C, "Cbar": Cbar, "certified": bool(Cbar < 1.0 and j >= 2)})
    prof = solve_singular(params, beta=args.beta, tol=args.tol, t_tail=22.0)
    r = np.geomspace(np.exp(-prof.t_hi + 0.5), np.exp(-prof.t_lo - 0.5), 400)
    resid = float(np.max(translation_kernel_residual(prof, r)))
    scan = injectivity_scan(params, prof, range(0, min(args.jmax, 4) + 1))
    summary = {"j": "summary", "translation_kernel_residual": resid,
               "scan": [{"j": e.j, "status": e.status, "route": e.route,
                         "exponents": e.branch_exponents} for e in scan]}
    emit(_config_echo(args, ["N", "p", "jmax", "format", "out"]), rows + [summary], args)
    return 0


def cmd_auxball(args) -> int:
    from .auxball import (blowup_family, blowup_rescale, build_kernel,
                          exact_unit_load, green_apply, make_grid,
                          picard_minimal, pohozaev_residual)

    params = validate_params(args.N, args.p)
    grid = make_grid(M=args.grid, alpha_w=params.alpha_w)
    kern = build_kernel(args.N, grid, cache_dir=args.cache_dir)
    u1 = green_apply(kern, np.ones_like(grid.nodes))
    oracle_rel = float(np.max(np.abs(u1 - exact_unit_load(args.N, grid.nodes)))
                       / np.max(exact_unit_load(args.N, grid.nodes)))
    pic = picard_minimal(kern, args.lam, params.p, params.alpha_w)
    results = {
        "grid_M": grid.M,
        "green_oracle_rel": oracle_rel,
        "norm_constant": kern.norm_constant,
        "picard_converged": pic.converged,
        "picard_iterations": pic.iterations,
        "picard_u0": pic.u_origin,
        "picard_monotone": pic.monotone,
    }
    if pic.converged:
        results["pohozaev_residual"] = pohozaev_residual(kern, pic.u, pic.lam,
                                                         params.p, params.alpha_w)
    if args.blowup:
        # deeper grading and amplitudes: the tail window opens only past the
        # crossover rho ~ c_p^{(p-1)/(4+alpha)}
        gridb = make_grid(M=max(args.grid, 320), sigma_g=3.0, alpha_w=params.alpha_w)
        kernb = build_kernel(args.N, gridb, cache_dir=args.cache_dir)
        fam = blowup_family(kernb, [1e2, 1e3, 1e4, 1e5, 1e6], params.p, params.alpha_w)
        rep = blowup_rescale(fam, kernb, params.p, params.alpha_w)
        results["blowup_tail_exponent"] = rep.tail_exponent
        results["blowup_tail_nominal"] = rep.tail_exponent_nominal
        results["blowup_lambdas"] = rep.lambdas
    emit(_config_echo(args, ["N", "p", "lam", "grid", "format", "out"]), results, args)
    return 0


def cmd_glue(args) -> int:
    from .delaunay import solve_singular
    from .gluing import decay_fit

    params = validate_params(args.N, args.p)
    eps_list = [float(tok) for tok in args.eps_list.split(",")]
    prof = solve_singular(params, beta=1.0, tol=args.tol,
                          t_left=np.log(min(eps_list) / 4.0))
    fit = decay_fit(params, prof, eps_list, args.gamma_w, mode=args.mode,
                    edge_k=args.k, seed=args.seed)
    results = {
        "mode": args.mode, "gamma_w": args.gamma_w, "eps": fit.eps_list,
        "norms": fit.norms, "slope": fit.slope, "nominal": fit.nominal,
        "extrapolated_target": fit.extrapolated_target,
    }
    emit(_config_echo(args, ["N", "p", "gamma_w", "eps_list", "mode", "k", "seed",
                             "format", "out"]), results, args)
    return 0


def cmd_verify_all(args) -> int:
    from .verify import run_suites

    suites = args.suites.split(",") if args.suites else None
    checks = run_suites(args.N, args.p, seed=args.seed, suites=suites,
                        grid_m=args.grid, eps_list=[float(t) for t in args.eps_list.split(",")],
                        cache_dir=args.cache_dir)
    for c in checks:
        sys.stderr.write(f"{'PASS' if c['ok'] else 'FAIL'} {c['name']}: {c['detail']}\n")
    n_fail = sum(not c["ok"] for c in checks)
    config = _config_echo(args, ["N", "p", "seed", "grid", "eps_list", "suites",
                                 "format", "out"])
    emit(config, checks, args)
    return 1 if n_fail else 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="biharmlab",
        description="Numerical laboratory for singular solutions of Delta^2 u = u^p",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, n=10, p=2.0):
        sp.add_argument("--N", type=int, default=n)
        sp.add_argument("--p", type=float, default=p)
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--out", default=None)
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("constants", help="closed-form constants")
    common(sp)
    sp.set_defaults(fn=cmd_constants)

    sp = sub.add_parser("indicial", help="indicial roots, ordering, weight window")
    common(sp)
    sp.add_argument("--jmax", type=int, default=None)
    sp.set_defaults(fn=cmd_indicial)

    sp = sub.add_parser("symbol", help="conformal Fourier symbol and gamma=2 identity")
    common(sp)
    sp.add_argument("--gamma", type=float, default=2.0)
    sp.add_argument("--jmax", type=int, default=10)
    sp.add_argument("--xi-max", type=float, default=10.0)
    sp.add_argument("--xi-points", type=int, default=100)
    sp.set_defaults(fn=cmd_symbol)

    sp = sub.add_parser("delaunay", help="singular radial profile by shooting")
    common(sp)
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--tol", type=float, default=1e-4)
    sp.add_argument("--t-left", type=float, default=None)
    sp.add_argument("--profile-out", default=None)
    sp.set_defaults(fn=cmd_delaunay)

    sp = sub.add_parser("modes", help="mode certificates, kernel residual, scans")
    common(sp)
    sp.add_argument("--jmax", type=int, default=None)
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--tol", type=float, default=1e-4)
    sp.set_defaults(fn=cmd_modes)

    sp = sub.add_parser("auxball", help="clamped-ball kernel, Picard branch, Pohozaev")
    common(sp)
    sp.add_argument("--lam", type=float, default=1e-3)
    sp.add_argument("--grid", type=int, default=160)
    sp.add_argument("--cache-dir", default=None)
    sp.add_argument("--blowup", action="store_true")
    sp.set_defaults(fn=cmd_auxball)

    sp = sub.add_parser("glue", help="approximate-solution error decay fit")
    common(sp)
    sp.add_argument("--mode", choices=("points", "flat_edge"), default="points")
    sp.add_argument("--gamma-w", type=float, default=-3.5)
    sp.add_argument("--eps-list", default=DEFAULT_EPS)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--tol", type=float, default=1e-4)
    sp.set_defaults(fn=cmd_glue)

    sp = sub.add_parser("verify-all", help="run all invariant suites")
    common(sp)
    sp.add_argument("--suites", default=None,
                    help="comma list: constants,indicial,symbol,delaunay,modes,auxball,glue")
    sp.add_argument("--grid", type=int, default=160)
    sp.add_argument("--eps-list", default=DEFAULT_EPS)
    sp.add_argument("--cache-dir", default=None)
    sp.set_defaults(fn=cmd_verify_all)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "jmax", 1) is None:
        args.jmax = 2 * args.N  # ordering scans default past the j = N+1 split
    try:
        return args.fn(args)
    except (ValueError, RuntimeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())

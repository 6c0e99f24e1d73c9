"""Command-line front end.  JSON goes to stdout, bulk data to files, errors to
stderr.  Exit status: 0 success, 1 invalid input, 2 numerical failure."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .analysis import check_energy_identity, verify_decay, wronskian_integral
from .census import WORKERS_ENV, CensusConfig, census, default_workers
from .criteria import Regime, analyze_psi, classify, table_regime
from .errors import NumericalError, RadialNLSError, ValidationError
from .factory import (
    MaZhaoParams,
    make_symmetric,
    make_theta_family,
    make_triple,
    mazhao_beta_pair,
    mazhao_beta,
    mazhao_ratio,
    mazhao_scale,
)
from .ground_state import solve_scalar
from .integrator import ShootingConfig, wronskian_consistency
from .model import DecayCertificate, Parameters, RadialProfile, make_coupled_power, residual

REGIME_CODES = {r: i for i, r in enumerate(Regime)}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _emit(obj):
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _params(a, b_required=True) -> Parameters:
    return Parameters(a.n, a.q, a.b if b_required else 0.0)


def _add_nqb(p, b=True):
    p.add_argument("--n", type=int, required=True, help="space dimension (positive integer)")
    p.add_argument("--q", type=float, required=True, help="exponent q > 1")
    if b:
        p.add_argument("--b", type=float, required=True, help="coupling constant b")


def _add_cert(p):
    p.add_argument("--m", type=float, default=0.5, help="decay certificate rate m (default 0.5)")
    p.add_argument("--R", type=float, default=1.0, help="certificate radius R (default 1)")
    p.add_argument("--eps", type=float, default=0.1, help="certificate amplitude eps (default 0.1)")


def _tol(p, default=1e-10):
    p.add_argument("--tol", type=float, default=default, help=f"local error tolerance (default {default:g})")


# ---------------------------------------------------------------------------


def cmd_classify(a):
    _emit(classify(_params(a), seed=a.seed).to_dict())


def cmd_ground_state(a):
    g = solve_scalar(_params(a, False), ShootingConfig(tol=a.tol))
    side = g.to_files(a.out)
    _emit({"n": g.params.n, "q": g.params.q, "height": g.height, "profile": str(a.out),
           "sidecar": str(side), "points": len(g.profile), "notes": list(g.notes)})


def cmd_construct(a):
    params = _params(a)
    g = solve_scalar(params.with_b(0.0), ShootingConfig(tol=a.tol))
    f = make_coupled_power(params)
    out = Path(a.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = {"n": params.n, "q": params.q, "b": params.b, "kind": a.kind, "profiles": []}
    if a.kind == "symmetric":
        profiles = [("symmetric", make_symmetric(g, params.b))]
    elif a.kind == "triple":
        t = make_triple(g, analyze_psi(params))
        profiles = list(zip(("symmetric", "asymmetric", "asymmetric_swap"), t.members))
        report.update(k_b=t.k_b, mu_b=t.mu_b, literal_pair_residual=t.literal_residual, note=t.note)
    else:
        if a.theta is None:
            raise ValidationError("construct theta needs --theta")
        profiles = [("theta", make_theta_family(g, a.theta, params.b))]
    for name, prof in profiles:
        path = out / f"{name}.csv"
        prof.to_csv(path)
        report["profiles"].append({"name": name, "path": str(path), "u0": float(prof.u[0]),
                                   "v0": float(prof.v[0]), "residual": residual(f, prof)})
    _emit(report)


def _parse_box(vals):
    if len(vals) != 4:
        raise ValidationError("--box takes four numbers: u_min u_max v_min v_max")
    return ((vals[0], vals[1]), (vals[2], vals[3]))


def cmd_census(a):
    params = _params(a)
    cfg = CensusConfig(grid_tol=a.tol, certificate=DecayCertificate(a.m, a.R, a.eps))
    res = census(params, cfg, _parse_box(a.box), tuple(a.grid), workers=a.workers)
    if a.out_json:
        res.to_json(a.out_json)
    if a.out_basin:
        res.basin_to_csv(a.out_basin)
    _emit(res.to_dict())


def cmd_verify(a):
    params = _params(a)
    f = make_coupled_power(params)
    prof = RadialProfile.from_csv(a.profile, params)
    cert = DecayCertificate(a.m, a.R, a.eps)
    out = {"check": a.check, "profile": str(a.profile), "certificate": cert.to_dict()}
    if a.check == "decay":
        out.update(verify_decay(prof, cert).to_dict())
    elif a.check == "wronskian":
        out.update(wronskian_defect=abs(wronskian_integral(prof, f)),
                   wronskian_consistency=wronskian_consistency(prof, f))
    else:
        out.update(energy_defect=check_energy_identity(prof, f))
    _emit(out)


def _range(vals, kind):
    if kind == "q":
        start, stop, step = vals
        return np.round(np.arange(start, stop + step / 2, step), 12)
    lo, hi, count = vals
    return np.logspace(math.log10(lo), math.log10(hi), int(count))


def cmd_sweep(a):
    qs = _range(a.q_range, "q")
    bs = _range(a.b_range, "b")
    rows = []
    for q in qs:
        for b in bs:
            params = Parameters(a.n, float(q), float(b))
            regime = table_regime(params) if params.subcritical else Regime.UNDETERMINED
            count = ""
            degenerate = ""
            if a.grid > 0 and params.subcritical:
                try:
                    res = census(params, CensusConfig(), ((0.0, a.box), (0.0, a.box)), (a.grid, a.grid),
                                 workers=a.workers)
                    count, degenerate = len(res.solutions), int(res.degenerate)
                except NumericalError as exc:
                    count = f"error: {exc}"
            rows.append([a.n, float(q), float(b), regime.value, REGIME_CODES[regime], count, degenerate])
    with open(a.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "q", "b", "regime", "regime_code", "census_count", "degenerate"])
        w.writerows(rows)
    _emit({"rows": len(rows), "out": str(a.out), "regime_codes": {r.value: c for r, c in REGIME_CODES.items()}})


def cmd_mazhao(a):
    p = MaZhaoParams.load(a.params)
    if a.op == "beta":
        e1, e2 = mazhao_beta_pair(p)
        _emit({"beta": mazhao_beta(p), "expressions": [e1, e2]})
    elif a.op == "ratio":
        _emit({"ratio": mazhao_ratio(p)})
    else:
        if not (a.profile and a.out):
            raise ValidationError("mazhao scale needs --profile and --out")
        prof = RadialProfile.from_csv(a.profile)
        mazhao_scale(prof, None, p).to_csv(a.out)
        e = 1.0 / (2 * p.q - 2)
        _emit({"u_factor": abs(p.mu1) ** e, "v_factor": abs(p.mu2) ** e, "out": str(a.out)})


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="radial-nls", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("classify", help="regime report for (n, q, b) as JSON")
    _add_nqb(p)
    p.add_argument("--seed", type=int, default=0, help="seed of the sampling checks (default 0)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("ground-state", help="scalar ground state to CSV plus JSON sidecar")
    _add_nqb(p, b=False)
    _tol(p)
    p.add_argument("--out", default="ground_state.csv", help="profile CSV path (default ground_state.csv)")
    p.set_defaults(func=cmd_ground_state)

    p = sub.add_parser("construct", help="explicit solutions from the ground state")
    p.add_argument("kind", choices=["symmetric", "triple", "theta"])
    _add_nqb(p)
    _tol(p)
    p.add_argument("--theta", type=float, help="angle in (0, pi/2), radians (theta family only)")
    p.add_argument("--out-dir", default=".", help="directory for profile CSVs (default .)")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("census", help="search the initial-value plane for decaying solutions")
    _add_nqb(p)
    p.add_argument("--box", type=float, nargs=4, default=[0.0, 2.0, 0.0, 2.0],
                   metavar=("UMIN", "UMAX", "VMIN", "VMAX"), help="initial-value box (default 0 2 0 2)")
    p.add_argument("--grid", type=int, nargs=2, default=[256, 256], metavar=("NU", "NV"),
                   help="grid nodes per axis, at least 32 (default 256 256)")
    _tol(p, 1e-8)
    _add_cert(p)
    p.add_argument("--workers", type=int, default=None,
                   help=f"threads (default ${WORKERS_ENV} or CPU count)")
    p.add_argument("--out-json", help="write the census JSON here as well")
    p.add_argument("--out-basin", help="basin map CSV, one outcome code per node")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("verify", help="identity checks on a profile CSV")
    p.add_argument("check", choices=["decay", "wronskian", "energy"])
    p.add_argument("--profile", required=True, help="CSV with header r,u,du,v,dv")
    _add_nqb(p)
    _add_cert(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="regime map over (q, b) with coarse census counts")
    p.add_argument("--n", type=int, required=True, help="space dimension")
    p.add_argument("--q-range", type=float, nargs=3, default=[1.25, 4.0, 0.25], metavar=("START", "STOP", "STEP"),
                   help="q grid, inclusive (default 1.25 4 0.25)")
    p.add_argument("--b-range", type=float, nargs=3, default=[0.1, 10.0, 8], metavar=("LO", "HI", "COUNT"),
                   help="log-spaced b grid (default 0.1 10 8)")
    p.add_argument("--grid", type=int, default=32, help="census nodes per axis; 0 skips the census (default 32)")
    p.add_argument("--box", type=float, default=2.0, help="census box (0, BOX)^2 (default 2)")
    p.add_argument("--workers", type=int, default=None, help=f"threads (default ${WORKERS_ENV} or CPU count)")
    p.add_argument("--out", default="sweep.csv", help="output CSV (default sweep.csv)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("mazhao", help="two-mu system: reduced coupling, predicted ratio, rescaling")
    p.add_argument("op", choices=["beta", "ratio", "scale"])
    p.add_argument("--params", required=True, help="JSON {mu1, mu2, beta1, beta2, q}")
    p.add_argument("--profile", help="profile CSV to rescale (scale only)")
    p.add_argument("--out", help="rescaled profile CSV (scale only)")
    p.set_defaults(func=cmd_mazhao)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(a, "workers", None) is not None and a.workers < 1:
        sys.stderr.write("error: --workers must be positive\n")
        return 1
    try:
        a.func(a)
    except (ValidationError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except (NumericalError, ArithmeticError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 2
    except RadialNLSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

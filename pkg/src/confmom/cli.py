"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys

import numpy as np

from . import atlas5d as at
from . import cone6d as cn
from . import models as md
from . import verify
from .conformal4d import apply_word, minkowski_sq, parse_element
from .config import RunConfig
from .errors import DomainError, NoRealBranch, PionPole
from .fifthdim import BranchSpec

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3


class UsageError(Exception):
    """Bad input detected after argument parsing."""


# -- argument types ----------------------------------------------------------------


def four_vector(text: str) -> np.ndarray:
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None
    if len(vals) != 4:
        raise argparse.ArgumentTypeError(f"expected 4 components, got {len(vals)}")
    return np.array(vals)


def element(text: str):
    try:
        return parse_element(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def value_range(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    try:
        lo, hi, step = (float(x) for x in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"range must be lo:hi:step, got {text!r}") from None
    if hi < lo or (hi > lo and step <= 0):
        raise argparse.ArgumentTypeError("need lo <= hi and a positive step")
    return lo, hi, step


# -- output --------------------------------------------------------------------------


def _num(x) -> str:
    return format(float(x) + 0.0, ".17g")  # + 0.0 folds -0 into 0


def _json_value(v) -> str:
    if isinstance(v, (bool, np.bool_)) or v is None or isinstance(v, str):
        return json.dumps(v if not isinstance(v, np.bool_) else bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _num(v) if math.isfinite(v) else "null"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_json_value(x)}" for k, x in v.items()) + "}"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _flatten(rec: dict) -> dict:
    out = {}
    for k, v in rec.items():
        if isinstance(v, (list, tuple, np.ndarray)):
            for i, x in enumerate(v):
                out[f"{k}_{i}"] = x
        else:
            out[k] = v
    return out


def _csv_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return _num(v) if math.isfinite(v) else ""
    return str(v)


def render(records: list[dict], fmt: str, preamble: str | None = None) -> str:
    if fmt == "json":
        lines = [] if preamble is None else [preamble]
        lines += [_json_value(r) for r in records]
        return "\n".join(lines) + "\n"
    buf = io.StringIO()
    if preamble is not None:
        buf.write(preamble + "\n")
    rows = [_flatten(r) for r in records]
    if rows:
        w = csv.writer(buf, lineterminator="\n")
        header = list(rows[0])
        w.writerow(header)
        for r in rows:
            w.writerow([_csv_value(r.get(k)) for k in header])
    return buf.getvalue()


# -- commands -------------------------------------------------------------------------


def _point_info(q: np.ndarray, M: float) -> tuple[float, str]:
    q2 = minkowski_sq(q)
    return q2, at.classify(q2, M).value


def cmd_transform(args, cfg: RunConfig) -> list[dict]:
    q_out = apply_word(args.el, args.q, cfg.M)
    q2_in, r_in = _point_info(args.q, cfg.M)
    q2_out, r_out = _point_info(q_out, cfg.M)
    return [{"element": " ".join(args.el_text), "q_in": args.q, "q_out": q_out, "q2_in": q2_in,
             "q2_out": q2_out, "region_in": r_in, "region_out": r_out}]


def cmd_lift(args, cfg: RunConfig) -> list[dict]:
    kappa = cn.lift(args.q, args.kplus, cfg.M)
    return [{"q": args.q, "kappa": kappa, "kappa_plus": cn.kappa_plus(kappa, cfg.M),
             "kappa_minus": cn.kappa_minus(kappa, cfg.M), "cone_residual": cn.cone_residual(kappa),
             "projected": cn.project(kappa, cfg.M)}]


def cmd_classify(args, cfg: RunConfig) -> list[dict]:
    if args.q is not None:
        p = at.attach(args.q, cfg.M)
        q2, q5, region, branch = p.q_sq, p.q5, p.region, p.branch
    else:
        q2 = args.q2
        region = at.classify(q2, cfg.M)
        branch = region.branch
        q5 = math.sqrt(max(cfg.M ** 2 - q2 if branch is at.Branch.INTERNAL else cfg.M ** 2 + q2, 0.0))
    lam = at.lambda_of_sq(q2, cfg.M) if q2 != 0.0 else None
    return [{"q2": q2, "region": region.value, "branch": branch.name.lower(), "q5": q5,
             "lambda": lam, "inverted_region": region.dual.value}]


def cmd_orbit(args, cfg: RunConfig) -> list[dict]:
    q = np.asarray(args.q, dtype=float)
    rows = []
    for step in range(args.steps + 1):
        q2, region = _point_info(q, cfg.M)
        rows.append({"step": step, "q": q, "q2": q2, "region": region})
        if step < args.steps:
            q = apply_word(args.el, q, cfg.M)
    return rows


def _scan_points(lo: float, hi: float, step: float) -> np.ndarray:
    if hi == lo:
        return np.array([lo])
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def _scan_model(model: str, cfg: RunConfig):
    """Return a function field -> (L_internal, L_external, flag)."""
    if model == "phi4":
        ps = [md.Phi4Params(cfg.g, BranchSpec(b, cfg.m, cfg.M), cfg.eta) for b in at.Branch]
        return lambda x: (md.phi4_L_int(x, ps[0]), md.phi4_L_int(x, ps[1]), "")
    if model == "higgs":
        ps = [md.HiggsParams(cfg.f, cfg.M, b) for b in at.Branch]
        return lambda x: (md.higgs_L_int(x, ps[0]), md.higgs_L_int(x, ps[1]), "")
    ps = [md.SigmaParams(cfg.M, b, cfg.f_pi) for b in at.Branch]

    def sigma(x):
        pi = np.array([x, 0.0, 0.0])
        try:
            return md.sigma_L_int(pi, ps[0]), md.sigma_L_int(pi, ps[1]), ""
        except PionPole:
            return None, None, "pole"
        except NoRealBranch:
            return None, None, "domain"
    return sigma


SCAN_DEFAULT_RANGE = {"phi4": (-3.0, 3.0, 0.01), "higgs": (-3.0, 3.0, 0.01), "sigma": (-90.0, 90.0, 1.0)}


def cmd_scan(args, cfg: RunConfig) -> tuple[list[dict], str]:
    lo, hi, step = args.range or SCAN_DEFAULT_RANGE[args.model]
    fn = _scan_model(args.model, cfg)
    rows = []
    for x in _scan_points(lo, hi, step):
        li, le, flag = fn(float(x))
        rows.append({"field": float(x), "L_int_internal": li, "L_int_external": le, "flag": flag})
    echo = {"model": args.model, "M": cfg.M, "g": cfg.g, "eta": cfg.eta, "m": cfg.m,
            "f": cfg.f, "f_pi": cfg.f_pi, "range": [lo, hi, step]}
    preamble = _json_value(echo) if cfg.format == "json" else "# " + " ".join(
        f"{k}={_csv_value(v) if not isinstance(v, list) else ':'.join(_num(x) for x in v)}" for k, v in echo.items())
    return rows, preamble


def cmd_series(args, cfg: RunConfig) -> list[dict]:
    fit = md.sigma_series_coefficients(md.SigmaParams(cfg.M, args.branch, cfg.f_pi))
    rows = fit.rows()
    rows.append({"coefficient": "fit_residual", "fitted": fit.residual, "expected": 0.0,
                 "relative_error": fit.residual / cfg.f_pi ** 2})
    return rows


def cmd_masses(args, cfg: RunConfig) -> list[dict]:
    M_pi = md.scale_from_pion_mass(cfg.m_pi)
    higgs = md.higgs_mass_sq(md.HiggsParams(cfg.f, cfg.M))
    u, u2 = cfg.units, f"{cfg.units}^2"
    return [
        {"quantity": "M_from_pion_mass", "value": M_pi, "unit": u},
        {"quantity": "pion_mass_sq_external", "value": md.pion_mass_sq(at.Branch.EXTERNAL, M_pi, cfg.f_pi),
         "unit": u2},
        {"quantity": "pion_mass_sq_internal", "value": md.pion_mass_sq(at.Branch.INTERNAL, M_pi, cfg.f_pi),
         "unit": u2},
        {"quantity": "higgs_raw_curvature", "value": higgs.raw, "unit": u2},
        {"quantity": "higgs_normalization", "value": higgs.normalization, "unit": ""},
        {"quantity": "higgs_mass_sq", "value": higgs.mass_sq, "unit": u2},
    ]


def cmd_verify(args, cfg: RunConfig) -> tuple[list[dict], bool]:
    grid = verify.GridSettings(cfg.grid_points, cfg.grid_half_width, cfg.t5)
    results = verify.run(args.suite, cfg.seed, grid)
    unknown = verify.apply_tolerances(results, cfg.tolerances)
    if unknown:
        raise UsageError(f"tolerance overrides match no check: {', '.join(unknown)}")
    records = [r.record() for r in results]
    for rec in records:
        rec["failed"] = ";".join(rec["failed"]) if cfg.format == "csv" else rec["failed"]
    return records, all(not r.failures for r in results)


# -- parser ----------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--format", choices=("csv", "json"), help="output format (default json)")
    common.add_argument("--seed", type=int, help="random seed (default 0)")
    common.add_argument("--M", type=float, help="conformal breaking scale M (default 1)")

    parser = argparse.ArgumentParser(prog="confmom", description="Momentum-space conformal toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", parents=[common], help="apply group elements to a momentum")
    p.add_argument("--el", type=element, action="append", required=True,
                   help="element spec; repeat for a word applied right to left")
    p.add_argument("--q", type=four_vector, required=True)

    p = sub.add_parser("lift", parents=[common], help="lift a momentum to the 6D cone")
    p.add_argument("--q", type=four_vector, required=True)
    p.add_argument("--kplus", type=float, default=1.0)

    p = sub.add_parser("classify", parents=[common], help="region, branch and q5 of a momentum")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--q", type=four_vector)
    g.add_argument("--q2", type=float)

    p = sub.add_parser("orbit", parents=[common], help="iterate a word on a momentum")
    p.add_argument("--el", type=element, action="append", required=True)
    p.add_argument("--q", type=four_vector, required=True)
    p.add_argument("--steps", type=int, default=10)

    p = sub.add_parser("scan", parents=[common], help="tabulate L_int on both branches")
    p.add_argument("--model", choices=("phi4", "sigma", "higgs"), required=True)
    p.add_argument("--range", type=value_range, help="lo:hi:step")
    p.add_argument("--g", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--m", type=float)
    p.add_argument("--f", type=float)
    p.add_argument("--f-pi", dest="f_pi", type=float)

    p = sub.add_parser("series", parents=[common], help="fit the sigma-model Laurent series")
    p.add_argument("--f-pi", dest="f_pi", type=float)
    p.add_argument("--branch", type=at.Branch.parse, default=at.Branch.EXTERNAL)

    p = sub.add_parser("masses", parents=[common], help="pion and Higgs mass coefficients")
    p.add_argument("--m-pi", dest="m_pi", type=float)
    p.add_argument("--f", type=float)
    p.add_argument("--f-pi", dest="f_pi", type=float)

    p = sub.add_parser("verify", parents=[common], help="run invariant suites")
    p.add_argument("--suite", choices=(*verify.SUITES, "all"), default="all")
    return parser


COMMANDS = {
    "transform": cmd_transform, "lift": cmd_lift, "classify": cmd_classify, "orbit": cmd_orbit,
    "scan": cmd_scan, "series": cmd_series, "masses": cmd_masses, "verify": cmd_verify,
}


_NEGATIVE_VALUE = re.compile(r"^-[0-9.]")


def _attach_negative_values(argv: list[str]) -> list[str]:
    """Rewrite ``--opt -1,2`` as ``--opt=-1,2`` so argparse does not read a flag."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok.startswith("--") and "=" not in tok and i + 1 < len(argv) and _NEGATIVE_VALUE.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _raw_el(argv: list[str]) -> list[str]:
    out = []
    for i, tok in enumerate(argv):
        if tok == "--el" and i + 1 < len(argv):
            out.append(argv[i + 1])
        elif tok.startswith("--el="):
            out.append(tok[5:])
    return out


def main(argv: list[str] | None = None) -> int:
    argv = _attach_negative_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = RunConfig.load(args.config)
        overrides = {k: getattr(args, k, None) for k in ("format", "seed", "M", "g", "eta", "m", "f", "f_pi", "m_pi")}
        cfg = cfg.override(**overrides)
    except (OSError, ValueError, TypeError) as exc:
        print(f"confmom: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    args.el_text = _raw_el(argv)
    try:
        out = COMMANDS[args.command](args, cfg)
    except DomainError as exc:
        print(f"confmom: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except UsageError as exc:
        print(f"confmom: {exc}", file=sys.stderr)
        return EXIT_USAGE
    code = EXIT_OK
    preamble = None
    if args.command == "verify":
        out, ok = out
        code = EXIT_OK if ok else EXIT_VERIFY
    elif args.command == "scan":
        out, preamble = out
    sys.stdout.write(render(out, cfg.format, preamble))
    return code


def entry() -> None:
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 success, 1 unexpected error, 2 usage error, 3 invalid
input, 4 numerically indeterminate, 5 oracle or cross-check mismatch.
"""

from __future__ import annotations

import argparse
import ast
import json
import math
import sys
import warnings

import numpy as np

from . import __version__
from .errors import InvalidSpecError, KreinStabError
from .fileio import krein_csv, load_config, load_json, qbh_from_json, spectrum_csv, write_csv, bbt_from_json
from .krein import detect_krein_collisions, dynamical_stability, krein_report
from .models import FAMILIES, bkc_bbt, bkc_closed_form_spectrum, family_spec
from .nambu import build_effective_sph
from .spectral import eigendecompose
from .tolerances import DEFAULT_TOL, Tolerances

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_INPUT, EXIT_INDETERMINATE, EXIT_MISMATCH = 0, 1, 2, 3, 4, 5

_MODEL_FLAGS = {
    "N": int,
    "t": float,
    "Delta": float,
    "s": float,
    "phi": float,
    "alpha": float,
    "beta": float,
    "x": float,
    "y": float,
    "omega_s": float,
    "mu": float,
}

_SAFE = {k: getattr(np, k) for k in ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "arccos", "arcsin", "tanh", "cosh", "sinh")}
_SAFE.update(pi=math.pi, e=math.e)


class _UsageError(Exception):
    pass


def _schema_hint(model: str | None) -> str:
    if model in FAMILIES:
        return f"model {model!r} takes parameters {sorted(FAMILIES[model][1])}"
    return "models: " + ", ".join(f"{m} {sorted(d)}" for m, (_, d) in sorted(FAMILIES.items()))


def _add_model_args(p):
    p.add_argument("--model", choices=sorted(FAMILIES), help="model family")
    for name, typ in _MODEL_FLAGS.items():
        p.add_argument(f"--{name.replace('_', '-')}", dest=f"m_{name}", type=typ, metavar=name.upper())
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE", help="extra model parameter")
    p.add_argument("--spec", help="QBHSpec JSON file (instead of --model)")


def _add_common(p):
    p.add_argument("--config", help="JSON config replacing the flags")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kreinstab", description="Stability analysis of quadratic bosonic Hamiltonians.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command")

    for name, helptext in (
        ("spectrum", "eigenvalues, multiplicities and quartets at one model point"),
        ("classify", "stability verdict and per-vector Krein report"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_model_args(p)
        _add_common(p)

    p = sub.add_parser("kpr", help="KPR at a point, or along a contour")
    _add_model_args(p)
    _add_common(p)
    p.add_argument("--sigma", nargs=3, type=float, metavar=("MIN", "MAX", "STEPS"))
    p.add_argument("--set", action="append", default=[], metavar="PARAM=EXPR", help="contour: parameter as a function of sigma")
    p.add_argument("--seed", default="max_re", help="tracked vector: max_re, an integer rank, or a complex target")

    p = sub.add_parser("scan", help="stability grid in long-format CSV")
    _add_model_args(p)
    _add_common(p)
    p.add_argument("--axis", nargs=4, action="append", default=[], metavar=("NAME", "MIN", "MAX", "STEP"))
    p.add_argument("--grid", type=float, help="shorthand step for both default axes")
    p.add_argument("--refine", action="store_true", help="bisect boundary crossings (20 iterations)")
    p.add_argument("--boundary-out", help="CSV path for refined boundary points")
    p.add_argument("--kpr", action="store_true", help="add a tracked-KPR column")
    p.add_argument("--workers", type=int)

    p = sub.add_parser("flow", help="spectral flow along a path")
    _add_model_args(p)
    _add_common(p)
    p.add_argument("--sigma", nargs=3, type=float, metavar=("MIN", "MAX", "STEPS"))
    p.add_argument("--set", action="append", default=[], metavar="PARAM=EXPR")

    p = sub.add_parser("gbt", help="generalized Bloch solve with a dense cross-check")
    _add_model_args(p)
    _add_common(p)
    p.add_argument("--bbt", help="BBTSpec JSON file")
    p.add_argument("--strategy", choices=("auto", "grid+refine", "analytic-roots"), default="auto",
                   help="auto: closed-form seeds when the BKC point is exactly solvable, else grid+refine")
    p.add_argument("--grid-points", type=int, default=41)

    p = sub.add_parser("evolve", help="mode or quadrature trajectories")
    _add_model_args(p)
    _add_common(p)
    p.add_argument("--times", nargs=3, type=float, metavar=("T0", "T1", "STEPS"), default=[0.0, 10.0, 101])
    p.add_argument("--kind", choices=("mode", "quadrature"), default="mode")
    p.add_argument("--site", type=int, default=None, help="initial excitation site (1-based)")
    p.add_argument("--quadrature", choices=("x", "p"), default="x")

    p = sub.add_parser("oracle-check", help="run the analytic-versus-numeric suite")
    p.add_argument("--suite", default="all")
    p.add_argument("--config", help=argparse.SUPPRESS)
    return ap


def _parse_value(v: str):
    try:
        return int(v)
    except ValueError:
        pass
    try:
        return float(v)
    except ValueError:
        raise _UsageError(f"parameter value {v!r} is not a number") from None


def _model_point(args, cfg) -> tuple:
    """(model name, params) from the config, flags or a spec file."""
    model = cfg.get("model") or getattr(args, "model", None)
    params = dict(cfg.get("params", {}))
    for name in _MODEL_FLAGS:
        v = getattr(args, f"m_{name}", None)
        if v is not None:
            params[name] = v
    for kv in getattr(args, "param", []):
        if "=" not in kv:
            raise _UsageError(f"--param expects KEY=VALUE, got {kv!r}")
        k, v = kv.split("=", 1)
        params[k] = _parse_value(v)
    if model is None:
        raise _UsageError("no model given; use --model or --spec. " + _schema_hint(None))
    if model not in FAMILIES:
        raise _UsageError(f"unknown model {model!r}. " + _schema_hint(None))
    unknown = set(params) - set(FAMILIES[model][1])
    if unknown:
        raise _UsageError(f"unknown parameters {sorted(unknown)}. " + _schema_hint(model))
    if (
        getattr(args, "command", None) in ("kpr", "flow")
        and model in ("bkc", "bkc_mu")
        and int(params.get("N", FAMILIES[model][1]["N"])) % 2 == 0
    ):
        warnings.warn("even N gives degenerate spectra; eigenvector tracking may be ambiguous", stacklevel=2)
    return model, params


def _G(args, cfg):
    if getattr(args, "spec", None):
        spec = qbh_from_json(load_json(args.spec))
        return build_effective_sph(spec).G, None, {}
    model, params = _model_point(args, cfg)
    return build_effective_sph(family_spec(model, params)).G, model, params


def _tol(cfg) -> Tolerances:
    t = cfg.get("tolerances", {})
    if not isinstance(t, dict):
        raise InvalidSpecError("'tolerances' must be an object")
    try:
        return DEFAULT_TOL.with_(**{k: float(v) for k, v in t.items()})
    except TypeError as exc:
        raise InvalidSpecError(f"unknown tolerance: {exc}") from None


def _emit(text: str, args, cfg) -> None:
    out = cfg.get("out") or getattr(args, "out", None)
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


_ALLOWED_NODES = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Load, ast.Constant,
                  ast.operator, ast.unaryop)


def _compile_expr(key: str, src: str):
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise InvalidSpecError(f"bad expression for {key}: {src!r}") from exc
    for node in ast.walk(tree):
        bad = not isinstance(node, _ALLOWED_NODES)
        bad = bad or (isinstance(node, ast.Name) and node.id not in _SAFE and node.id != "sigma")
        bad = bad or (isinstance(node, ast.Call) and (node.keywords or not isinstance(node.func, ast.Name)))
        bad = bad or (isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)))
        if bad:
            raise InvalidSpecError(f"expression for {key} may use only numbers, sigma, arithmetic and {sorted(_SAFE)}")
    return compile(tree, f"<{key}>", "eval")


def _path_fn(exprs: list, cfg):
    path = dict(cfg.get("options", {}).get("path", {}))
    for e in exprs:
        if "=" not in e:
            raise _UsageError(f"--set expects PARAM=EXPR, got {e!r}")
        k, v = e.split("=", 1)
        path[k.strip()] = v.strip()
    if not path:
        raise _UsageError("a path needs at least one --set PARAM=EXPR")
    codes = {k: _compile_expr(k, v) for k, v in path.items()}

    def fn(sigma):
        ns = dict(_SAFE, sigma=sigma)
        return {k: float(eval(c, {"__builtins__": {}}, ns)) for k, c in codes.items()}

    return fn


def _sigmas(arg, cfg):
    s = arg or cfg.get("options", {}).get("sigma")
    if s is None:
        raise _UsageError("--sigma MIN MAX STEPS is required")
    lo, hi, n = float(s[0]), float(s[1]), int(s[2])
    if n < 2:
        raise _UsageError("sigma needs at least 2 steps")
    return np.linspace(lo, hi, n)


def _seed(v):
    if v in (None, "max_re"):
        return "max_re"
    try:
        return int(v)
    except ValueError:
        try:
            return complex(v.replace("i", "j"))
        except ValueError:
            raise _UsageError(f"bad --seed {v!r}") from None


def cmd_spectrum(args, cfg) -> int:
    G, _, _ = _G(args, cfg)
    rep = eigendecompose(G, _tol(cfg))
    if args.format == "json":
        _emit(json.dumps(rep.rows(), indent=1) + "\n", args, cfg)
    else:
        _emit(spectrum_csv(rep), args, cfg)
    return EXIT_OK


def cmd_classify(args, cfg) -> int:
    tol = _tol(cfg)
    G, _, _ = _G(args, cfg)
    v = dynamical_stability(G, tol)
    if v.verdict == "indeterminate":
        sys.stderr.write(f"indeterminate: {v.reason}\n")
        return EXIT_INDETERMINATE
    rep = eigendecompose(G, tol)
    rows = krein_report(rep, tol)
    kcs = detect_krein_collisions(rep, tol)
    if args.format == "json":
        _emit(
            json.dumps(
                {"verdict": v.verdict, "reason": v.reason, "max_abs_im_omega": v.max_imag,
                 "krein_collisions": len(kcs), "vectors": [r.as_dict() for r in rows]},
                indent=1,
                default=str,
            )
            + "\n",
            args,
            cfg,
        )
    else:
        _emit(krein_csv(rows), args, cfg)
    sys.stderr.write(f"verdict: {v.verdict} ({v.reason}); Krein collisions: {len(kcs)}\n")
    return EXIT_OK


def cmd_kpr(args, cfg) -> int:
    from .scan import contour_eval

    tol = _tol(cfg)
    if args.sigma is None and "sigma" not in cfg.get("options", {}):
        G, _, _ = _G(args, cfg)
        rows = [r for r in krein_report(G, tol) if r.position == 1]
        _emit(write_csv(None, ["eigen_index", "re_omega", "im_omega", "kpr"],
                        ((r.eigen_index, r.omega.real, r.omega.imag, r.kpr) for r in rows)), args, cfg)
        return EXIT_OK
    model, params = _model_point(args, cfg)
    sig = _sigmas(args.sigma, cfg)
    vals, diags = contour_eval(model, params, _path_fn(args.set, cfg), sig, "kpr", _seed(args.seed), tol)
    for d in diags:
        sys.stderr.write(d + "\n")
    _emit(write_csv(None, ["sigma", "kpr"], zip(sig, vals)), args, cfg)
    return EXIT_OK


def _axes(args, cfg, model):
    from .scan import Axis

    if cfg.get("grid"):
        return [Axis.from_dict(cfg["grid"][k]) for k in sorted(cfg["grid"])]
    if args.axis:
        try:
            return [Axis(a[0], float(a[1]), float(a[2]), float(a[3])) for a in args.axis]
        except ValueError:
            raise _UsageError("--axis expects NAME MIN MAX STEP") from None
    step = args.grid or 0.01
    defaults = {
        "bkc": [("s", 0.0, 1.0), ("phi", 0.0, math.pi)],
        "bkc_mu": [("mu", 0.0, 1.0), ("Delta", 0.0, 1.0)],
        "single_mode": [("alpha", -1.0, 1.0), ("beta", -1.0, 1.0)],
        "cavity_qed": [("x", -0.9, 2.0), ("y", -1.0, 1.0)],
    }[model]
    return [Axis(n, lo, hi, step) for n, lo, hi in defaults]


def cmd_scan(args, cfg) -> int:
    from .scan import kpr_scan, refine_boundary, stability_scan

    tol = _tol(cfg)
    model, params = _model_point(args, cfg)
    axes = _axes(args, cfg, model)
    grid = stability_scan(model, params, axes, tol, args.workers)
    if args.kpr:
        grid.kpr, diags = kpr_scan(model, params, axes, tol=tol)
        for d in diags:
            sys.stderr.write(d + "\n")
    if args.refine or args.boundary_out:
        refine_boundary(grid, 20, tol)
        if args.boundary_out:
            grid.boundary_csv(args.boundary_out)
    _emit(grid.to_csv(), args, cfg)
    n_ind = int(np.sum(grid.verdict == "indeterminate"))
    if n_ind:
        sys.stderr.write(f"{n_ind} grid points were indeterminate\n")
    return EXIT_OK


def cmd_flow(args, cfg) -> int:
    from .scan import spectral_flow

    tol = _tol(cfg)
    model, params = _model_point(args, cfg)
    tr = spectral_flow(model, params, _path_fn(args.set, cfg), _sigmas(args.sigma, cfg), tol)
    for step, kind, detail in tr.annotations:
        sys.stderr.write(f"step {step}: {kind}: {detail}\n")
    _emit(write_csv(None, ["step", "sigma", "track", "re_omega", "im_omega", "signature", "kpr"], tr.rows()), args, cfg)
    return EXIT_OK


def cmd_gbt(args, cfg) -> int:
    from .gbt import bulk_solution_basis, eigen_search
    from scipy.optimize import linear_sum_assignment

    tol = _tol(cfg)
    if args.bbt:
        spec = bbt_from_json(load_json(args.bbt))
    else:
        model, params = _model_point(args, cfg)
        if model != "bkc":
            raise _UsageError("gbt builds block-Toeplitz specs for --model bkc only; use --bbt for others")
        p = dict(FAMILIES["bkc"][1])
        p.update(params)
        spec = bkc_bbt(int(p["N"]), p["t"], p["Delta"], p["s"], p["phi"])
    seeds = None
    strategy = args.strategy
    if strategy != "grid+refine" and not args.bbt:
        seeds = bkc_closed_form_spectrum(int(p["N"]), p["t"], p["Delta"], p["s"], p["phi"])
    if strategy == "analytic-roots" and seeds is None:
        raise _UsageError("analytic-roots needs a closed-form BKC point (s = 0, or s = 1 with phi in {0, pi/2, pi}, or t = Delta)")
    if strategy == "auto":
        strategy = "grid+refine" if seeds is None else "analytic-roots"
    res = eigen_search(spec, strategy, grid=args.grid_points, seeds=seeds, tol=tol)
    dense = np.linalg.eigvals(spec.dense())
    if res.complete:
        C = np.abs(dense[:, None] - res.eigenvalues[None, :])
        r, c = linear_sum_assignment(C)
        gap = float(C[r, c].max())
    else:
        gap = math.inf
    counts = sorted({bulk_solution_basis(spec, w).count() for w in (0.37 + 0.11j, -0.53 + 0.07j)})
    report = {
        "N": spec.N,
        "R": spec.R,
        "complete": res.complete,
        "found": len(res.eigenvalues),
        "distinct": [[w.real, w.imag, m] for w, m in res.distinct],
        "max_deviation_from_dense": gap,
        "max_residual": float(res.residuals.max()) if len(res.residuals) else None,
        "bulk_solution_counts": counts,
        "evaluations": res.evaluations,
    }
    _emit(json.dumps(report, indent=1) + "\n", args, cfg)
    if not res.complete:
        return EXIT_INDETERMINATE
    return EXIT_OK if gap <= 1e-8 and counts == [4 * spec.R] else EXIT_MISMATCH


def cmd_evolve(args, cfg) -> int:
    from .dynamics import evolve_mode, phase_transport_sim, spectral_growth

    tol = _tol(cfg)
    t0, t1, n = args.times
    times = np.linspace(t0, t1, int(n))
    if args.spec:
        spec = qbh_from_json(load_json(args.spec))
    else:
        model, params = _model_point(args, cfg)
        spec = family_spec(model, params)
    N = spec.N
    site = (args.site or (N + 1) // 2) - 1
    if not 0 <= site < N:
        raise _UsageError(f"--site must lie in 1..{N}")
    if args.kind == "quadrature":
        x0, p0 = np.zeros(N), np.zeros(N)
        (x0 if args.quadrature == "x" else p0)[site] = 1.0
        tr = phase_transport_sim(spec, x0, p0, times)
        sys.stderr.write(f"chirality (right/left energy): x {tr.chirality['x']:.6g}, p {tr.chirality['p']:.6g}"
                         + ("; quadratures are coupled\n" if tr.coupled else "\n"))
        _emit(write_csv(None, ["time", "site", "x_amplitude", "p_amplitude"], tr.rows()), args, cfg)
        return EXIT_OK
    v0 = np.zeros(2 * N, dtype=complex)
    v0[2 * site] = 1.0
    G = build_effective_sph(spec).G
    tr = evolve_mode(G, v0, times, tol)
    sys.stderr.write(f"growth: {tr.growth_classification} (fit), {spectral_growth(G, v0, tol)} (spectral)\n")
    _emit(write_csv(None, ["time", "component_index", "re", "im"], tr.rows()), args, cfg)
    return EXIT_OK


def cmd_oracle_check(args, cfg) -> int:
    from .oracles import SUITES, run_suite

    if args.suite != "all" and args.suite not in SUITES:
        raise _UsageError(f"unknown suite {args.suite!r}; choose from all, {', '.join(SUITES)}")
    checks = run_suite(args.suite)
    for c in checks:
        print(c.line())
    return EXIT_OK if all(c.ok for c in checks) else EXIT_MISMATCH


COMMANDS = {
    "spectrum": cmd_spectrum,
    "classify": cmd_classify,
    "kpr": cmd_kpr,
    "scan": cmd_scan,
    "flow": cmd_flow,
    "gbt": cmd_gbt,
    "evolve": cmd_evolve,
    "oracle-check": cmd_oracle_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if len(argv) >= 2 and argv[0] == "--config":
        # subcommand taken from the config file
        try:
            cmd = load_config(argv[1]).get("command")
        except KreinStabError as exc:
            sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
            return exc.exit_code
        if not cmd:
            sys.stderr.write("usage error: config has no 'command'\n")
            return EXIT_USAGE
        argv = [cmd] + argv
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    cfg = {}
    try:
        if getattr(args, "config", None):
            cfg = load_config(args.config)
            cmd = cfg.get("command")
            if cmd and args.command and cmd != args.command:
                raise _UsageError(f"config command {cmd!r} conflicts with {args.command!r}")
        if not args.command:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        return COMMANDS[args.command](args, cfg)
    except _UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except KreinStabError as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return exc.exit_code
    except (ValueError, ZeroDivisionError, SyntaxError, NameError) as exc:
        sys.stderr.write(f"invalid input: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

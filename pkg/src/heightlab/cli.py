"""Command-line front end: ``heightlab <command> [flags]``.

Results go to stdout as JSON (or CSV for grids). With ``--out DIR`` the
result, a manifest and any CSV/SVG artifacts are written there instead.
Exit codes: 0 success, 2 input error, 3 budget or quadrature failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import platform
import sys
from importlib import metadata
from pathlib import Path
from typing import Any, Sequence

from . import core, enumeration, heights, localdens, mahler, p1lab, toric, verdict
from .cache import Cache, canonical_json, resolve_cache_dir
from .core import MetricSpec, dumps, to_jsonable
from .errors import HeightlabError, InputError
from .plot import loglog_svg

log = logging.getLogger("heightlab")

QMC_SEED = 20240601


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# input helpers


def _load_json(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _variety(path: str):
    return core.variety_from_dict(_load_json(path))


def _metric(args) -> MetricSpec:
    return MetricSpec.parse(args.metric, float(args.shift))


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(f"expected comma-separated integers, got {text!r}") from exc


def _fourier(text: str | None):
    return p1lab.FourierFunction.parse(text) if text else None


def _scalar(text: str) -> Any:
    if ";" in text:
        return [_scalar(v) for v in text.split(";") if v]
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _inputs(text: str) -> dict:
    """JSON object, path to a JSON file, or k=v pairs (lists as a;b;c)."""
    t = text.strip()
    if t.startswith("{"):
        try:
            return json.loads(t)
        except json.JSONDecodeError as exc:
            raise InputError(f"--inputs is not valid JSON: {exc}") from exc
    if os.path.isfile(t):
        return _load_json(t)
    out = {}
    for part in t.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise InputError(f"expected key=value in --inputs, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = _scalar(v.strip())
    return out


def _need(d: dict, *keys: str) -> list:
    missing = [k for k in keys if k not in d]
    if missing:
        raise InputError(f"missing inputs: {', '.join(missing)}")
    try:
        return [d[k] if isinstance(d[k], list) else float(d[k]) for k in keys]
    except (TypeError, ValueError) as exc:
        raise InputError(f"non-numeric input: {exc}") from exc


# ---------------------------------------------------------------------------
# commands; each returns (result, extras) where extras maps file suffix -> text


def cmd_height_point(args, cache):
    raw = [c for c in args.coords.split(",")]
    metric = _metric(args)
    if any("i" in c or "j" in c for c in raw):
        pt = core.normalize_gaussian(raw)
    else:
        pt = core.normalize_point(raw)
    ph = heights.height_of(pt, metric)
    return {"h": ph.h, "H": _exact_float(ph.H), "point": [str(c) for c in pt.coords],
            "metric": metric.name, "shift": metric.shift}, {}


def _exact_float(x: float) -> float | int:
    return int(x) if float(x).is_integer() and abs(x) < 2**53 else x


def cmd_p1(args, cache):
    u = _fourier(args.fourier)
    phi = p1lab.anticanonical(args.metric, u, float(args.shift))
    tol = args.tol
    what = args.what
    if what == "energy":
        rep = p1lab.energy_E(phi, p1lab.WEIL_METRIC, tol)
        return {"value": rep.value, "est_error": rep.est_error, "nodes": rep.quadrature_nodes}, {}
    if what == "height":
        rep = p1lab.metric_height_report(phi, tol)
        return {"value": 4 * rep.value, "est_error": 4 * rep.est_error, "h_O1": rep.value,
                "h_hat": rep.value, "bundle": "anticanonical"}, {}
    if what == "ding":
        return {"value": p1lab.ding_arith(phi, tol), "est_error": None}, {}
    if what == "masses":
        c = p1lab.complex_mass_p1(phi, tol)
        r = p1lab.real_mass_p1(phi, tol)
        return {"complex": c.value, "real": r.value, "est_error": max(c.est_error, r.est_error)}, {}
    if what == "mt":
        if u is None:
            u = p1lab.FourierFunction(0.0)
        return {"value": p1lab.mt_functional(u), "dirichlet_energy": p1lab.dirichlet_energy(u),
                "est_error": 0.0}, {}
    if what == "real-theorem":
        if args.route == "circle":
            rep = p1lab.real_theorem_mt_route(u or p1lab.FourierFunction(0.0), tol)
        else:
            rep = p1lab.real_theorem_functional(phi, tol)
        return rep, {}
    raise InputError(f"unknown p1 computation {what!r}")


def cmd_mahler(args, cache):
    data = _load_json(args.form)
    f = core.variety_from_dict(data)
    inputs = {"form": data, "method": args.method, "res": args.res, "tol": args.tol}
    return cache.get_put("mahler", inputs, lambda: mahler.mahler_measure(
        f, args.method, args.res, args.tol)), {}


def cmd_localdensity(args, cache):
    data = _load_json(args.form)
    f = core.variety_from_dict(data)
    inputs = {"form": data, "p": args.p, "rmax": args.rmax, "budget": args.budget}
    return cache.get_put("localdensity", inputs, lambda: localdens.local_density(
        f, args.p, args.rmax, args.budget, args.strict)), {}


def cmd_eulerprod(args, cache):
    data = _load_json(args.form)
    f = core.variety_from_dict(data)
    inputs = {"form": data, "pmax": args.pmax, "rmax": args.rmax, "budget": args.budget,
              "alpha": args.alpha}
    res = cache.get_put("eulerprod", inputs, lambda: localdens.euler_product(
        f, args.pmax, args.rmax, args.budget, args.alpha))
    rows = [[p, fac_str, fac, pp] for (p, fac_str, fac), pp in
            zip(res["factors"], res["partial_products"])]
    return res, {"csv": _csv(["p", "factor", "factor_float", "partial_product"], rows)}


def cmd_count(args, cache):
    data = _load_json(args.variety)
    v = core.variety_from_dict(data)
    excl_data = _load_json(args.exclude) if args.exclude else []
    excl = enumeration.load_exclusions(excl_data)
    metric = _metric(args)
    inputs = {"variety": data, "metric": metric.name, "shift": metric.shift, "B": args.B,
              "grid": args.grid, "exclusions": excl_data, "r": args.r, "budget": args.budget,
              "sieve": not args.no_sieve}
    res = cache.get_put("count", inputs, lambda: enumeration.count_points(
        v, metric, args.B, excl, args.grid, None, args.shards, not args.no_sieve,
        args.budget, args.r, True, args.workers))
    rows = list(zip(res["B_grid"], res["counts"]))
    extras = {"csv": _csv(["B", "N"], rows)}
    if args.plot:
        extras["svg"] = loglog_svg({"N(B)": (res["B_grid"], res["counts"])},
                                   "point counts", "B", "N(B)")
    return res, extras


def cmd_minpoint(args, cache):
    data = _load_json(args.variety)
    v = core.variety_from_dict(data)
    metric = _metric(args)
    inputs = {"variety": data, "metric": metric.name, "shift": metric.shift, "cap": args.cap,
              "field": args.field, "budget": args.budget}
    return cache.get_put("minpoint", inputs, lambda: enumeration.min_point(
        v, metric, args.cap, args.field, args.budget)), {}


def cmd_toric(args, cache):
    data = _load_json(args.polytope)
    if isinstance(data, list):
        cat = toric.load_catalog(data)
        n = cat[0].dim if cat else 1
        table = toric.gap_table(cat, n)
        rows = [[r["name"], str(r["degree"]), r["kps"]] for r in table["rows"]]
        return table, {"csv": _csv(["name", "degree", "kps"], rows)}
    P = toric.LatticePolytope.from_dict(data)
    rep = toric.polytope_measure(P)
    explicit = data.get("markers") if args.markers == "explicit" else None
    markers = toric.marker_points(P, args.k, args.markers, explicit)
    bins = toric.canonical_model_binomials(P, args.k, args.markers, explicit)
    rhs, cmp = toric.universal_bound_rhs(P)
    out = rep.to_dict()
    out.update({"vertices": P.to_dict()["vertices"], "k": args.k, "marker_mode": args.markers,
                "markers": [list(m) for m in markers], "binomials": [str(b) for b in bins],
                "c_n_over_factorial": cmp, "bound_minus_c_n_term": rhs - cmp})
    if args.markers == "vertices":
        out["marker_note"] = ("vertex markers; the lattice-point mode is needed for "
                              "projective normality in general")
    return out, {}


def cmd_check(args, cache):
    d = _inputs(args.inputs)
    what = args.what
    if what == "main":
        h, mu, vol, n = _need(d, "h", "mu_C", "vol", "n")
        return verdict.main_conjecture_check(h, mu, vol, int(n), float(d.get("error", 0.0))), {}
    if what == "diagonal":
        if "d" not in d or "a" not in d:
            raise InputError("missing inputs: d, a")
        a = d["a"] if isinstance(d["a"], list) else [d["a"]]
        X = core.DiagonalForm(int(d["d"]), len(a) - 2, tuple(int(x) for x in a))
        rhs = verdict.diagonal_bound_rhs(X)
        out = {"rhs": rhs, "c_n": verdict.c_n_constant(X.n), "d": X.d, "n": X.n, "a": list(X.a)}
        if "h" in d:
            out["report"] = to_jsonable(verdict.InequalityReport.make(float(d["h"]), rhs))
        return out, {}
    if what == "minpoint":
        mu, vol, n = _need(d, "mu_C", "vol", "n")
        bound = verdict.min_point_bound(mu, vol, int(n))
        if "H" in d:
            return verdict.min_point_check(float(d["H"]), mu, vol, int(n)), {}
        return {"bound": bound}, {}
    if what == "zhang":
        e, h = _need(d, "e", "h_hat")
        e = e if isinstance(e, list) else [e]
        return verdict.zhang_report(e, h, float(d.get("error", 0.0))), {}
    if what == "ej":
        H, theta = _need(d, "min_H", "theta")
        return {"product": verdict.ej_product(H, theta), "min_H": H, "theta": theta}, {}
    raise InputError(f"unknown check {what!r}")


def cmd_study_xa(args, cache):
    a_grid = _int_list(args.a)
    inputs = {"d": args.d, "n": args.n, "a": a_grid, "pmax": args.pmax, "cap": args.cap,
              "budget": args.budget}
    res = cache.get_put("study-xa", inputs, lambda: verdict.xa_study(
        args.d, args.n, a_grid, args.pmax, args.cap, None, args.budget))
    cols = ["a", "H_min", "mahler", "exp_h_proxy", "bad_product", "good_partial"]
    rows = [[r[c] for c in cols] for r in res["rows"]]
    extras = {"csv": _csv(cols, rows)}
    if args.plot:
        a = [r["a"] for r in res["rows"]]
        extras["svg"] = loglog_svg({"min H": (a, [r["H_min"] for r in res["rows"]]),
                                    "exp h proxy": (a, [r["exp_h_proxy"] for r in res["rows"]])},
                                   f"diagonal family d={args.d} n={args.n}", "a", "value")
    return res, extras


def cmd_peyre(args, cache):
    shape = args.field
    if "," in shape:
        shape = tuple(_int_list(shape))
    return verdict.peyre_assemble(args.eta, args.mu_c, args.mu_r, shape), {}


COMMANDS = {
    "height-point": cmd_height_point, "p1": cmd_p1, "mahler": cmd_mahler,
    "localdensity": cmd_localdensity, "eulerprod": cmd_eulerprod, "count": cmd_count,
    "minpoint": cmd_minpoint, "toric": cmd_toric, "check": cmd_check,
    "study-xa": cmd_study_xa, "peyre": cmd_peyre,
}


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([to_jsonable(x) for x in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("run options")
    g.add_argument("--config", help="key=value file; flags override it")
    g.add_argument("--cache-dir", help="result cache directory (else $HEIGHTLAB_CACHE)")
    g.add_argument("--no-cache", action="store_true", help="disable the result cache")
    g.add_argument("--out", help="write result, manifest and artifacts into this directory")
    g.add_argument("--format", choices=["json", "csv"], default="json")
    g.add_argument("--plot", action="store_true", help="emit an SVG chart where available")
    g.add_argument("--workers", type=int, default=1, help="worker processes")

    p = _Parser(prog="heightlab", description="Heights, densities and height inequalities.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def metric_flags(sp, default="weil"):
        sp.add_argument("--metric", default=default, help="weil, fs or lp:<p>")
        sp.add_argument("--shift", type=float, default=0.0, help="constant metric shift")

    sp = sub.add_parser("height-point", parents=[common], help="height of a rational point")
    sp.add_argument("--coords", required=True, help="comma-separated, e.g. 1,1/2 or 1+i,2")
    metric_flags(sp)

    sp = sub.add_parser("p1", parents=[common], help="metrics on the projective line")
    sp.add_argument("what", choices=["energy", "height", "ding", "masses", "mt", "real-theorem"])
    sp.add_argument("--metric", choices=[p1lab.FS, p1lab.WEIL], default=p1lab.FS)
    sp.add_argument("--fourier", help="perturbation a0,a1,b1,a2,b2,...")
    sp.add_argument("--shift", type=float, default=0.0, help="anticanonical shift")
    sp.add_argument("--tol", type=float, default=p1lab.DEFAULT_TOL)
    sp.add_argument("--route", choices=["line", "circle"], default="line",
                    help="real-theorem: real line integral or circle form")

    sp = sub.add_parser("mahler", parents=[common], help="Mahler measure of a form")
    sp.add_argument("--form", required=True)
    sp.add_argument("--method", choices=["jensen", "quadrature", "qmc"], default="jensen")
    sp.add_argument("--res", type=int, default=None)
    sp.add_argument("--tol", type=float, default=1e-11)

    sp = sub.add_parser("localdensity", parents=[common], help="p-adic density")
    sp.add_argument("--form", required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--rmax", type=int, default=localdens.DEFAULT_RMAX)
    sp.add_argument("--budget", type=int, default=localdens.DEFAULT_BUDGET)
    sp.add_argument("--strict", action="store_true", help="fail if not stabilized")

    sp = sub.add_parser("eulerprod", parents=[common], help="Euler product partial products")
    sp.add_argument("--form", required=True)
    sp.add_argument("--pmax", type=int, required=True)
    sp.add_argument("--rmax", type=int, default=localdens.DEFAULT_RMAX)
    sp.add_argument("--budget", type=int, default=localdens.DEFAULT_BUDGET)
    sp.add_argument("--alpha", type=float, default=1.0)

    sp = sub.add_parser("count", parents=[common], help="count points of bounded height")
    sp.add_argument("--variety", required=True)
    sp.add_argument("--B", type=float, required=True)
    sp.add_argument("--grid", type=int, default=8)
    sp.add_argument("--exclude")
    sp.add_argument("--shards", type=int, default=1)
    sp.add_argument("--no-sieve", action="store_true")
    sp.add_argument("--r", type=int, default=0, help="log power in the fit")
    sp.add_argument("--budget", type=int, default=enumeration.DEFAULT_BUDGET)
    metric_flags(sp)

    sp = sub.add_parser("minpoint", parents=[common], help="point of least height")
    sp.add_argument("--variety", required=True)
    sp.add_argument("--cap", type=float, default=1e6)
    sp.add_argument("--field", choices=["q", "qi"], default="q")
    sp.add_argument("--budget", type=int, default=enumeration.DEFAULT_BUDGET)
    metric_flags(sp)

    sp = sub.add_parser("toric", parents=[common], help="moment polytope invariants")
    sp.add_argument("--polytope", required=True, help="polytope or catalog JSON")
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--markers", choices=["vertices", "lattice", "explicit"], default="vertices")

    sp = sub.add_parser("check", parents=[common], help="inequality checks")
    sp.add_argument("--what", choices=["main", "diagonal", "minpoint", "zhang", "ej"], required=True)
    sp.add_argument("--inputs", required=True, help="JSON, JSON file or k=v pairs (lists a;b)")

    sp = sub.add_parser("study-xa", parents=[common], help="diagonal family study")
    sp.add_argument("--d", type=int, default=4)
    sp.add_argument("--n", type=int, default=3)
    sp.add_argument("--a", default="3,21,33")
    sp.add_argument("--pmax", type=int, default=50)
    sp.add_argument("--cap", type=float, default=1e3)
    sp.add_argument("--budget", type=int, default=enumeration.DEFAULT_BUDGET)

    sp = sub.add_parser("peyre", parents=[common], help="assemble a Peyre constant")
    sp.add_argument("--eta", type=float, required=True, help="alpha times the Euler product")
    sp.add_argument("--mu-c", type=float, default=0.0)
    sp.add_argument("--mu-r", type=float, default=0.0)
    sp.add_argument("--field", default="q", help="q, qi or m_R,m_C,degree")
    return p


def _read_config(path: str) -> dict[str, str]:
    out = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise InputError(f"{path}:{lineno}: expected key=value")
                k, v = line.split("=", 1)
                out[k.strip().lstrip("-").replace("-", "_")] = v.strip()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from exc
    return out


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> None:
    """Turn config entries into defaults of the chosen subcommand."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = _read_config(known.config)
    sub_action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = next((t for t in rest if t in sub_action.choices), None)
    if command is None:
        return
    sp = sub_action.choices[command]
    actions = {a.dest: a for a in sp._actions}
    defaults = {}
    for k, v in cfg.items():
        if k not in actions:
            raise InputError(f"unknown config key {k!r} for {command}")
        actions[k].required = False
        if isinstance(actions[k], (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            defaults[k] = v.lower() in ("1", "true", "yes", "on")
        else:
            defaults[k] = v
    sp.set_defaults(**defaults)


# ---------------------------------------------------------------------------
# manifest and output


def _versions() -> dict:
    out = {"python": platform.python_version()}
    for pkg in ("heightlab", "numpy", "scipy"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = None
    return out


def manifest(args) -> dict:
    inputs = {k: v for k, v in sorted(vars(args).items())
              if k not in ("config", "cache_dir", "no_cache", "out", "format", "plot")}
    files = {}
    for key in ("form", "variety", "exclude", "polytope"):
        path = inputs.get(key)
        if path and os.path.isfile(path):
            files[key] = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    blob = canonical_json({"args": inputs, "files": files})
    return {"command": args.command, "args": inputs, "input_files_sha256": files,
            "inputs_hash": hashlib.sha256(blob.encode()).hexdigest(),
            "versions": _versions(), "seeds": {"qmc": QMC_SEED}}


def _emit(args, result, extras: dict, stdout) -> None:
    text = dumps(result) + "\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "result.json").write_text(text)
        (out / "manifest.json").write_text(dumps(manifest(args)) + "\n")
        for suffix, body in extras.items():
            name = "grid.csv" if suffix == "csv" else f"plot.{suffix}"
            (out / name).write_text(body)
        stdout.write(str(out / "result.json") + "\n")
        return
    if args.format == "csv":
        if "csv" not in extras:
            raise InputError(f"{args.command} has no tabular output; use --format json")
        stdout.write(extras["csv"])
    else:
        stdout.write(text)
    if "svg" in extras:
        Path(f"heightlab-{args.command}.svg").write_text(extras["svg"])


def _diagnostic(exc: BaseException, code: int, stderr) -> int:
    stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc),
                             "exit_code": code}, sort_keys=True) + "\n")
    return code


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    try:
        parser = build_parser()
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        cache = Cache(resolve_cache_dir(args.cache_dir, args.no_cache))
        result, extras = COMMANDS[args.command](args, cache)
        _emit(args, result, extras, stdout)
        return 0
    except HeightlabError as exc:
        return _diagnostic(exc, exc.exit_code, stderr)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        return _diagnostic(exc, 2, stderr)
    except MemoryError as exc:
        return _diagnostic(exc, 3, stderr)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Command-line front end: bell, predict, descent, oracle, lorenz, henon, compare."""
from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import bell, descent, maps, oracle, spectra
from .errors import ConfigError, EmptySampleError, PfzerosError, ResonanceWarning, ToleranceFailure
from .io import dumps, read_csv, write_csv, write_json
from .polymap import MapSpec, to_fraction

MAP_NAMES = ("logistic", "hermite", "hermite_r", "julia", "henon", "file")

DEFAULTS = {
    "common": {"out": "out", "seed": 0, "precision": "auto"},
    "map": {"map": "logistic", "lam": "4", "r": 2, "alpha": None, "beta": None, "gamma": None,
            "map_file": None, "override_domain": False},
    "bell": {"n": 6, "expect_resonance": False},
    "predict": {"n": 60, "scheme": "2n+1", "bins": "cells", "estimator": "edge", "k_fit": 3},
    "descent": {"s": None, "s_grid": "0.001,4,400", "kappa_draws": 0},
    "oracle": {"kind": "ulam", "n": 12, "samples": 10 ** 6, "burn_in": 10 ** 4, "chains": 64, "bins": 100,
               "m": 400, "subsamples": 64, "grid": "clustered"},
    "lorenz": {"sigma": "10", "rho": "28", "beta": "8/3", "samples": 10000, "dual": "1,1,1",
               "scale": 1.0, "route_tol": 0.05},
    "henon": {"alpha": "1.4", "beta": "0.3", "gamma": "0", "samples": 10000, "depth": 4, "scale": 2.0,
              "x_max": None},
    "compare": {"a": None, "b": None, "rescale": "none", "l1_max": None, "ks_max": None,
                "domination": False, "map_b": "hermite", "lam_b": "1", "offset_b": 0.0, "s_grid": "0.05,3,60"},
}
# keys that affect where or how fast a run happens, never what it writes
NON_CONTENT = {"out", "threads", "config"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _common(p, suppress=False):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="JSON RunConfig; explicit flags override it")
    p.add_argument("--out", default=d, help="output directory")
    p.add_argument("--seed", type=int, default=d)
    p.add_argument("--threads", type=int, default=d, help="worker threads (PFZEROS_THREADS fallback)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exact", dest="precision", action="store_const", const="exact", default=d)
    g.add_argument("--float", dest="precision", action="store_const", const="float", default=d)


def _map_args(p):
    p.add_argument("--map", choices=MAP_NAMES)
    p.add_argument("--lambda", dest="lam", help="linear coefficient; accepts p/q")
    p.add_argument("--r", type=int)
    p.add_argument("--alpha")
    p.add_argument("--beta")
    p.add_argument("--gamma")
    p.add_argument("--map-file")
    p.add_argument("--override-domain", action="store_const", const=True)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pfzeros", description=__doc__)
    _common(parser)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("bell", help="H_k(y) and e^n(y) coefficient files")
    _common(p, True)
    _map_args(p)
    p.add_argument("--n", type=int)
    p.add_argument("--expect-resonance", action="store_const", const=True)

    p = sub.add_parser("predict", help="zeros -> q -> p pipeline")
    _common(p, True)
    _map_args(p)
    p.add_argument("--n", type=int)
    p.add_argument("--scheme", choices=sorted(spectra.SCHEMES))
    p.add_argument("--bins", help="'cells' or an integer")
    p.add_argument("--estimator", choices=("edge", "hist"))
    p.add_argument("--k-fit", type=int, help="samples used by each edge-law fit")

    p = sub.add_parser("descent", help="critical points, q(s) and κ-samples")
    _common(p, True)
    _map_args(p)
    p.add_argument("--s", help="comma-separated s values (overrides --s-grid)")
    p.add_argument("--s-grid", help="lo,hi,count")
    p.add_argument("--kappa-draws", type=int)

    p = sub.add_parser("oracle", help="independent ground truth")
    _common(p, True)
    _map_args(p)
    p.add_argument("--kind", choices=("mc", "ulam", "hermite", "symbolic"))
    p.add_argument("--n", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--burn-in", type=int)
    p.add_argument("--chains", type=int)
    p.add_argument("--bins", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--subsamples", type=int)
    p.add_argument("--grid", choices=oracle.ULAM_GRIDS)

    p = sub.add_parser("lorenz", help="dual geometry and random ovals")
    _common(p, True)
    p.add_argument("--sigma")
    p.add_argument("--rho")
    p.add_argument("--beta")
    p.add_argument("--samples", type=int)
    p.add_argument("--dual", help="r,s,t for the geometry report")
    p.add_argument("--scale", type=float)
    p.add_argument("--route-tol", type=float)

    p = sub.add_parser("henon", help="random parabola branches")
    _common(p, True)
    p.add_argument("--alpha")
    p.add_argument("--beta")
    p.add_argument("--gamma")
    p.add_argument("--samples", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--scale", type=float)
    p.add_argument("--x-max", type=float)

    p = sub.add_parser("compare", help="density distances and domination, exit 4 on failure")
    _common(p, True)
    _map_args(p)
    p.add_argument("--a", help="CSV density file or closed:<arcsine|semicircle>[:lo:hi]")
    p.add_argument("--b")
    p.add_argument("--rescale", choices=("none", "support", "quantile"))
    p.add_argument("--l1-max", type=float)
    p.add_argument("--ks-max", type=float)
    p.add_argument("--domination", action="store_const", const=True)
    p.add_argument("--map-b", choices=MAP_NAMES[:-1])
    p.add_argument("--lambda-b", dest="lam_b")
    p.add_argument("--offset-b", type=float)
    p.add_argument("--s-grid")
    return parser


# config resolution -------------------------------------------------------------------
def resolve(argv=None) -> tuple[str, dict, int]:
    ns = vars(build_parser().parse_args(argv))
    cmd = ns.pop("command")
    cfg = {**DEFAULTS["common"]}
    if cmd in ("bell", "predict", "descent", "oracle", "compare"):
        cfg.update(DEFAULTS["map"])
    cfg.update(DEFAULTS[cmd])
    path = ns.get("config")
    if path:
        try:
            obj = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if "command" in obj and obj["command"] != cmd:
            raise ConfigError(f"config is for '{obj['command']}', not '{cmd}'")
        opts = obj.get("options", obj)
        unknown = set(opts) - set(cfg) - {"command"}
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        cfg.update({k: v for k, v in opts.items() if k != "command"})
    for k, v in ns.items():
        if v is not None and k not in ("config", "threads"):
            cfg[k] = v
    threads = ns.get("threads")
    if threads is None:
        threads = oracle.default_threads()
    if threads < 1:
        raise ConfigError("--threads must be >= 1")
    return cmd, cfg, threads


def _content(cmd, cfg) -> dict:
    return {"command": cmd, "options": {k: v for k, v in sorted(cfg.items()) if k not in NON_CONTENT}}


def _frac(v, name):
    try:
        return to_fraction(str(v))
    except (ValueError, ZeroDivisionError, ConfigError) as exc:
        raise ConfigError(f"--{name} must be a number or p/q, got {v!r}") from exc


def build_map(cfg, which: str = "") -> MapSpec:
    name = cfg["map" + which] if not which else cfg["map_b"]
    lam = cfg["lam"] if not which else cfg["lam_b"]
    if name == "file":
        if not cfg.get("map_file"):
            raise ConfigError("--map file needs --map-file")
        return MapSpec.from_json(Path(cfg["map_file"]).read_text())
    if name == "logistic":
        return maps.make_logistic(_frac(lam, "lambda"), override=bool(cfg.get("override_domain")))
    if name == "hermite":
        return maps.make_hermite(_frac(lam, "lambda"))
    if name == "hermite_r":
        return maps.make_hermite_r(_frac(lam, "lambda"), cfg.get("r") or 2)
    if name == "julia":
        return maps.make_julia(complex(cfg.get("alpha") or 0.3))
    if name == "henon":
        return maps.make_henon(_frac(cfg.get("alpha") or "1.4", "alpha"), _frac(cfg.get("beta") or "0.3", "beta"),
                               _frac(cfg.get("gamma") or "0", "gamma"))
    raise ConfigError(f"unknown map {name!r}")


def _grid(spec: str) -> np.ndarray:
    try:
        lo, hi, cnt = spec.split(",")
        g = np.geomspace(float(lo), float(hi), int(cnt))
    except ValueError as exc:
        raise ConfigError(f"grid must be lo,hi,count, got {spec!r}") from exc
    if len(g) < 2 or g[0] <= 0:
        raise ConfigError("grid needs count >= 2 and lo > 0")
    return g


def _floats(spec: str, name: str) -> list[float]:
    try:
        return [float(v) for v in str(spec).split(",")]
    except ValueError as exc:
        raise ConfigError(f"--{name} must be comma-separated numbers") from exc


# commands ---------------------------------------------------------------------------------
def cmd_bell(cfg, out: Path, threads: int) -> dict:
    f = build_map(cfg)
    n = int(cfg["n"])
    if n < 0:
        raise ConfigError("--n must be >= 0")
    mode = bell._resolve_mode(cfg["precision"], n)
    seq = bell.bell_sequence(f, n, mode)
    for k, H in enumerate(seq):
        write_csv(out / f"H_{k}.csv", *H.csv_rows())
    report = {"map": f.to_json_dict(), "n": n, "mode": mode, "files": [f"H_{k}.csv" for k in range(n + 1)]}
    if n >= 1:
        e = bell.deviation_from_hn(seq[-1], n)
        write_csv(out / f"e_{n}.csv", *e.csv_rows())
        report["files"].append(f"e_{n}.csv")
        lead = e.coefficient(n)
        report["deviation_leading"] = lead
        report["resonant"] = lead == 0
        if lead == 0 and not cfg.get("expect_resonance"):
            warnings.warn(f"leading coefficient 1 - lambda^{n} of e^{n} vanishes (resonance)", ResonanceWarning)
    write_json(out / "bell.json", report)
    return report


def cmd_predict(cfg, out: Path, threads: int) -> dict:
    f = build_map(cfg)
    n = int(cfg["n"])
    if n < 1:
        raise ConfigError("--n must be >= 1")
    mode = bell._resolve_mode(cfg["precision"], n)
    H = bell.bell_hn(f, n, mode)
    z = spectra.real_zeros(H)
    write_csv(out / "zeros.csv", *z.csv_rows())
    s = spectra.normalize_zeros(z, n, cfg["scheme"])
    if len(s) == 0:
        raise EmptySampleError("no real zeros")
    bins = cfg["bins"]
    if bins != "cells":
        try:
            bins = int(bins)
        except ValueError as exc:
            raise ConfigError("--bins must be 'cells' or an integer") from exc
    hist = spectra.empirical_density(s, bins=bins, range=(0.0, None) if bins == "cells" else None)
    write_csv(out / "hist.csv", *hist.csv_rows())
    if cfg["estimator"] == "edge":
        q = spectra.edge_density_estimate(s, k_fit=int(cfg["k_fit"]))
    else:
        q = hist.to_curve()
    write_csv(out / "q.csv", *q.csv_rows())
    p = spectra.invariant_from_q(q)
    write_csv(out / "p.csv", *p.csv_rows())
    prov = {
        "map": f.to_json_dict(), "n": n, "mode": mode, "scheme": cfg["scheme"], "estimator": cfg["estimator"],
        "zeros": {"count": len(z), "positive": len(s), "n_complex": z.n_complex, "method": z.method,
                  "max_residual": z.max_residual},
        "q": q.meta, "p": p.meta,
    }
    write_json(out / "provenance.json", prov)
    return prov


def cmd_descent(cfg, out: Path, threads: int) -> dict:
    f = build_map(cfg)
    grid = np.array(_floats(cfg["s"], "s")) if cfg.get("s") is not None else _grid(cfg["s_grid"])
    points = []
    for sv in grid:
        svec = [sv] * f.d
        cps = descent.critical_points(f, svec)
        q = None
        if f.d == 1:
            q = float(descent.zero_density_1d(f, [sv], normalize=False).values[0]) if sv > 0 else 0.0
        points.append({"s": float(sv), "critical_points": [c.to_dict() for c in cps], "q": q})
    report = {"map": f.to_json_dict(), "points": points}
    if f.d == 1 and len(grid) >= 2 and np.all(np.diff(grid) > 0) and grid[0] > 0:
        curve = descent.zero_density_1d(f, grid, normalize=False)
        if curve.integral() > 0:
            write_csv(out / "q.csv", *curve.normalized().csv_rows())
            report["raw_integral"] = curve.integral()
    draws = int(cfg.get("kappa_draws") or 0)
    if draws:
        if f.d != 1:
            raise ConfigError("--kappa-draws needs a one-dimensional map")
        from . import rng as _rng
        k = _rng.uniform(int(cfg["seed"]), np.arange(draws, dtype=np.uint64), 0)
        ks = descent.kappa_solve(f, k, np.geomspace(max(grid[0], 1e-9), grid[-1], 2000))
        write_csv(out / "kappa.csv", ["kappa", "s", "residual"],
                  [(a, b, c) for a, b, c in zip(ks.kappa, ks.s, ks.residual) if np.isfinite(b)])
        report["kappa"] = {"draws": draws, "no_bracket": ks.n_no_bracket, "attained": list(ks.attained)}
    write_json(out / "descent.json", report)
    return report


def cmd_oracle(cfg, out: Path, threads: int) -> dict:
    kind = cfg["kind"]
    report = {"kind": kind}
    if kind == "hermite":
        z = oracle.hermite_zeros(int(cfg["n"]))
        write_csv(out / "hermite_zeros.csv", *z.csv_rows())
        report.update(n=int(cfg["n"]), max_residual=z.max_residual)
    elif kind == "symbolic":
        f = build_map(cfg)
        H = oracle.symbolic_hn(f, int(cfg["n"]))
        write_csv(out / f"H_{int(cfg['n'])}_symbolic.csv", *H.csv_rows())
        report.update(map=f.to_json_dict(), n=int(cfg["n"]))
    elif kind == "mc":
        f = build_map(cfg)
        st = oracle.mc_invariant(f, int(cfg["samples"]), int(cfg["burn_in"]), int(cfg["chains"]), int(cfg["seed"]),
                                 int(cfg["bins"]), threads=threads)
        write_csv(out / "mc.csv", *st.histogram.csv_rows())
        report.update(map=f.to_json_dict(), **st.meta, samples=st.n_samples, regime=st.regime,
                      cycle=None if st.cycle is None else {"period": st.cycle.period, "points": st.cycle.points})
    elif kind == "ulam":
        f = build_map(cfg)
        u = oracle.ulam_invariant(f, int(cfg["m"]), int(cfg["subsamples"]), grid=cfg["grid"])
        write_csv(out / "ulam.csv", *u.density.csv_rows())
        write_csv(out / "ulam_matrix.csv", *u.csv_rows())
        report.update(map=f.to_json_dict(), m=u.m, subsamples=u.subsamples, grid=u.grid,
                      iterations=u.iterations, residual=u.residual, degenerate=u.degenerate)
    else:
        raise ConfigError(f"unknown oracle kind {kind!r}")
    report["seed"] = int(cfg["seed"])
    write_json(out / "oracle.json", report)
    return report


def cmd_lorenz(cfg, out: Path, threads: int) -> dict:
    sg, rh, be = (float(_frac(cfg[k], k)) for k in ("sigma", "rho", "beta"))
    dual = _floats(cfg["dual"], "dual")
    if len(dual) != 3:
        raise ConfigError("--dual needs three numbers r,s,t")
    geo = maps.lorenz_geometry(sg, rh, be, dual)
    cloud = maps.lorenz_ovals(sg, rh, be, int(cfg["samples"]), int(cfg["seed"]),
                              scale=float(cfg["scale"]), route_tol=float(cfg["route_tol"]))
    write_csv(out / "ovals.csv", *cloud.csv_rows())
    labels, counts = np.unique(cloud.labels, return_counts=True)
    report = {"geometry": geo.to_dict(), "samples": int(cfg["samples"]), "rejection_rate": cloud.rejection_rate,
              "fallback_count": cloud.fallback_count, "max_residual": float(cloud.residual.max()),
              "centers": {str(l): int(c) for l, c in zip(labels, counts)},
              "on_route_fraction": float(cloud.on_route.mean())}
    write_json(out / "lorenz.json", report)
    return report


def cmd_henon(cfg, out: Path, threads: int) -> dict:
    al, be, ga = (float(_frac(cfg[k], k)) for k in ("alpha", "beta", "gamma"))
    cloud = maps.henon_branches(al, be, ga, int(cfg["samples"]), int(cfg["seed"]), depth=int(cfg["depth"]),
                                scale=float(cfg["scale"]), x_max=cfg.get("x_max"))
    write_csv(out / "branches.csv", *cloud.csv_rows())
    report = {"alpha": al, "beta": be, "gamma": ga, "samples": int(cfg["samples"]),
              "rejection_rate": cloud.rejection_rate, "fallback_count": cloud.fallback_count,
              "max_residual": float(cloud.residual.max()), "branch_counts": np.bincount(cloud.branch).tolist(),
              **cloud.extra}
    write_json(out / "henon.json", report)
    return report


def load_density(spec: str):
    """A CSV written by this tool (grid,value or left,right,mass) or closed:<kind>[:lo:hi]."""
    if spec.startswith("closed:"):
        parts = spec.split(":")
        support = (float(parts[2]), float(parts[3])) if len(parts) == 4 else (0.0, 1.0) if parts[1] == "arcsine" else (-1.0, 1.0)
        return spectra.closed_form_curve(parts[1], support)
    try:
        header, rows = read_csv(spec)
    except OSError as exc:
        raise ConfigError(f"cannot read {spec}: {exc}") from exc
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    if header == ["grid", "value"]:
        return spectra.DensityCurve(data[:, 0], data[:, 1]).normalized()
    if header == ["left", "right", "mass"]:
        edges = np.append(data[:, 0], data[-1, 1])
        m = data[:, 2]
        return spectra.EmpiricalDensity(edges, m / m.sum(), len(m), True)
    raise ConfigError(f"{spec}: unrecognized density header {header}")


def cmd_compare(cfg, out: Path, threads: int) -> dict:
    report = {}
    failed = []
    if cfg.get("a") and cfg.get("b"):
        r = spectra.density_distance(load_density(cfg["a"]), load_density(cfg["b"]), rescale=cfg["rescale"])
        report["distance"] = r.to_dict()
        if cfg.get("l1_max") is not None and not r.L1 < float(cfg["l1_max"]):
            failed.append(f"L1 {r.L1:.6g} >= {cfg['l1_max']}")
        if cfg.get("ks_max") is not None and not r.KS < float(cfg["ks_max"]):
            failed.append(f"KS {r.KS:.6g} >= {cfg['ks_max']}")
    elif cfg.get("a") or cfg.get("b"):
        raise ConfigError("compare needs both --a and --b")
    if cfg.get("domination"):
        f1, f2 = build_map(cfg), build_map(cfg, "_b")
        grid = _grid(cfg["s_grid"])
        off = float(cfg.get("offset_b") or 0.0)
        dom = descent.domination(lambda s: descent.PRF(f1, s), lambda s: descent.PRF(f2, s, off), grid)
        write_csv(out / "domination.csv", ["s", "diff", "winner", "crossover"],
                  list(zip(grid, dom.diff, dom.winner, dom.crossover)))
        report["domination"] = {"wins_a": int((dom.winner > 0).sum()), "wins_b": int((dom.winner < 0).sum()),
                                "ties": int((dom.winner == 0).sum()), "crossovers": int(dom.crossover.sum())}
    if not report:
        raise ConfigError("compare needs --a/--b or --domination")
    report["passed"] = not failed
    report["failures"] = failed
    write_json(out / "compare.json", report)
    if failed:
        raise ToleranceFailure("; ".join(failed))
    return report


COMMANDS = {"bell": cmd_bell, "predict": cmd_predict, "descent": cmd_descent, "oracle": cmd_oracle,
            "lorenz": cmd_lorenz, "henon": cmd_henon, "compare": cmd_compare}


def _emit(obj):
    sys.stderr.write(json.dumps(obj, sort_keys=True) + "\n")


def main(argv=None) -> int:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            cmd, cfg, threads = resolve(argv)
            out = Path(cfg["out"])
            out.mkdir(parents=True, exist_ok=True)
            write_json(out / "run_config.json", _content(cmd, cfg))
            COMMANDS[cmd](cfg, out, threads)
            code = 0
        except PfzerosError as exc:
            _emit({"error": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code})
            code = exc.exit_code
        except (ArithmeticError, np.linalg.LinAlgError, FloatingPointError) as exc:
            _emit({"error": type(exc).__name__, "message": str(exc), "exit_code": 5})
            code = 5
        for w in caught:
            _emit({"warning": w.category.__name__, "message": str(w.message)})
    return code


if __name__ == "__main__":
    sys.exit(main())

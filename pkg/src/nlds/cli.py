"""Command-line interface: sample fields, verify residuals, analyze blow-ups.

Subcommands
-----------
catalog       list the built-in solution families and their parameters
sample        evaluate a configured solution on a grid, dump CSV/JSON/PNG
verify        finite-difference residual and convergence-order check
singularity   analytic blow-up report with optional numeric cross-check

Configuration is a JSON document.  Angles accept the literal "pi" and
rational multiples such as "2*pi", "-pi/6" or "3*pi/2"; plain numbers
are taken as radians.  Example:

    {
      "source": "ds1_fundamental",
      "parameters": {"r1": 2.0, "phi1": "2*pi", "e1": 0.0, "f1": 1.0},
      "grid": {"box": [-3, 3, -3, 3], "nx": 201, "ny": 201},
      "times": [-0.5, 0.0],
      "outputs": ["csv", "json"]
    }

The source is a catalog family id, the string "constant" for the plain
background, or an object {"kind": "dt", "equation": "ds1"|"ds2",
"seeds": [{"r": ..., "phi": ..., "e": ..., "f": ...}, ...],
"multiplicities": [...]} for a transformation-engine pipeline.

Exit codes: 0 ok, 2 configuration error, 3 degenerate output (grid
entirely singular), 4 verification failure.
"""

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from .catalog import (
    FLAG_SINGULAR,
    catalog_denominator,
    catalog_sample,
    family,
    family_listing,
)
from .dt_ds1 import DegenerateParameterError, ds1_highorder, ds1_solution
from .dt_ds2 import ds2_highorder, ds2_solution
from .singularity import (
    SingularityReport,
    WrongBranchError,
    ds1_critical_time,
    ds1_two_rogue_interval,
    ds2_critical_time,
    ds2_two_rational_interval,
    locate_blowup,
    ridge_lines,
    two_rational_interval_quadratic,
)
from .spectra import (
    GlobalParams,
    SpectralParams,
    lax_residual,
    make_eigen_matrix,
    make_superposed,
    random_points,
)
from .verify import (
    AllMaskedError,
    ConstantBackgroundSolution,
    GridNotSymmetricError,
    LinearlyCorruptedSolution,
    residual_with_order,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3
EXIT_VERIFY = 4

CSV_HEADER = "x,y,re_u,im_u,abs_u,re_w,im_w,flag"
ORDER_BAND = (1.7, 2.3)
SEED_CHECK_TOL = 1e-10
LOCUS_CHECK_TOL = 1e-3

_PI_FORM = re.compile(
    r"^\s*([+-]?)\s*(\d+(?:\.\d*)?|\.\d+)?\s*\*?\s*pi\s*"
    r"(?:/\s*(\d+(?:\.\d*)?|\.\d+))?\s*$", re.IGNORECASE)


class ConfigError(ValueError):
    """Invalid configuration file or flag combination."""


def parse_real(value, what="value"):
    """Parse a real number; strings may use pi literals like '-pi/6'."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, str):
        m = _PI_FORM.match(value)
        if m:
            sign = -1.0 if m.group(1) == "-" else 1.0
            coeff = float(m.group(2)) if m.group(2) else 1.0
            div = float(m.group(3)) if m.group(3) else 1.0
            if div == 0.0:
                raise ConfigError(f"zero divisor in {what}: {value!r}")
            return sign * coeff * np.pi / div
        try:
            return float(value)
        except ValueError:
            raise ConfigError(
                f"cannot parse {what} {value!r}; use a number or a pi "
                f"literal such as 'pi', '2*pi', '-pi/6'") from None
    raise ConfigError(f"{what} must be a number or string, got {value!r}")


class RunConfig:
    """Resolved run settings after merging the config file and flags."""

    def __init__(self):
        self.equation = None
        self.source = None
        self.parameters = {}
        self.box = (-3.0, 3.0, -3.0, 3.0)
        self.nx = 201
        self.ny = 201
        self.times = [0.0]
        self.outputs = ["csv"]
        self.clip = 10.0
        self.h = 0.02
        self.out_dir = Path(".")
        self.seed_check = False
        self.corrupt = False

    def echo(self):
        """JSON-ready snapshot of the resolved settings."""
        return {
            "equation": self.equation,
            "source": self.source,
            "parameters": self.parameters,
            "box": list(self.box),
            "nx": self.nx,
            "ny": self.ny,
            "times": self.times,
            "outputs": self.outputs,
            "clip": self.clip,
            "h": self.h,
        }


def load_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    return raw


def _parse_box(value, what="box"):
    try:
        vals = [parse_real(v, what) for v in value]
    except TypeError:
        raise ConfigError(f"{what} must be a 4-sequence") from None
    if len(vals) != 4:
        raise ConfigError(f"{what} needs 4 entries, got {len(vals)}")
    xmin, xmax, ymin, ymax = vals
    if xmin >= xmax or ymin >= ymax:
        raise ConfigError(f"{what} is empty: {vals}")
    return tuple(vals)


def _normalize_source(source):
    if isinstance(source, str):
        if source == "constant":
            return {"kind": "constant"}
        return {"kind": "catalog", "family": source}
    if isinstance(source, dict):
        kind = source.get("kind")
        if kind not in ("catalog", "dt", "constant"):
            raise ConfigError(f"unknown source kind {kind!r}")
        return dict(source)
    raise ConfigError(f"source must be a string or object, got {source!r}")


def resolve_config(raw, args):
    cfg = RunConfig()
    known = {"equation", "source", "parameters", "grid", "times",
             "outputs", "clip", "h", "out"}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown config keys {unknown}")

    if "source" not in raw:
        raise ConfigError("config needs a 'source'")
    cfg.source = _normalize_source(raw["source"])

    cfg.equation = raw.get("equation")
    if cfg.source["kind"] == "catalog":
        fid = cfg.source.get("family")
        if not isinstance(fid, str):
            raise ConfigError("catalog source needs a 'family' id string")
        derived = "ds1" if fid.startswith("ds1_") else \
            "ds2" if fid.startswith("ds2_") else None
        if derived is None:
            raise ConfigError(f"cannot derive the equation from id {fid!r}")
        if cfg.equation is None:
            cfg.equation = derived
        elif cfg.equation != derived:
            raise ConfigError(
                f"equation {cfg.equation!r} contradicts family {fid!r}")
    else:
        cfg.equation = cfg.equation or cfg.source.get("equation")
        if cfg.equation not in ("ds1", "ds2"):
            raise ConfigError(
                "dt/constant sources need equation 'ds1' or 'ds2'")

    params = raw.get("parameters", {})
    if not isinstance(params, dict):
        raise ConfigError("parameters must be an object")
    cfg.parameters = {k: parse_real(v, f"parameter {k}")
                      for k, v in params.items()}

    grid = raw.get("grid", {})
    if not isinstance(grid, dict):
        raise ConfigError("grid must be an object")
    if "box" in grid:
        cfg.box = _parse_box(grid["box"])
    for attr, key in (("nx", "nx"), ("ny", "ny")):
        if key in grid:
            n = grid[key]
            if not isinstance(n, int) or n < 2:
                raise ConfigError(f"grid {key} must be an integer >= 2")
            setattr(cfg, attr, n)

    if "times" in raw:
        times = raw["times"]
        if not isinstance(times, list) or not times:
            raise ConfigError("times must be a nonempty list")
        cfg.times = [parse_real(t, "time") for t in times]
    if "outputs" in raw:
        outs = raw["outputs"]
        bad = sorted(set(outs) - {"csv", "json", "png"})
        if bad:
            raise ConfigError(f"unknown outputs {bad}")
        cfg.outputs = list(outs)
    if "clip" in raw:
        cfg.clip = parse_real(raw["clip"], "clip")
        if cfg.clip <= 0:
            raise ConfigError("clip must be positive")
    if "h" in raw:
        cfg.h = parse_real(raw["h"], "h")
    if "out" in raw:
        cfg.out_dir = Path(raw["out"])

    if getattr(args, "time", None):
        cfg.times = [parse_real(t, "time") for t in args.time]
    if getattr(args, "grid", None):
        parts = args.grid.split(",")
        if len(parts) != 2:
            raise ConfigError("--grid wants NX,NY")
        try:
            cfg.nx, cfg.ny = int(parts[0]), int(parts[1])
        except ValueError:
            raise ConfigError("--grid wants integers") from None
        if cfg.nx < 2 or cfg.ny < 2:
            raise ConfigError("--grid entries must be >= 2")
    if getattr(args, "box", None):
        cfg.box = _parse_box(args.box.split(","), "--box")
    if getattr(args, "h", None) is not None:
        cfg.h = args.h
    if getattr(args, "out", None):
        cfg.out_dir = Path(args.out)
    if getattr(args, "png", False) and "png" not in cfg.outputs:
        cfg.outputs.append("png")
    cfg.seed_check = bool(getattr(args, "seed_check", False))
    cfg.corrupt = bool(getattr(args, "corrupt_field", False))
    if cfg.h <= 0:
        raise ConfigError("h must be positive")
    return cfg


class CatalogSolution:
    """Samples a closed-form catalog family through the handle protocol."""

    def __init__(self, family_id, bound, gp):
        self.family_id = family_id
        self.bound = bound
        self.gp = gp
        self._den = catalog_denominator(family_id, bound)

    def sample(self, x, y, t, need_w=True):
        return catalog_sample(self.family_id, self.bound, (x, y, t))

    def denominator(self, x, y, t):
        return self._den(x, y, t)


def build_solution(cfg):
    """(solution, global params, spectral seeds or None) for the config."""
    kind = cfg.source["kind"]
    alpha_sq = 1 if cfg.equation == "ds1" else -1
    if kind == "catalog":
        fam = family(cfg.source["family"])
        bound = fam.bind(cfg.parameters)
        gp = GlobalParams(epsilon=fam.epsilon(bound), alpha_sq=fam.alpha_sq)
        if fam.engine_backed:
            return fam.handle(bound), gp, None
        return CatalogSolution(fam.family_id, bound, gp), gp, None

    eps = int(cfg.parameters.get("eps", 1))
    rho = float(cfg.parameters.get("rho", 1.0))
    gp = GlobalParams(epsilon=eps, alpha_sq=alpha_sq, rho=rho)
    if kind == "constant":
        return ConstantBackgroundSolution(gp), gp, None

    seeds = cfg.source.get("seeds")
    if not isinstance(seeds, list) or not seeds:
        raise ConfigError("dt source needs a nonempty 'seeds' list")
    sps = []
    for k, seed in enumerate(seeds):
        if not isinstance(seed, dict) or "r" not in seed or "phi" not in seed:
            raise ConfigError(f"seed {k} needs at least 'r' and 'phi'")
        extra = sorted(set(seed) - {"r", "phi", "e", "f"})
        if extra:
            raise ConfigError(f"seed {k} has unknown keys {extra}")
        sps.append(SpectralParams(
            r=parse_real(seed["r"], "seed r"),
            phi=parse_real(seed["phi"], "seed phi"),
            e=parse_real(seed.get("e", 0.0), "seed e"),
            f=parse_real(seed.get("f", 0.0), "seed f")))
    mults = cfg.source.get("multiplicities", [0] * len(sps))
    if len(mults) != len(sps) or any(not isinstance(m, int) or m < 0
                                     for m in mults):
        raise ConfigError(
            "multiplicities must be one nonnegative integer per seed")
    if cfg.equation == "ds1":
        if any(mults):
            sol = ds1_highorder(sps, mults, gp)
        else:
            sol = ds1_solution([make_eigen_matrix(sp, gp) for sp in sps], gp)
    else:
        if any(mults):
            sol = ds2_highorder(sps, mults, None, gp)
        else:
            sol = ds2_solution(sps, gp=gp)
    return sol, gp, sps


# ---- output writers ----

def _tstr(t):
    return f"{t:.17g}"


def write_json(path, payload):
    Path(path).write_text(
        json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def write_field_csv(path, X, Y, u, w, flags):
    n = X.size
    u = np.asarray(u, dtype=complex).ravel()
    if w is None:
        re_w = np.full(n, np.nan)
        im_w = np.full(n, np.nan)
    else:
        w = np.asarray(w, dtype=complex).ravel()
        re_w, im_w = w.real, w.imag
    cols = np.column_stack([
        X.ravel(), Y.ravel(), u.real, u.imag, np.abs(u),
        re_w, im_w, np.asarray(flags, dtype=float).ravel()])
    np.savetxt(path, cols, fmt="%.17g", delimiter=",",
               header=CSV_HEADER, comments="")


def write_heatmap(path, X, Y, u, flags, clip, t):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    mag = np.minimum(np.abs(np.asarray(u, dtype=complex)), clip)
    data = np.ma.masked_where(np.asarray(flags) == FLAG_SINGULAR, mag)
    cmap = plt.get_cmap("viridis").copy()
    cmap.set_bad("#ff3bf0")
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    mesh = ax.pcolormesh(X, Y, data, cmap=cmap, vmin=0.0, vmax=clip,
                         shading="nearest")
    fig.colorbar(mesh, ax=ax, label=f"|u| (clipped at {clip:g})")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"t = {t:g}; singular samples in magenta")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


# ---- subcommands ----

def cmd_catalog(args):
    listing = family_listing()
    if getattr(args, "json", False):
        print(json.dumps(listing, indent=2, sort_keys=True))
        return EXIT_OK
    for fam in listing:
        route = "engine" if fam["engine_backed"] else "closed form"
        print(f"{fam['id']}  [{route}, alpha^2={fam['alpha_sq']:+d}, "
              f"eps={fam['epsilon']}]")
        print(f"    {fam['description']}")
        for name, info in fam["parameters"].items():
            print(f"    {name} = {info['default']:g}  ({info['doc']})")
    return EXIT_OK


def _grid_arrays(cfg, t):
    xs = np.linspace(cfg.box[0], cfg.box[1], cfg.nx)
    ys = np.linspace(cfg.box[2], cfg.box[3], cfg.ny)
    X, Y = np.meshgrid(xs, ys)
    return X, Y, np.full_like(X, t)


def cmd_sample(cfg):
    sol, _gp, _seeds = build_solution(cfg)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    per_time = []
    files = []
    any_all_singular = False
    for t in cfg.times:
        X, Y, T = _grid_arrays(cfg, t)
        u, w, flags = sol.sample(X, Y, T)
        flags = np.asarray(flags)
        singular = int(np.count_nonzero(flags == FLAG_SINGULAR))
        total = int(flags.size)
        all_singular = singular == total
        any_all_singular = any_all_singular or all_singular
        entry = {"t": t, "masked_fraction": singular / total,
                 "all_singular": all_singular}
        finite = np.isfinite(np.abs(np.asarray(u, dtype=complex)))
        entry["max_abs_u"] = (float(np.max(np.abs(np.asarray(u)[finite])))
                              if np.any(finite) else None)
        if "csv" in cfg.outputs:
            path = cfg.out_dir / f"fields_t{_tstr(t)}.csv"
            write_field_csv(path, X, Y, u, w, flags)
            files.append(path.name)
            entry["csv"] = path.name
        if "png" in cfg.outputs:
            path = cfg.out_dir / f"heatmap_t{_tstr(t)}.png"
            write_heatmap(path, X, Y, u, flags, cfg.clip, t)
            files.append(path.name)
            entry["png"] = path.name
        per_time.append(entry)
        print(f"t={t:g}: {total - singular}/{total} regular samples"
              + (", all singular" if all_singular else ""))
    if "json" in cfg.outputs:
        path = cfg.out_dir / "sample_report.json"
        write_json(path, {"config": cfg.echo(), "per_time": per_time,
                          "files": files})
        print(f"wrote {path}")
    if any_all_singular:
        print("degenerate output: at least one grid is entirely singular",
              file=sys.stderr)
        return EXIT_DEGENERATE
    return EXIT_OK


def _seed_check_payload(seeds, gp):
    if not seeds:
        return {"applicable": False,
                "note": "no spectral seeds in this source"}
    pts = random_points(50, seed=0)
    worst = max(float(lax_residual(make_superposed(sp, gp), gp, pts))
                for sp in seeds)
    return {"applicable": True, "max_residual": worst,
            "tolerance": SEED_CHECK_TOL, "pass": worst <= SEED_CHECK_TOL}


def cmd_verify(cfg):
    sol, gp, seeds = build_solution(cfg)
    if isinstance(sol, CatalogSolution) and not family(
            sol.family_id).has_w:
        raise ConfigError(
            f"family {sol.family_id} carries no mean-flow field; "
            "verification needs one (use a dt source)")
    if cfg.corrupt:
        sol = LinearlyCorruptedSolution(sol)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    reports = []
    overall = True
    for t in cfg.times:
        rep = residual_with_order(sol, gp, grid=cfg.box, t=t, h=cfg.h)
        ok = rep.order == "floor" or (
            isinstance(rep.order, float)
            and ORDER_BAND[0] <= rep.order <= ORDER_BAND[1])
        overall = overall and ok
        entry = {"t": t, "pass": ok}
        entry.update(rep.as_dict())
        reports.append(entry)
        order_txt = rep.order if isinstance(rep.order, str) \
            else f"{rep.order:.3f}"
        print(f"t={t:g}: max_eq1={rep.max_eq1:.3e} "
              f"max_eq2={rep.max_eq2:.3e} order={order_txt} "
              f"{'PASS' if ok else 'FAIL'}")
    payload = {"config": cfg.echo(), "reports": reports,
               "order_band": list(ORDER_BAND), "pass": overall}
    if cfg.seed_check:
        payload["seed_check"] = _seed_check_payload(seeds, gp)
        if payload["seed_check"]["applicable"]:
            print(f"seed check: max Lax residual "
                  f"{payload['seed_check']['max_residual']:.3e}")
            overall = overall and payload["seed_check"]["pass"]
            payload["pass"] = overall
    path = cfg.out_dir / "verify_report.json"
    write_json(path, payload)
    print(f"wrote {path}")
    return EXIT_OK if overall else EXIT_VERIFY


def _bound_without_validation(family_id, parameters):
    """Schema defaults applied without the family's own range checks."""
    fam = family(family_id)
    unknown = sorted(set(parameters) - set(fam.schema))
    if unknown:
        raise ConfigError(
            f"unknown parameters {unknown} for family {family_id}")
    return {name: float(parameters.get(name, default))
            for name, (default, _doc) in fam.schema.items()}


def _sing_ds1_fundamental(bound):
    try:
        return ds1_critical_time(r1=bound["r1"], phi1=bound["phi1"],
                                 e1=bound["e1"], f1=bound["f1"],
                                 eps=int(bound["eps"]))
    except DegenerateParameterError:
        if int(bound["eps"]) == 1:
            note = ("r1^2 = 1 is the transient line rogue wave; its "
                    "denominator is a positive sum of squares")
        else:
            note = "r1^2 = 1 with eps = -1 degenerates to u = 1"
        return SingularityReport("none", notes=[note])


def _sing_ds2_fundamental(bound):
    return ds2_critical_time(r1=bound["r1"], phi1=bound["phi1"],
                             e1=bound["e1"], f1=bound["f1"],
                             eps=int(bound["eps"]))


def _sing_ds1_two_rogue(bound):
    lo, hi = ds1_two_rogue_interval(bound["r1"])
    return SingularityReport(
        "interval", interval=[lo, hi],
        notes=["singular over the whole interval; endpoints from the "
               "closed-form expression"])


def _sing_ds2_two_rational(bound):
    lo, hi = ds2_two_rational_interval()
    exact = ds2_two_rational_interval(exact=True)
    return SingularityReport(
        "interval", interval=[lo, hi],
        notes=["published endpoints; exact quadratic roots in extras"],
        extras={"exact_roots": exact,
                "quadratic": list(two_rational_interval_quadratic())})


def _sing_positive_denominator(_bound):
    return SingularityReport(
        "none",
        notes=["denominator is a positive sum of squares; the wave "
               "peaks and recedes without blow-up"])


def _sing_ridge(family_id):
    def run(bound):
        ridges = ridge_lines(family_id, bound)
        extras = {"ridge_lines": [dict(line) for line in ridges["lines"]]}
        notes = ["nonsingular travelling pair; crest lines in extras"]
        if "angle" in ridges:
            extras["angle"] = ridges["angle"]
            notes.append("crest lines meet at the angle given in extras")
        return SingularityReport("none", notes=notes, extras=extras)
    return run


_SINGULARITY_DISPATCH = {
    "ds1_fundamental": _sing_ds1_fundamental,
    "ds1_peregrine": _sing_positive_denominator,
    "ds1_travelling": _sing_ridge("ds1_travelling"),
    "ds1_two_rogue": _sing_ds1_two_rogue,
    "ds2_fundamental": _sing_ds2_fundamental,
    "ds2_line": _sing_positive_denominator,
    "ds2_travelling": _sing_ridge("ds2_travelling"),
    "ds2_two_rational": _sing_ds2_two_rational,
}


def _locus_residual(locus, x, y):
    c = locus["coefficients"]
    return abs(c["xx"] * x * x + c["xy"] * x * y + c["yy"] * y * y
               + c["x"] * x + c["y"] * y + c["const"])


def _numeric_cross_check(family_id, bound, report, box):
    """locate_blowup agreement data for point-time/interval reports."""
    den = catalog_denominator(family_id, bound)
    if report.kind == "point-time":
        zeros = locate_blowup(den, report.t_c, box=box)
        if not zeros:
            return {"pass": False, "found": 0,
                    "note": "no denominator zeros found at t_c"}
        worst = max(_locus_residual(report.locus, x, y) for x, y in zeros)
        return {"pass": worst <= LOCUS_CHECK_TOL, "found": len(zeros),
                "max_locus_residual": worst, "tolerance": LOCUS_CHECK_TOL}
    lo, hi = report.interval
    t_in = 0.5 * (lo + hi)
    t_out = hi + 0.25 * (hi - lo)
    inside = locate_blowup(den, t_in, box=box)
    outside = locate_blowup(den, t_out, box=box)
    return {"pass": bool(inside) and not outside,
            "t_inside": t_in, "found_inside": len(inside),
            "t_outside": t_out, "found_outside": len(outside)}


def cmd_singularity(cfg):
    if cfg.source["kind"] != "catalog":
        raise ConfigError(
            "singularity analysis needs a catalog source family")
    fid = cfg.source["family"]
    if fid not in _SINGULARITY_DISPATCH:
        raise ConfigError(
            f"no singularity analysis for family {fid}; supported: "
            + ", ".join(sorted(_SINGULARITY_DISPATCH)))
    bound = _bound_without_validation(fid, cfg.parameters)
    report = _SINGULARITY_DISPATCH[fid](bound)
    payload = {"family": fid, "parameters": bound}
    payload.update(report.as_dict())
    if report.extras:
        payload["extras"] = _jsonable(report.extras)

    failed_check = False
    if cfg.seed_check:
        if report.kind == "none":
            payload["numeric_check"] = {
                "applicable": False,
                "note": "nothing to cross-check for kind none"}
        else:
            check = _numeric_cross_check(fid, bound, report, cfg.box)
            payload["numeric_check"] = check
            failed_check = not check["pass"]

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    path = cfg.out_dir / "singularity_report.json"
    write_json(path, payload)
    print(report.as_text())
    if cfg.seed_check and "numeric_check" in payload:
        print(f"numeric check: {payload['numeric_check']}")
    print(f"wrote {path}")
    return EXIT_VERIFY if failed_check else EXIT_OK


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, np.floating, np.integer)):
        return obj.item()
    return obj


# ---- argument parsing ----

def _add_common(sub):
    sub.add_argument("--config", required=True,
                     help="path to the JSON run configuration")
    sub.add_argument("--out", help="output directory (default: cwd)")
    sub.add_argument("--time", action="append", metavar="T",
                     help="evaluation time; repeatable; overrides config")
    sub.add_argument("--grid", metavar="NX,NY",
                     help="grid resolution override")
    sub.add_argument("--box", metavar="XMIN,XMAX,YMIN,YMAX",
                     help="evaluation box override")
    sub.add_argument("--h", type=float,
                     help="finite-difference spacing (verify)")
    sub.add_argument("--png", action="store_true",
                     help="also write |u| heatmaps")
    sub.add_argument("--seed-check", action="store_true",
                     help="run the independent numeric cross-check "
                          "(verify: seed Lax residuals; singularity: "
                          "denominator-zero search)")
    sub.add_argument("--corrupt-field", action="store_true",
                     help=argparse.SUPPRESS)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nlds",
        description="Rational and rogue-wave solutions of nonlocal "
                    "Davey-Stewartson systems: sampling, verification, "
                    "blow-up analysis.")
    subs = parser.add_subparsers(dest="command", required=True)

    cat = subs.add_parser("catalog", help="list solution families")
    cat.add_argument("--json", action="store_true",
                     help="machine-readable listing")

    for name, descr in (("sample", "evaluate fields on a grid"),
                        ("verify", "finite-difference residual check"),
                        ("singularity", "blow-up analysis")):
        _add_common(subs.add_parser(name, help=descr))
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags and 0 after --help; values
        # starting with '-' (negative numbers) need the --flag=value form
        return int(exc.code or 0)
    if args.command == "catalog":
        return cmd_catalog(args)
    try:
        cfg = resolve_config(load_config(args.config), args)
        if args.command == "sample":
            return cmd_sample(cfg)
        if args.command == "verify":
            return cmd_verify(cfg)
        return cmd_singularity(cfg)
    except AllMaskedError as exc:
        print(f"degenerate output: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except GridNotSymmetricError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, DegenerateParameterError, WrongBranchError,
            KeyError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

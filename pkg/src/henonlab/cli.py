"""Command-line front end: ``henonlab <command> [--config FILE] [--key value ...]``.

Config files hold flat ``key = value`` lines with ``#`` comments; complex
values are written ``re,im``.  Flags mirror the keys and win over the file.
Exit status: 0 success, 1 configuration error, 2 numerical precondition failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from pathlib import Path

import numpy as np


class ConfigError(ValueError):
    pass


# -- value parsers ---------------------------------------------------------

def _floats(text: str, key: str, count=None) -> list:
    parts = [p.strip() for p in str(text).split(",")]
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"{key}: expected numbers, got {text!r}") from None
    if count is not None and len(vals) != count:
        raise ConfigError(f"{key}: expected {count} comma-separated numbers, got {len(vals)}")
    return vals


def p_float(text, key):
    return _floats(text, key, 1)[0]


def p_int(text, key):
    try:
        return int(str(text).strip())
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None


def p_bool(text, key):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {text!r}")


def p_complex(text, key):
    re, im = _floats(text, key, 2)
    return complex(re, im)


def p_pair(text, key):
    v = _floats(text, key, 4)
    return (complex(v[0], v[1]), complex(v[2], v[3]))


def p_window(text, key):
    v = _floats(text, key, 4)
    from .green import Window
    try:
        return Window(*v)
    except ValueError as e:
        raise ConfigError(f"{key}: {e}") from None


def p_list(text, key):
    return _floats(text, key)


def p_str(text, key):
    return str(text).strip()


def p_choice(*choices):
    def parse(text, key):
        t = str(text).strip()
        if t not in choices:
            raise ConfigError(f"{key}: expected one of {', '.join(choices)}, got {t!r}")
        return t
    return parse


# -- schema ----------------------------------------------------------------

DEFAULT_MAP = "factor a=0.4,0 p=-1.1,0,0,0,1,0"

COMMON = {
    "map": (p_str, DEFAULT_MAP, "map text; factors separated by ';'"),
    "map_file": (p_str, "", "file with the map text (overrides map)"),
    "out": (p_str, "out", "output directory"),
    "threads": (p_int, 0, "worker threads, 0 = auto"),
    "tol": (p_float, 1e-8, "Green function tolerance"),
    "budget": (p_int, 2048, "iteration budget"),
}

RENDER = {
    "width": (p_int, 512, "pixels"),
    "height": (p_int, 512, "pixels"),
    "window": (p_window, "-3,3,-3,3", "re0,re1,im0,im1 of the line parameter"),
    "z2": (p_complex, "0,0", "the line is {z2 = const}"),
    "minus": (p_bool, "false", "render G- instead of G+"),
    "gmax": (p_float, 0.0, "log-scale ceiling, 0 = grid maximum"),
}

SCHEMA = {
    "render-julia": {**COMMON, **RENDER},
    "render-green": {**COMMON, **RENDER},
    "slice": {**COMMON,
              "resolution": (p_int, 512, "cells per side"),
              "half_width": (p_float, 3.0, "window |Re t|, |Im t| <= half_width"),
              "z2": (p_complex, "0,0", "the line is {z2 = const}"),
              "potential": (p_choice("green", "green_minus", "log_norm", "log_abs_z1"), "green",
                            "potential whose dd^c is sliced"),
              "tol": (p_float, 1e-12, "Green function tolerance")},
    "equidist": {**COMMON,
                 "n_min": (p_int, 1, "first pullback index"),
                 "n_max": (p_int, 10, "last pullback index"),
                 "quadrature": (p_int, 24, "nodes per real axis"),
                 "curve": (p_list, "1,0,1,0", "groups i,j,re,im: coefficient of z1^i z2^j"),
                 "bumps": (p_int, 3, "number of test bumps"),
                 "bump_radius": (p_float, 0.8, "test bump radius"),
                 "tol": (p_float, 1e-12, "Green function tolerance")},
    "periodic": {**COMMON,
                 "period": (p_int, 1, "n in f^n(z) = z"),
                 "seeds_per_axis": (p_int, 7, "Newton seeds per real axis"),
                 "exact": (p_bool, "false", "use elimination (one factor, n <= 2)")},
    "nevanlinna": {**COMMON,
                   "saddle": (p_str, "auto", "'auto' or re1,im1,re2,im2 of a fixed saddle"),
                   "radii": (p_list, "1,4,16,64,256", "disc radii r"),
                   "quadrature": (p_int, 32, "nodes per real axis for T+ pairings"),
                   "angles": (p_int, 512, "angular nodes"),
                   "metric": (p_choice("fubini_study", "euclidean"), "fubini_study",
                              "area form for T(r)"),
                   "bumps": (p_int, 3, "number of test bumps"),
                   "bump_radius": (p_float, 0.8, "test bump radius"),
                   "tol": (p_float, 1e-10, "Green function tolerance")},
    "param-scan": {**COMMON,
                   "a": (p_complex, "0.1,0", "Jacobian parameter of z^2 + c"),
                   "z0": (p_pair, "0,0,0,0", "base point re1,im1,re2,im2"),
                   "window": (p_window, "-2,0.6,-1.3,1.3", "c-window re0,re1,im0,im1"),
                   "width": (p_int, 256, "pixels"),
                   "height": (p_int, 256, "pixels"),
                   "gmax": (p_float, 0.0, "log-scale ceiling, 0 = grid maximum")},
    "selftest": {**COMMON,
                 "full": (p_bool, "false", "run the acceptance criteria at full scale")},
}


def parse_config_text(text: str, schema: dict, source: str = "config") -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in schema:
            raise ConfigError(f"{source}:{lineno}: unknown config key {key!r}")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate config key {key!r}")
        out[key] = value
    return out


def resolve(command: str, file_values: dict, flag_values: dict) -> dict:
    schema = SCHEMA[command]
    raw = {k: v[1] for k, v in schema.items()}
    raw.update(file_values)
    raw.update(flag_values)
    cfg = {}
    for key, (parse, _, _) in schema.items():
        val = raw[key]
        cfg[key] = parse(val, key) if isinstance(val, str) else val
    return cfg


def parse_flags(tokens: list, schema: dict) -> dict:
    out = {}
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}")
        key = tok[2:].replace("-", "_")
        if "=" in key:
            key, value = key.split("=", 1)
        else:
            if i + 1 >= len(tokens):
                raise ConfigError(f"flag --{key} needs a value")
            value = tokens[i + 1]
            i += 1
        if key not in schema:
            raise ConfigError(f"unknown config key {key!r}")
        out[key] = value
        i += 1
    return out


# -- output writers ----------------------------------------------------------

def g17(x) -> str:
    return format(float(x), ".17g")


def log_scale(values: np.ndarray, gmax: float = 0.0) -> np.ndarray:
    """round(255 min(1, log(1+G)/log(1+G_max))) as uint8."""
    v = np.asarray(values, dtype=float)
    top = gmax if gmax > 0 else float(np.max(v)) if v.size else 0.0
    if not top > 0:
        return np.zeros(v.shape, dtype=np.uint8)
    s = np.minimum(1.0, np.log1p(np.maximum(v, 0.0)) / math.log1p(top))
    return np.rint(255.0 * s).astype(np.uint8)


def write_pgm(path: Path, pixels: np.ndarray) -> None:
    h, w = pixels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(pixels, dtype=np.uint8).tobytes())


def write_csv(path: Path, header: list, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _map_from(cfg):
    from .henon import parse_map
    text = Path(cfg["map_file"]).read_text("utf-8") if cfg["map_file"] else cfg["map"].replace(";", "\n")
    try:
        return parse_map(text)
    except ValueError as e:
        raise ConfigError(f"map: {e}") from None


# -- commands ----------------------------------------------------------------

def cmd_render(cfg, out: Path, raw: bool):
    from .green import escape_indices, render_green
    f = _map_from(cfg)
    gg = render_green(f, cfg["window"], (cfg["width"], cfg["height"]), cfg["tol"],
                      base=(0j, cfg["z2"]), budget=cfg["budget"], minus=cfg["minus"])
    name = "green" if raw else "julia"
    write_pgm(out / f"{name}.pgm", log_scale(gg.values, cfg["gmax"]))
    t = gg.points
    if raw:
        rows = ([g17(p.real), g17(p.imag), g17(v), g17(b)]
                for p, v, b in zip(t.ravel(), gg.values.ravel(), gg.error_bounds.ravel()))
        write_csv(out / "green.csv", ["re", "im", "green", "error_bound"], rows)
    else:
        esc = escape_indices(f, t, np.full(t.shape, cfg["z2"]), cfg["budget"], backward=cfg["minus"])
        rows = ([g17(p.real), g17(p.imag), g17(v), int(e)]
                for p, v, e in zip(t.ravel(), gg.values.ravel(), esc.ravel()))
        write_csv(out / "julia.csv", ["re", "im", "green", "escape_index"], rows)


def cmd_slice(cfg, out: Path):
    from .currents import (ComplexLine, green_potential, log_abs_z1, log_norm_potential,
                           slice_measure)
    from .green import Window
    f = _map_from(cfg)
    pot = {"green": lambda: green_potential(f, cfg["tol"]),
           "green_minus": lambda: green_potential(f, cfg["tol"], minus=True),
           "log_norm": log_norm_potential, "log_abs_z1": log_abs_z1}[cfg["potential"]]()
    hw = cfg["half_width"]
    if not hw > 0:
        raise ConfigError("half_width: must be > 0")
    m = slice_measure(pot, ComplexLine.horizontal(cfg["z2"]), Window(-hw, hw, -hw, hw),
                      cfg["resolution"])
    rows = [[g17(c.real), g17(c.imag), g17(v), int(fl)]
            for c, v, fl in zip(m.centers.ravel(), m.cell_mass.ravel(), m.flagged.ravel())]
    rows.append(["total_mass", g17(m.total_mass), g17(m.negative_mass), int(m.flagged.sum())])
    write_csv(out / "slice.csv", ["re", "im", "mass", "flagged"], rows)
    return m


def _curve_from(cfg):
    from .equidist import Curve
    v = cfg["curve"]
    if len(v) % 4:
        raise ConfigError("curve: expected groups of four numbers i,j,re,im")
    terms = [v[k:k + 4] for k in range(0, len(v), 4)]
    if any(t[0] < 0 or t[1] < 0 or t[0] != int(t[0]) or t[1] != int(t[1]) for t in terms):
        raise ConfigError("curve: exponents must be non-negative integers")
    D = int(max(t[0] + t[1] for t in terms))
    P = np.zeros((D + 1, D + 1), dtype=complex)
    for i, j, re, im in terms:
        P[int(i), int(j)] += complex(re, im)
    try:
        return Curve(P)
    except ValueError as e:
        raise ConfigError(f"curve: {e}") from None


def cmd_equidist(cfg, out: Path):
    from .currents import TestForm
    from .equidist import equidist_experiment, straddling_centers
    f = _map_from(cfg)
    V = _curve_from(cfg)
    if cfg["n_min"] < 0 or cfg["n_max"] < cfg["n_min"]:
        raise ConfigError("n_min/n_max: need 0 <= n_min <= n_max")
    psis = [TestForm(c, cfg["bump_radius"]) for c in straddling_centers(f, cfg["bumps"])]
    rep = equidist_experiment(f, V, psis, range(cfg["n_min"], cfg["n_max"] + 1),
                              quadrature=cfg["quadrature"], tol=cfg["tol"])
    model = rep.bound_model(rep.n_values) if not rep.saturated else [math.nan] * len(rep.n_values)
    rows = [[int(n), g17(e), g17(b)] for n, e, b in zip(rep.n_values, rep.errors, model)]
    rows.append(["fitted", g17(rep.fitted_rate), g17(rep.fitted_constant)])
    write_csv(out / "equidist.csv", ["n", "e_n", "bound_model"], rows)
    return rep


def cmd_periodic(cfg, out: Path):
    from .periodic import fixed_points_exact, period_two_exact, periodic_points, write_csv as wcsv
    f = _map_from(cfg)
    n = cfg["period"]
    if n < 1:
        raise ConfigError("period: must be >= 1")
    if cfg["exact"]:
        if len(f.factors) != 1 or n > 2:
            raise ConfigError("exact: needs a single factor and period <= 2")
        pts = fixed_points_exact(f) if n == 1 else period_two_exact(f)
    else:
        pts = periodic_points(f, n, seeds_per_axis=cfg["seeds_per_axis"])
    with open(out / "periodic.csv", "w", newline="", encoding="utf-8") as fh:
        wcsv(pts, fh)
    return pts


def _auto_saddle(f):
    from .nevanlinna import saddle_from_point
    from .periodic import periodic_points
    pts = [p for p in periodic_points(f, 1) if p.kind == "saddle"]
    if not pts:
        raise RuntimeError("nevanlinna: the map has no saddle fixed point")
    p = min(pts, key=lambda p: (round(abs(p.point[0]) ** 2 + abs(p.point[1]) ** 2, 9),
                                p.point[0].real))
    return saddle_from_point(f, p.point)


def cmd_nevanlinna(cfg, out: Path):
    from .currents import TestForm
    from .equidist import straddling_centers
    from .nevanlinna import rigidity_experiment, saddle_from_point, write_rigidity_csv
    f = _map_from(cfg)
    if cfg["saddle"] == "auto":
        s = _auto_saddle(f)
    else:
        s = saddle_from_point(f, p_pair(cfg["saddle"], "saddle"))
    if any(r <= 0 for r in cfg["radii"]):
        raise ConfigError("radii: must be positive")
    psis = [TestForm(c, cfg["bump_radius"]) for c in straddling_centers(f, cfg["bumps"])]
    rows = rigidity_experiment(f, s, cfg["radii"], psis, quadrature=cfg["quadrature"],
                               tol=cfg["tol"], angles=cfg["angles"], metric=cfg["metric"])
    with open(out / "nevanlinna.csv", "w", newline="", encoding="utf-8") as fh:
        write_rigidity_csv(rows, fh)
    return rows


def cmd_param_scan(cfg, out: Path):
    from .family import param_scan, quadratic_family
    fam = quadratic_family(cfg["a"])
    sc = param_scan(fam, cfg["z0"], cfg["window"], (cfg["width"], cfg["height"]),
                    cfg["tol"], cfg["budget"])
    write_pgm(out / "param_scan.pgm", log_scale(sc.values, cfg["gmax"]))
    rows = ([g17(c.real), g17(c.imag), g17(v), g17(b), int(e)]
            for c, v, b, e in zip(sc.params.ravel(), sc.values.ravel(),
                                  sc.error_bounds.ravel(), sc.escape.ravel()))
    write_csv(out / "param_scan.csv", ["c_re", "c_im", "green", "error_bound", "escape_index"], rows)
    return sc


def cmd_selftest(cfg, out: Path):
    """Small deterministic runs of every command plus a summary of checks."""
    from .selftest import run_selftest
    return run_selftest(cfg, out)


COMMANDS = {
    "render-julia": lambda cfg, out: cmd_render(cfg, out, raw=False),
    "render-green": lambda cfg, out: cmd_render(cfg, out, raw=True),
    "slice": cmd_slice,
    "equidist": cmd_equidist,
    "periodic": cmd_periodic,
    "nevanlinna": cmd_nevanlinna,
    "param-scan": cmd_param_scan,
    "selftest": cmd_selftest,
}


def _set_threads(n: int):
    if n < 0:
        raise ConfigError("threads: must be >= 0")
    if n > 0:
        import numba
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def run(command: str, cfg: dict) -> int:
    _set_threads(cfg["threads"])
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    result = COMMANDS[command](cfg, out)
    if command == "selftest" and result is False:
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="henonlab", description=__doc__.splitlines()[0],
                                epilog="Keys per command: henonlab <command> --help-keys")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="flat key = value file")
    p.add_argument("--help-keys", action="store_true", help="list config keys and defaults")
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args, rest = parser.parse_known_args(argv)
    schema = SCHEMA[args.command]
    if args.help_keys:
        for k, (_, default, doc) in schema.items():
            print(f"{k:16s} {str(default):24s} {doc}")
        return 0
    try:
        file_values = {}
        if args.config:
            try:
                text = Path(args.config).read_text("utf-8")
            except OSError as e:
                raise ConfigError(f"config: cannot read {args.config!r}: {e.strerror}") from None
            file_values = parse_config_text(text, schema, args.config)
        cfg = resolve(args.command, file_values, parse_flags(rest, schema))
        return run(args.command, cfg)
    except ConfigError as e:
        print(f"henonlab: config error: {e}", file=sys.stderr)
        return 1
    except (ValueError, RuntimeError, ArithmeticError) as e:
        print(f"henonlab {args.command}: numerical precondition failed: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Quick deterministic run of every command, with a summary of sanity checks.

Each command writes into ``out/<command>/``.  ``summary.csv`` lists one row
per check (name, measured value, pass flag); nothing time-dependent is
written, so two runs produce identical trees.  With ``full = true`` the
acceptance criteria 1-9 are evaluated as well and appended to the summary.
"""
from __future__ import annotations

import math
from pathlib import Path

HYPERBOLIC_MAP = "factor a=0.2,0 p=-3,0,0,0,1,0"


def _cfg(command: str, base: dict, **overrides) -> dict:
    from .cli import SCHEMA, resolve

    keep = {k: v for k, v in base.items() if k in ("map", "map_file", "threads", "budget")}
    raw = {k: (str(v) if not isinstance(v, str) else v) for k, v in overrides.items()}
    cfg = resolve(command, {}, raw)
    cfg.update({k: v for k, v in keep.items() if k not in overrides})
    unknown = set(overrides) - set(SCHEMA[command])
    if unknown:
        raise KeyError(f"selftest uses keys unknown to {command}: {sorted(unknown)}")
    return cfg


def _pgm_ok(path: Path, w: int, h: int) -> bool:
    data = path.read_bytes()
    head = f"P5\n{w} {h}\n255\n".encode("ascii")
    return data.startswith(head) and len(data) == len(head) + w * h


def run_selftest(cfg: dict, out: Path) -> bool:
    from . import cli

    out = Path(out)
    checks = []

    def check(name, value, ok):
        checks.append((name, value, bool(ok)))

    def sub(command):
        d = out / command
        d.mkdir(parents=True, exist_ok=True)
        return d

    d = sub("render-julia")
    cli.cmd_render(_cfg("render-julia", cfg, width=64, height=48), d, raw=False)
    check("render-julia pgm header", 1.0, _pgm_ok(d / "julia.pgm", 64, 48))

    d = sub("render-green")
    cli.cmd_render(_cfg("render-green", cfg, width=48, height=48), d, raw=True)
    check("render-green pgm header", 1.0, _pgm_ok(d / "green.pgm", 48, 48))

    m = cli.cmd_slice(_cfg("slice", cfg, resolution=256), sub("slice"))
    check("slice total mass", m.total_mass, abs(m.total_mass - 1.0) <= 0.03)

    m0 = cli.cmd_slice(_cfg("slice", cfg, resolution=64, potential="log_abs_z1",
                            half_width=1.0), sub("slice-log"))
    check("slice of log|z1| mass", m0.total_mass, abs(m0.total_mass - 1.0) <= 1e-3)

    rep = cli.cmd_equidist(_cfg("equidist", cfg, n_max=5, quadrature=12), sub("equidist"))
    check("equidist errors decrease", float(rep.errors[-1] / rep.errors[0]),
          rep.errors[-1] < rep.errors[0])

    pts = cli.cmd_periodic(_cfg("periodic", cfg, period=2), sub("periodic"))
    check("periodic period-2 count", float(len(pts)), pts.complete)
    ex = cli.cmd_periodic(_cfg("periodic", cfg, period=2, exact="true"), sub("periodic-exact"))
    check("periodic exact count", float(len(ex)), len(ex) == pts.expected)

    rows = cli.cmd_nevanlinna(_cfg("nevanlinna", cfg, map=HYPERBOLIC_MAP, radii="1,4",
                                   quadrature=12, angles=128, bumps=1), sub("nevanlinna"))
    Ts = sorted({r.T_r for r in rows})
    check("nevanlinna T increasing", Ts[-1] / Ts[0], len(Ts) == 2 and Ts[1] > Ts[0])

    sc = cli.cmd_param_scan(_cfg("param-scan", cfg, width=48, height=48), sub("param-scan"))
    zero = float((sc.values == 0).mean())
    check("param-scan bounded fraction", zero, 0.0 < zero < 1.0)
    check("param-scan pgm header", 1.0, _pgm_ok(out / "param-scan" / "param_scan.pgm", 48, 48))

    if cfg.get("full"):
        from .acceptance import run_all
        for res in run_all(range(1, 10)):
            check(f"criterion {res.number} {res.name}", 1.0 if res.passed else 0.0, res.passed)
            print(res.line())

    rows = [[name, cli.g17(v) if math.isfinite(v) else "nan", int(ok)] for name, v, ok in checks]
    cli.write_csv(out / "summary.csv", ["check", "value", "passed"], rows)
    for name, v, ok in checks:
        print(f"{'ok  ' if ok else 'FAIL'} {name} ({v:.6g})")
    return all(ok for _, _, ok in checks)

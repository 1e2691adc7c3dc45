"""|<tau_r - T+, psi>| along the stable manifold of a saddle, per radius and bump.

    python scripts/rigidity.py --radii 1 4 16 64 256 1024
"""
import argparse

from henonlab.equidist import default_test_forms
from henonlab.henon import HenonType
from henonlab.nevanlinna import rigidity_experiment, saddle_from_point
from henonlab.periodic import periodic_points


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--c", type=float, default=-3.0)
    ap.add_argument("--a", type=float, default=0.2)
    ap.add_argument("--radii", type=float, nargs="+", default=[1, 4, 16, 64, 256, 1024])
    ap.add_argument("--metric", choices=["fubini_study", "euclidean"], default="fubini_study")
    ap.add_argument("--quadrature", type=int, default=32)
    args = ap.parse_args()
    f = HenonType.quadratic(args.c, args.a)
    sp = min((p for p in periodic_points(f, 1) if p.kind == "saddle"), key=lambda p: abs(p.point[0]))
    s = saddle_from_point(f, sp.point)
    print(f"saddle {s.point}, lambda_s = {s.lambda_s:.6g}")
    psis = default_test_forms(f)
    rows = rigidity_experiment(f, s, args.radii, psis, quadrature=args.quadrature, metric=args.metric)
    print(f"{'r':>8} {'psi':>3} {'tau':>12} {'T+':>10} {'|diff|':>10} {'T(r)':>10}")
    for r in rows:
        print(f"{r.r:8g} {r.psi_id:3d} {r.tau_psi:12.5g} {r.tplus_psi:10.5g} {r.abs_diff:10.4g} {r.T_r:10.4g}")


if __name__ == "__main__":
    main()

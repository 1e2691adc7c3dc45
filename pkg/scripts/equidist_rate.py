"""Equidistribution errors e_n of pullbacks of {z1 = 0} and local decay rates.

    python scripts/equidist_rate.py --nmax 16 --quadrature 24 32
"""
import argparse
import math

import numpy as np

from henonlab.equidist import Curve, default_test_forms, equidist_experiment, fit_rate
from henonlab.henon import HenonType


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--c", type=float, default=-1.1)
    ap.add_argument("--a", type=float, default=0.4)
    ap.add_argument("--nmax", type=int, default=12)
    ap.add_argument("--quadrature", type=int, nargs="+", default=[24])
    args = ap.parse_args()
    f = HenonType.quadratic(args.c, args.a)
    psis = default_test_forms(f)
    print("centers:", [tuple(np.round(p.center, 4)) for p in psis])
    for q in args.quadrature:
        rep = equidist_experiment(f, Curve.z1_axis_zero(), psis, range(1, args.nmax + 1), quadrature=q)
        print(f"q={q}: rate = {rep.fitted_rate / math.log(2):.3f} log 2 on {rep.fit_range}")
        local = -np.log(rep.errors[1:] / rep.errors[:-1]) / math.log(2)
        for n, e, loc in zip(rep.n_values[1:], rep.errors[1:], local):
            print(f"  n={n:2d}  e_n={e:.3e}  local rate={loc:.2f} log 2")
        for lo, hi in [(1, 5), (3, 8), (5, 10)]:
            m = (rep.n_values >= lo) & (rep.n_values <= hi)
            if m.sum() >= 2:
                print(f"  fit on [{lo},{hi}]: {fit_rate(rep.n_values[m], rep.errors[m])[0] / math.log(2):.3f} log 2")


if __name__ == "__main__":
    main()

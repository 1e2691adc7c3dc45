"""Holder exponent estimates beta_hat(n) for a few maps and metrics.

    python scripts/holder.py --depths 4 8 16 32
"""
import argparse

from henonlab.green import holder_exponent
from henonlab.henon import HenonType

MAPS = {"z^2-1.1, a=0.4": (-1.1, 0.4), "z^2-3, a=0.2": (-3.0, 0.2),
        "z^2, a=2": (0.0, 2.0), "z^2, a=1": (0.0, 1.0)}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--depths", type=int, nargs="+", default=[4, 8, 16, 32])
    ap.add_argument("--metric", choices=["fubini_study", "euclidean"], default="fubini_study")
    args = ap.parse_args()
    for name, (c, a) in MAPS.items():
        est = holder_exponent(HenonType.quadratic(c, a), depths=args.depths, metric=args.metric)
        print(f"{name:16s} " + "  ".join(f"n={e.n}: {e.beta_hat:.4f}" for e in est))


if __name__ == "__main__":
    main()

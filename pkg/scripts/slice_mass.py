"""Slice mass of T+ on {z2 = 0} under grid refinement, with cell and tile negative mass.

    python scripts/slice_mass.py --resolutions 128 256 512 1024 2048
"""
import argparse

from henonlab.currents import ComplexLine, green_potential, slice_measure
from henonlab.green import Window
from henonlab.henon import HenonType


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--resolutions", type=int, nargs="+", default=[128, 256, 512, 1024])
    ap.add_argument("--tiles", type=int, default=96, help="tiles per side for the block negative mass")
    args = ap.parse_args()
    f = HenonType.quadratic(-1.1, 0.4)
    G = green_potential(f, 1e-12)
    for n in args.resolutions:
        m = slice_measure(G, ComplexLine.horizontal(0j), Window(-3, 3, -3, 3), n)
        tile = max(1, n // args.tiles)
        print(f"n={n:5d} mass={m.total_mass:.9f} cell neg={m.negative_mass:.4g} "
              f"tile({tile}) neg={m.block_negative_mass(tile):.4g}")


if __name__ == "__main__":
    main()

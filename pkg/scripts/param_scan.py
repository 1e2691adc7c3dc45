"""Parameter scan of G+(c, 0) for p = z^2 + c and the lower semi-continuity probe.

    python scripts/param_scan.py --a 0.1 --size 256 --out scan.pgm
"""
import argparse
from pathlib import Path

from henonlab.cli import log_scale, write_pgm
from henonlab.family import dilation_probe, param_scan, quadratic_family
from henonlab.green import Window


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--a", type=float, default=0.1)
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--out", type=Path, default=None)
    args = ap.parse_args()
    fam = quadratic_family(args.a)
    sc = param_scan(fam, (0, 0), Window(-2, 0.6, -1.3, 1.3), (args.size, args.size))
    print(f"bounded fraction {(sc.escape < 0).mean():.4f}, max G+ {sc.values.max():.4f}")
    if args.out:
        write_pgm(args.out, log_scale(sc.values))
    for c0 in (-1.0, -0.5 + 0.5j, 0.2):
        pr = dilation_probe(fam, c0, 0.5 * 4 / 128, Window(-2, 2, -2, 2), 128)
        print(f"c0={c0}: {pr.boundary_pixels} boundary pixels, covered {pr.covered:.3f}")


if __name__ == "__main__":
    main()

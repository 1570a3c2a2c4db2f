"""Write the dimensionless first-order position density W(xi) as CSV.

Usage: python3 scripts/fig1_curves.py [--eps0 0 0.1 0.2] [--out fig1.csv]
"""

import argparse
import csv
import sys

import numpy as np

from firstkind.position import dimensionless_W


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--eps0", type=float, nargs="+", default=[0.0, 0.1, 0.2])
    parser.add_argument("--points", type=int, default=601)
    parser.add_argument("--out", help="output CSV (default: stdout)")
    args = parser.parse_args(argv)

    xi = np.linspace(-3.0, 3.0, args.points)
    cols = [dimensionless_W(e, xi) for e in args.eps0]
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.writer(fh)
    writer.writerow(["xi"] + [f"W_eps0={e:g}" for e in args.eps0])
    for k in range(xi.size):
        writer.writerow([f"{xi[k]:.15g}"] + [f"{c[k]:.15g}" for c in cols])
    if args.out:
        fh.close()
    for e, c in zip(args.eps0, cols):
        neg = xi[c < 0]
        root = f"{neg.max():.4f}" if neg.size else "none"
        print(f"eps0={e:g}: min W = {c.min():.4g}, last negative sample at xi = {root}", file=sys.stderr)


if __name__ == "__main__":
    main()

"""Sweep eps0 and compare the numerically integrated uncertainty product with its closed form.

For each eps0 the survival time is chosen so that the drift is
l = a sqrt(eps0 / 2). The table lists the product from the clipped and
renormalized density, the closed form (hbar/2) sqrt(1 - eps0), their
relative difference and the exact tail correction Q - 1.

Usage: python3 scripts/uncertainty_sweep.py [--eps0 0.001 0.005 ...]
"""

import argparse
import math
import warnings

from firstkind.position import GaussianPacket, closed_form_product, uncertainty_product
from firstkind.survival import SurvivalDistribution
from firstkind.tails import normalization_excess

DEFAULT_EPS0 = [0.001, 0.005, 0.01, 0.02, 0.03, 0.05, 0.08, 0.1]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--eps0", type=float, nargs="+", default=DEFAULT_EPS0)
    parser.add_argument("--a", type=float, default=1.0)
    parser.add_argument("--p0", type=float, default=1.0)
    args = parser.parse_args(argv)

    pk = GaussianPacket(a=args.a, p0=args.p0)
    print("eps0,sigma,dxdp_numeric,dxdp_closed_form,rel_diff,Q_minus_1")
    for eps0 in args.eps0:
        l = pk.a * math.sqrt(eps0 / 2)
        dist = SurvivalDistribution.exponential(l * pk.m / abs(pk.p0))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            prod = uncertainty_product(pk, dist)[2]
        closed = closed_form_product(pk, dist)
        print(f"{eps0:g},{pk.sigma(dist):.6g},{prod:.15g},{closed:.15g},{prod / closed - 1:.3e},"
              f"{normalization_excess(pk.a, l):.3e}")


if __name__ == "__main__":
    main()

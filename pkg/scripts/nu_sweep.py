"""Unitarity defects of the S-matrix and the normalization N over a range of damping values.

Runs a weakly coupled random model (or a model file with H0 and HI) and
prints, for each nu, the spectral-norm defects, whether the model is
bound-state-free at that resolution, and the largest |N - 1|. A second
table follows N of the band family along fixed nu and along nu = eps**3.

Usage: python3 scripts/nu_sweep.py [--model fixtures/weak_three_level.json]
"""

import argparse

import numpy as np

from firstkind.core import random_hermitian
from firstkind.report import load_json, parse_complex
from firstkind.scattering import (BandFamily, ScatteringModel, double_limit_probe, is_bound_state_free,
                                  transition_amplitudes, unitarity_defects)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--model", help="JSON file with H0 and HI")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--coupling", type=float, default=1e-6)
    parser.add_argument("--nu", type=float, nargs="+", default=[1e-1, 1e-2, 1e-3, 1e-4, 1e-5])
    args = parser.parse_args(argv)

    if args.model:
        data = load_json(args.model)
        h0, hi = parse_complex(data["H0"], "H0"), parse_complex(data["HI"], "HI")
        hbar = float(data.get("hbar", 1.0))
    else:
        rng = np.random.default_rng(args.seed)
        h0 = np.diag(np.sort(rng.uniform(-1, 1, 4))).astype(complex)
        hi = args.coupling * random_hermitian(4, rng)
        hbar = 1.0
    scale = float(np.ptp(np.linalg.eigvalsh(h0 + hi))) / hbar

    print("nu_over_scale,s_dagger_s,s_s_dagger,isometry_plus,bound_state_free,max_abs_N_minus_1")
    for f in args.nu:
        model = ScatteringModel(h0, hi, f * scale, hbar)
        d = unitarity_defects(model)
        dev = max(abs(transition_amplitudes(model, lam, 0.0)[1] - 1) for lam in range(model.dim))
        print(f"{f:g},{d['s_dagger_s']:.3e},{d['s_s_dagger']:.3e},{d['isometry_plus']:.3e},"
              f"{is_bound_state_free(model)},{dev:.3e}")

    print()
    print("eps,nu,eps3_over_nu,N,deviation")
    family = BandFamily()
    rows = double_limit_probe(family, [0.1, 0.05, 0.025], [1e-3])
    for e in (0.5, 0.4, 0.3):
        rows += double_limit_probe(family, [e], [e ** 3])
    for r in rows:
        print(f"{r['eps']:g},{r['nu']:g},{r['eps3_over_nu']:g},{r['N']:.10f},{r['deviation']:.3e}")


if __name__ == "__main__":
    main()

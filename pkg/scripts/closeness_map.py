"""Closeness lambda of the bound to the mean, its achieved outage, and the
diversity and sensitivity properties."""

import argparse

import numpy as np

from cherlb import __version__
from cherlb.chernoff import solve_noncentral
from cherlb.chi2 import NoncentralChiSquareSpec, noncentral_cdf
from cherlb.metrics import diversity_equivalent_epsilon, lambda_for
from cherlb.output import RunManifest, write_csv


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--dofs", type=int, nargs="+", default=[8, 16, 24])
    p.add_argument("--rho-max", type=float, default=300.0)
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--output", default="closeness.csv")
    args = p.parse_args()

    rows = []
    for K in args.dofs:
        for rho in np.linspace(0, args.rho_max, 31):
            spec = NoncentralChiSquareSpec(K, float(rho), 1.0)
            b = solve_noncentral(spec, args.epsilon).bound
            rows.append((K, rho, b / spec.mean(), noncentral_cdf(spec, b)))
    man = RunManifest("closeness_map", vars(args), 0, __version__).finish()
    write_csv(args.output, ("K", "rho", "lambda", "achieved_outage"), rows, man)
    out = [r[3] for r in rows]
    print(f"achieved outage for eps={args.epsilon:g}: [{min(out):.3g}, {max(out):.3g}]")

    # equal per-pair reliability gives equal closeness
    print("\nK  eps     eps^(2/K)  lambda (rho_o=50)")
    for K, eps in ((2, 1e-1), (4, 1e-2), (6, 1e-3)):
        print(f"{K:<2d} {eps:<7g} {diversity_equivalent_epsilon(K, eps):<10.3g} {lambda_for(K, 50.0 * K, eps):.6f}")

    print("\nrho    lambda(1e-1) lambda(1e-5) lambda(1e-9)")
    for rho in (100.0, 400.0, 1200.0):
        lam = [lambda_for(8, rho, e) for e in (1e-1, 1e-5, 1e-9)]
        print(f"{rho:<6g} " + " ".join(f"{x:<12.4f}" for x in lam))


if __name__ == "__main__":
    main()

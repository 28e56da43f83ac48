"""MIMO downlink with aged CSI: rho distribution, mean bound, energy and
single-shot reliability versus the number of transmit antennas."""

import argparse

from cherlb import __version__, mimo
from cherlb.output import RunManifest, write_csv

COLUMNS = ("M", "N", "statistic_name", "value", "stderr", "trial_count")


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--tx", type=int, nargs="+", default=[16, 24, 32, 48, 64])
    p.add_argument("--rx", type=int, default=2)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default="mimo_experiments.csv")
    args = p.parse_args()

    params = mimo.MarkovChannelParams()
    print(f"J0 = {params.corr:.6f}, J0^2 = {params.corr**2:.4f}")
    rows = []
    for M in args.tx:
        cfg = mimo.MimoConfig(M, args.rx, args.trials, args.seed)
        stats = [mimo.experiment_rho_probability(cfg, params)]
        stats += mimo.experiment_bounds(cfg, params, args.epsilon)
        stats += mimo.experiment_power(cfg, params, args.epsilon)
        for s in stats:
            rows.append((M, args.rx, s.name, s.value, s.stderr, s.trials))
        print(f"M={M:<4d} " + "  ".join(f"{s.name}={s.value:.4g}" for s in stats))

    # single-shot check at a level Monte Carlo can resolve
    cfg = mimo.MimoConfig(args.tx[0], args.rx, 10 * args.trials, args.seed)
    s = mimo.experiment_reliability(cfg, params, 1e-3)
    rows.append((cfg.M, cfg.N, "outage_at_1e-3", s.value, s.stderr, s.trials))
    print(f"outage at eps=1e-3 (M={cfg.M}): {s.value:.4g} +- {s.stderr:.2g}")

    man = RunManifest("mimo_experiments", vars(args), args.seed, __version__).finish()
    write_csv(args.output, COLUMNS, rows, man)


if __name__ == "__main__":
    main()

"""Why the link is run single-stream: interference-limited SINR of
zero-forcing precoding on an aged channel.

With H_t W = I the n-th stream sees (J0 + omega_n w_n) as its gain and
sum_{l != n} |omega_n w_l|^2 as interference, where omega_n is row n of the
innovation.  At high SNR the ratio does not depend on transmit energy, so
energy adaptation cannot buy reliability.  Illustrative only.
"""

import argparse

import numpy as np

from cherlb import mimo


def sinr(H, Omega, J0):
    W = np.linalg.pinv(H)  # H W = I
    G = Omega @ W
    sig = np.abs(J0 + np.diag(G)) ** 2
    interf = np.sum(np.abs(G) ** 2, axis=1) - np.abs(np.diag(G)) ** 2
    return sig / interf


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--tx", type=int, default=16)
    p.add_argument("--draws", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    params = mimo.MarkovChannelParams()
    J0 = params.corr
    print(f"M={args.tx}, J0={J0:.4f}; median per-stream SINR (dB) over {args.draws} draws")
    for N in (2, 3, 4, 6, 8):
        cfg = mimo.MimoConfig(args.tx, N, seed=args.seed)
        vals = []
        for d in range(args.draws):
            H = mimo.sample_channel(cfg, seed=args.seed + d)
            Omega = mimo.evolve_channel(H, params, args.seed + d) - J0 * H
            vals.append(sinr(H, Omega, J0))
        print(f"N={N}: {10 * np.log10(np.median(np.concatenate(vals))):6.2f} dB")


if __name__ == "__main__":
    main()

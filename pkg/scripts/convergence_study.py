#!/usr/bin/env python3
"""Finite-vs-asymptotic convergence study across a dimension ladder.

For each K on the ladder, samples the coupled finite/limiting models and
prints the SINR gap, SEP gap, root-mean-square received-signal deviation,
and Ky Fan distances of both gain coefficients, so the decay rates can be
eyeballed (or piped into `qprec plot`).
"""

import argparse
import math

import numpy as np

from qprec import metrics as met
from qprec import models as md
from qprec import quantizer as qt
from qprec.stochastic import RngStream


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--ladder", type=int, nargs="+", default=[16, 64, 256, 1024])
    parser.add_argument("--trials", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--rho", type=float, default=0.25)
    parser.add_argument("--gamma", type=float, default=4.0)
    parser.add_argument("--noise", type=float, default=0.1)
    args = parser.parse_args()

    quant = qt.one_bit(1.0 / math.sqrt(2.0))
    shaping = md.rzf(args.rho)
    print(f"# shaping={shaping.label} gamma={args.gamma} noise={args.noise} "
          f"trials={args.trials}")
    print(f"{'K':>6} {'sinr_gap':>10} {'sep_gap':>10} {'l2_dev':>10} "
          f"{'kf_signal':>10} {'kf_interf':>10}")
    for k in args.ladder:
        cfg = md.SystemConfig.with_gamma(k=k, gamma=args.gamma,
                                         sigma2_noise=args.noise)
        coupled = md.functional_models(cfg, shaping, quant)
        model = coupled.scalar
        samples = coupled.sample(RngStream(args.seed, k), args.trials)
        sinr_gap = abs(met.sinr_hat_coupled(samples, model, cfg).value
                       - met.sinr_bar(cfg, shaping, quant, model=model))
        rule = met.default_rule(model, cfg)
        sep_h = met.sep_from_samples(samples.y_hat, samples.s, rule)
        sep_b = met.sep_bar(model, rule, cfg, RngStream(args.seed, 10**6 + k),
                            200_000)
        l2 = met.l2_deviation(samples.y_hat, samples.y_bar).value
        kf_sig = met.ky_fan_distance(samples.signal_gain,
                                     np.full(args.trials, model.signal_gain))
        kf_int = met.ky_fan_distance(samples.interference_gain * samples.g2_user,
                                     model.interference_gain * samples.g2_user)
        print(f"{k:>6} {sinr_gap:>10.5f} {abs(sep_h.value - sep_b.value):>10.5f} "
              f"{l2:>10.5f} {kf_sig:>10.5f} {kf_int:>10.5f}")


if __name__ == "__main__":
    main()

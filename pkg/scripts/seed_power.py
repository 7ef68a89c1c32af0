"""Sampling spread of the simulated theta_mmW at one configuration.

Runs many seeds and reports the bias of the per-run mean against the analytic
value, plus the spread of k-seed averages. Used to judge whether a 5% bound on
a 5-seed mean is resolvable.

    python3 scripts/seed_power.py --J 5 --beta 1 --alpha 0.3 --seeds 100
"""

import argparse
import statistics

from multiband_mac.params import ProtocolConfig
from multiband_mac.simulator import SimConfig, run
from multiband_mac.throughput import saturation_throughput


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--J", type=int, default=5)
    ap.add_argument("--W", type=int, default=32)
    ap.add_argument("--m", type=int, default=3)
    ap.add_argument("--alpha", type=float, default=0.3)
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--slots", type=int, default=1_000_000)
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--k", type=int, default=5, help="group size for the k-seed mean spread")
    args = ap.parse_args()

    cfg = ProtocolConfig(J=args.J, W=args.W, m=args.m, alpha=args.alpha, beta=args.beta)
    ref = saturation_throughput(cfg)
    fields = (("p", "measured_p"), ("theta_uw", "measured_theta_uw"), ("theta_mmw", "measured_theta_mmw"))
    runs = [run(SimConfig(cfg, slots=args.slots, seed=s)) for s in range(args.seeds)]
    for a_key, s_key in fields:
        target = getattr(ref, a_key)
        xs = [getattr(r, s_key) / target - 1 for r in runs]
        groups = [statistics.fmean(xs[i : i + args.k]) for i in range(0, len(xs) - args.k + 1, args.k)]
        print(
            f"{a_key:10s} analytic={target:.6g} bias={statistics.fmean(xs):+.3%} "
            f"sd(run)={statistics.stdev(xs):.3%} sd({args.k}-mean)={statistics.stdev(groups):.3%} "
            f"share of {args.k}-means beyond 5%: {sum(abs(g) >= 0.05 for g in groups)}/{len(groups)}"
        )
    print(f"A-BFT successes per run: {statistics.fmean(r.abft_successes for r in runs):.0f}")


if __name__ == "__main__":
    main()

"""Empirical Lipschitz ratios of T_n and its second iterate S_n as n grows."""
import argparse
import math

from graphon_steady.kernels import Constant, SmallWorld
from graphon_steady.grid import ContinuumState
from graphon_steady.models import kuramoto, lotka_volterra, twisted_profile
from graphon_steady.sampling import sample_random
from graphon_steady.solver import contraction_probe


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="*", default=[100, 200, 400, 800])
    ap.add_argument("--rho", type=float, default=0.05)
    ap.add_argument("--pairs", type=int, default=10)
    ap.add_argument("--m", type=int, default=1)
    args = ap.parse_args()

    sw = SmallWorld(0.2, 1 / (0.4 * math.pi), 0.0)
    lv_state = ContinuumState(lambda x: 0.0 * x + 1 / 1.25)
    print("n     LV_T    LV_S    K_T     K_S")
    for n in args.n:
        lv = contraction_probe(lotka_volterra(0.5), sample_random(Constant(0.5), n, 0), Constant(0.5), lv_state,
                               args.rho, args.pairs, 0)
        ku = contraction_probe(kuramoto(), sample_random(sw, n, 0), sw, twisted_profile(args.m), args.rho,
                               args.pairs, 0, gauge="MeanZero")
        print(f"{n:<5d} {lv['max_ratio_T']:.4f}  {lv['max_ratio_S']:.4f}  {ku['max_ratio_T']:.4f}  {ku['max_ratio_S']:.4f}")


if __name__ == "__main__":
    main()

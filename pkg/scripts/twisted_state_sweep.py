"""Kuramoto twisted states on small-world graphs: convergence and verdicts by twist m.

Prints, for each m, the analytic ring eigenvalue with the largest real part,
the cited predicate |m| alpha < mu* pi, and how many random instances
converged / came out Stable.
"""
import argparse
import math

import numpy as np

from graphon_steady.kernels import SmallWorld
from graphon_steady.models import kuramoto, kuramoto_stability_predicate, twisted_profile
from graphon_steady.operators import discrete_jacobian
from graphon_steady.sampling import sample_random
from graphon_steady.solver import SolveOptions, solve_frozen
from graphon_steady.spectra import analyze, ring_twisted_eigenvalues


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=0.2)
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--m", type=int, nargs="*", default=[1, 2, 3, 4])
    ap.add_argument("--damping", type=float, default=0.7)
    args = ap.parse_args()

    kernel = SmallWorld(args.alpha, 1.0 / (2 * math.pi * args.alpha), 0.0)
    coeffs = kernel.fourier_coefficients(200)
    opts = SolveOptions(max_iters=500, gauge="MeanZero", damping=args.damping)
    model = kuramoto()
    print("m  max_lambda_ell  2*pi*c_m  predicate  converged  stable  median_maxRe")
    for m in args.m:
        lam = max(v for l, v in ring_twisted_eigenvalues(coeffs, m, (-100, 100)) if l != 0)
        conv = stable = 0
        max_re = []
        for s in range(args.seeds):
            g = sample_random(kernel, args.n, s)
            try:
                rep = solve_frozen(model, g, kernel, twisted_profile(m), opts)
            except Exception as exc:  # singular Q, divergence
                print(f"   m={m} seed={s}: {type(exc).__name__}")
                continue
            conv += rep.converged
            if rep.converged:
                spec = analyze(discrete_jacobian(model, g, rep.final_u), "MeanZero")
                stable += spec.verdict == "Stable"
                max_re.append(spec.max_real)
        med = np.median(max_re) if max_re else float("nan")
        print(f"{m:<2d} {lam:14.4f} {2 * math.pi * coeffs[m]:9.4f}  {str(kuramoto_stability_predicate(m, args.alpha)):9s}"
              f"  {conv:>4d}/{args.seeds:<4d} {stable:>3d}/{args.seeds:<3d} {med:12.4f}")


if __name__ == "__main__":
    main()

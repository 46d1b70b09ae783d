"""Regenerate the data for every figure recipe into one output tree."""
import argparse
import time
from pathlib import Path

from graphon_steady.experiments import FIGURES, run_repro


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("out/repro"))
    ap.add_argument("--only", nargs="*", choices=FIGURES, default=list(FIGURES))
    args = ap.parse_args()
    for fig in args.only:
        t0 = time.perf_counter()
        path = run_repro(fig, args.out)
        print(f"{fig:12s} {time.perf_counter() - t0:6.1f}s  -> {path}")


if __name__ == "__main__":
    main()

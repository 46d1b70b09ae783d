"""graphon-steady: sample | cutnorm | solve | spectrum | dynamics | probe | repro."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import io
from .config import ExperimentConfig, load_config, parse_seeds, seed_override
from .cutnorm import cutnorm, cutnorm_2
from .errors import GraphonError
from .experiments import (FIGURES, ring_table, run_dynamics, run_instances, run_probe, run_repro, run_sample,
                          run_solve, run_spectrum)
from .solver import SolveOptions


def _global_flags(parser, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", type=Path, default=d, help="experiment config (JSON)")
    parser.add_argument("--out", type=Path, default=d, help="output directory")
    parser.add_argument("--jobs", type=int, default=argparse.SUPPRESS if suppress else 1)
    parser.add_argument("--strict", action="store_true", default=argparse.SUPPRESS if suppress else False,
                        help="exit nonzero if any instance fails to converge")
    parser.add_argument("--seed-override", default=d, metavar="SEEDS",
                        help="comma-separated seeds replacing the config seeds")


def _instance_flags(p):
    p.add_argument("--kernel", help="kernel config: path to JSON or inline JSON")
    p.add_argument("--model", help="model name (kuramoto, wilson_cowan, lotka_volterra)")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE", help="model parameter")
    p.add_argument("--n", type=int, action="append", help="graph size (repeatable)")
    p.add_argument("--seed", type=int, action="append", help="seed (repeatable)")
    p.add_argument("--mode", choices=["deterministic", "random", "bipartite_aligned"])
    p.add_argument("--m", type=int, help="twist number for Kuramoto states")
    p.add_argument("--branch", type=int, help="index of the homogeneous root (Wilson-Cowan)")
    p.add_argument("--gauge", choices=["None", "MeanZero"])
    p.add_argument("--damping", type=float)
    p.add_argument("--max-iters", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphon-steady", description=__doc__)
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_ in (("sample", "sample graphs and report degree / cut distances"),
                        ("solve", "solve G_n = 0 by the frozen-Jacobian iteration"),
                        ("spectrum", "eigenvalues and stability verdicts"),
                        ("dynamics", "perturbation decay by RK4"),
                        ("probe", "empirical contraction ratios of T_n and S_n")):
        p = sub.add_parser(name, parents=[common], help=help_)
        _instance_flags(p)
        if name == "sample":
            p.add_argument("--refinement", type=int)
            p.add_argument("--restarts", type=int)
        if name == "spectrum":
            p.add_argument("--jacobian", choices=["discrete", "frozen"])
            p.add_argument("--ring-analytic", action="store_true", help="also tabulate the analytic ring eigenvalues")
            p.add_argument("--ell-max", type=int)
        if name == "dynamics":
            p.add_argument("--eps", type=float)
            p.add_argument("--dt", type=float)
            p.add_argument("--t-end", type=float)
            p.add_argument("--trajectory", action="store_true")
            p.add_argument("--stride", type=int)
        if name == "probe":
            p.add_argument("--rho", type=float)
            p.add_argument("--pairs", type=int)

    p = sub.add_parser("cutnorm", parents=[common], help="cut norm of a dense CSV matrix")
    p.add_argument("matrix", type=Path)
    p.add_argument("--method", choices=["auto", "brute", "heuristic"], default="auto")
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--second", action="store_true", help="also estimate the +-1 variant")

    p = sub.add_parser("repro", parents=[common], help="regenerate figure data")
    p.add_argument("figure_id", help=f"one of: {', '.join(FIGURES)}")
    return parser


def _load_json_arg(text: str) -> dict:
    path = Path(text)
    if path.exists():
        return json.loads(path.read_text())
    return json.loads(text)


def _coerce(v: str):
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    if v.lower() in ("true", "false"):
        return v.lower() == "true"
    return v


def resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    raw = cfg.to_dict()
    if getattr(args, "kernel", None):
        raw["kernel"] = _load_json_arg(args.kernel)
    if getattr(args, "model", None):
        raw["model"] = {"model": args.model}
    for kv in getattr(args, "param", []) or []:
        k, _, v = kv.partition("=")
        raw["model"][k] = _coerce(v)
    for key in ("n", "seed"):
        if getattr(args, key, None):
            raw["n_list" if key == "n" else "seeds"] = getattr(args, key)
    for key in ("mode", "m", "branch", "refinement", "restarts", "jacobian", "ell_max"):
        if getattr(args, key, None) is not None:
            raw[key] = getattr(args, key)
    if getattr(args, "ring_analytic", False):
        raw["ring_analytic"] = True
    for key, dest in (("gauge", "gauge"), ("damping", "damping"), ("max_iters", "max_iters")):
        if getattr(args, key, None) is not None:
            raw["solver"][dest] = getattr(args, key)
    for key in ("eps", "dt", "t_end", "stride"):
        if getattr(args, key, None) is not None:
            raw["dynamics"][key] = getattr(args, key)
    if getattr(args, "trajectory", False):
        raw["dynamics"]["trajectory"] = True
    for key in ("rho", "pairs"):
        if getattr(args, key, None) is not None:
            raw["probe"][key] = getattr(args, key)
    seeds = seed_override(getattr(args, "seed_override", None))
    if seeds is not None:
        raw["seeds"] = seeds
    if args.out:
        raw["outputs"] = str(args.out)
    if raw.get("m") is None:
        raw.pop("m")
    return ExperimentConfig.from_dict(raw, base_dir=cfg.base_dir)


def _print_table(rows, cols):
    print("\t".join(cols))
    for r in rows:
        cells = []
        for c in cols:
            v = r.get(c, "")
            cells.append(f"{v:.6g}" if isinstance(v, float) else str(v))
        print("\t".join(cells))


RUNNERS = {
    "sample": (run_sample, "sample_summary.csv", ["n", "seed", "mode", "degree_deviation", "cut_lower", "cut_upper"]),
    "solve": (run_solve, "solve_summary.csv", ["n", "seed", "converged", "iterations", "residual", "distance_to_continuum"]),
    "spectrum": (run_spectrum, "verdicts.csv", ["n", "seed", "converged", "verdict", "max_real", "essential_lo", "essential_hi"]),
    "dynamics": (run_dynamics, "dynamics.csv", ["n", "seed", "decayed", "rate", "final_deviation"]),
    "probe": (run_probe, "probe.csv", ["n", "seed", "max_ratio_T", "max_ratio_S"]),
}


def _instance_ok(command: str, row: dict) -> bool:
    if "error" in row:
        return False
    if command in ("solve", "spectrum"):
        return bool(row["converged"])
    if command == "dynamics":
        return bool(row["decayed"])
    return True


def run_command(args) -> int:
    if args.command == "cutnorm":
        M = io.read_matrix_csv(args.matrix)
        est = cutnorm(M, args.method, args.restarts)
        out = {"lower": est.lower, "upper": est.upper, "exact": est.exact, "method": est.method}
        if args.second:
            e2 = cutnorm_2(M, args.method, args.restarts)
            out["second"] = {"lower": e2.lower, "upper": e2.upper, "exact": e2.exact, "method": e2.method}
        text = io.dumps_json(out)
        if args.out:
            io.atomic_write_text(Path(args.out) / "cutnorm.json", text)
        print(text, end="")
        return 0

    if args.command == "repro":
        if args.figure_id not in FIGURES:
            print(f"unknown figure id {args.figure_id!r}; valid ids: {', '.join(FIGURES)}", file=sys.stderr)
            return 2
        outdir = run_repro(args.figure_id, args.out or Path("out"))
        print(f"wrote {outdir}")
        return 0

    cfg = resolve_config(args)
    outdir = Path(cfg.outputs)
    outdir.mkdir(parents=True, exist_ok=True)
    fn, summary_name, cols = RUNNERS[args.command]
    rows = run_instances(fn, cfg, outdir, args.jobs)
    if args.command == "spectrum":
        cloud = [e for r in rows for e in r.pop("_eigs", [])]
        io.write_table_csv(outdir / "eigenvalues.csv", ["re", "im", "n", "seed"], cloud)
        if cfg.ring_analytic:
            for ell, lam in ring_table(cfg, outdir):
                print(f"ell={ell}\tlambda={lam:.12g}")
    io.write_table_csv(outdir / summary_name, cols + ["error"],
                       [[r.get(c, "") for c in cols] + [r.get("error", "")] for r in rows])
    _print_table(rows, cols + (["error"] if any("error" in r for r in rows) else []))
    failed = [r for r in rows if not _instance_ok(args.command, r)]
    for r in failed:
        if "error" in r:
            print(f"instance n={r['n']} seed={r['seed']}: {r['error']}", file=sys.stderr)
    return 1 if failed and args.strict else 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run_command(args)
    except GraphonError as exc:
        stage = getattr(args, "figure_id", args.command)
        print(f"error in {stage}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

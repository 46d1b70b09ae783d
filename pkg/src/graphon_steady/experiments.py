"""Per-instance runners used by the CLI, and the figure reproduction recipes.

Each runner handles one (n, seed) instance and returns a flat result row.
Rows are sorted by (n, seed) before anything is written, so the output does
not depend on how instances were scheduled.
"""
from __future__ import annotations

import datetime as _dt
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .config import ExperimentConfig
from .dynamics import integrate_rk4, perturbation_decay
from .errors import GraphonError, ValidationError
from .grid import GridFunction
from .kernels import Bipartite, Constant, SmallWorld
from .models import (continuum_state, kuramoto, kuramoto_twisted_state, lotka_volterra, twisted_profile,
                     wc_bifurcation_curve, wc_homogeneous_roots, wilson_cowan, bipartite_lv_profile)
from .operators import discrete_jacobian, frozen_jacobian
from .sampling import (cut_distance, degree_deviation, sample_bipartite_aligned, sample_deterministic,
                       sample_random)
from .solver import FrozenInverse, SolveOptions, contraction_probe, solve_frozen
from .spectra import analyze, ring_twisted_eigenvalues

FIGURES = ("fig1", "scurve", "hugeneuro", "lv", "lvbipartite")


def timestamp() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def make_graph(cfg: ExperimentConfig, kernel, n: int, seed: int):
    if cfg.mode == "deterministic":
        return sample_deterministic(kernel, n)
    if cfg.mode == "bipartite_aligned":
        if not isinstance(kernel, Bipartite):
            raise ValidationError("bipartite_aligned sampling needs a bipartite kernel")
        return sample_bipartite_aligned(kernel.alpha, kernel.p, n, seed)
    return sample_random(kernel, n, seed)


def _gauge(cfg, model) -> str:
    if model.shift_invariant and cfg.solver.gauge == "None":
        return "MeanZero"
    return cfg.solver.gauge


def _solve(cfg: ExperimentConfig, n: int, seed: int):
    model, kernel = cfg.build_model(), cfg.build_kernel()
    graph = make_graph(cfg, kernel, n, seed)
    state = continuum_state(model, kernel, m=cfg.m, branch=cfg.branch)
    gauge = _gauge(cfg, model)
    opts = SolveOptions(cfg.solver.max_iters, cfg.solver.tol_residual, cfg.solver.tol_step, gauge, cfg.solver.damping)
    report = solve_frozen(model, graph, kernel, state, opts)
    return model, kernel, graph, state, opts, report


def run_sample(cfg: ExperimentConfig, n: int, seed: int, outdir: Path) -> dict:
    kernel = cfg.build_kernel()
    graph = make_graph(cfg, kernel, n, seed)
    tag = f"{n}_det" if cfg.mode == "deterministic" else f"{n}_{seed}"
    io.write_matrix_csv(outdir / f"adjacency_{tag}.csv", graph.adjacency)
    io.write_json(outdir / f"manifest_{tag}.json",
                  {**graph.manifest(), "kernel": cfg.kernel, "created": timestamp()})
    est = cut_distance(graph, kernel, cfg.refinement, cfg.restarts)
    return {"n": n, "seed": seed, "mode": graph.mode, "degree_deviation": degree_deviation(graph, kernel),
            "cut_lower": est.lower, "cut_upper": est.upper}


def run_solve(cfg: ExperimentConfig, n: int, seed: int, outdir: Path) -> dict:
    *_, report = _solve(cfg, n, seed)
    io.atomic_write_text(outdir / f"solve_{n}_{seed}.json", report.to_json())
    report.write_history_csv(outdir / f"history_{n}_{seed}.csv")
    return {"n": n, "seed": seed, "converged": report.converged, "iterations": report.iterations,
            "residual": report.final_residual, "distance_to_continuum": report.distance_to_continuum}


def run_spectrum(cfg: ExperimentConfig, n: int, seed: int, outdir: Path) -> dict:
    model, kernel, graph, state, opts, report = _solve(cfg, n, seed)
    if cfg.jacobian == "frozen":
        op = frozen_jacobian(model, kernel, GridFunction(report.final_u, grid=graph.grid_points))
    else:
        op = discrete_jacobian(model, graph, report.final_u)
    spec = analyze(op, opts.gauge)
    rows = [(z.real, z.imag, n, seed) for z in spec.eigenvalues]
    io.write_table_csv(outdir / f"eigs_{n}_{seed}.csv", ["re", "im", "n", "seed"], rows)
    io.write_json(outdir / f"spectrum_{n}_{seed}.json", spec.to_dict())
    return {"n": n, "seed": seed, "converged": report.converged, "verdict": spec.verdict,
            "max_real": spec.max_real, "essential_lo": spec.essential_interval[0],
            "essential_hi": spec.essential_interval[1], "_eigs": rows}


def run_dynamics(cfg: ExperimentConfig, n: int, seed: int, outdir: Path) -> dict:
    model, kernel, graph, state, opts, report = _solve(cfg, n, seed)
    dyn = cfg.dynamics
    out = perturbation_decay(model, graph, report.final_u, dyn.eps, dyn.dt, dyn.t_end, seed=seed, gauge=opts.gauge)
    if dyn.trajectory:
        traj = integrate_rk4(model, graph, report.final_u, dyn.dt, dyn.t_end, stride=dyn.stride)
        traj.write_csv(outdir / f"trajectory_{n}_{seed}.csv")
    return {"n": n, "seed": seed, "decayed": out["decayed"], "rate": out["rate"],
            "final_deviation": out["final_deviation"]}


def run_probe(cfg: ExperimentConfig, n: int, seed: int, outdir: Path) -> dict:
    model, kernel = cfg.build_model(), cfg.build_kernel()
    graph = make_graph(cfg, kernel, n, seed)
    state = continuum_state(model, kernel, m=cfg.m, branch=cfg.branch)
    res = contraction_probe(model, graph, kernel, state, cfg.probe.rho, cfg.probe.pairs, seed, _gauge(cfg, model))
    return {"n": n, "seed": seed, "max_ratio_T": res["max_ratio_T"], "max_ratio_S": res["max_ratio_S"]}


def _call(args):
    fn, cfg, n, seed, outdir = args
    try:
        return fn(cfg, n, seed, outdir)
    except GraphonError as exc:
        return {"n": n, "seed": seed, "error": f"{type(exc).__name__}: {exc}"}


def run_instances(fn, cfg: ExperimentConfig, outdir: Path, jobs: int = 1) -> list[dict]:
    keys = sorted((n, s) for n in cfg.n_list for s in cfg.seeds)
    tasks = [(fn, cfg, n, s, outdir) for n, s in keys]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_call, tasks))
    else:
        rows = [_call(t) for t in tasks]
    return sorted(rows, key=lambda r: (r["n"], r["seed"]))


def ring_table(cfg: ExperimentConfig, outdir: Path) -> list:
    kernel = cfg.build_kernel()
    if cfg.m is None:
        raise ValidationError("the ring eigenvalue table needs m")
    coeffs = kernel.fourier_coefficients(max(64, cfg.ell_max + abs(cfg.m)))
    table = ring_twisted_eigenvalues(coeffs, cfg.m, (-cfg.ell_max, cfg.ell_max))
    io.write_table_csv(outdir / "ring_eigenvalues.csv", ["ell", "lambda"], table)
    return table


# --- figure recipes --------------------------------------------------------

FIG1_SEED = 1
FIG1_OPTS = SolveOptions(max_iters=500, gauge="MeanZero", damping=0.7)


def _state_rows(graph, u_graph, u_continuum):
    x = graph.grid_points
    uc = u_continuum(x) * np.ones_like(x)
    return [(i + 1, xi, a, b) for i, (xi, a, b) in enumerate(zip(x, uc, u_graph))]


def repro_fig1(outdir: Path) -> dict:
    alpha, n = 0.2, 200
    kernel = SmallWorld(alpha, 1.0 / (2 * math.pi * alpha), 0.0)
    xs = np.linspace(0.0, 1.0, 101)
    W = kernel.matrix(xs)
    io.write_table_csv(outdir / "fig1_b_graphon.csv", ["x", "y", "w"],
                       [(a, b, W[i, j]) for i, a in enumerate(xs) for j, b in enumerate(xs)])
    graph = sample_random(kernel, n, FIG1_SEED)
    io.write_matrix_csv(outdir / "fig1_c_adjacency.csv", graph.adjacency)
    model = kuramoto()
    summary = []
    for panel, m in zip("def", (2, 3, 4)):
        rep = solve_frozen(model, graph, kernel, twisted_profile(m), FIG1_OPTS)
        rows = [r + (r[3] % 1.0,) for r in _state_rows(graph, rep.final_u, twisted_profile(m))]
        io.write_table_csv(outdir / f"fig1_{panel}_m{m}.csv", ["i", "x", "u_graphon", "u_graph", "u_graph_mod1"], rows)
        spec = analyze(discrete_jacobian(model, graph, rep.final_u), "MeanZero")
        summary.append((m, rep.converged, rep.iterations, rep.final_residual, rep.distance_to_continuum,
                        spec.verdict, spec.max_real))
    io.write_table_csv(outdir / "fig1_summary.csv",
                       ["m", "converged", "iterations", "residual", "distance", "verdict", "max_real"], summary)
    return {"seeds": {"c": FIG1_SEED, "d": FIG1_SEED, "e": FIG1_SEED, "f": FIG1_SEED},
            "solver": FIG1_OPTS.__dict__, "alpha": alpha, "n": n}


def repro_scurve(outdir: Path) -> dict:
    lam, mu, delta = 22.0, 4.0, 1.0
    u = np.linspace(0.01, 14.0, 1400)
    io.write_table_csv(outdir / "scurve_left.csv", ["u", "omega"], wc_bifurcation_curve(u, lam, mu, delta))
    omegas = (0.3, 0.5, 0.7)
    coupling = lam / (1.0 + np.exp(mu - delta * u))
    rows = [(ui, ci, *[ui / w for w in omegas]) for ui, ci in zip(u, coupling)]
    io.write_table_csv(outdir / "scurve_right.csv", ["u", "coupling"] + [f"u_over_omega_{w}" for w in omegas], rows)
    roots = []
    for om in np.linspace(0.01, 1.0, 100):
        for k, (r, R) in enumerate(wc_homogeneous_roots(float(om), lam, mu, delta)):
            roots.append((float(om), k, r, R, "Stable" if R < 1 else ("Unstable" if R > 1 else "Marginal")))
    io.write_table_csv(outdir / "scurve_roots.csv", ["omega", "branch", "u", "R", "verdict"], roots)
    return {"lambda": lam, "mu": mu, "delta": delta}


HUGENEURO_SEED = 1


def repro_hugeneuro(outdir: Path) -> dict:
    p = 0.5
    kernel, model = Constant(p), wilson_cowan(1.0, 1.0, 1.0)
    state = continuum_state(model, kernel)
    opts = SolveOptions()
    left = []
    for n in (10, 200):
        g = sample_random(kernel, n, HUGENEURO_SEED)
        rep = solve_frozen(model, g, kernel, state, opts)
        left += [(n,) + r for r in _state_rows(g, rep.final_u, state)]
    io.write_table_csv(outdir / "hugeneuro_left.csv", ["n", "i", "x", "u_graphon", "u_graph"], left)
    right = []
    for n in (50, 100, 200, 400):
        g = sample_random(kernel, n, HUGENEURO_SEED)
        rep = solve_frozen(model, g, kernel, state, opts)
        ev = analyze(discrete_jacobian(model, g, rep.final_u)).eigenvalues
        right += [(n, HUGENEURO_SEED, z.real, z.imag) for z in ev]
    io.write_table_csv(outdir / "hugeneuro_right.csv", ["n", "seed", "re", "im"], right)
    return {"seed": HUGENEURO_SEED, "p": p, "solver": opts.__dict__}


LV_SEED = 1


def repro_lv(outdir: Path) -> dict:
    kernel, model = Constant(0.5), lotka_volterra(1.0)
    state = continuum_state(model, kernel)
    opts = SolveOptions()
    for name, n in (("lv_left", 200), ("lv_right", 1000)):
        g = sample_random(kernel, n, LV_SEED)
        rep = solve_frozen(model, g, kernel, state, opts)
        io.write_table_csv(outdir / f"{name}.csv", ["i", "x", "u_graphon", "u_graph"],
                           _state_rows(g, rep.final_u, state))
        if n == 200:
            ev = analyze(discrete_jacobian(model, g, rep.final_u)).eigenvalues
            io.write_table_csv(outdir / "lv_eigs.csv", ["re", "im", "n", "seed"],
                               [(z.real, z.imag, n, LV_SEED) for z in ev])
    trend = []
    for n in (100, 200, 400, 800):
        for s in range(10):
            rep = solve_frozen(model, sample_random(kernel, n, s), kernel, state, opts)
            trend.append((n, s, rep.converged, rep.distance_to_continuum))
    io.write_table_csv(outdir / "lv_trend.csv", ["n", "seed", "converged", "distance"], trend)
    return {"seed": LV_SEED, "trend_seeds": list(range(10)), "solver": opts.__dict__}


LVB_SEED = 1


def repro_lvbipartite(outdir: Path) -> dict:
    p, alpha, lam, n = 0.5, 0.3, 1.0, 200
    kernel, model = Bipartite(alpha, p), lotka_volterra(lam, cooperative=True)
    g = sample_bipartite_aligned(alpha, p, n, LVB_SEED)
    io.write_matrix_csv(outdir / "lvbipartite_a_adjacency.csv", g.adjacency)
    state = bipartite_lv_profile(p, alpha, lam)
    opts = SolveOptions()
    rep = solve_frozen(model, g, kernel, state, opts)
    io.write_table_csv(outdir / "lvbipartite_b.csv", ["i", "x", "u_graphon", "u_graph"],
                       _state_rows(g, rep.final_u, state))
    return {"seed": LVB_SEED, "p": p, "alpha": alpha, "lambda": lam, "n": n, "solver": opts.__dict__,
            "converged": rep.converged}


RECIPES = {
    "fig1": repro_fig1,
    "scurve": repro_scurve,
    "hugeneuro": repro_hugeneuro,
    "lv": repro_lv,
    "lvbipartite": repro_lvbipartite,
}


def run_repro(figure_id: str, outdir) -> Path:
    if figure_id not in RECIPES:
        raise ValidationError(f"unknown figure id {figure_id!r}; valid ids: {', '.join(FIGURES)}")
    outdir = Path(outdir) / figure_id
    outdir.mkdir(parents=True, exist_ok=True)
    meta = RECIPES[figure_id](outdir)
    files = sorted(p.name for p in outdir.iterdir() if p.name != "manifest.json")
    io.write_json(outdir / "manifest.json", {"figure": figure_id, "created": timestamp(), "files": files, **meta})
    return outdir

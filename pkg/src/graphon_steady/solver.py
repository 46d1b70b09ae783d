"""Frozen-Jacobian iteration T_n[u] = u - DF(u*)^{-1} G_n(u), plus a Newton baseline.

With gauge="MeanZero" linear solves use the bordered system
[[M, 1], [1^T, 0]] [v; s] = [r; 0], which returns the mean-zero solution of
M v = r - s 1 and stays regular when M has the constants in its kernel.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import lapack, lu_factor, lu_solve

from .errors import DivergenceError, SingularJacobianError, ValidationError
from .grid import ContinuumState, GridFunction
from .io import dumps_json, write_table_csv
from .models import ModelSpec
from .operators import LinearizedOperator, _sample_state, discrete_jacobian, eval_Gn, frozen_jacobian

GAUGES = ("None", "MeanZero")
MAX_CONDITION = 1e12
DIVERGENCE_RESIDUAL = 1e6


@dataclass(frozen=True)
class SolveOptions:
    max_iters: int = 200
    tol_residual: float = 1e-10
    tol_step: float = 1e-12
    gauge: str = "None"
    damping: float = 1.0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1")
        if self.tol_residual <= 0 or self.tol_step <= 0:
            raise ValidationError("tolerances must be positive")
        if self.gauge not in GAUGES:
            raise ValidationError(f"gauge must be one of {GAUGES}")
        if not (0.0 < self.damping <= 1.0):
            raise ValidationError("damping must lie in (0, 1]")


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    residual_history: list
    step_history: list
    final_u: np.ndarray
    distance_to_continuum: float
    contraction_ratios_T: list
    contraction_ratios_S: list
    method: str = "frozen"
    condition: float = float("nan")
    meta: dict = field(default_factory=dict)

    @property
    def final_residual(self) -> float:
        return self.residual_history[-1]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["final_u"] = np.asarray(self.final_u).tolist()
        return d

    def to_json(self) -> str:
        return dumps_json(self.to_dict())

    def write_history_csv(self, path):
        steps = [float("nan")] + list(self.step_history)
        rows = [(k, r, s) for k, (r, s) in enumerate(zip(self.residual_history, steps))]
        return write_table_csv(path, ["iteration", "residual", "step"], rows)


def _sup(v) -> float:
    return float(np.max(np.abs(v))) if len(v) else 0.0


class FrozenInverse:
    """LU factorization of a (possibly bordered) Jacobian, reusable across solves."""

    def __init__(self, matrix: np.ndarray, gauge: str = "None", shift_invariant: bool = False):
        if gauge not in GAUGES:
            raise ValidationError(f"gauge must be one of {GAUGES}")
        M = np.asarray(matrix, dtype=float)
        n = M.shape[0]
        self.n = n
        self.gauge = gauge
        if gauge == "MeanZero":
            B = np.zeros((n + 1, n + 1))
            B[:n, :n] = M
            B[:n, n] = 1.0
            B[n, :n] = 1.0
            M = B
        anorm = np.linalg.norm(M, 1)
        self.lu = lu_factor(M, check_finite=True)
        rcond, info = lapack.dgecon(self.lu[0], anorm, norm="1")
        self.condition = float("inf") if rcond == 0 else 1.0 / rcond
        if not np.isfinite(self.condition) or self.condition > MAX_CONDITION:
            hint = " (the model is shift invariant: try gauge='MeanZero')" if shift_invariant and gauge == "None" else ""
            raise SingularJacobianError(f"Jacobian condition number {self.condition:.3g} exceeds {MAX_CONDITION:g}{hint}")

    @classmethod
    def from_operator(cls, op: LinearizedOperator, gauge: str = "None", shift_invariant: bool = False):
        return cls(op.matrix, gauge, shift_invariant)

    def solve(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.gauge == "MeanZero":
            rhs = np.append(r - r.mean(), 0.0)
            return lu_solve(self.lu, rhs)[: self.n]
        return lu_solve(self.lu, r)


def _ratios(steps, iterates):
    T = [steps[k] / steps[k - 1] for k in range(1, len(steps)) if steps[k - 1] > 0]
    S = []
    for k in range(2, len(iterates) - 2):
        den = _sup(iterates[k] - iterates[k - 2])
        if den > 0:
            S.append(_sup(iterates[k + 2] - iterates[k]) / den)
    return T, S


def _iterate(residual, solve, u0, opts: SolveOptions, u_ref, method, condition):
    u = np.array(u0, dtype=float)
    mean0 = u.mean()
    r = residual(u)
    res_hist = [_sup(r)]
    steps, iterates = [], [u.copy()]
    converged = False
    it = 0
    for it in range(1, opts.max_iters + 1):
        du = opts.damping * solve(u, r)
        u = u - du
        if opts.gauge == "MeanZero":
            u = u - (u.mean() - mean0)
        steps.append(_sup(du))
        iterates.append(u.copy())
        r = residual(u)
        res = _sup(r)
        res_hist.append(res)
        if not np.isfinite(res) or res > DIVERGENCE_RESIDUAL:
            raise DivergenceError(f"{method} iteration diverged at step {it}: residual {res:.3g}")
        if res <= opts.tol_residual and steps[-1] <= opts.tol_step:
            converged = True
            break
    T, S = _ratios(steps, iterates)
    dist = _sup(u - u_ref) if u_ref is not None else float("nan")
    return SolveReport(converged, it, res_hist, steps, u, dist, T, S, method, condition)


def solve_frozen(model: ModelSpec, graph, kernel, u_star, opts: SolveOptions | None = None,
                 inverse: FrozenInverse | None = None, u0=None) -> SolveReport:
    """Iterate T_n from u* sampled on the graph's grid points.

    ``inverse`` may carry a factorization shared across graphs with the same
    grid; ``u0`` overrides the start.
    """
    opts = opts or SolveOptions()
    ref = _sample_state(u_star, graph.grid_points)
    if ref.n != graph.n:
        raise ValidationError("state and graph sizes differ")
    if opts.gauge == "MeanZero" and not model.shift_invariant:
        raise ValidationError("the MeanZero gauge needs a shift-invariant model")
    if inverse is None:
        op = frozen_jacobian(model, kernel, ref)
        inverse = FrozenInverse.from_operator(op, opts.gauge, model.shift_invariant)
    elif inverse.gauge != opts.gauge or inverse.n != graph.n:
        raise ValidationError("shared inverse does not match the gauge or size")
    start = ref.values if u0 is None else np.asarray(u0, dtype=float)
    report = _iterate(lambda u: eval_Gn(model, graph, u), lambda u, r: inverse.solve(r),
                      start, opts, ref.values, "frozen", inverse.condition)
    report.meta.update({"graph": graph.graph_id, "model": model.model_id, "n": graph.n, "seed": graph.seed})
    return report


def solve_newton(model: ModelSpec, graph, u0, opts: SolveOptions | None = None, u_ref=None) -> SolveReport:
    """Newton's method on G_n with the Jacobian refactored every step."""
    opts = opts or SolveOptions()
    cond = [float("nan")]

    def solve(u, r):
        J = discrete_jacobian(model, graph, u)
        inv = FrozenInverse.from_operator(J, opts.gauge, model.shift_invariant)
        cond[0] = inv.condition
        return inv.solve(r)

    if isinstance(u_ref, (GridFunction, ContinuumState)):
        u_ref = _sample_state(u_ref, graph.grid_points).values
    report = _iterate(lambda u: eval_Gn(model, graph, u), solve, u0, opts, u_ref, "newton", float("nan"))
    report.condition = cond[0]
    report.meta.update({"graph": graph.graph_id, "model": model.model_id, "n": graph.n, "seed": graph.seed})
    return report


def contraction_probe(model: ModelSpec, graph, kernel, u_star, rho: float, pairs: int, seed: int,
                      gauge: str = "None", inverse: FrozenInverse | None = None) -> dict:
    """Largest observed Lipschitz ratios of T_n and S_n = T_n o T_n on B_rho(u*).

    Pairs are u* + U[-rho, rho]^n (perturbation made mean-zero when gauged).
    """
    if not (0.0 < rho < 1.0):
        raise ValidationError("rho must lie in (0, 1)")
    ref = _sample_state(u_star, graph.grid_points).values
    if inverse is None:
        op = frozen_jacobian(model, kernel, GridFunction(ref, grid=graph.grid_points))
        inverse = FrozenInverse.from_operator(op, gauge, model.shift_invariant)

    def T(u):
        return u - inverse.solve(eval_Gn(model, graph, u))

    rng = np.random.default_rng(seed)
    rt, rs = [], []
    for _ in range(pairs):
        d1, d2 = rng.uniform(-rho, rho, (2, graph.n))
        if gauge == "MeanZero":
            d1, d2 = d1 - d1.mean(), d2 - d2.mean()
        u1, u2 = ref + d1, ref + d2
        base = _sup(u1 - u2)
        t1, t2 = T(u1), T(u2)
        rt.append(_sup(t1 - t2) / base)
        rs.append(_sup(T(t1) - T(t2)) / base)
    return {"max_ratio_T": max(rt), "max_ratio_S": max(rs), "ratios_T": rt, "ratios_S": rs}

"""Fixed-step RK4 for du/dt = G_n(u) and perturbation-decay experiments."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .io import write_table_csv
from .operators import eval_Gn

DEFAULT_DT = 1e-2
DEFAULT_T_END = 50.0
# deviations below this multiple of eps * (1 + |u*|) are rounding noise
NOISE_FLOOR = 1e3
# a start with residual r sits roughly r / gap from the true equilibrium
RESIDUAL_FLOOR = 1e3


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    dt: float
    model_id: str
    graph_id: str
    blew_up: bool = False
    blowup_time: float | None = None

    def write_csv(self, path, stride: int = 1):
        n = self.states.shape[1]
        rows = [(t, *u) for t, u in zip(self.times[::stride], self.states[::stride])]
        return write_table_csv(path, ["t"] + [f"u_{i + 1}" for i in range(n)], rows)


def rk4(rhs, u0, dt: float, steps: int, stride: int = 1):
    """Classic RK4; returns (times, states, blew_up, blowup_time) sampled every ``stride`` steps."""
    u = np.array(u0, dtype=float)
    times, states = [0.0], [u.copy()]
    for k in range(1, steps + 1):
        k1 = rhs(u)
        k2 = rhs(u + 0.5 * dt * k1)
        k3 = rhs(u + 0.5 * dt * k2)
        k4 = rhs(u + dt * k3)
        u = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(u)):
            return np.array(times), np.array(states), True, k * dt
        if k % stride == 0 or k == steps:
            times.append(k * dt)
            states.append(u.copy())
    return np.array(times), np.array(states), False, None


def integrate_rk4(model, graph, u0, dt: float = DEFAULT_DT, t_end: float = DEFAULT_T_END, stride: int = 1) -> Trajectory:
    if dt <= 0 or t_end <= 0 or dt > t_end:
        raise ValidationError("need 0 < dt <= t_end")
    steps = int(round(t_end / dt))
    times, states, blew, tb = rk4(lambda u: eval_Gn(model, graph, u), u0, dt, steps, stride)
    return Trajectory(times, states, dt, model.model_id, graph.graph_id, blew, tb)


def perturbation_decay(model, graph, u_star_n, eps: float, dt: float = DEFAULT_DT, t_end: float = DEFAULT_T_END,
                       seed: int = 0, gauge: str | None = None, check_residual: float = 1e-8) -> dict:
    """Kick u* by uniform noise of sup-norm eps and watch the deviation.

    decayed iff the final deviation is <= eps/10. ``rate`` is the slope of
    log deviation against t over the final half of the run, restricted to
    times where the deviation is above rounding noise and above the offset
    implied by the residual of ``u_star_n``. With gauge="MeanZero"
    (default for shift-invariant models) the noise is mean-zero and
    deviations are measured modulo constants.
    """
    u_star_n = np.asarray(u_star_n, dtype=float)
    res = float(np.max(np.abs(eval_Gn(model, graph, u_star_n))))
    if res > check_residual:
        raise ValidationError(f"start is not a steady state (residual {res:.3g})")
    if gauge is None:
        gauge = "MeanZero" if model.shift_invariant else "None"
    if eps == 0:
        return {"decayed": True, "rate": 0.0, "final_deviation": 0.0, "blew_up": False}
    rng = np.random.default_rng(seed)
    noise = rng.uniform(-1.0, 1.0, graph.n)
    if gauge == "MeanZero":
        noise -= noise.mean()
    noise *= eps / np.max(np.abs(noise))
    traj = integrate_rk4(model, graph, u_star_n + noise, dt, t_end)
    diff = traj.states - u_star_n[None, :]
    if gauge == "MeanZero":
        diff -= diff.mean(axis=1, keepdims=True)
    dev = np.max(np.abs(diff), axis=1)
    final = float(dev[-1])
    floor = max(NOISE_FLOOR * np.finfo(float).eps * (1.0 + np.max(np.abs(u_star_n))), RESIDUAL_FLOOR * res)
    half = traj.times >= 0.5 * traj.times[-1]
    sel = half & (dev > floor)
    if sel.sum() < 2:
        # the deviation hit the noise floor before the second half: fit the last resolved stretch
        resolved = np.nonzero(dev > floor)[0]
        stop = resolved[-1] + 1 if len(resolved) else 1
        start = stop // 2
        sel = np.zeros_like(half)
        sel[start:stop] = True
    if sel.sum() >= 2:
        rate = float(np.polyfit(traj.times[sel], np.log(dev[sel]), 1)[0])
    else:
        rate = float("nan")
    return {
        "decayed": bool(final <= eps / 10 and not traj.blew_up),
        "rate": rate,
        "final_deviation": final,
        "blew_up": traj.blew_up,
    }

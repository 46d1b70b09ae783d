"""Reaction-coupling models du_i/dt = f(u_i) + (1/n) sum_j A_ij D(u_i, u_j).

Each model carries f, D and their derivatives as vectorised callables. Models
whose coupling splits as D(a, b) = sum_k g_k(a) h_k(b) also list those terms,
which lets the operators replace n x n evaluations of D by matrix-vector
products.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import expit

from .errors import ParameterError, ValidationError
from .grid import ContinuumState, GridFunction, uniform_grid

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CouplingTerm:
    """One separable piece g(a) h(b) of the coupling, with derivatives."""

    g: Callable
    h: Callable
    dg: Callable
    dh: Callable


@dataclass(frozen=True)
class ModelSpec:
    name: str
    f: Callable
    f_prime: Callable
    D: Callable
    D1: Callable
    D2: Callable
    params: dict = field(default_factory=dict)
    periodic_state: bool = False
    terms: tuple = ()

    @property
    def model_id(self) -> str:
        args = ",".join(f"{k}={v!r}" for k, v in sorted(self.params.items()))
        return f"{self.name}({args})"

    @property
    def shift_invariant(self) -> bool:
        """True when the vector field commutes with u -> u + c."""
        return self.periodic_state

    def to_config(self) -> dict:
        return {"model": self.name, **self.params}


def _zero(u):
    return np.zeros_like(np.asarray(u, dtype=float))


def _const(c):
    return lambda u: np.full(np.shape(u), float(c))


def kuramoto() -> ModelSpec:
    """f = 0, D(a, b) = sin(2 pi (b - a)); phases measured in turns."""

    def D(a, b):
        return np.sin(TWO_PI * (np.asarray(b) - np.asarray(a)))

    def D2(a, b):
        return TWO_PI * np.cos(TWO_PI * (np.asarray(b) - np.asarray(a)))

    def D1(a, b):
        return -D2(a, b)

    # sin(2pi(b-a)) = cos(2pi a) sin(2pi b) - sin(2pi a) cos(2pi b)
    terms = (
        CouplingTerm(
            g=lambda a: np.cos(TWO_PI * a),
            h=lambda b: np.sin(TWO_PI * b),
            dg=lambda a: -TWO_PI * np.sin(TWO_PI * a),
            dh=lambda b: TWO_PI * np.cos(TWO_PI * b),
        ),
        CouplingTerm(
            g=lambda a: -np.sin(TWO_PI * a),
            h=lambda b: np.cos(TWO_PI * b),
            dg=lambda a: -TWO_PI * np.cos(TWO_PI * a),
            dh=lambda b: -TWO_PI * np.sin(TWO_PI * b),
        ),
    )
    return ModelSpec("kuramoto", _zero, _zero, D, D1, D2, {}, periodic_state=True, terms=terms)


def wilson_cowan(lam: float, mu: float, delta: float) -> ModelSpec:
    """f(u) = -u, D(a, b) = lam / (1 + exp(mu - delta b))."""
    if lam <= 0:
        raise ParameterError("lambda must be positive")

    def sig(b):
        return expit(delta * np.asarray(b, dtype=float) - mu)

    def D(a, b):
        return lam * sig(b) + 0.0 * np.asarray(a)

    def D2(a, b):
        s = sig(b)
        return lam * delta * s * (1.0 - s) + 0.0 * np.asarray(a)

    def D1(a, b):
        return np.zeros(np.broadcast(np.asarray(a), np.asarray(b)).shape)

    terms = (
        CouplingTerm(
            g=_const(lam),
            h=sig,
            dg=_zero,
            dh=lambda b: delta * sig(b) * (1.0 - sig(b)),
        ),
    )
    return ModelSpec(
        "wilson_cowan",
        lambda u: -np.asarray(u, dtype=float),
        lambda u: -np.ones(np.shape(u)),
        D, D1, D2,
        {"lambda": float(lam), "mu": float(mu), "delta": float(delta)},
        terms=terms,
    )


def lotka_volterra(lam: float, cooperative: bool = False) -> ModelSpec:
    """f(u) = u(1 - u), D(a, b) = s lam a b with s = +1 cooperative, -1 competitive."""
    if lam < 0:
        raise ParameterError("lambda must be nonnegative")
    s = 1.0 if cooperative else -1.0
    k = s * lam

    def D(a, b):
        return k * np.asarray(a) * np.asarray(b)

    def D1(a, b):
        return k * np.asarray(b) + 0.0 * np.asarray(a)

    def D2(a, b):
        return k * np.asarray(a) + 0.0 * np.asarray(b)

    terms = (CouplingTerm(g=lambda a: k * np.asarray(a), h=lambda b: np.asarray(b, dtype=float),
                          dg=_const(k), dh=lambda b: np.ones(np.shape(b))),)
    return ModelSpec(
        "lotka_volterra",
        lambda u: np.asarray(u) * (1.0 - np.asarray(u)),
        lambda u: 1.0 - 2.0 * np.asarray(u),
        D, D1, D2,
        {"lambda": float(lam), "cooperative": bool(cooperative)},
        terms=terms,
    )


def linear_model(a: float, b: float) -> ModelSpec:
    """f(u) = a u, D(x, y) = b y; an affine test case."""
    return ModelSpec(
        "linear",
        lambda u: a * np.asarray(u, dtype=float),
        _const(a),
        lambda x, y: b * np.asarray(y) + 0.0 * np.asarray(x),
        lambda x, y: np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape),
        lambda x, y: b + 0.0 * (np.asarray(x) + np.asarray(y)),
        {"a": float(a), "b": float(b)},
        terms=(CouplingTerm(_const(b), lambda y: np.asarray(y, dtype=float), _zero, lambda y: np.ones(np.shape(y))),),
    )


# --- closed-form states ----------------------------------------------------

def twisted_profile(m: int) -> ContinuumState:
    """u*(x) = m (x - 1/2)."""
    m = int(m)
    return ContinuumState(lambda x: m * (np.asarray(x) - 0.5))


def kuramoto_twisted_state(m: int, n: int) -> GridFunction:
    return twisted_profile(m).sample(n)


def wc_homogeneous_roots(omega: float, lam: float, mu: float, delta: float, cells: int = 4096) -> list[tuple[float, float]]:
    """All u in [0, lam*omega] with u = lam*omega / (1 + exp(mu - delta u)).

    Returned as (u, R) pairs in increasing u, where R = lam*omega*delta*s(1-s),
    s = 1/(1 + exp(mu - delta u)), is the slope of the right-hand side.
    """
    if not (0.0 <= omega <= 1.0):
        raise ParameterError("omega must lie in [0, 1]")
    if lam <= 0:
        raise ParameterError("lambda must be positive")
    top = lam * omega

    def g(u):
        return top * expit(delta * u - mu) - u

    def R(u):
        s = expit(delta * u - mu)
        return top * delta * s * (1.0 - s)

    if top == 0.0:
        return [(0.0, 0.0)]
    xs = np.linspace(0.0, top, cells + 1)
    gs = g(xs)
    roots = []
    for k in range(cells):
        a, b, ga, gb = xs[k], xs[k + 1], gs[k], gs[k + 1]
        if ga == 0.0:
            roots.append(a)
            continue
        if ga * gb < 0:
            roots.append(_bisect(g, a, b, ga, 1e-12))
    if gs[-1] == 0.0:
        roots.append(xs[-1])
    if not roots:
        raise ParameterError("no homogeneous root found")
    return [(float(r), float(R(r))) for r in roots]


def _bisect(fn, a, b, fa, tol):
    while b - a > tol:
        c = 0.5 * (a + b)
        fc = fn(c)
        if fc == 0.0:
            return c
        if (fc > 0) == (fa > 0):
            a, fa = c, fc
        else:
            b = c
    return 0.5 * (a + b)


def wc_bifurcation_curve(u_grid, lam: float, mu: float, delta: float) -> list[tuple[float, float]]:
    """(u*, Omega) pairs with Omega = u* (1 + exp(mu - delta u*)) / lam."""
    if lam <= 0:
        raise ParameterError("lambda must be positive")
    u = np.asarray(u_grid, dtype=float)
    omega = u * (1.0 + np.exp(mu - delta * u)) / lam
    return list(zip(u.tolist(), omega.tolist()))


def lv_steady(p: float, lam: float) -> float:
    if not (0.0 <= p <= 1.0):
        raise ParameterError("p must lie in [0, 1]")
    if lam <= 0:
        raise ParameterError("lambda must be positive")
    return 1.0 / (1.0 + lam * p)


def bipartite_lv_steady(p: float, alpha: float, lam: float) -> tuple[float, float]:
    """Two-level cooperative LV state on the bipartite kernel."""
    det = 1.0 - lam**2 * p**2 * alpha * (1.0 - alpha)
    if not det > 0:
        raise ParameterError("need lambda^2 p^2 alpha (1 - alpha) < 1")
    return (1.0 + lam * p * (1.0 - alpha)) / det, (1.0 + lam * p * alpha) / det


def bipartite_lv_profile(p: float, alpha: float, lam: float) -> ContinuumState:
    u1, u2 = bipartite_lv_steady(p, alpha, lam)
    return ContinuumState(lambda x: np.where(np.asarray(x) < alpha, u1, u2), breakpoints=(alpha,))


def _mu_residual(mu):
    t = math.pi * mu
    return math.tan(t) * (2.0 - t * t) - 2.0 * t


@lru_cache(maxsize=None)
def mu_star() -> float:
    """Root in (1/2, 1) of tan(pi mu) = 2 pi mu / (2 - (pi mu)^2)."""
    a, b = 0.5 + 1e-6, 1.0 - 1e-6
    fa = _mu_residual(a)
    if fa * _mu_residual(b) > 0:
        raise ParameterError("no sign change on the bracketing interval")
    return _bisect(_mu_residual, a, b, fa, 1e-12)


def kuramoto_stability_predicate(m: int, alpha: float) -> bool:
    """The cited sufficient condition |m| alpha < mu pi (not verified here)."""
    return abs(m) * alpha < mu_star() * math.pi


# --- registry --------------------------------------------------------------

def build_model(cfg: dict) -> ModelSpec:
    """Model from {"model": name, ...params}."""
    name = str(cfg.get("model", "")).lower()
    if name == "kuramoto":
        return kuramoto()
    if name in ("wilson_cowan", "wc"):
        return wilson_cowan(float(cfg["lambda"]), float(cfg["mu"]), float(cfg["delta"]))
    if name in ("lotka_volterra", "lv"):
        return lotka_volterra(float(cfg["lambda"]), bool(cfg.get("cooperative", False)))
    raise ValidationError(f"unknown model {cfg.get('model')!r}")


MODEL_NAMES = ("kuramoto", "wilson_cowan", "lotka_volterra")


def continuum_state(model: ModelSpec, kernel, m: int | None = None, branch: int = 0) -> ContinuumState:
    """Closed-form continuum steady state for the example models.

    Kuramoto: the m-twisted state (``m`` required). Wilson-Cowan and
    competitive LV: homogeneous states for kernels with constant degree
    (``branch`` indexes the WC roots in increasing order). Cooperative LV:
    the two-level state on a bipartite kernel.
    """
    from .kernels import Bipartite

    if model.name == "kuramoto":
        if m is None:
            raise ParameterError("the Kuramoto state needs a twist number m")
        return twisted_profile(m)
    if model.name == "lotka_volterra" and model.params["cooperative"]:
        if not isinstance(kernel, Bipartite):
            raise ParameterError("cooperative LV state is known only for bipartite kernels")
        return bipartite_lv_profile(kernel.p, kernel.alpha, model.params["lambda"])
    d = kernel.degree_at(uniform_grid(64))
    if np.ptp(d) > 1e-12:
        raise ParameterError("homogeneous states need a kernel with constant degree")
    omega = float(d[0])
    if model.name == "lotka_volterra":
        u = 1.0 / (1.0 + model.params["lambda"] * omega)
    elif model.name == "wilson_cowan":
        P = model.params
        roots = wc_homogeneous_roots(omega, P["lambda"], P["mu"], P["delta"])
        if not (0 <= branch < len(roots)) and not (-len(roots) <= branch < 0):
            raise ParameterError(f"branch {branch} out of range for {len(roots)} roots")
        u = roots[branch][0]
    else:
        raise ParameterError(f"no closed-form state for {model.name}")
    return ContinuumState(lambda x, u=u: np.full(np.shape(x), u))

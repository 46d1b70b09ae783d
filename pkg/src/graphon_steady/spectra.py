"""Eigenvalues of linearizations and the stability verdicts built from them."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cutnorm import cutnorm
from .errors import DomainError, GaugeError, NumericError
from .grid import GridFunction
from .kernels import RingCoefficients
from .operators import LinearizedOperator

DEFAULT_MARGIN = 1e-8
CONSTANCY_TOL = 1e-6


def _sort_order(ev):
    return np.lexsort((-ev.imag, -ev.real))


def eigenvalues_dense(M, vectors: bool = False):
    """All eigenvalues of a real square matrix, by real part descending then imaginary part.

    With ``vectors`` the matching right eigenvectors are returned as columns.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise DomainError("need a nonempty square matrix")
    try:
        if vectors:
            ev, V = np.linalg.eig(M)
        else:
            ev = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed (1-norm condition {np.linalg.cond(M, 1):.3g}): {exc}") from exc
    ev = np.asarray(ev, dtype=complex)
    order = _sort_order(ev)
    if vectors:
        return ev[order], np.asarray(V, dtype=complex)[:, order]
    return ev[order]


def ring_twisted_eigenvalues(coeffs: RingCoefficients, m: int, ell_range) -> list[tuple[int, float]]:
    """lambda_l = pi (c_{l+m} + c_{l-m} - 2 c_m) for l in the inclusive range."""
    lo, hi = ell_range
    return [(l, math.pi * (coeffs[l + m] + coeffs[l - m] - 2.0 * coeffs[m])) for l in range(lo, hi + 1)]


def essential_spectrum(q) -> tuple[float, float]:
    """Range of -Q over the grid."""
    while isinstance(q, GridFunction) or hasattr(q, "values"):
        q = q.values
    v = np.asarray(q, dtype=float)
    return float(np.min(-v)), float(np.max(-v))


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    essential_interval: tuple
    gauge_modes_excluded: int
    verdict: str  # "Stable", "Unstable" or "Marginal"
    gap: float | None
    unstable_count: int
    max_real: float
    source: str
    excluded: tuple = ()

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "essential_interval": list(self.essential_interval),
            "gauge_modes_excluded": self.gauge_modes_excluded,
            "verdict": self.verdict,
            "gap": self.gap,
            "unstable_count": self.unstable_count,
            "max_real": self.max_real,
            "source": self.source,
            "excluded": [[z.real, z.imag] for z in self.excluded],
        }


def _gauge_index(eigs, vecs) -> int:
    cands = []
    for k in range(vecs.shape[1]):
        v = vecs[:, k] / np.linalg.norm(vecs[:, k])
        if np.sum(np.abs(v - v.mean()) ** 2) <= CONSTANCY_TOL:
            cands.append(k)
    if not cands:
        raise GaugeError("no eigenvector is numerically constant; cannot exclude a gauge mode")
    return min(cands, key=lambda k: abs(eigs[k]))


def stability_verdict(eigenvalues, essential_interval, gauge: str = "None", margin: float = DEFAULT_MARGIN,
                      eigenvectors=None, source: str = "DiscreteJacobian") -> SpectrumReport:
    """Stable iff every retained eigenvalue and the essential interval sit left of -margin.

    gauge="MeanZero" drops the one eigenvalue whose eigenvector is constant
    (nearest 0 if several), which needs ``eigenvectors``.
    """
    if margin <= 0:
        raise DomainError("margin must be positive")
    eigs = np.asarray(eigenvalues, dtype=complex)
    keep = np.ones(len(eigs), bool)
    excluded = ()
    if gauge == "MeanZero":
        if eigenvectors is None:
            raise GaugeError("gauge exclusion needs eigenvectors")
        k = _gauge_index(eigs, np.asarray(eigenvectors))
        keep[k] = False
        excluded = (complex(eigs[k]),)
    elif gauge != "None":
        raise DomainError(f"unknown gauge {gauge!r}")
    rest = eigs[keep]
    lo, hi = float(essential_interval[0]), float(essential_interval[1])
    max_real = float(np.max(rest.real)) if len(rest) else -math.inf
    top = max(max_real, hi)
    count = int(np.sum(rest.real > margin))
    if top < -margin:
        verdict, gap = "Stable", -top
    elif count > 0 or hi > margin:
        verdict, gap = "Unstable", None
    else:
        verdict, gap = "Marginal", None
    order = _sort_order(eigs)
    return SpectrumReport(eigs[order], (lo, hi), len(excluded), verdict, gap, count, max_real, source, excluded)


def analyze(op: LinearizedOperator, gauge: str = "None", margin: float = DEFAULT_MARGIN) -> SpectrumReport:
    """Eigenvalues of an assembled operator, essential range of -Q, verdict."""
    if gauge == "MeanZero":
        ev, V = eigenvalues_dense(op.matrix, vectors=True)
    else:
        ev, V = eigenvalues_dense(op.matrix), None
    ess = (float(np.min(-op.q_values)), float(np.max(-op.q_values)))
    return stability_verdict(ev, ess, gauge, margin, V, op.kind)


def spectral_distance(eigs_a, eigs_b) -> float:
    """Symmetric Hausdorff distance between two finite sets in the complex plane."""
    a = np.asarray(eigs_a, dtype=complex).ravel()
    b = np.asarray(eigs_b, dtype=complex).ravel()
    if a.size == 0 or b.size == 0:
        raise DomainError("spectral distance needs nonempty sets")
    d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def tw_opnorm_bound_check(M_diff, mode: str = "auto", restarts: int = 64, tol: float = 1e-12) -> dict:
    """Check ||T||_{2->2} <= 2 sqrt(2) ||W||_cut^{1/2} for the step kernel of M_diff.

    The right side uses the exact cut norm when enumerated, otherwise the
    certified upper bound.
    """
    M = np.asarray(M_diff, dtype=float)
    n = M.shape[0]
    lhs = float(np.linalg.norm(M, 2)) / n
    est = cutnorm(M, mode=mode, restarts=restarts)
    c = est.exact if est.exact is not None else est.upper
    rhs = 2.0 * math.sqrt(2.0) * math.sqrt(c)
    return {"lhs": lhs, "rhs": rhs, "ok": lhs <= rhs + tol, "method": est.method}

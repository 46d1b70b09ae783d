"""Cut-norm estimation for square matrices, normalized by n^2.

``cutnorm`` returns sup_{S,T} |sum_{i in S, j in T} M_ij| / n^2 exactly for
small n (enumeration of S with the optimal T read off the column sums) and a
certified lower bound from alternating ascent otherwise. ``cutnorm_2`` does the
same for the +-1 variant sup_{f,g} |f^T M g| / n^2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SizeError, ValidationError

BRUTE_MAX_N = 22
AUTO_BRUTE_MAX_N = 16
DEFAULT_RESTARTS = 64
_CHUNK_BITS = 16


@dataclass(frozen=True)
class CutNormEstimate:
    lower: float
    upper: float
    exact: float | None
    method: str
    witness: tuple | None = None  # (S mask, T mask) or (f, g) achieving `lower`

    def __post_init__(self):
        if self.lower < 0 or self.lower > self.upper * (1 + 1e-12) + 1e-15:
            raise ValidationError(f"inconsistent estimate lower={self.lower} upper={self.upper}")

    @property
    def value(self) -> float:
        """Best available point estimate: exact when known, else the lower bound."""
        return self.exact if self.exact is not None else self.lower


def _as_square(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError("cut norm needs a square matrix")
    if not np.all(np.isfinite(M)):
        raise ValidationError("matrix has non-finite entries")
    return M


def _bit_rows(start: int, stop: int, n: int) -> np.ndarray:
    masks = np.arange(start, stop, dtype=np.int64)
    return ((masks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(float)


def _brute(M):
    n = M.shape[0]
    best, best_mask, best_sign = 0.0, 0, 1.0
    total = 1 << n
    step = 1 << min(n, _CHUNK_BITS)
    for start in range(0, total, step):
        B = _bit_rows(start, min(start + step, total), n)
        cols = B @ M
        pos = np.where(cols > 0, cols, 0.0).sum(axis=1)
        neg = -np.where(cols < 0, cols, 0.0).sum(axis=1)
        for vals, sign in ((pos, 1.0), (neg, -1.0)):
            k = int(np.argmax(vals))
            if vals[k] > best:
                best, best_mask, best_sign = float(vals[k]), start + k, sign
    S = _bit_rows(best_mask, best_mask + 1, n)[0].astype(bool)
    T = best_sign * (S.astype(float) @ M) > 0
    return best, (S, T)


def _ascent(M, starts):
    """Alternating ascent from each row of ``starts`` for both signs.

    Returns the best value of |1_S^T M 1_T| found and its (S, T).
    """
    best, witness = 0.0, (np.zeros(M.shape[0], bool), np.zeros(M.shape[1], bool))
    for sign in (1.0, -1.0):
        S = starts.copy()
        prev = None
        for _ in range(10 * M.shape[0] + 10):
            T = sign * (S @ M) > 0
            S = sign * (T.astype(float) @ M.T) > 0
            S = S.astype(float)
            key = S.tobytes()
            if key == prev:
                break
            prev = key
        T = sign * (S @ M) > 0
        vals = sign * np.einsum("ri,ij,rj->r", S, M, T.astype(float))
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, witness = float(vals[k]), (S[k].astype(bool), T[k])
    return best, witness


def cutnorm(M, mode: str = "auto", restarts: int = DEFAULT_RESTARTS, seed: int = 0) -> CutNormEstimate:
    """Normalized cut norm of M.

    mode: "auto" (brute force for n <= 16), "brute" or "heuristic".
    """
    M = _as_square(M)
    n = M.shape[0]
    mode = mode.lower()
    upper_l1 = float(np.abs(M).sum()) / n**2
    if mode in ("brute", "bruteforce") or (mode == "auto" and n <= AUTO_BRUTE_MAX_N):
        if n > BRUTE_MAX_N:
            raise SizeError(f"brute force cut norm limited to n <= {BRUTE_MAX_N}, got {n}")
        val, witness = _brute(M)
        val /= n**2
        return CutNormEstimate(val, val, val, "BruteForce", witness)
    if mode not in ("auto", "heuristic"):
        raise ValueError(f"unknown cut norm mode {mode!r}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    rng = np.random.default_rng(seed)
    starts = (rng.random((restarts, n)) < 0.5).astype(float)
    # deterministic extra start: the full index set
    starts = np.vstack([np.ones(n), starts])
    val, witness = _ascent(M, starts)
    return CutNormEstimate(val / n**2, upper_l1, None, "AlternatingHeuristic", witness)


def _pm_brute(M):
    n = M.shape[0]
    colsum = M.sum(axis=0)
    best, best_f = 0.0, np.ones(n)
    total = 1 << (n - 1)
    step = 1 << min(n - 1, _CHUNK_BITS)
    for start in range(0, total, step):
        # bit k of the mask sets f_{k+1} = +1; f_0 is fixed to +1 (f and -f agree)
        B = _bit_rows(start, min(start + step, total), n - 1)
        F = np.hstack([np.ones((len(B), 1)), 2 * B - 1])
        vals = np.abs(F @ M).sum(axis=1)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, best_f = float(vals[k]), F[k]
    return best, (best_f, np.where(best_f @ M >= 0, 1.0, -1.0))


def cutnorm_2(M, mode: str = "auto", restarts: int = DEFAULT_RESTARTS, seed: int = 0) -> CutNormEstimate:
    """sup over f, g in [-1, 1]^n of |f^T M g| / n^2.

    The bilinear form is maximized at sign vectors, so the exact value
    enumerates f in {+-1}^n and takes g = sign(M^T f). The upper bound is
    4 times the cut-norm upper bound.
    """
    M = _as_square(M)
    n = M.shape[0]
    mode = mode.lower()
    cut = cutnorm(M, mode=mode, restarts=restarts, seed=seed)
    upper = 4.0 * cut.upper
    if not np.any(M):
        return CutNormEstimate(0.0, upper, 0.0 if cut.exact is not None else None, cut.method)
    if cut.exact is not None:
        val, witness = _pm_brute(M)
        val /= n**2
        return CutNormEstimate(val, max(val, upper), val, "BruteForce", witness)

    rng = np.random.default_rng(seed + 1)
    S, T = cut.witness
    sgn = 1.0 if S.astype(float) @ M @ T.astype(float) >= 0 else -1.0
    F = np.vstack([sgn * S.astype(float), np.where(rng.random((restarts, n)) < 0.5, 1.0, -1.0)])
    best, witness = 0.0, None
    prev = None
    for _ in range(10 * n + 10):
        G = np.where(F @ M >= 0, 1.0, -1.0)
        F = np.where(G @ M.T >= 0, 1.0, -1.0)
        key = F.tobytes()
        if key == prev:
            break
        prev = key
    G = np.where(F @ M >= 0, 1.0, -1.0)
    vals = np.einsum("ri,ij,rj->r", F, M, G)
    k = int(np.argmax(vals))
    best, witness = float(vals[k]) / n**2, (F[k], G[k])
    # ascent from the indicator witness can only improve on the cut value
    best = max(best, cut.lower)
    return CutNormEstimate(best, upper, None, "AlternatingHeuristic", witness)

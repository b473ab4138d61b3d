"""Geometric condition on unit weight directions, with certificates.

The condition asks whether the origin lies strictly inside the convex hull of
the normalized directions, equivalently whether no closed hemisphere contains
all of them.  The primary checker poses it as a linear program
(max epsilon s.t. sum lambda_j dir_j = 0, sum lambda_j = 1, lambda_j >= epsilon)
solved by the in-repo simplex, plus a span-rank guard: a positive optimum only
certifies the relative interior, so direction sets that do not span the space
are reported degenerate rather than holding.

Every non-degenerate answer carries a checkable witness: hull coefficients
for "holds", a unit separator with nonnegative dots for "fails".
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .core import Rng
from .simplex import solve_equality_lp

__all__ = [
    "DirectionSet",
    "GcCertificate",
    "gc_check",
    "gc_check_2d",
    "verify_certificate",
    "gc_probability",
    "gc_probability_mc",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class DirectionSet:
    """Unit direction rows (k, d) plus bookkeeping of dropped near-zero columns."""

    dirs: np.ndarray
    source_indices: tuple[int, ...] = ()
    dropped: tuple[int, ...] = ()

    def __post_init__(self):
        dirs = np.array(self.dirs, dtype=float, copy=True)
        if dirs.ndim != 2 or dirs.shape[0] == 0:
            raise ValueError("need at least one direction")
        norms = np.linalg.norm(dirs, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-12:
            raise ValueError("directions must be unit vectors to 1e-12")
        dirs.flags.writeable = False
        object.__setattr__(self, "dirs", dirs)
        if not self.source_indices:
            object.__setattr__(self, "source_indices", tuple(range(dirs.shape[0])))

    @property
    def k(self) -> int:
        return self.dirs.shape[0]

    @property
    def d(self) -> int:
        return self.dirs.shape[1]

    @classmethod
    def from_weight_matrix(cls, W: np.ndarray, columns=None, drop_tol: float = 1e-12) -> "DirectionSet":
        """Normalize the chosen columns of W; columns with norm <= drop_tol are dropped."""
        W = np.asarray(W, dtype=float)
        cols = np.arange(W.shape[1]) if columns is None else np.asarray(columns, dtype=int)
        norms = np.linalg.norm(W[:, cols], axis=0)
        keep = norms > drop_tol
        if not np.any(keep):
            raise ValueError("every selected column is numerically zero")
        dirs = (W[:, cols[keep]] / norms[keep]).T
        return cls(
            dirs=dirs,
            source_indices=tuple(int(c) for c in cols[keep]),
            dropped=tuple(int(c) for c in cols[~keep]),
        )


@dataclass(frozen=True)
class GcCertificate:
    """Verdict plus witness.  margin is the LP optimum (None if the program
    was infeasible, i.e. the origin is not even in the affine hull)."""

    verdict: str  # "holds" | "fails" | "degenerate"
    margin: float | None
    tol: float
    hull_coeffs: np.ndarray | None = None
    separator: np.ndarray | None = None


def _separator_from_dual(y: np.ndarray, d: int) -> np.ndarray:
    head = y[:d]
    norm = np.linalg.norm(head)
    if norm == 0.0:
        raise RuntimeError("degenerate dual vector cannot separate")
    return -head / norm


def gc_check(ds: DirectionSet, tol: float = 1e-9) -> GcCertificate:
    D = ds.dirs.T  # (d, k)
    d, k = D.shape
    s = D.sum(axis=1)
    A = np.zeros((d + 1, k + 2))
    A[:d, :k] = D
    A[:d, k] = s
    A[:d, k + 1] = -s
    A[d, :k] = 1.0
    A[d, k] = k
    A[d, k + 1] = -k
    b = np.zeros(d + 1)
    b[d] = 1.0
    c = np.zeros(k + 2)
    c[k] = -1.0
    c[k + 1] = 1.0

    res = solve_equality_lp(c, A, b, tol=min(tol, 1e-9))
    if res.status == "infeasible":
        return GcCertificate(
            verdict="fails",
            margin=None,
            tol=tol,
            separator=_separator_from_dual(res.farkas, d),
        )
    if res.status != "optimal":
        raise RuntimeError(f"unexpected LP status {res.status}")
    eps = -res.objective
    if eps > tol:
        if np.linalg.matrix_rank(D) < d:
            return GcCertificate(verdict="degenerate", margin=eps, tol=tol)
        lam = res.x[:k] + eps
        return GcCertificate(verdict="holds", margin=eps, tol=tol, hull_coeffs=lam)
    if eps < -tol:
        return GcCertificate(
            verdict="fails",
            margin=eps,
            tol=tol,
            separator=_separator_from_dual(res.dual, d),
        )
    return GcCertificate(verdict="degenerate", margin=eps, tol=tol)


def gc_check_2d(ds: DirectionSet, tol: float = 1e-9) -> GcCertificate:
    """Planar oracle: the condition holds exactly when the largest angular gap
    between consecutive directions is below pi.  Witnesses come from elementary
    constructions, independent of the linear-programming path."""
    if ds.d != 2:
        raise ValueError(f"planar checker needs d = 2, got d = {ds.d}")
    ang = np.sort(np.arctan2(ds.dirs[:, 1], ds.dirs[:, 0]) % _TWO_PI)
    k = ang.size
    gaps = np.empty(k)
    gaps[: k - 1] = np.diff(ang)
    gaps[k - 1] = ang[0] + _TWO_PI - ang[k - 1]
    g = int(np.argmax(gaps))
    max_gap = float(gaps[g])
    margin = math.pi - max_gap  # same sign convention as the LP: positive means holds

    if max_gap > math.pi + tol:
        start = ang[(g + 1) % k]
        mid = start + (_TWO_PI - max_gap) / 2.0
        sep = np.array([math.cos(mid), math.sin(mid)])
        return GcCertificate(verdict="fails", margin=margin, tol=tol, separator=sep)
    if max_gap >= math.pi - tol:
        return GcCertificate(verdict="degenerate", margin=margin, tol=tol)

    # Holds: write -dir_0 as a nonnegative combination of the two directions
    # whose wedge contains it, giving dir_0 + a*dir_p + b*dir_q = 0.
    order = np.argsort(np.arctan2(ds.dirs[:, 1], ds.dirs[:, 0]) % _TWO_PI)
    first = ds.dirs[order[0]]
    target = (math.atan2(first[1], first[0]) + math.pi) % _TWO_PI
    pos = int(np.searchsorted(ang, target))
    lo, hi = (pos - 1) % k, pos % k
    P = np.column_stack([ds.dirs[order[lo]], ds.dirs[order[hi]]])
    ab = np.linalg.solve(P, -first)
    ab = np.maximum(ab, 0.0)  # clear fp noise; the wedge guarantees nonnegativity
    lam = np.zeros(k)
    lam[order[0]] += 1.0
    lam[order[lo]] += ab[0]
    lam[order[hi]] += ab[1]
    lam /= lam.sum()
    return GcCertificate(verdict="holds", margin=margin, tol=tol, hull_coeffs=lam)


def verify_certificate(ds: DirectionSet, cert: GcCertificate, tol: float | None = None) -> bool:
    """Recheck a certificate against its direction set from scratch."""
    tol = cert.tol if tol is None else tol
    if cert.verdict == "holds":
        lam = cert.hull_coeffs
        if lam is None or lam.shape != (ds.k,):
            return False
        if np.any(lam < -tol):
            return False
        if abs(float(lam.sum()) - 1.0) > max(tol, 1e-9):
            return False
        return float(np.linalg.norm(lam @ ds.dirs)) <= max(tol, 1e-9)
    if cert.verdict == "fails":
        n = cert.separator
        if n is None or n.shape != (ds.d,):
            return False
        if abs(float(np.linalg.norm(n)) - 1.0) > max(tol, 1e-9):
            return False
        return float((ds.dirs @ n).min()) >= -tol
    return cert.hull_coeffs is None and cert.separator is None


def gc_probability(d: int, k: int) -> float:
    """Closed-form probability that k symmetric random directions in R^d satisfy
    the condition: 2^(1-k) * sum_{j=d}^{k-1} C(k-1, j).  Exact big-int arithmetic."""
    if d < 1 or k < 1:
        raise ValueError(f"need d >= 1 and k >= 1, got d={d}, k={k}")
    total = sum(math.comb(k - 1, j) for j in range(d, k))
    return float(Fraction(total, 2 ** (k - 1)))


def _det_batch(M: np.ndarray) -> np.ndarray:
    m = M.shape[-1]
    if m == 1:
        return M[..., 0, 0]
    if m == 2:
        return M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]
    if m == 3:
        return (
            M[..., 0, 0] * (M[..., 1, 1] * M[..., 2, 2] - M[..., 1, 2] * M[..., 2, 1])
            - M[..., 0, 1] * (M[..., 1, 0] * M[..., 2, 2] - M[..., 1, 2] * M[..., 2, 0])
            + M[..., 0, 2] * (M[..., 1, 0] * M[..., 2, 1] - M[..., 1, 1] * M[..., 2, 0])
        )
    return np.linalg.det(M)


def _null_vectors(sub: np.ndarray) -> np.ndarray:
    """Common orthogonal vector of d-1 directions in R^d, by cofactor expansion."""
    T, m, d = sub.shape
    out = np.empty((T, d))
    for c in range(d):
        minor = np.delete(sub, c, axis=2)
        out[:, c] = (-1.0) ** c * _det_batch(minor)
    return out


def gc_holds_batch(dirs: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Vectorized exact check for a (T, k, d) stack of unit-direction sets.

    Exact for directions in general position (an almost-sure event for the
    samplers here): a covering closed hemisphere, when one exists, can be
    taken orthogonal to some d-1 of the directions, so testing every such
    subset normal in both orientations decides the condition.
    """
    if dirs.ndim != 3:
        raise ValueError("need a (T, k, d) array")
    T, k, d = dirs.shape
    if k <= d:
        return np.zeros(T, dtype=bool)
    if d == 1:
        x = dirs[:, :, 0]
        return np.any(x > 0.0, axis=1) & np.any(x < 0.0, axis=1)
    if d == 2:
        ang = np.sort(np.arctan2(dirs[:, :, 1], dirs[:, :, 0]), axis=1)
        gaps = np.diff(ang, axis=1)
        wrap = ang[:, 0] + _TWO_PI - ang[:, -1]
        max_gap = np.maximum(gaps.max(axis=1), wrap)
        return max_gap < math.pi
    holds = np.ones(T, dtype=bool)
    for subset in combinations(range(k), d - 1):
        live = np.flatnonzero(holds)
        if live.size == 0:
            break
        normal = _null_vectors(dirs[live][:, subset, :])
        dots = np.einsum("tkd,td->tk", dirs[live], normal)
        covered = np.all(dots >= -tol, axis=1) | np.all(dots <= tol, axis=1)
        holds[live[covered]] = False
    return holds


def gc_probability_mc(
    d: int, k: int, trials: int, rng: Rng, chunk: int = 32768
) -> tuple[float, float]:
    """Monte Carlo estimate and its standard error over `trials` direction sets.

    Directions are normalized Gaussian draws; each set is judged by the
    vectorized exact checker, which agrees with gc_check almost surely.
    """
    if d < 1 or k < 1:
        raise ValueError(f"need d >= 1 and k >= 1, got d={d}, k={k}")
    if trials < 1:
        raise ValueError("trials must be positive")
    count = 0
    done = 0
    while done < trials:
        t = min(chunk, trials - done)
        raw = rng.normal((t, k, d))
        norms = np.linalg.norm(raw, axis=2)
        norms[norms == 0.0] = 1.0
        count += int(gc_holds_batch(raw / norms[:, :, None]).sum())
        done += t
    est = count / trials
    return est, math.sqrt(est * (1.0 - est) / trials)

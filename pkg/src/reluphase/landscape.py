"""Loss-landscape operations: constructive global minima, critical-point audits,
and an empirical Lipschitz modulus for the bias-mode loss.

The constructive minimum places a class's owner units on a scaled regular
simplex so every sample of that class wins each hinge comparison with margin
to spare; all margins are then strictly inactive, so the loss and the exact
subgradient both vanish identically.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import NetworkParams, OutputMap, Rng, forward_batch
from .datagen import LabeledDataset
from .losses import dataset_loss, subgradient
from .training import weight_matrix_norm

__all__ = [
    "LandscapeAudit",
    "LipschitzReport",
    "regular_simplex_vertices",
    "construct_zero_loss",
    "critical_point_audit",
    "lipschitz_estimate",
]


def regular_simplex_vertices(d: int) -> np.ndarray:
    """(d+1, d) unit vectors forming a regular simplex centered at the origin.

    Built from e_i - centroid in R^(d+1), expressed in an orthonormal basis of
    the hyperplane orthogonal to the all-ones vector, then normalized.  The
    inradius of their convex hull is 1/d, so every unit direction has some
    vertex with inner product at least 1/d.
    """
    if d < 1:
        raise ValueError("simplex dimension must be at least 1")
    eye = np.eye(d + 1)
    span = eye[:, 1:] - eye[:, :1]  # columns span the ones-orthogonal hyperplane
    q, _ = np.linalg.qr(span)
    centered = eye - np.full((d + 1, d + 1), 1.0 / (d + 1))
    verts = centered @ q
    return verts / np.linalg.norm(verts, axis=1, keepdims=True)


def construct_zero_loss(
    output_map: OutputMap,
    class_label: int,
    subspace_dim: int,
    data_min: float,
    biases: np.ndarray | None = None,
) -> np.ndarray:
    """Weight matrix (subspace_dim, k) with exactly zero loss on any dataset of
    the given class whose sample norms are at least data_min.

    Owner units sit on regular-simplex vertices scaled so the best activation
    beats 1/(2v) plus the largest owner bias with a 1% margin; with the fixed
    +-v output map that drives every hinge margin strictly negative.  All
    other units are zero and, with nonnegative biases, strictly inactive, so
    the subgradient vanishes too.
    """
    owners = output_map.owner_columns(class_label)
    if owners.size == 0:
        raise ValueError(f"class {class_label} owns no hidden units")
    if owners.size < subspace_dim + 1:
        raise ValueError(
            f"zero-loss construction needs at least subspace_dim + 1 = {subspace_dim + 1} "
            f"owner units, class {class_label} has {owners.size}"
        )
    if not (data_min > 0.0):
        raise ValueError("data_min must be positive")
    k = output_map.k
    if biases is None:
        biases = np.zeros(k)
    biases = np.asarray(biases, dtype=float)
    if biases.shape != (k,) or np.any(biases < 0.0):
        raise ValueError("biases must be a nonnegative (k,) vector")

    bias_max = float(biases[owners].max())
    radius = 1.01 * subspace_dim * (1.0 / (2.0 * output_map.v) + bias_max) / data_min
    verts = regular_simplex_vertices(subspace_dim)
    W = np.zeros((subspace_dim, k))
    for i, col in enumerate(owners):
        W[:, col] = radius * verts[i % (subspace_dim + 1)]
    return W


@dataclass(frozen=True)
class LandscapeAudit:
    """Outcome of probing one weight state against one dataset."""

    verdict: str  # "global_min" | "not_critical" | "degenerate_zero_output"
    grad_norm: float
    loss: float
    nonzero_output_witness: int | None
    eps_critical: float
    loss_tolerance: float

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "grad_norm": self.grad_norm,
            "loss": self.loss,
            "nonzero_output_witness": self.nonzero_output_witness,
            "eps_critical": self.eps_critical,
            "loss_tolerance": self.loss_tolerance,
        }


def critical_point_audit(
    params: NetworkParams,
    data: LabeledDataset,
    eps_critical: float = 1e-8,
    loss_tolerance: float = 1e-8,
) -> LandscapeAudit:
    """Classify a weight state: near-critical with a live output means global minimum.

    A network that outputs exactly zero on every sample is flat but useless;
    that case is reported separately so it is never mistaken for optimality.
    """
    F, _ = forward_batch(params, data.X)
    live_rows = np.flatnonzero(np.any(F != 0.0, axis=1))
    witness = int(live_rows[0]) if live_rows.size else None
    grad_norm = weight_matrix_norm(subgradient(params, data))
    loss = dataset_loss(params, data)
    if witness is None:
        verdict = "degenerate_zero_output"
    elif grad_norm <= eps_critical and loss <= loss_tolerance:
        verdict = "global_min"
    else:
        verdict = "not_critical"
    return LandscapeAudit(
        verdict=verdict,
        grad_norm=grad_norm,
        loss=loss,
        nonzero_output_witness=witness,
        eps_critical=eps_critical,
        loss_tolerance=loss_tolerance,
    )


@dataclass(frozen=True)
class LipschitzReport:
    max_ratio: float
    mean_ratio: float
    pairs_used: int
    skipped: int
    hist_counts: tuple[int, ...]
    hist_edges: tuple[float, ...]

    def to_json_dict(self) -> dict:
        return {
            "max_ratio": self.max_ratio,
            "mean_ratio": self.mean_ratio,
            "pairs_used": self.pairs_used,
            "skipped": self.skipped,
            "hist_counts": list(self.hist_counts),
            "hist_edges": list(self.hist_edges),
        }


def lipschitz_estimate(
    sampler: Callable[[Rng], NetworkParams],
    data: LabeledDataset,
    pairs: int,
    rng: Rng,
    bins: int = 32,
    skip_tol: float = 1e-14,
) -> LipschitzReport:
    """Empirical modulus max |l(W1) - l(W2)| / |W1 - W2| over sampled weight pairs.

    Only bias-mode states are accepted: without biases the loss is positively
    homogeneous and the ratio is unbounded, so the diagnostic would be
    meaningless there.  Pairs closer than skip_tol in weight norm are skipped.
    """
    if pairs < 1:
        raise ValueError("pairs must be positive")
    ratios = np.empty(pairs)
    used = 0
    skipped = 0
    for _ in range(pairs):
        p1 = sampler(rng)
        p2 = sampler(rng)
        if p1.mode != "bias" or p2.mode != "bias":
            raise ValueError(
                "lipschitz_estimate refuses no-bias states: the no-bias loss has no finite modulus"
            )
        gap = weight_matrix_norm(p1.weights - p2.weights)
        if gap < skip_tol:
            skipped += 1
            continue
        ratios[used] = abs(dataset_loss(p1, data) - dataset_loss(p2, data)) / gap
        used += 1
    if used == 0:
        raise ValueError("every sampled pair was coincident; nothing to estimate")
    ratios = ratios[:used]
    counts, edges = np.histogram(ratios, bins=bins)
    return LipschitzReport(
        max_ratio=float(ratios.max()),
        mean_ratio=float(ratios.mean()),
        pairs_used=used,
        skipped=skipped,
        hist_counts=tuple(int(c) for c in counts),
        hist_edges=tuple(float(e) for e in edges),
    )

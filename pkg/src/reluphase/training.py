"""Deterministic full-batch subgradient descent on the hidden-layer weights.

Exact stopping semantics: the loop evaluates loss and subgradient at the
current state W^t before stepping, so "converged" means the recorded state
itself meets the stop threshold, and a run that starts at a flat point is
reported as such instead of looping.  Biases and the output map are never
updated.  The matrix norm used throughout is the sum of column norms.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import NetworkParams
from .datagen import LabeledDataset
from .losses import batch_loss_grad, subgradient, _select

__all__ = [
    "TrainConfig",
    "TrajectoryRecord",
    "TrainResult",
    "gd_step",
    "train",
    "iterations_to_convergence",
    "weight_matrix_norm",
]


def weight_matrix_norm(W: np.ndarray) -> float:
    """Sum of Euclidean column norms, the matrix size measure used everywhere here."""
    return float(np.linalg.norm(W, axis=0).sum())


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for one run.  train_classes None trains on every sample."""

    eta: float
    max_iters: int
    stop_loss: float = 0.0
    record_every: int = 1
    seed: int = 0
    train_classes: tuple[int, ...] | None = None
    r_max: float = 1e3
    keep_weights: bool = True

    def __post_init__(self):
        if not (np.isfinite(self.eta) and self.eta > 0.0):
            raise ValueError(f"eta must be positive and finite, got {self.eta}")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")
        if self.stop_loss < 0.0:
            raise ValueError("stop_loss must be nonnegative")
        if not (self.r_max > 0.0):
            raise ValueError("r_max must be positive")
        if self.train_classes is not None:
            tc = tuple(int(c) for c in self.train_classes)
            if len(tc) == 0 or any(c < 1 for c in tc) or len(set(tc)) != len(tc):
                raise ValueError("train_classes must be distinct labels >= 1")
            object.__setattr__(self, "train_classes", tc)


@dataclass
class TrajectoryRecord:
    """State of the run at iteration t, measured before any step is taken.

    loss is the trained objective (mean over the selected samples);
    loss_per_class covers every class present in the dataset.  gc_flags is
    filled in later by phase detection, one flag per trained class.
    """

    t: int
    loss: float
    loss_per_class: dict[int, float]
    neuron_norms: np.ndarray
    weight_norm: float
    grad_norm: float
    gc_flags: dict[int, bool] | None = None


@dataclass
class TrainResult:
    params: NetworkParams
    records: list[TrajectoryRecord]
    weights: list[np.ndarray] | None
    stop_reason: str  # converged | dead_start | stalled | max_iters
    converged_at: int | None
    max_weight_norm: float
    diverged: bool
    config: TrainConfig
    data_labels: tuple[int, ...] = field(default_factory=tuple)

    @property
    def trained_classes(self) -> tuple[int, ...]:
        return self.config.train_classes if self.config.train_classes is not None else self.data_labels


def gd_step(params: NetworkParams, data: LabeledDataset, eta: float, classes=None) -> NetworkParams:
    """One descent step W - eta * subgradient; eta = 0 returns the state unchanged."""
    if not (np.isfinite(eta) and eta >= 0.0):
        raise ValueError(f"step size must be finite and nonnegative, got {eta}")
    grad = subgradient(params, data, classes)
    return params.with_weights(params.weights - eta * grad)


def _check_activation(params: NetworkParams, data: LabeledDataset, classes) -> list[int]:
    """Classes whose owner units see no sample with |<w_j, x>| > b_j at init."""
    silent = []
    for label in classes:
        cols = params.output.owner_columns(label)
        rows = data.indices_for(label)
        if cols.size == 0 or rows.size == 0:
            continue
        dots = np.abs(data.X[rows] @ params.weights[:, cols])
        if not np.any(dots > params.biases[cols]):
            silent.append(label)
    return silent


def train(params: NetworkParams, data: LabeledDataset, config: TrainConfig) -> TrainResult:
    rows = _select(data, config.train_classes)
    trained = config.train_classes if config.train_classes is not None else data.labels
    class_rows = {label: data.indices_for(label) for label in data.labels}

    silent = _check_activation(params, data, trained)
    if silent:
        warnings.warn(
            f"initial weights activate no owner unit on any sample of classes {silent}; "
            "those classes cannot start learning",
            RuntimeWarning,
        )

    W = np.array(params.weights, dtype=float, copy=True)
    b, values = params.biases, params.output.values
    X, y0 = data.X, data.y - 1

    records: list[TrajectoryRecord] = []
    weights: list[np.ndarray] | None = [] if config.keep_weights else None
    max_norm = 0.0
    converged_at: int | None = None
    last_recorded = -1

    def record(t, loss, losses, grad):
        nonlocal last_recorded
        if t == last_recorded:
            return
        per_class = {label: float(losses[idx].mean()) for label, idx in class_rows.items()}
        col_norms = np.linalg.norm(W, axis=0)
        records.append(
            TrajectoryRecord(
                t=t,
                loss=loss,
                loss_per_class=per_class,
                neuron_norms=col_norms,
                weight_norm=float(col_norms.sum()),
                grad_norm=weight_matrix_norm(grad),
            )
        )
        if weights is not None:
            weights.append(W.copy())
        last_recorded = t

    t = 0
    stop_reason = "max_iters"
    while True:
        loss, losses, grad = batch_loss_grad(W, b, values, X, y0, rows)
        if not np.all(np.isfinite(grad)) or not np.isfinite(loss):
            raise RuntimeError(
                f"non-finite loss or gradient at iteration {t}; weight norm "
                f"{weight_matrix_norm(W)} suggests divergence (step size too large?)"
            )
        max_norm = max(max_norm, weight_matrix_norm(W))
        due = t % config.record_every == 0
        if loss <= config.stop_loss:
            record(t, loss, losses, grad)
            stop_reason = "converged"
            converged_at = t
            break
        if not grad.any():
            record(t, loss, losses, grad)
            stop_reason = "dead_start" if t == 0 else "stalled"
            break
        if t == config.max_iters:
            record(t, loss, losses, grad)
            stop_reason = "max_iters"
            break
        if due:
            record(t, loss, losses, grad)
        W = W - config.eta * grad
        t += 1

    final = params.with_weights(W)
    return TrainResult(
        params=final,
        records=records,
        weights=weights,
        stop_reason=stop_reason,
        converged_at=converged_at,
        max_weight_norm=max_norm,
        diverged=max_norm > config.r_max,
        config=config,
        data_labels=data.labels,
    )


def iterations_to_convergence(records: list[TrajectoryRecord], threshold: float = 0.0) -> int | None:
    """First recorded iteration whose objective is at or below the threshold."""
    for rec in records:
        if rec.loss <= threshold:
            return rec.t
    return None

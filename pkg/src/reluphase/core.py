"""Core model: deterministic RNG, fixed output maps, network parameters, forward passes.

The classifier is a two-layer network with k hidden ReLU units and a fixed
output layer.  Hidden unit j computes sigma(<w_j, x> - b_j); the score of
class i is a signed sum of the hidden activations with coefficients +-v.
Only the hidden-layer weight matrix W is ever trained; the biases b and the
output map V stay fixed for the lifetime of a model.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Rng",
    "OutputMap",
    "NetworkParams",
    "build_output_map",
    "validate_output_map",
    "network_params",
    "forward",
    "forward_batch",
    "forward_binary",
    "predict",
    "predict_batch",
    "predict_binary",
]


class Rng:
    """Deterministic random source with named child streams.

    Uniforms come straight from a PCG64 generator.  Gaussians are produced
    by an explicit Box-Muller transform on those uniforms so the exact
    sampling algorithm is pinned down in-repo and cannot drift with library
    internals: draw u1 in (0, 1], u2 in [0, 1), set r = sqrt(-2 ln u1) and
    emit r*cos(2 pi u2), r*sin(2 pi u2).

    Child streams are derived through SeedSequence spawn keys, so
    ``Rng(seed).child(i)`` is reproducible and independent of how many draws
    the parent has made.
    """

    def __init__(self, seed: int, stream: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.stream = tuple(int(s) for s in stream)
        seq = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def child(self, index: int) -> "Rng":
        """Independent substream; same (seed, stream, index) -> same draws."""
        return Rng(self.seed, self.stream + (int(index),))

    def uniform(self, size=None) -> np.ndarray | float:
        """Uniform draws on [0, 1)."""
        return self._gen.random(size)

    def normal(self, size=None) -> np.ndarray | float:
        """Standard normal draws via Box-Muller pairs (C-order fill)."""
        if size is None:
            shape: tuple[int, ...] = ()
            count = 1
        elif np.isscalar(size):
            shape = (int(size),)
            count = int(size)
        else:
            shape = tuple(int(s) for s in size)
            count = int(np.prod(shape)) if shape else 1
        pairs = (count + 1) // 2
        # 1 - U keeps u1 in (0, 1] so the log stays finite.
        u1 = 1.0 - self._gen.random(pairs)
        u2 = self._gen.random(pairs)
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * np.pi * u2
        z = np.empty(2 * pairs)
        z[0::2] = radius * np.cos(angle)
        z[1::2] = radius * np.sin(angle)
        out = z[:count].reshape(shape)
        return float(out) if size is None else out


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class OutputMap:
    """Fixed output layer: values[i, j] = +v when class i owns unit j, else -v."""

    values: np.ndarray  # (n, k)
    v: float
    owner: np.ndarray  # (k,) owning class per hidden unit, labels 1..n

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]

    def owner_columns(self, label: int) -> np.ndarray:
        """Indices of the hidden units owned by the given class label."""
        return np.flatnonzero(self.owner == label)


def build_output_map(n: int, k: int, v: float) -> OutputMap:
    """Round-robin output map: unit j is owned by class (j mod n) + 1."""
    if n < 2:
        raise ValueError(f"output map needs at least two classes, got n={n}")
    if k < n:
        raise ValueError(f"output map needs k >= n so every class owns a unit, got k={k} < n={n}")
    if not (v > 0.0):
        raise ValueError(f"output magnitude v must be positive, got v={v}")
    owner = np.arange(k) % n + 1
    values = np.where(owner[None, :] == np.arange(1, n + 1)[:, None], v, -v)
    out = OutputMap(values=_frozen(values), v=float(v), owner=_frozen(owner).astype(int))
    validate_output_map(out)
    return out


def validate_output_map(m: OutputMap) -> None:
    """Check the structural contract on the raw matrix, independent of builder.

    Every class owns at least one unit; a positive entry in a column forces
    every other entry of that column negative (single owner); all entries
    have magnitude exactly v.
    """
    values = np.asarray(m.values, dtype=float)
    if values.ndim != 2:
        raise ValueError("output map values must be a 2-d array")
    n, k = values.shape
    if not np.all(np.abs(np.abs(values) - m.v) == 0.0):
        raise ValueError("output map entries must all have magnitude exactly v")
    pos = values > 0
    if not np.all(pos.sum(axis=0) == 1):
        raise ValueError("each hidden unit must have exactly one positive (owner) class")
    if not np.all(pos.any(axis=1)):
        raise ValueError("every class must own at least one hidden unit")
    owner = pos.argmax(axis=0) + 1
    if not np.array_equal(owner, np.asarray(m.owner)):
        raise ValueError("owner labels disagree with the sign pattern of values")


@dataclass(frozen=True)
class NetworkParams:
    """Immutable snapshot of the full model state.

    weights: (d, k), column j is hidden unit j.  biases: (k,) nonnegative.
    mode is "no-bias" (all biases zero, the positively homogeneous case) or
    "bias" (0 < sum of biases < 1).
    """

    weights: np.ndarray
    biases: np.ndarray
    output: OutputMap
    mode: str

    def __post_init__(self):
        w = _frozen(self.weights)
        b = _frozen(self.biases)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "biases", b)
        if w.ndim != 2:
            raise ValueError("weights must be a (d, k) array")
        if b.shape != (w.shape[1],):
            raise ValueError(f"biases must have shape (k,)={w.shape[1:]}, got {b.shape}")
        if w.shape[1] != self.output.k:
            raise ValueError(f"weights have {w.shape[1]} units but output map has {self.output.k}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if not np.all(np.isfinite(b)) or np.any(b < 0):
            raise ValueError("biases must be finite and nonnegative")
        if self.mode == "no-bias":
            if np.any(b != 0.0):
                raise ValueError("no-bias mode requires every bias to be exactly zero")
        elif self.mode == "bias":
            total = float(b.sum())
            if not (0.0 < total < 1.0):
                raise ValueError(f"bias mode requires 0 < sum(biases) < 1, got {total}")
        else:
            raise ValueError(f"mode must be 'bias' or 'no-bias', got {self.mode!r}")
        validate_output_map(self.output)

    @property
    def d(self) -> int:
        return self.weights.shape[0]

    @property
    def k(self) -> int:
        return self.weights.shape[1]

    @property
    def n(self) -> int:
        return self.output.n

    def with_weights(self, weights: np.ndarray) -> "NetworkParams":
        return NetworkParams(weights=weights, biases=self.biases, output=self.output, mode=self.mode)


def network_params(weights: np.ndarray, output: OutputMap, biases=None) -> NetworkParams:
    """Build params, inferring the mode: absent or all-zero biases -> no-bias."""
    weights = np.asarray(weights, dtype=float)
    if biases is None:
        biases = np.zeros(weights.shape[1])
    biases = np.asarray(biases, dtype=float)
    mode = "no-bias" if np.all(biases == 0.0) else "bias"
    return NetworkParams(weights=weights, biases=biases, output=output, mode=mode)


def forward(params: NetworkParams, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scores and pre-activations for one input: (scores (n,), pre (k,))."""
    pre = params.weights.T @ np.asarray(x, dtype=float) - params.biases
    scores = params.output.values @ np.maximum(pre, 0.0)
    return scores, pre


def forward_batch(params: NetworkParams, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched scores and pre-activations: (F (N, n), H (N, k))."""
    H = np.asarray(X, dtype=float) @ params.weights - params.biases
    F = np.maximum(H, 0.0) @ params.output.values.T
    return F, H


def predict(params: NetworkParams, x: np.ndarray) -> int:
    """Predicted label 1..n; ties resolve to the lowest class index."""
    scores, _ = forward(params, x)
    return int(np.argmax(scores)) + 1


def predict_batch(params: NetworkParams, X: np.ndarray) -> np.ndarray:
    F, _ = forward_batch(params, X)
    return np.argmax(F, axis=1) + 1


def forward_binary(params: NetworkParams, x: np.ndarray) -> float:
    """Two-class scalar score: sum of class-1-owned activations minus class-2-owned.

    Equals (score_1 - score_2) / (2 v); computed directly from the owner
    mask so it stays a genuinely independent path.
    """
    if params.n != 2:
        raise ValueError(f"binary forward needs exactly 2 classes, got n={params.n}")
    _, pre = forward(params, x)
    act = np.maximum(pre, 0.0)
    own1 = params.output.owner == 1
    return float(act[own1].sum() - act[~own1].sum())


def predict_binary(params: NetworkParams, x: np.ndarray) -> int:
    """Label by the sign of the scalar score; a score of exactly 0 -> class 2."""
    return 1 if forward_binary(params, x) > 0.0 else 2

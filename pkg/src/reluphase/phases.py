"""Slow/fast phase detection and the matching theoretical bound calculators.

Training splits into the iterations before the geometric condition first
holds on a class's owner directions (the slow phase T1) and the iterations
after (the fast phase T2).  The calculators bound, from distribution-level
constants alone: the per-class gradient magnitude (cp_upper_bound), the
probability mass of the spherical cap any unit direction keeps activated
(p_r_lower_bound), the length of the slow phase (t1_bound), and the summed
squared class losses over the fast phase (phase2_sum_bound).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .geometry import DirectionSet, gc_check
from .training import TrainResult

__all__ = [
    "BoundInputs",
    "PhaseReport",
    "NormViolation",
    "sphere_area",
    "cp_upper_bound",
    "p_r_lower_bound",
    "t1_bound",
    "phase2_sum_bound",
    "monotonicity_step_threshold",
    "detect_phases",
    "monotonicity_audit",
    "owner_norm_violations",
    "nonowner_norm_violations",
]


@dataclass(frozen=True)
class BoundInputs:
    """Distribution- and run-level constants feeding the bound calculators.

    radius is a bound on the weight matrix norm along the run (measured, or
    assumed); data_min/data_max bound sample norms inside the class subspace;
    density_min/density_max bound the sampling density there.
    """

    v: float
    eta: float
    radius: float
    data_min: float
    data_max: float
    density_min: float
    density_max: float
    subspace_dim: int
    n_classes: int

    def __post_init__(self):
        for name in ("v", "eta", "radius", "data_max", "density_max"):
            if not (getattr(self, name) > 0.0 and math.isfinite(getattr(self, name))):
                raise ValueError(f"{name} must be positive and finite")
        if not (0.0 < self.data_min <= self.data_max):
            raise ValueError("need 0 < data_min <= data_max")
        if not (0.0 <= self.density_min <= self.density_max):
            raise ValueError("need 0 <= density_min <= density_max")
        if self.subspace_dim < 1:
            raise ValueError("subspace_dim must be at least 1")
        if self.n_classes < 2:
            raise ValueError("n_classes must be at least 2")


def sphere_area(m: int) -> float:
    """Surface area of the unit m-sphere: 2 pi^((m+1)/2) / Gamma((m+1)/2)."""
    if m < 0:
        raise ValueError("sphere dimension must be nonnegative")
    return 2.0 * math.pi ** ((m + 1) / 2.0) / math.gamma((m + 1) / 2.0)


def cp_upper_bound(bi: BoundInputs) -> float:
    """Upper bound on any per-class gradient coefficient: data_max^(dim-1) * density_max."""
    return bi.data_max ** (bi.subspace_dim - 1) * bi.density_max


def p_r_lower_bound(bi: BoundInputs) -> float:
    """Lower bound on the activated-cap mass for unit directions at radius R.

    With sin(beta) = 1 / (2 v data_max radius), the bound is
    density_min * (|S^(dim-2)| / |S^(dim-1)|) * integral_0^beta sin(t)^(dim-2) dt,
    requiring beta < pi/2, i.e. 2 v data_max radius > 1.
    """
    if bi.subspace_dim < 2:
        raise ValueError("cap bound needs subspace_dim >= 2")
    s = 2.0 * bi.v * bi.data_max * bi.radius
    if not (s > 1.0):
        raise ValueError(f"need 2 * v * data_max * radius > 1, got {s}")
    beta = math.asin(1.0 / s)
    power = bi.subspace_dim - 2
    integral, _ = quad(lambda t: math.sin(t) ** power, 0.0, beta, epsabs=1e-10, epsrel=1e-10)
    ratio = sphere_area(bi.subspace_dim - 2) / sphere_area(bi.subspace_dim - 1)
    return bi.density_min * ratio * integral


def t1_bound(bi: BoundInputs) -> float:
    """Upper bound on the number of slow-phase iterations: C_p R / (v eta p_R^2)."""
    p_r = p_r_lower_bound(bi)
    if p_r == 0.0:
        raise ValueError("cap mass bound is zero (density_min = 0); slow-phase bound undefined")
    return cp_upper_bound(bi) * bi.radius / (bi.v * bi.eta * p_r**2)


def phase2_sum_bound(bi: BoundInputs) -> float:
    """Upper bound on the summed squared class losses over the fast phase:
    4 v n^2 C_p R^2 M^2 R / eta."""
    return (
        4.0
        * bi.v
        * bi.n_classes**2
        * cp_upper_bound(bi)
        * bi.radius**2
        * bi.data_max**2
        * bi.radius
        / bi.eta
    )


def monotonicity_step_threshold(r: float, bi: BoundInputs) -> float:
    """Largest step size for which the non-owner guarantee applies: below
    min(r / (cp * data_max^2), r / (2 * v * n_classes * data_max)) with cp
    from cp_upper_bound, non-owner norms above r cannot grow."""
    if not (r > 0.0):
        raise ValueError("r must be positive")
    cp = cp_upper_bound(bi)
    return min(r / (cp * bi.data_max**2), r / (2.0 * bi.v * bi.n_classes * bi.data_max))


@dataclass(frozen=True)
class PhaseReport:
    """Geometric-condition timeline for one class along a recorded run."""

    class_label: int
    times: tuple[int, ...]
    gc_timeline: tuple[bool, ...]
    first_hold: int | None
    t1_size: int
    t2_size: int
    persistence: float | None
    sum_sq_loss_t2: float

    def to_json_dict(self) -> dict:
        return {
            "class_label": self.class_label,
            "times": list(self.times),
            "gc_timeline": list(self.gc_timeline),
            "first_hold": self.first_hold,
            "t1_size": self.t1_size,
            "t2_size": self.t2_size,
            "persistence": self.persistence,
            "sum_sq_loss_t2": self.sum_sq_loss_t2,
        }


def detect_phases(
    result: TrainResult, class_label: int, tol: float = 1e-9, drop_tol: float = 1e-12
) -> PhaseReport:
    """Run the geometric checker on the class's owner directions at every record.

    Needs weight snapshots; for a faithful phase split train with
    record_every=1 and keep_weights=True.  A snapshot whose owner columns are
    all numerically zero, or whose verdict is degenerate, counts as not
    holding.
    """
    if result.weights is None or len(result.weights) != len(result.records):
        raise ValueError(
            "phase detection needs one weight snapshot per record; "
            "train with keep_weights=True (and record_every=1 for per-step resolution)"
        )
    owner_cols = result.params.output.owner_columns(class_label)
    if owner_cols.size == 0:
        raise ValueError(f"class {class_label} owns no hidden units")

    timeline: list[bool] = []
    for W in result.weights:
        try:
            ds = DirectionSet.from_weight_matrix(W, columns=owner_cols, drop_tol=drop_tol)
        except ValueError:
            timeline.append(False)
            continue
        timeline.append(gc_check(ds, tol=tol).verdict == "holds")

    times = tuple(rec.t for rec in result.records)
    flags = np.asarray(timeline, dtype=bool)
    first_idx = int(np.argmax(flags)) if flags.any() else None
    first_hold = times[first_idx] if first_idx is not None else None
    persistence = float(flags[first_idx:].mean()) if first_idx is not None else None
    losses = np.array([rec.loss_per_class.get(class_label, 0.0) for rec in result.records])
    for rec, flag in zip(result.records, timeline):
        if rec.gc_flags is None:
            rec.gc_flags = {}
        rec.gc_flags[class_label] = bool(flag)
    return PhaseReport(
        class_label=class_label,
        times=times,
        gc_timeline=tuple(bool(f) for f in flags),
        first_hold=first_hold,
        t1_size=int((~flags).sum()),
        t2_size=int(flags.sum()),
        persistence=persistence,
        sum_sq_loss_t2=float((losses[flags] ** 2).sum()),
    )


@dataclass(frozen=True)
class NormViolation:
    t_from: int
    t_to: int
    unit: int
    kind: str  # "owner_decrease" | "nonowner_increase"
    delta: float


def owner_norm_violations(norms: np.ndarray, times, cols, tol: float = 1e-12) -> list[NormViolation]:
    """Owner-unit norms must never drop: flag every consecutive decrease beyond tol."""
    out = []
    for a in range(len(times) - 1):
        for j in cols:
            delta = norms[a + 1, j] - norms[a, j]
            if delta < -tol:
                out.append(NormViolation(int(times[a]), int(times[a + 1]), int(j), "owner_decrease", float(delta)))
    return out


def nonowner_norm_violations(
    norms: np.ndarray, times, cols, r: float, tol: float = 1e-12
) -> list[NormViolation]:
    """Non-owner norms above r must not grow; only meaningful below the step threshold."""
    out = []
    for a in range(len(times) - 1):
        for j in cols:
            if norms[a, j] > r and norms[a + 1, j] - norms[a, j] > tol:
                out.append(
                    NormViolation(
                        int(times[a]), int(times[a + 1]), int(j), "nonowner_increase",
                        float(norms[a + 1, j] - norms[a, j]),
                    )
                )
    return out


def monotonicity_audit(
    result: TrainResult,
    class_label: int,
    r: float | None = None,
    bounds: BoundInputs | None = None,
    tol: float = 1e-12,
) -> list[NormViolation]:
    """Audit a no-bias, single-class run against the norm monotonicity guarantees.

    Owner-unit decreases are always flagged.  Non-owner increases above radius
    r are flagged only when r and bound inputs are supplied and the run's step
    size sits below monotonicity_step_threshold; outside that regime the
    guarantee makes no claim, so nothing is checked.
    """
    if result.params.mode != "no-bias":
        raise ValueError("the monotonicity audit applies to no-bias runs only")
    trained = result.trained_classes
    if trained != (class_label,):
        raise ValueError(
            f"the audit needs a run trained on class {class_label} alone, got train classes {trained}"
        )
    norms = np.array([rec.neuron_norms for rec in result.records])
    times = [rec.t for rec in result.records]
    owner_cols = result.params.output.owner_columns(class_label)
    violations = owner_norm_violations(norms, times, owner_cols, tol)
    if r is not None and bounds is not None and result.config.eta < monotonicity_step_threshold(r, bounds):
        nonowner_cols = np.flatnonzero(result.params.output.owner != class_label)
        violations += nonowner_norm_violations(norms, times, nonowner_cols, r, tol)
    return violations

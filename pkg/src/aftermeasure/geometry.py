"""Volumes and membership for the nested sets of a ray resolution.

For a resolution ``{(c_k, Q_k)}`` three sets of states are compared: the
unit-trace span of the ``Q_k`` intersected with the states, their convex
hull ``conv(Q)``, and the image ``V_am`` of all states under the channel.
Volumes are Hilbert-Schmidt volumes in the trace-one hyperplane.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .errors import ValidationError
from .linalg import vectorize, vectorize_many
from .measurements import (
    ORRI,
    RayResolution,
    apply_channel,
    invert_channel,
    preimage_min_eigenvalues,
)
from .states import as_density, random_density_hs_batch, split_rng

MEASURE = "hilbert-schmidt"
MEMBERSHIP_TOL = 1e-9


def _check_dim(d) -> int:
    if int(d) != d or d < 2:
        raise ValidationError("dimension", f"need d >= 2, got {d}")
    return int(d)


# -- exact volumes ------------------------------------------------------------


def log_simplex_volume(d: int) -> float:
    """Log volume of the regular (d²-1)-simplex with edge sqrt(2d/(d+1))."""
    d = _check_dim(d)
    m = d * d - 1
    log_edge = 0.5 * math.log(2 * d / (d + 1))
    return m * log_edge + math.log(d) - math.lgamma(m + 1) - 0.5 * m * math.log(2)


def log_state_space_volume(d: int) -> float:
    """Log HS volume of the d-dimensional state body."""
    d = _check_dim(d)
    log_gammas = sum(math.lgamma(k) for k in range(1, d + 1))
    return (
        0.5 * math.log(d)
        + 0.5 * d * (d - 1) * math.log(2 * math.pi)
        + log_gammas
        - math.lgamma(d * d)
    )


def log_contraction_factor(d: int) -> float:
    """Log of the SIC volume ratio ``V_am / V_W = (d+1)^-(d²-1)``."""
    d = _check_dim(d)
    return -(d * d - 1) * math.log(d + 1)


def simplex_volume(d: int) -> float:
    return math.exp(log_simplex_volume(d))


def state_space_volume(d: int) -> float:
    return math.exp(log_state_space_volume(d))


def v_am_volume(d: int) -> float:
    return math.exp(log_state_space_volume(d) + log_contraction_factor(d))


@dataclass(frozen=True)
class VolumeReport:
    dim: int
    simplex_volume: float
    state_volume: float
    v_am_volume: float
    conv_over_vw: float
    v_am_over_conv: float
    v_am_over_vw: float

    def as_dict(self) -> dict:
        return asdict(self)


def volume_report(d: int) -> VolumeReport:
    log_conv = log_simplex_volume(d)
    log_vw = log_state_space_volume(d)
    log_ratio = log_contraction_factor(d)
    return VolumeReport(
        dim=int(d),
        simplex_volume=math.exp(log_conv),
        state_volume=math.exp(log_vw),
        v_am_volume=math.exp(log_vw + log_ratio),
        conv_over_vw=math.exp(log_conv - log_vw),
        v_am_over_conv=math.exp(log_vw + log_ratio - log_conv),
        v_am_over_vw=math.exp(log_ratio),
    )


# -- membership ---------------------------------------------------------------


@dataclass(frozen=True)
class MembershipVerdict:
    """Membership of a state in span / conv / V_am of a resolution.

    ``in_v_am`` is ``None`` when undecided (resolution not informationally
    complete); the reason is in ``diagnostics["v_am_reason"]``. Membership
    closes upward: anything in V_am is reported in conv, and anything in conv
    is reported in the span. Raw per-test flags are kept in diagnostics.
    """

    in_linear_span: bool
    in_conv: bool
    in_v_am: bool | None
    coefficients: list[float]
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.in_v_am and not self.in_conv:
            raise AssertionError("in_v_am without in_conv")
        if self.in_conv and not self.in_linear_span:
            raise AssertionError("in_conv without in_linear_span")

    def as_dict(self) -> dict:
        return asdict(self)


def barycentric_coefficients(m: RayResolution, w) -> tuple[np.ndarray, float]:
    """Least-squares ``a`` with ``W ≈ sum_k a_k Q_k`` and the HS residual."""
    target = vectorize(w, m.basis)
    a, *_ = np.linalg.lstsq(m.coordinates, target, rcond=None)
    residual = float(np.linalg.norm(m.coordinates @ a - target))
    return a, residual


def membership(m: RayResolution, w, tol: float = MEMBERSHIP_TOL) -> MembershipVerdict:
    w = as_density(w)
    if w.shape != (m.dim, m.dim):
        raise ValidationError("shape", f"state {w.shape} vs resolution dim {m.dim}")
    a, residual = barycentric_coefficients(m, w)
    span_dim = int(np.linalg.matrix_rank(m.coordinates))
    raw_span = residual < tol * m.dim and abs(a.sum() - 1) < tol
    raw_conv = raw_span and a.min() >= -tol
    diagnostics = {
        "residual": residual,
        "min_coefficient": float(a.min()),
        "span_dimension": span_dim,
        "raw_in_linear_span": bool(raw_span),
        "raw_in_conv": bool(raw_conv),
    }
    if m.informationally_complete:
        inv = invert_channel(m, w, tol)
        in_v_am = bool(inv.feasible)
        diagnostics["min_preimage_eigenvalue"] = inv.min_eigenvalue
        diagnostics["condition_number"] = inv.condition_number
    else:
        in_v_am = None
        diagnostics["v_am_reason"] = (
            f"undecided: {len(m)} < {m.dim ** 2} outcomes, channel is not invertible"
        )
    in_conv = bool(raw_conv or in_v_am)
    return MembershipVerdict(
        in_linear_span=bool(raw_span or in_conv),
        in_conv=in_conv,
        in_v_am=in_v_am,
        coefficients=[float(x) for x in a],
        diagnostics=diagnostics,
    )


def project_to_orri_simplex(orri: RayResolution, w) -> np.ndarray:
    """Closest point (HS distance) of the commutative simplex to ``w``."""
    if orri.kind != ORRI:
        raise ValidationError("not-orri", "projection needs an orthogonal resolution")
    return apply_channel(orri, w)


# -- Monte Carlo --------------------------------------------------------------

BatchPredicate = Callable[[np.ndarray], np.ndarray]


def region_predicate(region: str, m: RayResolution, tol: float = MEMBERSHIP_TOL) -> BatchPredicate:
    """Vectorized membership test over a stack of states, shape (n, d, d).

    ``region`` is ``"span"``, ``"conv"`` or ``"vam"``; ``"vam"`` needs an
    informationally complete resolution.
    """
    q = m.coordinates
    pinv = np.linalg.pinv(q)

    def coefficients(states):
        x = vectorize_many(states, m.basis)
        a = x @ pinv.T
        res = np.linalg.norm(a @ q.T - x, axis=1)
        return a, res

    if region == "span":
        def predicate(states):
            a, res = coefficients(states)
            return (res < tol * m.dim) & (np.abs(a.sum(axis=1) - 1) < tol)
    elif region == "conv":
        def predicate(states):
            a, res = coefficients(states)
            return (res < tol * m.dim) & (np.abs(a.sum(axis=1) - 1) < tol) & (a.min(axis=1) >= -tol)
    elif region == "vam":
        m._inverse  # fail early when not invertible
        def predicate(states):
            return preimage_min_eigenvalues(m, states) >= -tol * m.dim
    else:
        raise ValidationError("region", f"unknown region {region!r}")
    return predicate


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    standard_error: float
    hits: int
    n: int
    measure: str = MEASURE


def mc_fraction(
    predicate: BatchPredicate,
    d: int,
    n: int,
    rng: np.random.Generator,
    shard_size: int = 10_000,
    workers: int = 1,
) -> MonteCarloEstimate:
    """Fraction of Hilbert-Schmidt random states satisfying ``predicate``.

    ``n`` is split into fixed-size shards, each with its own spawned stream,
    so the estimate does not depend on ``workers``.
    """
    if n < 1000:
        raise ValidationError("sample-size", "need n >= 1000")
    sizes = [shard_size] * (n // shard_size)
    if n % shard_size:
        sizes.append(n % shard_size)
    streams = split_rng(rng, len(sizes))

    def run(job):
        size, stream = job
        return int(np.count_nonzero(predicate(random_density_hs_batch(d, size, stream))))

    jobs = list(zip(sizes, streams))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            hits = sum(pool.map(run, jobs))
    else:
        hits = sum(map(run, jobs))
    p = hits / n
    return MonteCarloEstimate(p, math.sqrt(p * (1 - p) / n), hits, n)

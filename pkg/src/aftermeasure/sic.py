"""SIC-POVMs on the Weyl-Heisenberg orbit.

A SIC in dimension d is d² rank-one projectors with ``(1/d) sum_k Q_k = I``
and ``tr(Q_k Q_r) = (d δ_kr + 1)/(d + 1)``. Here they are generated as the
orbit ``Q_(p,q) = D_(p,q) |f><f| D_(p,q)†`` of a fiducial vector ``f`` under
the displacements ``D_(p,q) = X^p Z^q``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ValidationError
from .linalg import _square, hermitize, min_eigenvalue, require_hermitian
from .measurements import RayResolution
from .states import as_density, make_rng, normalize_vector, random_pure_vector, split_rng

BUILTIN = "builtin"
OPTIMIZED = "optimized"
SUCCESS_RESIDUAL = 1e-8


def _check_dim(d, lo=2, hi=None) -> int:
    if int(d) != d or d < lo or (hi is not None and d > hi):
        rng = f"[{lo}, {hi}]" if hi else f">= {lo}"
        raise ValidationError("dimension", f"d must be {rng}, got {d}")
    return int(d)


@lru_cache(maxsize=None)
def wh_displacements(d: int) -> np.ndarray:
    """All d² displacements ``X^p Z^q``, index ``p * d + q``; shape (d², d, d)."""
    d = _check_dim(d)
    shift = np.roll(np.eye(d), 1, axis=0)  # X|j> = |j+1 mod d>
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    xs = [np.linalg.matrix_power(shift, p) for p in range(d)]
    zs = [np.linalg.matrix_power(clock, q) for q in range(d)]
    ops = np.array([xs[p] @ zs[q] for p in range(d) for q in range(d)], dtype=complex)
    ops.setflags(write=False)
    return ops


@dataclass(frozen=True)
class Fiducial:
    dim: int
    vector: np.ndarray
    provenance: str = BUILTIN
    residual: float = float("nan")

    def __post_init__(self):
        v = normalize_vector(self.vector)
        if v.size != self.dim:
            raise ValidationError("shape", f"vector length {v.size} != dim {self.dim}")
        object.__setattr__(self, "vector", v)

    @property
    def converged(self) -> bool:
        return self.residual < SUCCESS_RESIDUAL


@dataclass(frozen=True)
class SicReport:
    dim: int
    max_deviation: float
    completeness_residual: float

    def complete(self, tol: float = 1e-9) -> bool:
        return self.completeness_residual <= tol


def sic_projectors(fiducial) -> np.ndarray:
    """Orbit projectors of a vector, without any validation of SIC quality."""
    v = fiducial.vector if isinstance(fiducial, Fiducial) else normalize_vector(fiducial)
    orbit = wh_displacements(v.size) @ v
    return np.einsum("ki,kj->kij", orbit, orbit.conj())


def sic_from_fiducial(fiducial, tol: float = 1e-6) -> RayResolution:
    """SIC resolution with weights 1/d.

    The orbit of any unit vector sums to d·I, so completeness alone cannot
    reject a poor fiducial; overlaps deviating from 1/(d+1) by more than
    ``tol`` raise ``not-sic``.
    """
    v = fiducial.vector if isinstance(fiducial, Fiducial) else normalize_vector(fiducial)
    d = v.size
    deviation = overlap_residual(v)
    if deviation > tol:
        raise ValidationError("not-sic", f"overlap deviation {deviation:.3g}")
    orbit = wh_displacements(d) @ v
    return RayResolution(np.full(d * d, 1.0 / d), orbit)


def verify_sic(m) -> SicReport:
    """Exhaustive overlap check for a resolution or a stack of projectors."""
    q = m.projectors if isinstance(m, RayResolution) else np.asarray(m, dtype=complex)
    n, d = q.shape[0], q.shape[1]
    if n != d * d:
        raise ValidationError("wrong-count", f"a SIC needs {d * d} elements, got {n}")
    overlaps = np.einsum("kij,rji->kr", q, q).real
    target = (d * np.eye(n) + 1) / (d + 1)
    completeness = np.linalg.norm(q.sum(axis=0) / d - np.eye(d))
    return SicReport(d, float(np.max(np.abs(overlaps - target))), float(completeness))


def overlap_residual(vector) -> float:
    """Max deviation of ``|<f|D|f>|^2`` from 1/(d+1) over nontrivial displacements."""
    v = normalize_vector(vector)
    d = v.size
    g = np.abs(wh_displacements(d) @ v @ v.conj()) ** 2
    return float(np.max(np.abs(g[1:] - 1 / (d + 1))))


# -- built-in fiducials -------------------------------------------------------


def _builtin_vector(d: int) -> np.ndarray:
    if d == 2:
        theta = np.arccos(1 / np.sqrt(3))
        return np.array([np.cos(theta / 2), np.exp(1j * np.pi / 4) * np.sin(theta / 2)])
    if d == 3:
        return np.array([0, 1, -1], dtype=complex) / np.sqrt(2)
    raise ValidationError("no-builtin", f"no built-in fiducial for d={d}")


@lru_cache(maxsize=None)
def builtin_fiducial(d: int) -> Fiducial:
    v = _builtin_vector(int(d))
    residual = overlap_residual(v)
    report = verify_sic(sic_projectors(v))
    # never hand out an unverified constant
    if max(report.max_deviation, report.completeness_residual) > 1e-10:
        raise AssertionError(f"built-in fiducial for d={d} failed verification")
    return Fiducial(int(d), v, BUILTIN, residual)


@lru_cache(maxsize=None)
def _builtin_sic(d: int) -> RayResolution:
    return sic_from_fiducial(builtin_fiducial(d))


def sic_povm(d: int, seed: int = 0) -> RayResolution:
    """SIC for dimension d: built-in for d = 2, 3, otherwise searched."""
    if d in (2, 3):
        return _builtin_sic(d)
    f = find_fiducial(d, seed=seed)
    return sic_from_fiducial(f)


# -- fiducial search ----------------------------------------------------------


def fiducial_objective(vector) -> float:
    """Sum over nontrivial displacements of ``(|<f|D|f>|^2 - 1/(d+1))^2``."""
    v = normalize_vector(vector)
    d = v.size
    g = np.abs(v.conj() @ (wh_displacements(d) @ v).T) ** 2
    return float(np.sum((g[1:] - 1 / (d + 1)) ** 2))


def _objective_and_gradient(psi: np.ndarray, ops: np.ndarray, target: float):
    # psi is unit norm; g_k = <psi|D_k|psi>
    dpsi = ops @ psi
    ddag_psi = np.einsum("kji,j->ki", ops.conj(), psi)
    g = dpsi @ psi.conj()
    dev = np.abs(g) ** 2 - target
    dev[0] = 0.0
    f = float(np.sum(dev**2))
    # Euclidean gradient in the real embedding is 2 * d f / d conj(psi)
    grad = 4 * np.einsum("k,ki->i", dev * g.conj(), dpsi)
    grad += 4 * np.einsum("k,ki->i", dev * g, ddag_psi)
    grad -= np.real(np.vdot(psi, grad)) * psi  # tangent to the sphere
    return f, grad


def _descend(psi: np.ndarray, max_iters: int, ops: np.ndarray, target: float) -> np.ndarray:
    f, grad = _objective_and_gradient(psi, ops, target)
    step = 1.0
    prev_psi = prev_grad = None
    for _ in range(max_iters):
        gnorm2 = float(np.vdot(grad, grad).real)
        if f < 1e-30 or gnorm2 < 1e-40:
            break
        if prev_grad is not None:
            # Barzilai-Borwein guess, safeguarded by backtracking below
            s = psi - prev_psi
            y = grad - prev_grad
            sy = float(np.vdot(s, y).real)
            if sy > 0:
                step = float(np.vdot(s, s).real) / sy
        while True:
            trial = psi - step * grad
            trial /= np.linalg.norm(trial)
            f_new, grad_new = _objective_and_gradient(trial, ops, target)
            if f_new <= f - 1e-4 * step * gnorm2 or step < 1e-16:
                break
            step *= 0.5
        if f_new > f:
            break
        decrease = (f - f_new) / max(f, 1e-300)
        prev_psi, prev_grad = psi, grad
        psi, f, grad = trial, f_new, grad_new
        if 0 <= decrease < 1e-14:
            break
    return psi


def find_fiducial(d: int, seed=0, restarts: int = 50, max_iters: int = 20000) -> Fiducial:
    """Multi-start projected gradient search for a Weyl-Heisenberg fiducial.

    Each restart draws a Haar-random start from its own spawned stream, so
    restart ``i`` is identical regardless of how many restarts are run. The
    search stops at the first restart whose overlap residual is below 1e-8;
    otherwise the restart with the smallest residual (earliest on ties) is
    returned and the caller should inspect ``residual``.
    """
    d = _check_dim(d, 2, 6)
    if restarts < 1:
        raise ValidationError("restarts", "need at least one restart")
    ops = wh_displacements(d)
    target = 1 / (d + 1)
    best = None
    for stream in split_rng(make_rng(seed), restarts):
        psi = _descend(random_pure_vector(d, stream), max_iters, ops, target)
        residual = overlap_residual(psi)
        if best is None or residual < best[0]:
            best = (residual, psi)
        if residual < SUCCESS_RESIDUAL:
            break
    residual, psi = best
    return Fiducial(d, psi, OPTIMIZED, residual)


# -- closed-form maps ---------------------------------------------------------


def contract_sic(w) -> np.ndarray:
    """After-measurement state of any SIC: ``(d W_o + W)/(d + 1)``."""
    w = as_density(w)
    d = w.shape[0]
    return (np.eye(d) + w) / (d + 1)


def stretch_sic(w) -> np.ndarray:
    """Inverse of the SIC contraction, ``(d + 1) W - d W_o``; may be indefinite."""
    w = require_hermitian(w)
    if abs(np.trace(w).real - 1) > 1e-10:
        raise ValidationError("not-unit-trace", "stretch needs a unit-trace matrix")
    d = w.shape[0]
    return hermitize((d + 1) * w - np.eye(d))


def in_v_am_sic(w, tol: float = 1e-9) -> bool:
    """Whether ``w`` is the SIC image of some state (stretch-and-test)."""
    x = stretch_sic(_square(w))
    return min_eigenvalue(x) >= -tol * x.shape[0]

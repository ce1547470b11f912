"""Ray resolutions of the identity and their measurement channels.

A :class:`RayResolution` is a weighted family ``{(c_k, Q_k)}`` of rank-one
projectors with ``sum_k c_k Q_k = I``. Orthogonal families with unit weights
are standard (von Neumann) measurements; anything else is a generalized
measurement in stripped form. The nonselective channel is

    W -> sum_k c_k Q_k W Q_k = sum_k c_k tr(W Q_k) Q_k .
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import NumericalError, ValidationError
from .linalg import (
    HermitianBasis,
    _square,
    devectorize,
    hermitian_basis,
    hermitize,
    is_hermitian,
    min_eigenvalue,
    polar_decompose,
    require_hermitian,
    vectorize,
    vectorize_many,
)
from .states import as_density, normalize_vector

STRUCTURE_TOL = 1e-9
ALGEBRA_TOL = 1e-10
MAX_CONDITION = 1e12

ORRI = "ORRI"
NRRI = "NRRI"


def _projector_vector(q, tol: float = ALGEBRA_TOL) -> np.ndarray:
    """Unit vector spanning a rank-one projector (validated)."""
    q = _square(q, "projector")
    if not is_hermitian(q, tol):
        raise ValidationError("not-projector", "projector is not Hermitian")
    if abs(np.trace(q).real - 1) > tol or np.max(np.abs(q @ q - q)) > tol:
        raise ValidationError("not-projector", "not a trace-one idempotent")
    vals, vecs = np.linalg.eigh(hermitize(q))
    v = vecs[:, -1]
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    return v * (abs(v[nz[0]]) / v[nz[0]])


class RayResolution:
    """Validated ray resolution of the identity.

    Parameters
    ----------
    weights : sequence of float
        Positive weights ``c_k``.
    vectors : array_like, shape (n, d)
        Vectors spanning the projectors ``Q_k``; normalized on input.
    tol : float
        Completeness tolerance on ``||sum c_k Q_k - I||``.

    The ``kind`` (ORRI or NRRI) is derived from the data.
    """

    def __init__(self, weights, vectors, tol: float = STRUCTURE_TOL):
        vectors = np.atleast_2d(np.asarray(vectors, dtype=complex))
        weights = np.array(weights, dtype=float).ravel()
        n, d = vectors.shape
        if d < 2:
            raise ValidationError("dimension", f"need d >= 2, got {d}")
        if weights.shape != (n,):
            raise ValidationError("shape", f"{weights.size} weights for {n} projectors")
        if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
            raise ValidationError("bad-weight", "weights must be positive")
        vectors = np.array([normalize_vector(v) for v in vectors])
        self.dim = d
        self.weights = weights
        self.vectors = vectors
        self.weights.setflags(write=False)
        self.vectors.setflags(write=False)

        sv = np.linalg.svd(self.coordinates, compute_uv=False)
        if n > d * d or sv.min() <= 1e-10:
            raise ValidationError("dependent", "projectors are linearly dependent")
        residual = self.completeness_residual
        if residual > tol:
            raise ValidationError("incomplete", f"||sum c_k Q_k - I|| = {residual:.3g}")

    def __len__(self) -> int:
        return len(self.weights)

    def __repr__(self) -> str:
        return f"RayResolution(dim={self.dim}, n={len(self)}, kind={self.kind})"

    @cached_property
    def projectors(self) -> np.ndarray:
        v = self.vectors
        p = np.einsum("ki,kj->kij", v, v.conj())
        p.setflags(write=False)
        return p

    @cached_property
    def basis(self) -> HermitianBasis:
        return hermitian_basis(self.dim)

    @cached_property
    def coordinates(self) -> np.ndarray:
        """Columns are the Hermitian-basis coordinates of each ``Q_k``."""
        return vectorize_many(self.projectors, self.basis).T

    @property
    def completeness_residual(self) -> float:
        total = np.einsum("k,kij->ij", self.weights, self.projectors)
        return float(np.linalg.norm(total - np.eye(self.dim)))

    @cached_property
    def overlaps(self) -> np.ndarray:
        """Matrix of ``tr(Q_k Q_r) = |<v_k|v_r>|^2``."""
        return np.abs(self.vectors.conj() @ self.vectors.T) ** 2

    @cached_property
    def kind(self) -> str:
        off = self.overlaps[~np.eye(len(self), dtype=bool)]
        unit = np.all(np.abs(self.weights - 1) <= ALGEBRA_TOL)
        orthogonal = off.size == 0 or np.max(off) <= ALGEBRA_TOL
        return ORRI if unit and orthogonal else NRRI

    @property
    def informationally_complete(self) -> bool:
        return len(self) == self.dim**2

    @cached_property
    def transfer(self) -> "TransferMatrix":
        return transfer_matrix(self)

    @cached_property
    def _inverse(self) -> tuple[np.ndarray, float]:
        if not self.informationally_complete:
            raise NumericalError(
                "not-informationally-complete",
                f"{len(self)} outcomes, need {self.dim ** 2}",
            )
        u, s, vh = np.linalg.svd(self.transfer.matrix)
        cond = float(s[0] / s[-1]) if s[-1] > 0 else np.inf
        if cond > MAX_CONDITION:
            raise NumericalError("not-informationally-complete", f"condition number {cond:.3g}")
        inv = (vh.conj().T / s[None, :]) @ u.conj().T
        inv.setflags(write=False)
        return inv, cond


def orri_from_vectors(vectors, tol: float = ALGEBRA_TOL) -> RayResolution:
    vectors = np.atleast_2d(np.asarray(vectors, dtype=complex))
    n, d = vectors.shape
    if n != d:
        raise ValidationError("wrong-count", f"need {d} vectors, got {n}")
    if np.max(np.abs(np.linalg.norm(vectors, axis=1) - 1)) > tol:
        raise ValidationError("not-orthonormal", "vectors are not normalized")
    gram = vectors.conj() @ vectors.T
    if np.max(np.abs(gram - np.eye(d))) > tol:
        raise ValidationError("not-orthonormal", "vectors are not orthogonal")
    return RayResolution(np.ones(d), vectors)


def computational_orri(d: int) -> RayResolution:
    return orri_from_vectors(np.eye(d, dtype=complex))


def nrri_new(weights, projectors, tol: float = STRUCTURE_TOL) -> RayResolution:
    """Build a resolution from weights and rank-one projector matrices."""
    weights = np.asarray(weights, dtype=float).ravel()
    if np.any(weights <= 0):
        raise ValidationError("bad-weight", "weights must be positive")
    vectors = [_projector_vector(q) for q in projectors]
    return RayResolution(weights, vectors, tol=tol)


def _check_dims(m: RayResolution, w: np.ndarray) -> None:
    if w.shape != (m.dim, m.dim):
        raise ValidationError("shape", f"state {w.shape} vs resolution dim {m.dim}")


def _raw_probabilities(m: RayResolution, w: np.ndarray) -> np.ndarray:
    v = m.vectors
    return m.weights * np.einsum("ki,ij,kj->k", v.conj(), w, v).real


def probabilities(m: RayResolution, w) -> np.ndarray:
    """Outcome probabilities ``p_k = c_k tr(W Q_k)``."""
    w = as_density(w)
    _check_dims(m, w)
    return _raw_probabilities(m, w)


def apply_channel(m: RayResolution, w) -> np.ndarray:
    """Nonselective after-measurement state ``sum_k c_k tr(W Q_k) Q_k``."""
    p = probabilities(m, w)
    return hermitize(np.einsum("k,kij->ij", p, m.projectors))


def apply_channel_linear(m: RayResolution, x) -> np.ndarray:
    """Linear extension of the channel to any square matrix."""
    x = _square(x)
    _check_dims(m, x)
    v = m.vectors
    coef = m.weights * np.einsum("ki,ij,kj->k", v.conj(), x, v)
    return np.einsum("k,kij->ij", coef, m.projectors)


def selective_outcome(m: RayResolution, w, k: int) -> tuple[float, np.ndarray]:
    """Probability of outcome ``k`` and the conditional post-state ``Q_k``."""
    if not 0 <= k < len(m):
        raise ValidationError("index", f"outcome {k} out of range")
    p = probabilities(m, w)[k]
    if p < 1e-14:
        raise ValidationError("zero-probability", f"outcome {k} has probability {p:.3g}")
    return float(p), np.array(m.projectors[k])


def expectation_value(a, w) -> float:
    a = require_hermitian(a)
    w = as_density(w)
    if a.shape != w.shape:
        raise ValidationError("shape", f"{a.shape} vs {w.shape}")
    return float(np.vdot(a, w).real)


# -- transfer matrices --------------------------------------------------------


@dataclass(frozen=True)
class TransferMatrix:
    """Real matrix of the channel in an orthonormal Hermitian basis."""

    dim: int
    basis: HermitianBasis = field(repr=False)
    matrix: np.ndarray

    def apply(self, w) -> np.ndarray:
        return devectorize(self.matrix @ vectorize(w, self.basis), self.basis)

    def eigenvalues(self) -> np.ndarray:
        return np.sort(np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.T)))[::-1]


def transfer_matrix(m: RayResolution) -> TransferMatrix:
    # channel(X) = sum_k c_k <q_k, x> Q_k, so T = sum_k c_k q_k q_k^T
    q = m.coordinates
    t = (q * m.weights[None, :]) @ q.T
    t.setflags(write=False)
    return TransferMatrix(m.dim, m.basis, t)


def is_repeatable(m: RayResolution, tol: float = STRUCTURE_TOL) -> bool:
    t = m.transfer.matrix
    return bool(np.max(np.abs(t @ t - t)) <= tol)


@dataclass(frozen=True)
class Inversion:
    """Preimage of a matrix under an informationally complete channel."""

    preimage: np.ndarray
    min_eigenvalue: float
    feasible: bool
    condition_number: float


def invert_channel(m: RayResolution, w_am, tol: float = 1e-9) -> Inversion:
    """Solve ``channel(X) = W_am`` for Hermitian unit-trace ``X``.

    ``feasible`` reports whether ``X`` is positive semidefinite (eigenvalue
    floor ``-tol * d``), i.e. whether ``W_am`` is an after-measurement state.
    """
    w_am = require_hermitian(w_am)
    _check_dims(m, w_am)
    inv, cond = m._inverse
    x = hermitize(devectorize(inv @ vectorize(w_am, m.basis), m.basis))
    lam = min_eigenvalue(x)
    return Inversion(x, lam, lam >= -tol * m.dim, cond)


def preimage_min_eigenvalues(m: RayResolution, mats: np.ndarray) -> np.ndarray:
    """Smallest preimage eigenvalue for a stack of Hermitian matrices."""
    inv, _ = m._inverse
    coords = vectorize_many(mats, m.basis) @ inv.T
    x = hermitize(devectorize(coords, m.basis))
    return np.linalg.eigvalsh(x)[:, 0]


# -- Kraus operators ----------------------------------------------------------


@dataclass(frozen=True)
class KrausSet:
    operators: np.ndarray  # shape (n, d, d)

    def __post_init__(self):
        ops = np.asarray(self.operators, dtype=complex)
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2]:
            raise ValidationError("shape", f"bad Kraus stack shape {ops.shape}")
        object.__setattr__(self, "operators", ops)
        total = np.einsum("kji,kjl->il", ops.conj(), ops)
        if np.linalg.norm(total - np.eye(ops.shape[1])) > STRUCTURE_TOL:
            raise ValidationError("incomplete", "sum A_k† A_k != I")

    @property
    def dim(self) -> int:
        return self.operators.shape[1]

    def probabilities(self, w) -> np.ndarray:
        w = as_density(w)
        a = self.operators
        return np.einsum("kij,jl,kil->k", a, w, a.conj()).real

    def apply(self, w) -> np.ndarray:
        w = as_density(w)
        a = self.operators
        return np.einsum("kij,jl,kml->im", a, w, a.conj())


def strip_unitaries(kraus: KrausSet, tol: float = STRUCTURE_TOL) -> RayResolution:
    """Discard the unitary polar factor of each Kraus operator.

    With ``A_k = U_k P_k`` and ``P_k = sqrt(A_k† A_k) = sqrt(c_k) Q_k`` this
    returns the resolution ``{(c_k, Q_k)}``.
    """
    weights, vectors = [], []
    for a in kraus.operators:
        s = np.linalg.svd(a, compute_uv=False)
        if s.size > 1 and s[1] > tol:
            raise ValidationError("not-rank-one", f"second singular value {s[1]:.3g}")
        _, positive = polar_decompose(a)
        root_c = np.trace(positive).real
        weights.append(root_c**2)
        vectors.append(_projector_vector(positive / root_c, tol=1e-8))
    return RayResolution(weights, vectors)


# -- Naimark dilation ---------------------------------------------------------


@dataclass(frozen=True)
class NaimarkModel:
    """System ⊗ ancilla realization of a ray resolution.

    The joint space is ordered system-major: index ``i * n + k`` for system
    basis state ``i`` and ancilla basis state ``k``. The isometry is
    ``V|psi> = sum_k sqrt(c_k) Q_k|psi> ⊗ |k>``.
    """

    dim: int
    ancilla_dim: int
    isometry: np.ndarray  # (d*n, d)

    @property
    def ancilla_projectors(self) -> np.ndarray:
        return np.array([np.diag(row) for row in np.eye(self.ancilla_dim, dtype=complex)])

    def joint_state(self, w) -> np.ndarray:
        w = as_density(w)
        return self.isometry @ w @ self.isometry.conj().T

    def _blocks(self, rho: np.ndarray) -> np.ndarray:
        d, n = self.dim, self.ancilla_dim
        return rho.reshape(d, n, d, n)

    def probabilities(self, w) -> np.ndarray:
        """Ancilla outcome probabilities ``tr((I ⊗ |k><k|) V W V†)``."""
        r = self._blocks(self.joint_state(w))
        return np.einsum("ikik->k", r).real

    def dephased_joint_state(self, w) -> np.ndarray:
        r = self._blocks(self.joint_state(w))
        n = self.ancilla_dim
        mask = np.eye(n)[None, :, None, :]
        d = self.dim
        return (r * mask).reshape(d * n, d * n)

    def system_state(self, w, dephase: bool = True) -> np.ndarray:
        """Partial trace over the ancilla, optionally after measuring it."""
        rho = self.dephased_joint_state(w) if dephase else self.joint_state(w)
        return np.einsum("ikjk->ij", self._blocks(rho))

    def isometry_residual(self) -> float:
        v = self.isometry
        return float(np.max(np.abs(v.conj().T @ v - np.eye(self.dim))))

    def complete_unitary(self) -> np.ndarray:
        """A unitary ``U`` with ``U(|psi> ⊗ |0>) = V|psi>``."""
        d, n = self.dim, self.ancilla_dim
        v = self.isometry
        _, _, vh = np.linalg.svd(v.conj().T)
        complement = vh[d:].conj().T  # orthonormal basis of range(V)^⊥
        u = np.zeros((d * n, d * n), dtype=complex)
        start_cols = np.arange(d) * n
        other_cols = np.setdiff1d(np.arange(d * n), start_cols)
        u[:, start_cols] = v
        u[:, other_cols] = complement
        return u


def naimark_dilate(m: RayResolution) -> NaimarkModel:
    n, d = len(m), m.dim
    v = np.zeros((d * n, d), dtype=complex)
    for k in range(n):
        e_k = np.zeros((n, 1))
        e_k[k, 0] = 1.0
        v += np.kron(np.sqrt(m.weights[k]) * m.projectors[k], e_k)
    return NaimarkModel(d, n, v)

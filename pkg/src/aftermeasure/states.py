"""Density matrices, pure states and random sampling.

States are ``numpy`` complex arrays of shape (d, d). :func:`as_density`
validates an arbitrary array against the density-matrix invariants
(Hermitian, positive semidefinite, unit trace).

Random sampling takes an explicit :class:`numpy.random.Generator`. Streams
for parallel shards are obtained with :func:`split_rng`, which uses
``Generator.spawn`` so shard ``i`` always gets the same stream no matter how
many workers consume the shards.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .linalg import (
    HERMITIAN_TOL,
    PSD_TOL,
    _square,
    eigh_desc,
    hermitize,
    is_hermitian,
    min_eigenvalue,
)

TRACE_TOL = 1e-10


def _check_dim(d) -> int:
    if int(d) != d or d < 2:
        raise ValidationError("dimension", f"need d >= 2, got {d}")
    return int(d)


def as_density(w, tol: float = PSD_TOL) -> np.ndarray:
    """Return ``w`` as a complex array after checking it is a density matrix."""
    w = _square(w, "state")
    if not is_hermitian(w, HERMITIAN_TOL):
        raise ValidationError("not-hermitian", "state is not Hermitian")
    if abs(np.trace(w).real - 1) > TRACE_TOL:
        raise ValidationError("not-state", f"trace {np.trace(w).real:.3g} != 1")
    if min_eigenvalue(w) < -tol * w.shape[0]:
        raise ValidationError("not-state", "state has a negative eigenvalue")
    return hermitize(w)


def is_density(w, tol: float = PSD_TOL) -> bool:
    try:
        as_density(w, tol)
    except ValidationError:
        return False
    return True


def maximally_mixed(d: int) -> np.ndarray:
    d = _check_dim(d)
    return np.eye(d, dtype=complex) / d


def normalize_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).ravel()
    norm = np.linalg.norm(v)
    if norm <= 1e-12:
        raise ValidationError("degenerate", "zero vector")
    return v / norm


def pure_state(v) -> np.ndarray:
    """Projector onto span(v)."""
    v = normalize_vector(v)
    return np.outer(v, v.conj())


def purity(w) -> float:
    w = _square(w)
    return float(np.vdot(w, w).real)


def bloch_state(x: float, y: float, z: float) -> np.ndarray:
    """Qubit state (I + x σx + y σy + z σz)/2."""
    return 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]], dtype=complex)


def bloch_vector(w) -> np.ndarray:
    w = _square(w)
    if w.shape != (2, 2):
        raise ValidationError("shape", "Bloch vectors are defined for qubits only")
    return np.array([2 * w[0, 1].real, 2 * w[1, 0].imag, (w[0, 0] - w[1, 1]).real])


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray  # descending
    vectors: np.ndarray  # columns are eigenvectors

    @property
    def projectors(self) -> np.ndarray:
        v = self.vectors
        return np.einsum("ik,jk->kij", v, v.conj())

    def reconstruct(self) -> np.ndarray:
        return np.einsum("k,kij->ij", self.eigenvalues, self.projectors)


def spectral(w) -> SpectralDecomposition:
    vals, vecs = eigh_desc(as_density(w))
    return SpectralDecomposition(vals, vecs)


# -- sampling -----------------------------------------------------------------


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def split_rng(rng: np.random.Generator, n: int) -> list[np.random.Generator]:
    return rng.spawn(n)


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard complex normal entries, E|z|^2 = 1."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_density_hs_batch(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` Hilbert-Schmidt random states, shape (n, d, d)."""
    d = _check_dim(d)
    g = complex_gaussian(rng, (n, d, d))
    w = g @ np.swapaxes(g, -1, -2).conj()
    w /= np.trace(w, axis1=-2, axis2=-1).real[:, None, None]
    return hermitize(w)


def random_density_hs(d: int, rng: np.random.Generator) -> np.ndarray:
    """Hilbert-Schmidt random state G G†/tr(G G†), G a d×d Ginibre matrix."""
    return random_density_hs_batch(d, 1, rng)[0]


def random_pure_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    d = _check_dim(d)
    return normalize_vector(complex_gaussian(rng, d))


def random_pure(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state as a projector."""
    return pure_state(random_pure_vector(d, rng))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary (QR of a Ginibre matrix with phase correction)."""
    q, r = np.linalg.qr(complex_gaussian(rng, (d, d)))
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))[None, :]

"""Hermitian operator toolkit: Hilbert-Schmidt geometry, positivity, an
orthonormal Hermitian basis, and polar decomposition.

Matrices are plain ``numpy`` arrays. Functions never mutate their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ValidationError

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-9


def _square(a, name="matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError("shape", f"{name} must be square, got {a.shape}")
    return a


def _same_shape(a, b) -> tuple[np.ndarray, np.ndarray]:
    a, b = _square(a), _square(b)
    if a.shape != b.shape:
        raise ValidationError("shape", f"{a.shape} vs {b.shape}")
    return a, b


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    a = _square(a)
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def require_hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = _square(a)
    if not is_hermitian(a, tol):
        raise ValidationError("not-hermitian")
    return a


def hermitize(a) -> np.ndarray:
    """Symmetric part (a + a†)/2; removes round-off anti-Hermitian noise."""
    a = np.asarray(a, dtype=complex)
    return 0.5 * (a + np.swapaxes(a, -1, -2).conj())


def hs_inner(a, b, real: bool = True, tol: float = 1e-12):
    """Hilbert-Schmidt inner product tr(a† b).

    With ``real=True`` (the default) both arguments must be Hermitian and a
    float is returned; otherwise the complex value is returned unchecked.
    """
    a, b = _same_shape(a, b)
    value = np.vdot(a, b)  # vdot conjugates and flattens: sum conj(a_ij) b_ij
    if not real:
        return complex(value)
    if not (is_hermitian(a, tol) and is_hermitian(b, tol)):
        raise ValidationError("not-hermitian", "real inner product needs Hermitian inputs")
    return float(value.real)


def hs_norm(a) -> float:
    a = _square(a)
    return float(np.linalg.norm(a))


def hs_distance(a, b) -> float:
    a, b = _same_shape(a, b)
    return float(np.linalg.norm(a - b))


def eigh_desc(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending.

    Each eigenvector is rephased so that its first component of modulus
    above 1e-12 is real and positive, which makes the output reproducible.
    """
    vals, vecs = np.linalg.eigh(hermitize(_square(a)))
    vals, vecs = vals[::-1], vecs[:, ::-1]
    return vals, fix_phases(vecs)


def fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Rephase columns so their first non-negligible entry is real positive."""
    vecs = np.array(vecs, dtype=complex)
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size:
            lead = col[nz[0]]
            vecs[:, j] = col * (abs(lead) / lead)
    return vecs


def min_eigenvalue(a) -> float:
    return float(np.linalg.eigvalsh(hermitize(_square(a)))[0])


def is_psd(a, tol: float = PSD_TOL) -> bool:
    """True iff the smallest eigenvalue of ``a`` is at least ``-tol * d``."""
    a = require_hermitian(a)
    return min_eigenvalue(a) >= -tol * a.shape[0]


# -- Hermitian basis ----------------------------------------------------------


@dataclass(frozen=True)
class HermitianBasis:
    """Orthonormal basis of the d×d Hermitian matrices.

    ``elements[0]`` is I/sqrt(d); then the symmetric off-diagonal elements,
    the antisymmetric ones (both over pairs j<k in lexicographic order), and
    finally the d-1 traceless diagonal elements.
    """

    dim: int
    elements: np.ndarray  # shape (d*d, d, d)

    def __len__(self) -> int:
        return self.elements.shape[0]

    @property
    def labels(self) -> list[str]:
        d = self.dim
        pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
        return (
            ["id"]
            + [f"sym{j}{k}" for j, k in pairs]
            + [f"asym{j}{k}" for j, k in pairs]
            + [f"diag{l}" for l in range(1, d)]
        )


@lru_cache(maxsize=None)
def hermitian_basis(d: int) -> HermitianBasis:
    if int(d) != d or d < 2:
        raise ValidationError("dimension", f"need d >= 2, got {d}")
    d = int(d)
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    els = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for j, k in pairs:
        g = np.zeros((d, d), dtype=complex)
        g[j, k] = g[k, j] = 1 / np.sqrt(2)
        els.append(g)
    for j, k in pairs:
        g = np.zeros((d, d), dtype=complex)
        g[j, k] = -1j / np.sqrt(2)
        g[k, j] = 1j / np.sqrt(2)
        els.append(g)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        els.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    elements = np.array(els)
    elements.setflags(write=False)
    return HermitianBasis(d, elements)


def vectorize(a, basis: HermitianBasis | None = None) -> np.ndarray:
    """Real coordinates ``c_i = tr(G_i a)`` of a Hermitian matrix."""
    a = require_hermitian(a)
    basis = basis or hermitian_basis(a.shape[0])
    if a.shape[0] != basis.dim:
        raise ValidationError("shape", f"matrix dim {a.shape[0]} vs basis dim {basis.dim}")
    return vectorize_many(a[None], basis)[0]


def vectorize_many(mats: np.ndarray, basis: HermitianBasis) -> np.ndarray:
    """Vectorize a stack of Hermitian matrices (no validation), shape (n, d*d)."""
    # tr(G a) with G Hermitian is sum_ij conj(G_ij) a_ij
    return np.einsum("kij,nij->nk", basis.elements.conj(), mats).real


def devectorize(coords, basis: HermitianBasis) -> np.ndarray:
    coords = np.asarray(coords, dtype=float)
    if coords.shape[-1] != len(basis):
        raise ValidationError("shape", f"need {len(basis)} coordinates, got {coords.shape[-1]}")
    return np.tensordot(coords, basis.elements, axes=(-1, 0))


# -- polar decomposition ------------------------------------------------------


def polar_decompose(a) -> tuple[np.ndarray, np.ndarray]:
    """Left polar decomposition ``a = unitary @ positive``.

    ``positive = sqrt(a† a)``. For singular ``a`` the unitary is completed by
    pairing left and right singular vectors; singular vectors are rephased
    with the same convention as :func:`eigh_desc`.
    """
    a = _square(a)
    w, s, vh = np.linalg.svd(a)
    v = vh.conj().T
    v_fixed = fix_phases(v)
    # same phase on the paired left vector keeps w diag(s) v† unchanged
    phases = np.einsum("ij,ij->j", v.conj(), v_fixed)
    w = w * phases[None, :]
    unitary = w @ v_fixed.conj().T
    positive = hermitize((v_fixed * s[None, :]) @ v_fixed.conj().T)
    return unitary, positive

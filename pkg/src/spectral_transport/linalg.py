"""Dense complex linear algebra for small spectral triples.

Matrices are plain ``numpy`` complex128 arrays. The helpers here validate
shapes and Hermiticity once, then the rest of the package trusts them.
"""
from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-12
KERNEL_RTOL = 1e-10


class DomainError(ValueError):
    """Raised when an input lies outside an operation's domain."""


def as_matrix(m) -> np.ndarray:
    a = np.array(m, dtype=complex)
    if a.ndim != 2:
        raise DomainError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix has non-finite entries")
    return a


def hermitian(m) -> np.ndarray:
    """Return ``m`` as a validated Hermitian complex matrix."""
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DomainError(f"Hermitian operator must be square, got {a.shape}")
    scale = 1.0 + (np.abs(a).max() if a.size else 0.0)
    if a.size and np.abs(a - a.conj().T).max() > HERMITIAN_TOL * scale:
        raise DomainError("matrix is not Hermitian")
    return a


def operator_norm(m) -> float:
    """Largest singular value, via the eigenvalues of M^dagger M."""
    a = as_matrix(m)
    if a.size == 0:
        raise DomainError("operator norm of an empty matrix")
    peak = np.abs(a).max()
    if peak == 0.0:
        return 0.0
    # keeps the Gram matrix clear of overflow and underflow; parts are divided
    # separately since complex division by a subnormal overflows
    a = a.real / peak + 1j * (a.imag / peak)
    # the smaller Gram matrix has the same nonzero spectrum
    gram = a.conj().T @ a if a.shape[1] <= a.shape[0] else a @ a.conj().T
    top = np.linalg.eigvalsh(gram)[-1]
    return float(peak * np.sqrt(max(top, 0.0)))


def commutator(d, a) -> np.ndarray:
    d = np.asarray(d, dtype=complex)
    a = np.asarray(a, dtype=complex)
    if d.shape != a.shape or d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise DomainError(f"commutator of mismatched shapes {d.shape} and {a.shape}")
    return d @ a - a @ d


def kernel_basis(images) -> np.ndarray:
    """Orthonormal basis of the kernel of a real-linear map into matrices.

    ``images`` is a sequence holding the image of each standard basis vector
    of the real parameter space. The complex images are stacked into a real
    system and singular values below ``KERNEL_RTOL`` times the largest one
    count as zero. Returns an array of shape ``(k, p)``, one basis vector per
    row.
    """
    images = [np.asarray(x, dtype=complex) for x in images]
    p = len(images)
    if p == 0:
        return np.zeros((0, 0))
    flat = np.stack([x.ravel() for x in images], axis=1)
    system = np.vstack([flat.real, flat.imag])
    if system.shape[0] == 0:
        return np.eye(p)
    _, s, vt = np.linalg.svd(system, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        return np.eye(p)
    rank = int(np.sum(s > KERNEL_RTOL * s[0]))
    return vt[rank:].copy()

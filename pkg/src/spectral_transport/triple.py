"""Finite spectral triples, their states and self-adjoint elements.

Two algebras are supported: the commutative algebra C^n acting diagonally
(each coordinate may occupy several Hilbert-space slots) and a single full
matrix block M_n(C) acting on C^n. Indices are 0-based throughout the
library; the CLI translates to 1-based names.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .linalg import DomainError, hermitian

STATE_TOL = 1e-12


@dataclass(frozen=True)
class Commutative:
    """C^n; ``slots[i]`` lists the Hilbert-space indices carrying coordinate i."""

    n: int
    slots: tuple[tuple[int, ...], ...]

    @classmethod
    def unit_multiplicity(cls, n: int) -> "Commutative":
        return cls(n, tuple((i,) for i in range(n)))

    @property
    def dim_h(self) -> int:
        return sum(len(s) for s in self.slots)

    def __post_init__(self):
        if self.n < 1 or len(self.slots) != self.n:
            raise DomainError(f"need {self.n} slot sets, got {len(self.slots)}")
        flat = [k for s in self.slots for k in s]
        if any(len(s) == 0 for s in self.slots):
            raise DomainError("every coordinate needs at least one slot")
        if sorted(flat) != list(range(len(flat))):
            raise DomainError("slot sets must partition the Hilbert-space indices")


@dataclass(frozen=True)
class FullMatrix:
    n: int

    @property
    def dim_h(self) -> int:
        return self.n

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("matrix block size must be positive")


Algebra = Union[Commutative, FullMatrix]


@dataclass(frozen=True, eq=False)
class FiniteSpectralTriple:
    algebra: Algebra
    dirac: np.ndarray

    def __post_init__(self):
        d = hermitian(self.dirac)
        if d.shape[0] != self.algebra.dim_h:
            raise DomainError(
                f"Dirac operator has dimension {d.shape[0]}, Hilbert space has {self.algebra.dim_h}"
            )
        d.setflags(write=False)
        object.__setattr__(self, "dirac", d)

    @property
    def dim_h(self) -> int:
        return self.algebra.dim_h

    @property
    def is_commutative(self) -> bool:
        return isinstance(self.algebra, Commutative)

    def __eq__(self, other):
        if not isinstance(other, FiniteSpectralTriple):
            return NotImplemented
        return self.algebra == other.algebra and np.array_equal(self.dirac, other.dirac)

    def __hash__(self):
        return hash((self.algebra, self.dirac.tobytes()))


@dataclass(frozen=True, eq=False)
class Diagonal:
    """Element (z_1, ..., z_n) of C^n."""

    z: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z", np.asarray(self.z, dtype=complex).ravel())

    @property
    def is_selfadjoint(self) -> bool:
        return bool(np.all(self.z.imag == 0))


@dataclass(frozen=True, eq=False)
class MatrixElement:
    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError(f"matrix element must be square, got {a.shape}")
        object.__setattr__(self, "a", a)

    @property
    def is_selfadjoint(self) -> bool:
        return bool(np.allclose(self.a, self.a.conj().T, rtol=0, atol=1e-12))


AlgebraElement = Union[Diagonal, MatrixElement]


@dataclass(frozen=True, eq=False)
class ProbabilityState:
    """State of C^n given by weights on the pure states delta_i."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size == 0 or not np.all(np.isfinite(w)):
            raise DomainError("weights must be a nonempty finite vector")
        if w.min() < -STATE_TOL:
            raise DomainError(f"negative weight {w.min()}")
        if abs(w.sum() - 1.0) > STATE_TOL:
            raise DomainError(f"weights sum to {w.sum()!r}, not 1")
        w = np.clip(w, 0.0, None)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True, eq=False)
class DensityState:
    """State of M_n(C) given by a density matrix."""

    rho: np.ndarray

    def __post_init__(self):
        r = hermitian(self.rho)
        if abs(np.trace(r).real - 1.0) > STATE_TOL:
            raise DomainError(f"density matrix has trace {np.trace(r).real!r}")
        if np.linalg.eigvalsh(r)[0] < -STATE_TOL:
            raise DomainError("density matrix is not positive semidefinite")
        r.setflags(write=False)
        object.__setattr__(self, "rho", r)

    def is_pure(self, tol: float = 1e-10) -> bool:
        ev = np.linalg.eigvalsh(self.rho)
        return bool(abs(ev[-1] - 1.0) <= tol)


State = Union[ProbabilityState, DensityState]


def _check_pair(triple: FiniteSpectralTriple, item) -> None:
    alg = triple.algebra
    if isinstance(alg, Commutative):
        ok = isinstance(item, (Diagonal, ProbabilityState))
        size = item.z.size if isinstance(item, Diagonal) else getattr(item, "weights", np.empty(0)).size
    else:
        ok = isinstance(item, (MatrixElement, DensityState))
        size = (item.a if isinstance(item, MatrixElement) else getattr(item, "rho", np.empty((0, 0)))).shape[0]
    if not ok:
        raise DomainError(f"{type(item).__name__} does not belong to a {type(alg).__name__} algebra")
    if size != alg.n:
        raise DomainError(f"expected {alg.n} coordinates, got {size}")


def represent(triple: FiniteSpectralTriple, a: AlgebraElement) -> np.ndarray:
    """Operator by which ``a`` acts on the Hilbert space of ``triple``."""
    _check_pair(triple, a)
    if isinstance(a, MatrixElement):
        return a.a.copy()
    diag = np.empty(triple.dim_h, dtype=complex)
    for value, slot in zip(a.z, triple.algebra.slots):
        diag[list(slot)] = value
    return np.diag(diag)


def unit(triple: FiniteSpectralTriple) -> AlgebraElement:
    n = triple.algebra.n
    if triple.is_commutative:
        return Diagonal(np.ones(n))
    return MatrixElement(np.eye(n))


def evaluate(state: State, a: AlgebraElement) -> complex:
    if isinstance(state, ProbabilityState) and isinstance(a, Diagonal):
        if state.weights.size != a.z.size:
            raise DomainError("state and element have different sizes")
        return complex(state.weights @ a.z)
    if isinstance(state, DensityState) and isinstance(a, MatrixElement):
        if state.rho.shape != a.a.shape:
            raise DomainError("state and element have different sizes")
        return complex(np.trace(state.rho @ a.a))
    raise DomainError(f"cannot evaluate {type(state).__name__} on {type(a).__name__}")


def pure_state(triple: FiniteSpectralTriple, i: int) -> ProbabilityState:
    """The evaluation state delta_i of C^n (0-based ``i``)."""
    if not triple.is_commutative:
        raise DomainError("pure states of a matrix algebra are given by bloch_pure")
    n = triple.algebra.n
    if not 0 <= i < n:
        raise DomainError(f"pure-state index {i} out of range for n={n}")
    w = np.zeros(n)
    w[i] = 1.0
    return ProbabilityState(w)


_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def bloch_density(r: Sequence[float]) -> np.ndarray:
    """Density matrix (I + r.sigma)/2 for a Bloch vector ``r`` with |r| <= 1."""
    rx, ry, rz = (float(x) for x in r)
    return 0.5 * (np.eye(2) + rx * _PAULI[0] + ry * _PAULI[1] + rz * _PAULI[2])


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    return np.array([np.trace(rho @ s).real for s in _PAULI])


def bloch_pure(theta: float, phi: float) -> DensityState:
    r = (np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta))
    return DensityState(bloch_density(r))


def mix(s1: State, s2: State, lam: float) -> State:
    """Convex combination lam*s1 + (1-lam)*s2."""
    if isinstance(s1, ProbabilityState) and isinstance(s2, ProbabilityState):
        w = lam * s1.weights + (1.0 - lam) * s2.weights
        return ProbabilityState(w / w.sum())
    if isinstance(s1, DensityState) and isinstance(s2, DensityState):
        return DensityState(lam * s1.rho + (1.0 - lam) * s2.rho)
    raise DomainError("cannot mix states of different algebras")


def selfadjoint_basis(triple: FiniteSpectralTriple) -> list[AlgebraElement]:
    """A real basis of the self-adjoint part of the algebra.

    Commutative: the coordinate vectors. Full matrix: E_jj, then
    (E_jk + E_kj)/sqrt(2) and i(E_jk - E_kj)/sqrt(2) for j < k, which is
    orthonormal for the Hilbert-Schmidt inner product.
    """
    n = triple.algebra.n
    if triple.is_commutative:
        return [Diagonal(np.eye(n)[i]) for i in range(n)]
    basis: list[AlgebraElement] = []
    for j in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[j, j] = 1.0
        basis.append(MatrixElement(e))
    s = 1.0 / np.sqrt(2.0)
    for j in range(n):
        for k in range(j + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[j, k] = e[k, j] = s
            basis.append(MatrixElement(e))
            e = np.zeros((n, n), dtype=complex)
            e[j, k], e[k, j] = 1j * s, -1j * s
            basis.append(MatrixElement(e))
    return basis


def element_from_params(triple: FiniteSpectralTriple, z: np.ndarray) -> AlgebraElement:
    """Self-adjoint element with coordinates ``z`` in :func:`selfadjoint_basis`."""
    z = np.asarray(z, dtype=float)
    if triple.is_commutative:
        return Diagonal(z.astype(complex))
    basis = selfadjoint_basis(triple)
    if z.size != len(basis):
        raise DomainError(f"expected {len(basis)} parameters, got {z.size}")
    return MatrixElement(sum(c * b.a for c, b in zip(z, basis)))

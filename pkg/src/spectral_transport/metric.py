"""Spectral distance between states of a finite spectral triple.

The distance is the supremum of |phi(a) - psi(a)| over self-adjoint ``a``
with ||[D, a]|| <= 1. Writing ``a`` in a real basis of the self-adjoint
part, the objective is a linear functional ``c`` and the constraint is a
spectral-norm ball of the linear map ``z -> [D, a(z)]``. The solver

1. removes the kernel of that map (it always contains the unit), returning
   +inf when ``c`` does not vanish on it;
2. minimises ||[D, a(z)]|| over the hyperplane c(z) = 1 inside the
   orthogonal complement of the kernel, whose optimum is 1/distance;
3. runs a projected subgradient warm start, a log-sum-exp smoothing
   continuation, and a compass-search polish;
4. builds a dual matrix from the smoothed eigenprojectors, giving a
   rigorous upper bound on the distance. The gap between that bound and the
   witness value is reported as ``certified_gap``.
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .linalg import DomainError, commutator, kernel_basis
from .triple import (
    AlgebraElement,
    DensityState,
    ProbabilityState,
    FiniteSpectralTriple,
    State,
    element_from_params,
    pure_state,
    represent,
    selfadjoint_basis,
)

log = logging.getLogger(__name__)

ZERO_FUNCTIONAL_TOL = 1e-14
KERNEL_FUNCTIONAL_RTOL = 1e-9
EARLY_STOP_FRACTION = 1e-3


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-6
    max_iter: int = 50_000
    polish_tol: float = 1e-9
    warm_iter: int = 100
    smoothing_levels: tuple[float, ...] = (1e-2, 1e-4, 1e-6, 1e-8, 1e-9)


class NonConvergenceError(RuntimeError):
    """The solver stopped before certifying the requested tolerance.

    ``lower`` is attained by a witness; ``upper`` is the dual bound.
    """

    def __init__(self, message, lower, upper, pair=None):
        super().__init__(message)
        self.lower = lower
        self.upper = upper
        self.pair = pair


@dataclass(frozen=True, eq=False)
class DistanceResult:
    value: float
    witness: Optional[AlgebraElement]
    iterations: int
    certified_gap: float

    @property
    def is_infinite(self) -> bool:
        return np.isinf(self.value)


@dataclass(frozen=True, eq=False)
class CostMatrix:
    """Symmetric matrix of pure-state distances with zero diagonal."""

    entries: np.ndarray

    def __post_init__(self):
        c = np.array(self.entries, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise DomainError(f"cost matrix must be square, got {c.shape}")
        if np.isnan(c).any() or (c < 0).any():
            raise DomainError("cost entries must be nonnegative")
        if not np.array_equal(c, c.T):
            raise DomainError("cost matrix must be symmetric")
        if np.any(np.diag(c) != 0):
            raise DomainError("cost matrix must have zero diagonal")
        c.setflags(write=False)
        object.__setattr__(self, "entries", c)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def all_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.entries)))

    def max_triangle_violation(self) -> float:
        """max over finite triples of c_ik - c_ij - c_jk (<= 0 for a metric)."""
        c = self.entries
        through = c[:, :, None] + c[None, :, :]  # [i, j, k] = c_ij + c_jk
        direct = np.broadcast_to(c[:, None, :], through.shape)
        ok = np.isfinite(through) & np.isfinite(direct)
        if not ok.any():
            return 0.0
        return float(max(0.0, (direct[ok] - through[ok]).max()))


class _Problem:
    """The min-norm program restricted to the hyperplane c(z) = 1."""

    def __init__(self, z0, directions, h0, hs):
        self.z0 = z0
        self.directions = directions  # (p, q): columns span the hyperplane directions
        self.h0 = h0  # i [D, a(z0)], Hermitian
        self.hs = hs  # i [D, a(N_k)], Hermitian, shape (q, m, m)
        self._flat = hs.reshape(len(hs), h0.size)

    def matrix(self, w):
        if not self.hs.size:
            return self.h0
        return self.h0 + (w @ self._flat).reshape(self.h0.shape)

    def norm(self, w) -> float:
        ev = np.linalg.eigvalsh(self.matrix(w))
        return float(max(ev[-1], -ev[0]))

    def subgradient(self, w):
        ev, vecs = np.linalg.eigh(self.matrix(w))
        k = -1 if ev[-1] >= -ev[0] else 0
        x = vecs[:, k]
        sign = 1.0 if k == -1 else -1.0
        g = sign * np.real(np.einsum("i,kij,j->k", x.conj(), self.hs, x))
        return float(abs(ev[k])), g

    def _softmax(self, w, mu):
        ev, vecs = np.linalg.eigh(self.matrix(w))
        top = max(ev[-1], -ev[0])
        up = np.exp((ev - top) / mu)
        down = np.exp((-ev - top) / mu)
        total = up.sum() + down.sum()
        return top + mu * np.log(total), (up - down) / total, vecs

    def smoothed(self, w, mu):
        val, q, vecs = self._softmax(w, mu)
        # d/dw_k of mu*logsumexp = sum_i q_i x_i^H H_k x_i
        proj = np.einsum("ai,kab,bi->ki", vecs.conj(), self.hs, vecs).real
        return val, proj @ q

    def dual_bound(self, w, mu) -> float:
        """Lower bound on min ||H(w)|| from a trace-norm-feasible dual matrix."""
        _, q, vecs = self._softmax(w, mu)
        y = (vecs * q) @ vecs.conj().T
        if self.hs.size:
            flat = self.hs.reshape(len(self.hs), -1)
            gram = np.real(flat.conj() @ flat.T)
            resid = np.real(np.einsum("kab,ba->k", self.hs, y))
            gamma = np.linalg.solve(gram, resid)
            y = y - np.tensordot(gamma, self.hs, axes=1)
        y = 0.5 * (y + y.conj().T)
        trace_norm = np.abs(np.linalg.eigvalsh(y)).sum()
        if trace_norm == 0.0:
            return 0.0
        return float(np.real(np.trace(y @ self.h0)) / trace_norm)


def _check_state(triple: FiniteSpectralTriple, state) -> None:
    n = triple.algebra.n
    if triple.is_commutative:
        ok = isinstance(state, ProbabilityState) and state.weights.size == n
    else:
        ok = isinstance(state, DensityState) and state.rho.shape == (n, n)
    if not ok:
        raise DomainError(f"{type(state).__name__} is not a state of this triple")


class _LinearModel:
    """Per-triple data: the self-adjoint basis, its commutators and their kernel."""

    def __init__(self, triple: FiniteSpectralTriple):
        self.basis = selfadjoint_basis(triple)
        self.images = [commutator(triple.dirac, represent(triple, b)) for b in self.basis]
        self.kernel = kernel_basis(self.images)
        self.commutative = triple.is_commutative
        if not self.commutative:
            self._stacked_basis = np.stack([b.a for b in self.basis])

    def functional(self, phi, psi) -> np.ndarray:
        """Coordinates of phi - psi on the self-adjoint basis."""
        if self.commutative:
            return np.asarray(phi.weights - psi.weights, dtype=float)
        delta = phi.rho - psi.rho
        return np.real(np.einsum("ab,kba->k", delta, self._stacked_basis))


@lru_cache(maxsize=64)
def _model(triple: FiniteSpectralTriple) -> _LinearModel:
    return _LinearModel(triple)


def _build_problem(images, c, kernel):
    p = c.size
    if kernel.shape[0]:
        c = c - kernel.T @ (kernel @ c)
    z0 = c / (c @ c)
    span = np.vstack([kernel, c[None, :] / np.linalg.norm(c)]) if kernel.shape[0] else c[None, :] / np.linalg.norm(c)
    _, s, vt = np.linalg.svd(span, full_matrices=True)
    directions = vt[span.shape[0]:].T  # (p, q)
    stacked = np.stack(images)  # (p, m, m)
    h0 = 1j * np.tensordot(z0, stacked, axes=1)
    hs = 1j * np.tensordot(directions.T, stacked, axes=1) if directions.shape[1] else np.zeros((0,) + stacked.shape[1:], complex)
    h0 = 0.5 * (h0 + h0.conj().T)
    hs = 0.5 * (hs + np.conj(np.swapaxes(hs, 1, 2)))
    return _Problem(z0, directions, h0, hs)


def _subgradient(prob: _Problem, w, iters, step0):
    best_w, best = w.copy(), prob.norm(w)
    for k in range(iters):
        val, g = prob.subgradient(w)
        if val < best:
            best, best_w = val, w.copy()
        gn = np.linalg.norm(g)
        if gn == 0.0:
            break
        w = w - (step0 / np.sqrt(k + 1.0)) * g / gn
    return best_w, best


def _compass(prob: _Problem, w, step, tol, budget):
    best = prob.norm(w)
    q = w.size
    iters = 0
    while step > tol and iters < budget:
        iters += 1
        improved = False
        for k in range(q):
            for sgn in (1.0, -1.0):
                trial = w.copy()
                trial[k] += sgn * step
                val = prob.norm(trial)
                if val < best:
                    w, best, improved = trial, val, True
                    break
            if improved:
                break
        if not improved:
            step *= 0.5
    return w, best, iters


def spectral_distance(
    triple: FiniteSpectralTriple,
    phi: State,
    psi: State,
    opts: Optional[SolverOptions] = None,
) -> DistanceResult:
    """Spectral distance between two states of ``triple``."""
    opts = opts or SolverOptions()
    for s in (phi, psi):
        _check_state(triple, s)
    model = _model(triple)
    images, kernel = model.images, model.kernel
    c = model.functional(phi, psi)
    p = c.size
    if np.linalg.norm(c) <= ZERO_FUNCTIONAL_TOL:
        return DistanceResult(0.0, element_from_params(triple, np.zeros(p)), 0, 0.0)

    if kernel.shape[0] and np.abs(kernel @ c).max() > KERNEL_FUNCTIONAL_RTOL * np.linalg.norm(c):
        return DistanceResult(float("inf"), None, 0, 0.0)

    prob = _build_problem(images, c, kernel)
    q = prob.directions.shape[1]
    w = np.zeros(q)
    iters = 0
    g_lb = 0.0
    if q:
        scale = np.linalg.norm(prob.z0)
        warm = min(opts.warm_iter, opts.max_iter)
        w, _ = _subgradient(prob, w, warm, 0.5 * scale)
        iters += warm
        g_ref = prob.norm(w)
        for rel in opts.smoothing_levels:
            mu = rel * g_ref
            budget = opts.max_iter - iters
            if budget <= 0:
                break
            res = minimize(
                prob.smoothed, w, args=(mu,), jac=True, method="BFGS",
                options={"maxiter": budget, "gtol": 1e-12 * g_ref},
            )
            iters += int(res.nit)
            # any dual matrix gives a valid bound, so keep the best one seen
            g_lb = max(g_lb, prob.dual_bound(res.x, mu))
            if prob.norm(res.x) <= prob.norm(w) + mu * np.log(4 * prob.h0.shape[0]):
                w = res.x
            g_w = prob.norm(w)
            if g_lb > 0 and 1.0 / g_lb - 1.0 / g_w <= EARLY_STOP_FRACTION * opts.tol:
                break
        w, _, used = _compass(prob, w, 1e-3 * scale, opts.polish_tol * scale, max(opts.max_iter - iters, 0))
        iters += used

    g = prob.norm(w)
    if q:
        for rel in opts.smoothing_levels:
            g_lb = max(g_lb, prob.dual_bound(w, rel * g))
    else:
        g_lb = g
    value = 1.0 / g
    upper = 1.0 / g_lb if g_lb > 0 else float("inf")
    gap = max(0.0, upper - value)
    if gap > opts.tol:
        raise NonConvergenceError(
            f"spectral distance not certified: [{value:.12g}, {upper:.12g}] after {iters} iterations",
            value, upper,
        )
    if iters > opts.max_iter:
        raise NonConvergenceError(f"exceeded {opts.max_iter} iterations", value, upper)
    z = (prob.z0 + prob.directions @ w) / g
    return DistanceResult(value, element_from_params(triple, z), iters, gap)


def _worker_count() -> int:
    raw = os.environ.get("SPECTRAL_TRANSPORT_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        n = 1
    return (os.cpu_count() or 1) if n <= 0 else n


def _pairwise(triple, states, opts) -> CostMatrix:
    n = len(states)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def run(pair):
        i, j = pair
        try:
            return spectral_distance(triple, states[i], states[j], opts).value
        except NonConvergenceError as err:
            raise NonConvergenceError(f"pair {pair}: {err}", err.lower, err.upper, pair) from err

    workers = _worker_count()
    if workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(workers) as pool:
            values = list(pool.map(run, pairs))
    else:
        values = [run(pr) for pr in pairs]
    cost = np.zeros((n, n))
    for (i, j), v in zip(pairs, values):
        cost[i, j] = cost[j, i] = v
    return CostMatrix(cost)


def cost_matrix(triple: FiniteSpectralTriple, opts: Optional[SolverOptions] = None) -> CostMatrix:
    """Pairwise spectral distances between the pure states of C^n."""
    if not triple.is_commutative:
        raise DomainError("cost_matrix needs a commutative algebra; use sampled_cost_matrix")
    states = [pure_state(triple, i) for i in range(triple.algebra.n)]
    return _pairwise(triple, states, opts)


def sampled_cost_matrix(
    triple: FiniteSpectralTriple,
    pure_states: Sequence[State],
    opts: Optional[SolverOptions] = None,
) -> CostMatrix:
    """Pairwise spectral distances between listed pure states of M_n(C)."""
    if triple.is_commutative:
        raise DomainError("sampled_cost_matrix needs a full matrix algebra")
    for k, s in enumerate(pure_states):
        if not hasattr(s, "rho") or not s.is_pure():
            raise DomainError(f"state {k} is not a rank-one density matrix")
    return _pairwise(triple, list(pure_states), opts)

"""Exact Wasserstein-1 distances on finite spaces.

The primal is the transportation problem, solved by the transportation
simplex: northwest-corner start on supplies perturbed by an epsilon cascade,
stepping-stone pivots along the basis-tree cycle, Bland's rule for the
entering and leaving cells. Infinite costs are excluded edges; they carry a
symbolic big-M cost compared lexicographically, so the optimum first
minimises the mass routed through excluded edges and the problem is
infeasible exactly when that mass is positive.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .linalg import DomainError
from .metric import CostMatrix, SolverOptions, cost_matrix
from .triple import FiniteSpectralTriple, ProbabilityState

WEIGHT_TOL = 1e-12
ZERO_WEIGHT = 1e-15
INFEASIBLE_MASS = 1e-13


@dataclass(frozen=True, eq=False)
class TransportPlan:
    pi: np.ndarray
    mu: np.ndarray
    nu: np.ndarray

    def marginal_error(self) -> float:
        return float(max(np.abs(self.pi.sum(axis=1) - self.mu).max(), np.abs(self.pi.sum(axis=0) - self.nu).max()))


@dataclass(frozen=True, eq=False)
class DualPotential:
    f: np.ndarray

    def lipschitz_violation(self, cost) -> float:
        """max of f_i - f_j - c_ij over finite costs (<= 0 when 1-Lipschitz)."""
        c = _entries(cost)
        diff = self.f[:, None] - self.f[None, :] - c
        finite = np.isfinite(c)
        return float(diff[finite].max()) if finite.any() else 0.0


@dataclass(frozen=True, eq=False)
class WassersteinResult:
    value: float
    plan: TransportPlan
    potential: Optional[DualPotential]
    cost: CostMatrix


def _entries(cost: Union[CostMatrix, np.ndarray]) -> np.ndarray:
    return cost.entries if isinstance(cost, CostMatrix) else np.asarray(cost, dtype=float)


def _weights(w, name: str) -> np.ndarray:
    w = np.asarray(w, dtype=float).ravel()
    if w.size == 0 or not np.all(np.isfinite(w)) or w.min() < 0:
        raise DomainError(f"{name} must be a finite nonnegative vector")
    if abs(w.sum() - 1.0) > WEIGHT_TOL:
        raise DomainError(f"{name} sums to {w.sum()!r}, not 1")
    return np.where(w < ZERO_WEIGHT, 0.0, w)


class _TransportSimplex:
    """Transportation simplex on an n x m instance with positive supplies and demands."""

    def __init__(self, cost: np.ndarray, supply: np.ndarray, demand: np.ndarray):
        self.n, self.m = cost.shape
        self.blocked = ~np.isfinite(cost)
        self.cost = np.where(self.blocked, 0.0, cost)
        self.supply = supply
        self.demand = demand
        scale = 1.0 + (self.cost.max() if self.cost.size else 0.0)
        self.rtol = 1e-12 * scale

    def _northwest(self, a, b):
        a, b = a.copy(), b.copy()
        basis, flow = [], {}
        i = j = 0
        while i < self.n and j < self.m:
            q = min(a[i], b[j])
            basis.append((i, j))
            flow[(i, j)] = q
            a[i] -= q
            b[j] -= q
            if i == self.n - 1:
                j += 1
            elif j == self.m - 1:
                i += 1
            elif a[i] <= b[j]:
                i += 1
            else:
                j += 1
        return basis, flow

    def _adjacency(self, basis):
        adj = {k: [] for k in range(self.n + self.m)}
        for i, j in basis:
            adj[i].append(self.n + j)
            adj[self.n + j].append(i)
        return adj

    def _potentials(self, basis):
        # (big-M part, real part) for every row and column node
        adj = self._adjacency(basis)
        pot = {0: (0.0, 0.0)}
        queue = deque([0])
        while queue:
            node = queue.popleft()
            for nxt in adj[node]:
                if nxt in pot:
                    continue
                i, j = (node, nxt - self.n) if node < self.n else (nxt, node - self.n)
                cm, cr = float(self.blocked[i, j]), self.cost[i, j]
                pm, pr = pot[node]
                pot[nxt] = (cm - pm, cr - pr)
                queue.append(nxt)
        u = [pot[i] for i in range(self.n)]
        v = [pot[self.n + j] for j in range(self.m)]
        return u, v

    def _entering(self, basis, u, v):
        inbasis = set(basis)
        for i in range(self.n):
            for j in range(self.m):
                if (i, j) in inbasis:
                    continue
                rm = float(self.blocked[i, j]) - u[i][0] - v[j][0]
                rr = self.cost[i, j] - u[i][1] - v[j][1]
                if rm < -0.5 or (abs(rm) < 0.5 and rr < -self.rtol):
                    return i, j
        return None

    def _path(self, basis, start, goal):
        adj = self._adjacency(basis)
        parent = {start: None}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            if node == goal:
                break
            for nxt in adj[node]:
                if nxt not in parent:
                    parent[nxt] = node
                    queue.append(nxt)
        path = [goal]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]])
        return path[::-1]

    def _tree_flows(self, basis, a, b):
        """Flows on a spanning-tree basis reproducing supplies a and demands b."""
        a, b = a.astype(float).copy(), b.astype(float).copy()
        adj = self._adjacency(basis)
        degree = {k: len(v) for k, v in adj.items()}
        remaining = set(basis)
        flow = {}
        leaves = deque(k for k, d in degree.items() if d == 1)
        while remaining:
            node = leaves.popleft()
            if degree[node] != 1:
                continue
            if node < self.n:
                cell = next(c for c in remaining if c[0] == node)
                q = a[node]
            else:
                cell = next(c for c in remaining if c[1] == node - self.n)
                q = b[node - self.n]
            flow[cell] = q
            a[cell[0]] -= q
            b[cell[1]] -= q
            remaining.discard(cell)
            degree[node] -= 1
            other = cell[1] + self.n if node < self.n else cell[0]
            degree[other] -= 1
            if degree[other] == 1:
                leaves.append(other)
        return flow

    def solve(self):
        eps = 1e-9 / (self.n + 1)
        a = self.supply + eps
        b = self.demand.copy()
        b[-1] += self.n * eps
        basis, flow = self._northwest(a, b)
        pivots = 0
        while True:
            u, v = self._potentials(basis)
            enter = self._entering(basis, u, v)
            if enter is None:
                break
            i, j = enter
            path = self._path(basis, self.n + j, i)
            # cells along the cycle: entering cell is +, then alternate
            cells = []
            for x, y in zip(path[:-1], path[1:]):
                cells.append((y, x - self.n) if x >= self.n else (x, y - self.n))
            minus = cells[0::2]
            plus = cells[1::2]
            theta = min(flow[c] for c in minus)
            leave = min(c for c in minus if flow[c] <= theta)
            for c in minus:
                flow[c] -= theta
            for c in plus:
                flow[c] += theta
            flow[enter] = theta
            basis.remove(leave)
            del flow[leave]
            basis.append(enter)
            pivots += 1
        exact = self._tree_flows(basis, self.supply, self.demand)
        pi = np.zeros((self.n, self.m))
        for (i, j), q in exact.items():
            pi[i, j] = q
        u, v = self._potentials(basis)
        return pi, np.array([x[1] for x in u]), np.array([x[1] for x in v]), pivots


def _solve(c: np.ndarray, mu: np.ndarray, nu: np.ndarray):
    rows = np.flatnonzero(mu > 0)
    cols = np.flatnonzero(nu > 0)
    sub = c[np.ix_(rows, cols)]
    pi_sub, u, v, _ = _TransportSimplex(sub, mu[rows], nu[cols]).solve()
    pi_sub = np.where(pi_sub < 0, np.where(pi_sub > -1e-12, 0.0, pi_sub), pi_sub)
    pi = np.zeros_like(c, dtype=float)
    pi[np.ix_(rows, cols)] = pi_sub
    blocked_mass = pi_sub[~np.isfinite(sub)].sum()
    if blocked_mass > INFEASIBLE_MASS:
        value = float("inf")
    else:
        value = float(np.sum(pi_sub[np.isfinite(sub)] * sub[np.isfinite(sub)]))
    return value, pi, (rows, u), (cols, v)


def wasserstein_primal(cost, mu, nu) -> tuple[float, TransportPlan]:
    """Minimal transport cost between ``mu`` and ``nu``; +inf if no finite plan exists."""
    c = _entries(cost)
    mu = _weights(mu, "mu")
    nu = _weights(nu, "nu")
    if c.shape != (mu.size, nu.size):
        raise DomainError(f"cost shape {c.shape} does not match weights ({mu.size}, {nu.size})")
    value, pi, _, _ = _solve(c, mu, nu)
    return value, TransportPlan(pi, mu, nu)


def metric_closure(c: np.ndarray) -> np.ndarray:
    """Shortest-path closure; equals ``c`` when ``c`` already satisfies the triangle inequality."""
    d = np.array(c, dtype=float)
    for k in range(d.shape[0]):
        d = np.minimum(d, d[:, k:k + 1] + d[k:k + 1, :])
    return d


def kantorovich_dual(cost, mu, nu) -> tuple[float, DualPotential]:
    """Maximise sum f (mu - nu) over potentials with f_i - f_j <= c_ij.

    The potential is the c-transform of the optimal column potentials of the
    transportation simplex, f_i = min_j (c_ij - v_j), shifted so that
    min f = 0.
    """
    c = _entries(cost)
    if not np.all(np.isfinite(c)):
        raise DomainError("kantorovich_dual does not support infinite costs; use wasserstein_primal")
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise DomainError("kantorovich_dual needs a square cost on a single space")
    mu = _weights(mu, "mu")
    nu = _weights(nu, "nu")
    if c.shape[0] != mu.size or mu.size != nu.size:
        raise DomainError("cost and weights have mismatched sizes")
    closed = metric_closure(c)
    _, _, _, (cols, v) = _solve(closed, mu, nu)
    f = (closed[:, cols] - v[None, :]).min(axis=1)
    f = f - f.min()
    return float(f @ (mu - nu)), DualPotential(f)


def spectral_wasserstein(
    triple: FiniteSpectralTriple,
    phi: ProbabilityState,
    psi: ProbabilityState,
    opts: Optional[SolverOptions] = None,
    cost: Optional[CostMatrix] = None,
) -> WassersteinResult:
    """Wasserstein-1 distance between states of C^n with the spectral distance as cost.

    ``cost`` may be passed to reuse a precomputed :func:`cost_matrix`.
    """
    if not triple.is_commutative:
        raise DomainError("spectral_wasserstein needs a commutative algebra")
    if not isinstance(phi, ProbabilityState) or not isinstance(psi, ProbabilityState):
        raise DomainError("states must be probability vectors")
    if cost is None:
        cost = cost_matrix(triple, opts)
    value, plan = wasserstein_primal(cost, phi.weights, psi.weights)
    potential = None
    if cost.all_finite:
        _, potential = kantorovich_dual(cost, phi.weights, psi.weights)
    return WassersteinResult(value, plan, potential, cost)

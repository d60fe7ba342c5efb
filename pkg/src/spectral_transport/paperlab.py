"""Numerical reproduction of the C^3 counterexample and companion checks.

The C^3 triple has the Dirac operator

    [[0, 0, a], [0, 0, b], [a, b, 0]]

and pure-state distances sqrt(1/a^2 + 1/b^2), 1/a, 1/b. For states whose
weight differences L1 = l1 - l1', L2 = l2 - l2' share a sign, the Wasserstein
distance with spectral cost is |L1|/a + |L2|/b (the two legs of a right
triangle) while the spectral distance is the hypotenuse
sqrt(L1^2/a^2 + L2^2/b^2).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from statistics import median
from typing import Iterable, Optional, Sequence

import numpy as np

from .linalg import DomainError
from .metric import CostMatrix, SolverOptions, cost_matrix, sampled_cost_matrix, spectral_distance
from .transport import spectral_wasserstein, wasserstein_primal
from .triple import (
    Commutative,
    DensityState,
    FiniteSpectralTriple,
    FullMatrix,
    ProbabilityState,
    bloch_density,
    bloch_vector,
    mix,
    pure_state,
)

INEQUALITY_TOL = 1e-6
SEGMENT_TOL = 1e-5
PROP1_TOL = 1e-4
DEFAULT_GRID_STEPS = tuple(round(0.05 * k, 2) for k in range(10))


class HypothesisError(ValueError):
    """The closed forms only cover weight differences of the same sign."""


@dataclass(frozen=True)
class C3Params:
    alpha: float
    beta: float
    allow_degenerate: bool = False

    def __post_init__(self):
        lo = 0.0 if self.allow_degenerate else np.nextafter(0.0, 1.0)
        if not (self.alpha >= lo and self.beta >= lo) or not math.isfinite(self.alpha + self.beta):
            raise DomainError(f"alpha and beta must be positive, got ({self.alpha}, {self.beta})")


def c3_dirac(alpha: float, beta: float) -> np.ndarray:
    return np.array([[0, 0, alpha], [0, 0, beta], [alpha, beta, 0]], dtype=complex)


def c3_triple(p: C3Params) -> FiniteSpectralTriple:
    return FiniteSpectralTriple(Commutative.unit_multiplicity(3), c3_dirac(p.alpha, p.beta))


def c3_pure_distances(p: C3Params) -> tuple[float, float, float]:
    """Closed-form d(d1, d2), d(d1, d3), d(d2, d3)."""
    a, b = p.alpha, p.beta
    return math.sqrt(1 / a**2 + 1 / b**2), 1 / a, 1 / b


def prop1_closed_forms(p: C3Params, lam1: float, lam2: float) -> tuple[float, float]:
    """(W_D, d_D) for same-sign weight differences."""
    if lam1 * lam2 < 0:
        raise HypothesisError(f"weight differences {lam1}, {lam2} have opposite signs")
    leg1, leg2 = abs(lam1) / p.alpha, abs(lam2) / p.beta
    return leg1 + leg2, math.hypot(leg1, leg2)


def prop1_states(lam1: float, lam2: float) -> tuple[ProbabilityState, ProbabilityState]:
    """A pair of C^3 states whose first two weights differ by (lam1, lam2).

    The state with the smaller weights sits at delta_3.
    """
    if lam1 * lam2 < 0:
        raise HypothesisError("use explicit states for opposite-sign differences")
    s = abs(lam1) + abs(lam2)
    if s > 1.0:
        raise DomainError(f"|L1| + |L2| = {s} exceeds 1; not realisable by states")
    bump = ProbabilityState([abs(lam1), abs(lam2), 1.0 - s])
    base = ProbabilityState([0.0, 0.0, 1.0])
    return (bump, base) if lam1 + lam2 >= 0 else (base, bump)


def default_grid() -> list[tuple[float, float]]:
    return [(x, y) for x in DEFAULT_GRID_STEPS for y in DEFAULT_GRID_STEPS if x + y <= 1.0]


@dataclass
class ComparisonReport:
    alpha: float
    beta: float
    lam1: float
    lam2: float
    d_value: float
    w_value: float
    gap: float
    closed_form_d: Optional[float] = None
    closed_form_w: Optional[float] = None
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def compare_states(
    triple: FiniteSpectralTriple,
    phi: ProbabilityState,
    psi: ProbabilityState,
    opts: Optional[SolverOptions] = None,
    cost: Optional[CostMatrix] = None,
) -> tuple[float, float]:
    d = spectral_distance(triple, phi, psi, opts).value
    w = spectral_wasserstein(triple, phi, psi, opts, cost=cost).value
    return d, w


def verify_prop1(
    p: C3Params,
    grid: Optional[Iterable[tuple[float, float]]] = None,
    opts: Optional[SolverOptions] = None,
    tol: float = PROP1_TOL,
) -> list[ComparisonReport]:
    triple = c3_triple(p)
    cost = cost_matrix(triple, opts)
    reports = []
    for lam1, lam2 in sorted(default_grid() if grid is None else grid):
        phi, psi = prop1_states(lam1, lam2)
        d, w = compare_states(triple, phi, psi, opts, cost)
        w_cf, d_cf = prop1_closed_forms(p, lam1, lam2)
        legs = (lam1 / p.alpha) ** 2 + (lam2 / p.beta) ** 2
        checks = {
            "w_closed_form": abs(w - w_cf) <= tol,
            "d_closed_form": abs(d - d_cf) <= tol,
            "hypotenuse": abs(d * d - legs) <= tol,
            "inequality": d <= w + INEQUALITY_TOL,
        }
        reports.append(ComparisonReport(p.alpha, p.beta, lam1, lam2, d, w, w - d, d_cf, w_cf, checks))
    return reports


def random_state(rng: np.random.Generator, n: int) -> ProbabilityState:
    """Uniform point of the simplex via normalised exponentials."""
    e = rng.exponential(size=n)
    return ProbabilityState(e / e.sum())


def random_dirac(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (a + a.conj().T)


def random_commutative_triple(rng: np.random.Generator, n_max: int = 5) -> FiniteSpectralTriple:
    n = int(rng.integers(2, n_max + 1))
    return FiniteSpectralTriple(Commutative.unit_multiplicity(n), random_dirac(rng, n))


@dataclass
class InequalityReport:
    seed: int
    trials: int
    violations: list = field(default_factory=list)
    max_gap: float = 0.0
    min_slack: float = math.inf

    @property
    def passed(self) -> bool:
        return not self.violations


def verify_inequality(
    triple: FiniteSpectralTriple,
    trials: int,
    seed: int,
    opts: Optional[SolverOptions] = None,
    tol: float = INEQUALITY_TOL,
) -> InequalityReport:
    """Check d_D <= W_D on ``trials`` random state pairs."""
    if not triple.is_commutative:
        raise DomainError("verify_inequality needs a commutative triple")
    rng = np.random.default_rng(seed)
    cost = cost_matrix(triple, opts)
    report = InequalityReport(seed, trials)
    n = triple.algebra.n
    for k in range(trials):
        phi, psi = random_state(rng, n), random_state(rng, n)
        d, w = compare_states(triple, phi, psi, opts, cost)
        slack = w - d
        report.max_gap = max(report.max_gap, slack)
        report.min_slack = min(report.min_slack, slack)
        if d > w + tol:
            report.violations.append(
                {"trial": k, "phi": phi.weights.tolist(), "psi": psi.weights.tolist(), "d": d, "w": w}
            )
    return report


@dataclass
class SegmentReport:
    i: int
    j: int
    rows: list = field(default_factory=list)  # (lam_a, lam_b, d, w)
    max_abs_diff: float = 0.0

    @property
    def passed(self) -> bool:
        return self.max_abs_diff <= SEGMENT_TOL


def verify_segment(
    triple: FiniteSpectralTriple,
    i: int,
    j: int,
    lambdas: Sequence[float],
    opts: Optional[SolverOptions] = None,
    cost: Optional[CostMatrix] = None,
) -> SegmentReport:
    """Compare d_D and W_D between points lam*delta_i + (1-lam)*delta_j."""
    cost = cost if cost is not None else cost_matrix(triple, opts)
    wi, wj = pure_state(triple, i), pure_state(triple, j)
    report = SegmentReport(i, j)
    for a_idx, la in enumerate(lambdas):
        for lb in lambdas[a_idx + 1:]:
            d, w = compare_states(triple, mix(wi, wj, la), mix(wi, wj, lb), opts, cost)
            report.rows.append((la, lb, d, w))
            if math.isinf(d) and math.isinf(w):
                continue
            report.max_abs_diff = max(report.max_abs_diff, abs(d - w))
    return report


def fibonacci_sphere(n: int) -> np.ndarray:
    """``n`` nearly uniform unit vectors on the 2-sphere (golden-angle spiral)."""
    k = np.arange(n) + 0.5
    z = 1.0 - 2.0 * k / n
    r = np.sqrt(1.0 - z * z)
    phi = math.pi * (3.0 - math.sqrt(5.0)) * k
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def eigen_pure_states(rho: DensityState) -> tuple[list[DensityState], np.ndarray]:
    """Spectral decomposition of a density matrix into rank-one projectors."""
    evals, vecs = np.linalg.eigh(rho.rho)
    evals = np.clip(evals, 0.0, None)
    evals = evals / evals.sum()
    projectors = [DensityState(np.outer(v, v.conj())) for v in vecs.T]
    return projectors, evals


def m2_equality_probe(
    dirac: np.ndarray,
    rho1: DensityState,
    rho2: DensityState,
    n_samples: int,
    opts: Optional[SolverOptions] = None,
) -> tuple[float, float]:
    """Spectral distance on M_2(C) against a sampled Wasserstein upper bound.

    The pure-state space is sampled by a Fibonacci sphere of ``n_samples``
    points, augmented by the eigenprojectors of both density matrices. Each
    state is represented by its spectral decomposition, and the transport
    runs on the full sampled cost matrix.
    """
    if n_samples < 8:
        raise DomainError("the probe needs at least 8 sample points")
    triple = FiniteSpectralTriple(FullMatrix(2), dirac)
    d = spectral_distance(triple, rho1, rho2, opts).value
    points = [DensityState(bloch_density(r)) for r in fibonacci_sphere(n_samples)]
    e1, p1 = eigen_pure_states(rho1)
    e2, p2 = eigen_pure_states(rho2)
    points += e1 + e2
    cost = sampled_cost_matrix(triple, points, opts)
    mu = np.zeros(len(points))
    nu = np.zeros(len(points))
    mu[n_samples:n_samples + 2] = p1
    nu[n_samples + 2:] = p2
    w, _ = wasserstein_primal(cost, mu, nu)
    return d, w


def dirac_bloch_axis(dirac: np.ndarray) -> np.ndarray:
    """Vector v with dirac = tr(dirac)/2 + v.sigma."""
    return 0.5 * bloch_vector(np.asarray(dirac, dtype=complex))


def finite_distance_pairs(dirac: np.ndarray, count: int, seed: int) -> list[tuple[DensityState, DensityState]]:
    """Seeded density-matrix pairs at finite spectral distance.

    On M_2(C) with dirac = d0 + v.sigma one has ||[D, a]|| = 2|v x a| for
    a = a0 + a.sigma, so the distance is finite only when the Bloch vectors
    differ orthogonally to v.
    """
    rng = np.random.default_rng(seed)
    axis = dirac_bloch_axis(dirac)
    axis = axis / np.linalg.norm(axis)
    pairs = []
    while len(pairs) < count:
        r1 = rng.normal(size=3)
        r1 *= rng.uniform(0.1, 0.9) / np.linalg.norm(r1)
        step = rng.normal(size=3)
        step -= (step @ axis) * axis
        step *= rng.uniform(0.1, 0.9) / np.linalg.norm(step)
        r2 = r1 + step
        if np.linalg.norm(r2) >= 0.95:
            continue
        pairs.append((DensityState(bloch_density(r1)), DensityState(bloch_density(r2))))
    return pairs


DEFAULT_M2_DIRAC = np.array([[1.0, 0.5 - 0.25j], [0.5 + 0.25j, -0.5]])


def verify_infinite_case(opts: Optional[SolverOptions] = None) -> dict:
    """The alpha = 0 triple disconnects delta_1 from the other pure states."""
    triple = c3_triple(C3Params(0.0, 1.0, allow_degenerate=True))
    d12 = spectral_distance(triple, pure_state(triple, 0), pure_state(triple, 1), opts)
    cost = cost_matrix(triple, opts)
    # moving mass between delta_2 and delta_3 stays inside one component
    inside = spectral_wasserstein(
        triple, ProbabilityState([0.2, 0.5, 0.3]), ProbabilityState([0.2, 0.1, 0.7]), opts, cost
    ).value
    across = spectral_wasserstein(
        triple, ProbabilityState([0.4, 0.3, 0.3]), ProbabilityState([0.2, 0.1, 0.7]), opts, cost
    ).value
    return {
        "d12": d12.value,
        "d12_iterations": d12.iterations,
        "w_inside": inside,
        "w_across": across,
        "passed": math.isinf(d12.value) and d12.iterations == 0 and math.isfinite(inside) and math.isinf(across),
    }


def _num(x: float):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def repro_paper(seed: int = 42, samples: int = 64, opts: Optional[SolverOptions] = None) -> dict:
    """Run every reproduction check and collect a JSON-ready report."""
    checks = []
    rng = np.random.default_rng(seed)

    rows = []
    for a, b in [(1.0, 1.0), (1.0, 2.0), (2.0, 1.0), (0.5, 3.0)]:
        p = C3Params(a, b)
        cost = cost_matrix(c3_triple(p), opts).entries
        expected = c3_pure_distances(p)
        got = (cost[0, 1], cost[0, 2], cost[1, 2])
        rows.append({"alpha": a, "beta": b, "computed": list(got), "expected": list(expected)})
    ok = all(abs(x - y) <= PROP1_TOL for r in rows for x, y in zip(r["computed"], r["expected"]))
    checks.append({"name": "pure_state_distances", "passed": ok, "details": rows})

    for a, b in [(1.0, 1.0), (1.0, 2.0), (2.0, 1.0)]:
        reports = verify_prop1(C3Params(a, b), opts=opts)
        failing = [asdict(r) for r in reports if not r.passed]
        checks.append({
            "name": f"prop1_alpha{a:g}_beta{b:g}",
            "passed": not failing,
            "details": {"points": len(reports), "failing": failing,
                        "max_gap": max(r.gap for r in reports)},
        })

    tri_reports = []
    for t in range(3):
        triple = random_commutative_triple(rng)
        rep = verify_inequality(triple, 20, seed + t, opts)
        tri_reports.append({"n": triple.algebra.n, "seed": seed + t, "violations": rep.violations,
                            "max_gap": rep.max_gap, "min_slack": rep.min_slack})
    c3rep = verify_inequality(c3_triple(C3Params(1.0, 1.0)), 100, seed, opts)
    tri_reports.append({"n": 3, "seed": seed, "violations": c3rep.violations,
                        "max_gap": c3rep.max_gap, "min_slack": c3rep.min_slack})
    checks.append({"name": "inequality", "passed": all(not r["violations"] for r in tri_reports),
                   "details": tri_reports})

    seg_rows = []
    for _ in range(3):
        triple = random_commutative_triple(rng)
        n = triple.algebra.n
        i, j = (int(x) for x in rng.choice(n, size=2, replace=False))
        lams = sorted(float(x) for x in rng.uniform(0, 1, size=3))
        rep = verify_segment(triple, i, j, lams, opts)
        seg_rows.append({"n": n, "i": i, "j": j, "max_abs_diff": rep.max_abs_diff})
    checks.append({"name": "segment_equality", "passed": all(r["max_abs_diff"] <= SEGMENT_TOL for r in seg_rows),
                   "details": seg_rows})

    opp = []
    triple = c3_triple(C3Params(1.0, 1.0))
    cost = cost_matrix(triple, opts)
    for phi_w, psi_w in [([0.5, 0.1, 0.4], [0.2, 0.4, 0.4]), ([0.1, 0.6, 0.3], [0.4, 0.2, 0.4])]:
        d, w = compare_states(triple, ProbabilityState(phi_w), ProbabilityState(psi_w), opts, cost)
        opp.append({"phi": phi_w, "psi": psi_w, "d": d, "w": w})
    checks.append({"name": "opposite_sign_inequality", "passed": all(r["d"] <= r["w"] + INEQUALITY_TOL for r in opp),
                   "details": opp})

    inf_case = verify_infinite_case(opts)
    checks.append({"name": "infinite_distance", "passed": inf_case["passed"],
                   "details": {k: _num(v) if isinstance(v, float) else v for k, v in inf_case.items()}})

    probe_rows = []
    sizes = (max(8, samples // 2), samples)
    for rho1, rho2 in finite_distance_pairs(DEFAULT_M2_DIRAC, 3, seed):
        vals = [m2_equality_probe(DEFAULT_M2_DIRAC, rho1, rho2, n, opts) for n in sizes]
        d = vals[0][0]
        ws = [v[1] for v in vals]
        bound = all(w >= d - INEQUALITY_TOL for w in ws)
        monotone = ws[1] <= ws[0] + 1.0 / sizes[0] or (math.isinf(ws[0]) and math.isinf(ws[1]))
        probe_rows.append({"d": _num(d), "w_grid": [_num(w) for w in ws], "sizes": list(sizes),
                           "upper_bound": bound, "non_increasing": bool(monotone)})
    checks.append({"name": "m2_probe", "passed": all(r["upper_bound"] and r["non_increasing"] for r in probe_rows),
                   "details": probe_rows})

    return {"seed": seed, "samples": samples, "passed": all(c["passed"] for c in checks), "checks": checks}


def probe_median_gaps(
    dirac: np.ndarray, sizes: Sequence[int], pairs: int, seed: int, opts: Optional[SolverOptions] = None
) -> dict:
    """Median of w_grid - d over seeded finite-distance pairs, for each sample size."""
    rows = finite_distance_pairs(dirac, pairs, seed)
    out = {}
    for n in sizes:
        gaps = []
        for rho1, rho2 in rows:
            d, w = m2_equality_probe(dirac, rho1, rho2, n, opts)
            gaps.append(w - d)
        out[n] = {"median_gap": median(gaps), "gaps": gaps}
    return out

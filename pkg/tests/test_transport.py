import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from oracles import random_metric, transport_vertex_enumeration
from spectral_transport.linalg import DomainError
from spectral_transport.metric import CostMatrix, cost_matrix
from spectral_transport.paperlab import C3Params, c3_triple
from spectral_transport.transport import (
    kantorovich_dual,
    metric_closure,
    spectral_wasserstein,
    wasserstein_primal,
)
from spectral_transport.triple import ProbabilityState


def test_point_masses_cost_their_distance():
    c = random_metric(np.random.default_rng(0), 4)
    mu, nu = np.eye(4)[1], np.eye(4)[3]
    value, plan = wasserstein_primal(c, mu, nu)
    assert value == pytest.approx(c[1, 3], abs=1e-14)
    assert plan.pi[1, 3] == pytest.approx(1.0)


def test_equal_measures_cost_nothing():
    c = random_metric(np.random.default_rng(1), 5)
    mu = np.array([0.1, 0.2, 0.3, 0.15, 0.25])
    value, plan = wasserstein_primal(c, mu, mu)
    assert value == pytest.approx(0.0, abs=1e-15)
    assert plan.marginal_error() <= 1e-12


def test_worked_example_matches_vertex_enumeration():
    c = np.array([[0.0, math.sqrt(2), 1.0], [math.sqrt(2), 0.0, 1.0], [1.0, 1.0, 0.0]])
    mu, nu = np.array([0.5, 0.3, 0.2]), np.array([0.2, 0.1, 0.7])
    value, _ = wasserstein_primal(c, mu, nu)
    assert value == pytest.approx(transport_vertex_enumeration(c, mu, nu), abs=1e-9)
    assert value == pytest.approx(0.5, abs=1e-12)


def test_two_point_dual():
    c = np.array([[0.0, 2.0], [2.0, 0.0]])
    value, f = kantorovich_dual(c, [0.75, 0.25], [0.25, 0.75])
    assert value == pytest.approx(1.0, abs=1e-14)
    assert f.f.min() == 0.0
    assert f.lipschitz_violation(c) <= 1e-14


def test_rectangular_against_linprog(rng):
    for _ in range(20):
        n, m = rng.integers(1, 7, size=2)
        c = rng.uniform(0, 5, size=(n, m))
        mu, nu = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(m))
        a = np.vstack([np.kron(np.eye(n), np.ones(m)), np.kron(np.ones(n), np.eye(m))])
        ref = linprog(c.ravel(), A_eq=a, b_eq=np.concatenate([mu, nu]), method="highs")
        value, plan = wasserstein_primal(c, mu, nu)
        assert value == pytest.approx(ref.fun, abs=1e-10)
        assert plan.marginal_error() <= 1e-10


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 8))
def test_strong_duality_on_metrics(seed, n):
    rng = np.random.default_rng(seed)
    c = random_metric(rng, n)
    mu, nu = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
    primal, plan = wasserstein_primal(c, mu, nu)
    dual, f = kantorovich_dual(c, mu, nu)
    assert abs(primal - dual) <= 1e-9
    assert plan.marginal_error() <= 1e-10
    assert f.lipschitz_violation(c) <= 1e-10
    assert np.all(plan.pi >= 0)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(0.01, 100.0))
def test_cost_scaling(seed, scale):
    rng = np.random.default_rng(seed)
    c = random_metric(rng, 5)
    mu, nu = rng.dirichlet(np.ones(5)), rng.dirichlet(np.ones(5))
    base, _ = wasserstein_primal(c, mu, nu)
    scaled, _ = wasserstein_primal(scale * c, mu, nu)
    assert scaled == pytest.approx(scale * base, rel=1e-9, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_wasserstein_is_a_metric(seed):
    rng = np.random.default_rng(seed)
    c = random_metric(rng, 5)
    a, b, e = (rng.dirichlet(np.ones(5)) for _ in range(3))
    ab, _ = wasserstein_primal(c, a, b)
    ba, _ = wasserstein_primal(c, b, a)
    ae, _ = wasserstein_primal(c, a, e)
    be, _ = wasserstein_primal(c, b, e)
    assert abs(ab - ba) <= 1e-12
    assert ae <= ab + be + 1e-12


def _max_flow_feasible(c, mu, nu):
    g = nx.DiGraph()
    n, m = c.shape
    for i in range(n):
        g.add_edge("s", ("r", i), capacity=mu[i])
        for j in range(m):
            if np.isfinite(c[i, j]):
                g.add_edge(("r", i), ("c", j))
    for j in range(m):
        g.add_edge(("c", j), "t", capacity=nu[j])
    return nx.maximum_flow_value(g, "s", "t") >= 1 - 1e-12


def test_infinite_edges_against_max_flow(rng):
    seen = {True: 0, False: 0}
    for _ in range(60):
        n = int(rng.integers(2, 6))
        c = random_metric(rng, n)
        blocked = np.triu(rng.random((n, n)) < 0.4, 1)
        c[blocked | blocked.T] = math.inf
        mu, nu = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
        value, plan = wasserstein_primal(c, mu, nu)
        feasible = _max_flow_feasible(c, mu, nu)
        seen[feasible] += 1
        assert math.isfinite(value) == feasible
        assert plan.marginal_error() <= 1e-10
        if feasible:
            a = np.vstack([np.kron(np.eye(n), np.ones(n)), np.kron(np.ones(n), np.eye(n))])
            ok = np.isfinite(c).ravel()
            ref = linprog(c.ravel()[ok], A_eq=a[:, ok], b_eq=np.concatenate([mu, nu]), method="highs")
            assert value == pytest.approx(ref.fun, abs=1e-10)
            assert np.all(plan.pi[~np.isfinite(c)] == 0)
    assert seen[True] and seen[False]


def test_dual_rejects_infinite_cost():
    c = np.array([[0.0, math.inf], [math.inf, 0.0]])
    with pytest.raises(DomainError):
        kantorovich_dual(c, [0.5, 0.5], [0.5, 0.5])


def test_weights_are_validated():
    c = np.zeros((2, 2))
    with pytest.raises(DomainError):
        wasserstein_primal(c, [0.5, 0.6], [0.5, 0.5])
    with pytest.raises(DomainError):
        wasserstein_primal(c, [1.5, -0.5], [0.5, 0.5])
    with pytest.raises(DomainError):
        wasserstein_primal(np.zeros((3, 2)), [0.5, 0.5], [0.5, 0.5])


def test_metric_closure_fixes_non_metric_cost():
    c = np.array([[0.0, 5.0, 1.0], [5.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
    closed = metric_closure(c)
    assert closed[0, 1] == 2.0
    assert np.array_equal(metric_closure(closed), closed)
    # Lipschitz potentials only see the closure, so the dual prices the shortcut
    primal, _ = wasserstein_primal(c, [1, 0, 0], [0, 1, 0])
    closed_primal, _ = wasserstein_primal(closed, [1, 0, 0], [0, 1, 0])
    dual, _ = kantorovich_dual(c, [1, 0, 0], [0, 1, 0])
    assert primal == 5.0
    assert dual == closed_primal == 2.0


def test_spectral_wasserstein_prop1_point():
    t = c3_triple(C3Params(1.0, 1.0))
    res = spectral_wasserstein(t, ProbabilityState([0.3, 0.3, 0.4]), ProbabilityState([0, 0, 1]))
    assert res.value == pytest.approx(0.6, abs=1e-6)
    assert res.potential.lipschitz_violation(res.cost) <= 1e-9
    assert res.plan.marginal_error() <= 1e-12


def test_spectral_wasserstein_identical_states():
    t = c3_triple(C3Params(1.0, 2.0))
    s = ProbabilityState([0.2, 0.5, 0.3])
    assert spectral_wasserstein(t, s, s).value == pytest.approx(0.0, abs=1e-15)


def test_spectral_wasserstein_two_point_support():
    t = c3_triple(C3Params(2.0, 1.0))
    cost = cost_matrix(t)
    res = spectral_wasserstein(t, ProbabilityState([0.6, 0.0, 0.4]), ProbabilityState([0.1, 0.0, 0.9]), cost=cost)
    assert res.value == pytest.approx(0.5 * cost.entries[0, 2], abs=1e-12)


def test_spectral_wasserstein_disconnected():
    t = c3_triple(C3Params(0.0, 1.0, allow_degenerate=True))
    res = spectral_wasserstein(t, ProbabilityState([0.2, 0.5, 0.3]), ProbabilityState([0.2, 0.1, 0.7]))
    assert res.value == pytest.approx(0.4 * res.cost.entries[1, 2], abs=1e-12)
    assert res.potential is None
    res = spectral_wasserstein(t, ProbabilityState([1, 0, 0]), ProbabilityState([0, 0, 1]))
    assert math.isinf(res.value)


def test_cost_matrix_object_accepted():
    c = CostMatrix([[0.0, 1.0], [1.0, 0.0]])
    assert wasserstein_primal(c, [1, 0], [0, 1])[0] == 1.0

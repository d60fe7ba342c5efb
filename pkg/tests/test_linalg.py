import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import c3_dirac
from spectral_transport.linalg import DomainError, commutator, hermitian, kernel_basis, operator_norm


def random_complex(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def test_operator_norm_identity():
    assert operator_norm(np.eye(3)) == pytest.approx(1.0, rel=1e-12)


def test_operator_norm_c3_commutator():
    a = np.diag([1.0, 0.0, 0.0])
    assert operator_norm(commutator(c3_dirac(1, 1), a)) == pytest.approx(1.0, rel=1e-10)


def test_operator_norm_matches_full_eigendecomposition(rng):
    m = random_complex(rng, (5, 5))
    evals = np.linalg.eig(m.conj().T @ m)[0]
    expected = np.sqrt(np.max(evals.real))
    assert operator_norm(m) == pytest.approx(expected, rel=1e-9)
    assert operator_norm(m) == pytest.approx(np.linalg.svd(m, compute_uv=False)[0], rel=1e-10)


@pytest.mark.parametrize("shape", [(2, 5), (5, 2), (1, 1), (4, 4)])
def test_operator_norm_rectangular(rng, shape):
    m = random_complex(rng, shape)
    assert operator_norm(m) == pytest.approx(np.linalg.norm(m, 2), rel=1e-10)


def test_operator_norm_rejects_empty_and_nonfinite():
    with pytest.raises(DomainError):
        operator_norm(np.zeros((0, 0)))
    with pytest.raises(DomainError):
        operator_norm([[np.nan]])


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), scale=st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False))
def test_operator_norm_homogeneous_and_adjoint_invariant(seed, scale):
    m = random_complex(np.random.default_rng(seed), (4, 3))
    base = operator_norm(m)
    assert operator_norm(scale * m) == pytest.approx(abs(scale) * base, rel=1e-10, abs=1e-300)
    assert operator_norm(m.conj().T) == pytest.approx(base, rel=1e-10)


def test_commutator_with_identity_vanishes(rng):
    m = random_complex(rng, (4, 4))
    d = hermitian(m + m.conj().T)
    assert np.abs(commutator(d, np.eye(4))).max() == 0.0


def test_commutator_c3_entries():
    alpha, beta = 1.0, 1.0
    z = np.array([0.3, -1.2, 2.5])
    x = commutator(c3_dirac(alpha, beta), np.diag(z))
    assert x[0, 2] == pytest.approx(alpha * (z[2] - z[0]))
    assert x[1, 2] == pytest.approx(beta * (z[2] - z[1]))
    assert np.allclose(x, -x.conj().T, atol=1e-12)
    assert x[0, 1] == 0 and x[0, 0] == 0


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_commutator_antisymmetric_and_skew_hermitian(seed):
    rng = np.random.default_rng(seed)
    h = [random_complex(rng, (3, 3)) for _ in range(2)]
    d, a = (m + m.conj().T for m in h)
    x = commutator(d, a)
    assert np.array_equal(x, -commutator(a, d))
    assert np.abs(x + x.conj().T).max() <= 1e-12 * (1 + np.abs(x).max())


def test_commutator_dimension_mismatch():
    with pytest.raises(DomainError):
        commutator(np.eye(2), np.eye(3))


def _diag_map(dirac):
    n = dirac.shape[0]
    return [commutator(dirac, np.diag(e)) for e in np.eye(n)]


def test_kernel_generic_c3_is_unit_direction():
    k = kernel_basis(_diag_map(c3_dirac(1.0, 2.0)))
    assert k.shape == (1, 3)
    assert np.allclose(np.abs(k[0]), 1 / np.sqrt(3))


def test_kernel_alpha_zero():
    k = kernel_basis(_diag_map(c3_dirac(0.0, 1.0)))
    # hand nullspace of the 9x3 system: only beta (z3 - z2) survives, so z2 = z3
    expected = np.array([[1, 0, 0], [0, 1, 1]]) / np.array([[1], [np.sqrt(2)]])
    assert k.shape == (2, 3)
    assert np.allclose(k.T @ k, expected.T @ expected, atol=1e-12)


def test_kernel_of_zero_map_is_everything():
    k = kernel_basis([np.zeros((2, 2)), np.zeros((2, 2))])
    assert k.shape == (2, 2)
    assert np.allclose(k @ k.T, np.eye(2))


def test_kernel_of_empty_parameter_space():
    assert kernel_basis([]).shape[0] == 0


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), rank=st.integers(0, 3))
def test_kernel_vectors_are_annihilated(seed, rank):
    rng = np.random.default_rng(seed)
    images = [random_complex(rng, (3, 3)) for _ in range(rank)]
    images += [images[0] * 2 - (images[1] if rank > 1 else 0) for _ in range(2)] if rank else [np.zeros((3, 3))] * 2
    k = kernel_basis(images)
    scale = max(np.abs(x).max() for x in images) + 1
    for v in k:
        assert operator_norm(sum(c * x for c, x in zip(v, images))) <= 1e-9 * scale


def test_hermitian_validation():
    with pytest.raises(DomainError):
        hermitian([[0, 1], [0, 0]])
    with pytest.raises(DomainError):
        hermitian(np.ones((2, 3)))
    assert hermitian([[1, 1j], [-1j, 2]]).dtype == complex

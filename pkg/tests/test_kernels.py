import numpy as np
import pytest

from ptannulus import kernels
from ptannulus.eigen import eigpairs, eigvals
from ptannulus import PotentialSpec, build

from oracles import multiset_distance

BACKENDS = kernels.BACKENDS


def _random(rng, n, complex_):
    a = rng.standard_normal((n, n))
    if complex_:
        a = a + 1j * rng.standard_normal((n, n))
    return a


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("complex_", [False, True])
def test_eigvals_match_lapack(backend, complex_):
    rng = np.random.default_rng(7)
    for n in (1, 2, 3, 8, 25, 60):
        a = _random(rng, n, complex_)
        got = eigvals(a, backend=backend).eigenvalues
        ref = np.linalg.eigvals(a)
        assert multiset_distance(got, ref) <= 1e-10 * max(1.0, np.linalg.norm(a))


@pytest.mark.parametrize("backend", BACKENDS)
def test_hessenberg_is_similarity(backend):
    k = kernels.get(backend)
    rng = np.random.default_rng(3)
    for complex_ in (False, True):
        a = _random(rng, 12, complex_)
        h, q = k.hessenberg(a.copy(), True)
        assert np.allclose(np.tril(h, -2), 0)
        assert np.allclose(q @ h @ q.conj().T, a, atol=1e-12)
        assert np.allclose(q.conj().T @ q, np.eye(12), atol=1e-12)


@pytest.mark.parametrize("backend", BACKENDS)
def test_balance_is_diagonal_similarity(backend):
    k = kernels.get(backend)
    a = np.array([[1.0, 1e6, 0.0], [1e-6, 2.0, 1e4], [0.0, 1e-4, 3.0]])
    b = a.copy()
    d = k.balance(b)
    assert np.allclose(b, a * (1 / d)[:, None] * d[None, :])
    assert np.all(np.log2(d) == np.round(np.log2(d)))  # powers of the radix: exact scaling


@pytest.mark.parametrize("backend", BACKENDS)
def test_hess_solve(backend):
    k = kernels.get(backend)
    rng = np.random.default_rng(5)
    h = np.triu(_random(rng, 10, True), -1)
    b = _random(rng, 10, True)[:, 0]
    sigma = 0.3 + 0.1j
    y = k.hess_solve(h, sigma, b, 1e-300)
    assert np.allclose((h - sigma * np.eye(10)) @ y, b, atol=1e-10)


def test_backends_agree_on_operators():
    spec = PotentialSpec.single(1, 0.9).with_strengths({"v:3": 1.1, "u:2": 0.4})
    op = build(spec, 30)
    a = eigpairs(op, backend="numba")
    b = eigpairs(op, backend="numpy")
    assert np.max(np.abs(a.eigenvalues - b.eigenvalues)) < 1e-10
    # exactly degenerate values (one per reflection sector) may come in either order,
    # so compare each vector with the span of the other backend's vectors for that value
    for j, lam in enumerate(a.eigenvalues):
        group = b.eigenvectors[:, np.abs(b.eigenvalues - lam) < 1e-8]
        coeffs, *_ = np.linalg.lstsq(group, a.eigenvectors[:, j], rcond=None)
        assert np.linalg.norm(group @ coeffs - a.eigenvectors[:, j]) < 1e-7


def test_backend_env_flag(monkeypatch):
    monkeypatch.setenv(kernels.BACKEND_ENV, "numpy")
    assert kernels._select() == "numpy"
    monkeypatch.setenv(kernels.BACKEND_ENV, "fortran")
    with pytest.raises(ValueError):
        kernels._select()
    with pytest.raises(ValueError):
        kernels.get("fortran")

import numpy as np
import pytest

from ptannulus import PotentialSpec, build, reduced_block
from ptannulus.eigen import (EigenConvergenceError, Spectrum, eigpairs, eigvals, is_conjugate_closed, max_imag,
                             overlap, residuals)
from ptannulus.operator import GainLossTerm, HermitianTerm

from oracles import multiset_distance, oracle_eigvals

BETA_1C = 0.7350  # reference threshold for the n = 1 ray


def random_spec(rng):
    gl = [GainLossTerm(int(n), float(rng.uniform(-6, 6))) for n in rng.choice([1, 3, 5, 7, 9], rng.integers(1, 3))]
    he = [HermitianTerm(int(p), float(rng.uniform(-4, 4))) for p in rng.choice([2, 4, 6], rng.integers(0, 2))]
    return PotentialSpec(tuple(gl), tuple(he))


def test_diagonal():
    sp = eigvals(np.diag([4.0, 1, 0, 1, 4]))
    assert np.array_equal(sp.eigenvalues, np.array([0, 1, 1, 4, 4], dtype=complex))
    assert sp.max_imag == 0


def test_exceptional_point_block():
    sp = eigvals(reduced_block(3, 2, 3.0))
    assert np.allclose(sp.eigenvalues, 2.5, atol=1e-7)
    pairs = eigpairs(reduced_block(3, 2, 3.0))
    assert pairs.defective and pairs.ep_pairs == [(0, 1)]


def test_characteristic_polynomial_oracle():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for i in range(1000):
        n = int(rng.integers(1, 6))
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        if i % 4 == 0:
            a = a.real  # real input takes the double-shift path
        worst = max(worst, multiset_distance(eigvals(a).eigenvalues, oracle_eigvals(a)))
    assert worst < 1e-8


def test_sorted_by_real_then_imag():
    rng = np.random.default_rng(1)
    vals = eigvals(rng.standard_normal((30, 30))).eigenvalues
    keys = list(zip(vals.real, vals.imag))
    assert keys == sorted(keys)


def test_operator_invariants_on_random_specs():
    rng = np.random.default_rng(11)
    for _ in range(200):
        spec = random_spec(rng)
        M = int(rng.integers(10, 40))
        op = build(spec, M)
        vals = eigvals(op).eigenvalues
        assert len(vals) == op.dimension
        assert is_conjugate_closed(vals, 1e-9)
        tr = np.trace(op.entries)
        assert abs(vals.sum() - tr) <= 1e-8 * abs(tr) + 1e-10


def test_eigpairs_residuals_and_norms():
    rng = np.random.default_rng(4)
    for a in (rng.standard_normal((20, 20)) + 1j * rng.standard_normal((20, 20)),
              build(PotentialSpec.single(1, 0.9).with_strengths({"u:4": -1.0}), 40)):
        sp = eigpairs(a)
        norm_a = np.linalg.norm(a.entries if hasattr(a, "entries") else a)
        assert np.allclose(np.linalg.norm(sp.eigenvectors, axis=0), 1)
        assert residuals(a, sp).max() <= 1e-8 * norm_a


def test_identity_gives_orthonormal_vectors():
    sp = eigpairs(np.eye(3))
    assert np.array_equal(sp.eigenvalues, np.ones(3, dtype=complex))
    assert np.allclose(sp.eigenvectors.conj().T @ sp.eigenvectors, np.eye(3))
    assert not sp.defective


def test_small_beta_ground_state_is_m0():
    beta = 0.05 * BETA_1C
    sp = eigpairs(build(PotentialSpec.single(1, beta), 100))
    c0 = abs(sp.eigenvectors[100, 0]) ** 2
    assert c0 > 0.99
    # second order: the m = 0 state mixes with m = +-1 with amplitude beta / 2 each
    assert abs(c0 - (1 - beta ** 2 / 2)) < 1e-5


def test_near_threshold_vectors_nearly_parallel():
    far = eigpairs(build(PotentialSpec.single(1, 0.3), 100))
    near = eigpairs(build(PotentialSpec.single(1, BETA_1C), 100))
    assert overlap(near, 0, 1) > 0.99
    assert overlap(near, 0, 1) > overlap(far, 0, 1)


def test_max_imag():
    assert max_imag(np.array([0, 1, 4], dtype=complex)) == 0
    assert max_imag(np.array([2.5 + 0.3j, 2.5 - 0.3j, 9])) == pytest.approx(0.3)
    assert eigvals(build(PotentialSpec.single(1, 1.05 * BETA_1C), 100)).max_imag > 0
    with pytest.raises(ValueError):
        max_imag(np.array([]))


@pytest.mark.parametrize("bad", [np.ones((2, 3)), np.array([[np.nan]]), np.array([[1.0, np.inf], [0, 1]]),
                                 np.zeros((0, 0))])
def test_invalid_input(bad):
    with pytest.raises(ValueError):
        eigvals(bad)


def test_non_convergence_is_reported(monkeypatch):
    from ptannulus.kernels import get
    k = get()
    monkeypatch.setattr(k, "hqr_real", lambda a: (np.zeros(len(a)), np.zeros(len(a)), 3))
    with pytest.raises(EigenConvergenceError):
        eigvals(np.array([[1.0, 2.0], [3.0, 4.0]]))


def test_csv_rows():
    sp = eigpairs(build(PotentialSpec.single(1, 0.2), 2))
    assert sp.value_rows()[0][0] == 0
    rows = sp.vector_rows()
    assert len(rows) == 25 and {r[1] for r in rows} == set(range(-2, 3))
    assert Spectrum(np.array([1j])).vector_rows() == []

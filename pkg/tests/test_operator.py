import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import multiset_distance
from ptannulus.operator import (GainLossTerm, HermitianTerm, PotentialSpec, SpecError, build, reduced_block,
                                reflection_sectors)

odd = st.sampled_from([1, 3, 5, 7, 9])
even = st.sampled_from([2, 4, 6, 8])
strength = st.floats(-10, 10, allow_nan=False)


@st.composite
def specs(draw):
    gl = draw(st.lists(st.tuples(odd, strength), max_size=3))
    he = draw(st.lists(st.tuples(even, strength), max_size=2))
    return PotentialSpec(tuple(GainLossTerm(n, b) for n, b in gl), tuple(HermitianTerm(p, l) for p, l in he))


def test_zero_strength_is_diagonal():
    a = build(PotentialSpec.single(1, 0.0), 2).entries
    assert np.array_equal(a, np.diag([4, 1, 0, 1, 4]).astype(complex))


def test_v3_entries():
    op = build(PotentialSpec.single(3, 2.0), 2)
    a = op.entries
    assert np.array_equal(np.diag(a), np.array([4, 1, 0, 1, 4], dtype=complex))
    pos = {(-2, 1), (1, -2), (-1, 2), (2, -1)}
    for m in range(-2, 3):
        for mp in range(-2, 3):
            if m == mp:
                continue
            expect = -1j if (m, mp) in pos else 0
            assert a[op.index(m), op.index(mp)] == expect


def test_mixed_v1_u2():
    v = build(PotentialSpec.single(1, 1.0), 2).entries
    both = build(PotentialSpec.single(1, 1.0).with_strengths({"u:2": 1.0}), 2).entries
    diff = both - v
    i, j = np.indices(diff.shape)
    assert np.all(diff[np.abs(i - j) == 2] == -0.5)
    assert np.all(diff[np.abs(i - j) != 2] == 0)


def test_duplicate_orders_are_merged():
    s = PotentialSpec((GainLossTerm(3, 1.0), GainLossTerm(3, 0.5)), (HermitianTerm(2, 1.0), HermitianTerm(2, -2.0)))
    assert s.gain_loss == (GainLossTerm(3, 1.5),)
    assert s.hermitian == (HermitianTerm(2, -1.0),)


@pytest.mark.parametrize("bad", [lambda: GainLossTerm(2, 1.0), lambda: GainLossTerm(0, 1.0),
                                 lambda: HermitianTerm(3, 1.0), lambda: HermitianTerm(0, 1.0),
                                 lambda: GainLossTerm(1, float("nan"))])
def test_invalid_terms(bad):
    with pytest.raises(SpecError):
        bad()


def test_cutoff_too_small():
    with pytest.raises(SpecError):
        build(PotentialSpec.single(9, 1.0), 4)
    build(PotentialSpec.single(9, 1.0), 5)  # band |m - m'| = 9 still fits in [-5, 5]
    with pytest.raises(SpecError):
        build(PotentialSpec.single(1, 1.0), 0)


def test_json_round_trip():
    text = '{"gain_loss":[{"n":1,"beta":0.5}], "hermitian":[{"p":2,"lambda":1.0}], "cutoff_M":100}'
    s = PotentialSpec.from_json(text)
    assert s.cutoff_M == 100 and s.strengths() == {"v:1": 0.5, "u:2": 1.0}
    assert PotentialSpec.from_json(s.to_json()) == s
    assert json.loads(s.to_json())["hermitian"] == [{"p": 2, "lambda": 1.0}]
    with pytest.raises(SpecError):
        PotentialSpec.from_dict({"gain_loss": [{"n": 1}]})
    with pytest.raises(SpecError):
        PotentialSpec.from_dict({"potential": []})


@settings(max_examples=60, deadline=None)
@given(specs(), st.integers(5, 12))
def test_structural_invariants(spec, M):
    op = build(spec, M)
    a = op.entries
    assert np.array_equal(a, a.T)
    assert np.array_equal(np.diag(a), (op.m_values ** 2).astype(complex))
    orders = {t.n for t in spec.gain_loss} | {t.p for t in spec.hermitian}
    i, j = np.indices(a.shape)
    off = (i != j) & ~np.isin(np.abs(i - j), list(orders))
    assert np.all(a[off] == 0)
    assert np.trace(a) == sum(m * m for m in range(-M, M + 1))
    flipped = spec.with_strengths({t.key: -t.beta for t in spec.gain_loss})
    assert np.array_equal(build(flipped, M).entries, np.conj(a))
    r = op.real_form()
    assert r.dtype == np.float64
    assert multiset_distance(np.linalg.eigvals(r), np.linalg.eigvals(a)) < 1e-6


def test_zero_spec_multiplicities():
    d = np.diag(build(PotentialSpec(), 6).entries).real
    values, counts = np.unique(d, return_counts=True)
    assert counts[0] == 1 and values[0] == 0
    assert np.all(counts[1:] == 2)


def test_reduced_block_2x2():
    w = np.linalg.eigvals(reduced_block(5, 2, 0.0))
    assert sorted(w.real) == [4.0, 9.0]
    # at beta = n the two levels coincide, at the block centre (n^2 + 1) / 4
    w = np.linalg.eigvals(reduced_block(3, 2, 3.0))
    assert np.allclose(w, 2.5, atol=1e-7)
    b = reduced_block(7, 2, 1.3)
    n = 7
    sz = np.diag([1.0, -1.0])
    sx = np.array([[0, 1], [1, 0]])
    assert np.allclose(b, (n * n + 1) / 4 * np.eye(2) - n / 2 * sz - 0.65j * sx)


def test_reduced_block_3x3():
    assert sorted(np.linalg.eigvals(reduced_block(1, 3, 0.0)).real) == [0.0, 1.0, 1.0]
    with pytest.raises(SpecError):
        reduced_block(3, 3)
    with pytest.raises(SpecError):
        reduced_block(3, 4)


def test_reflection_sectors_block_diagonalise():
    M = 7
    even, odd = reflection_sectors(M)
    basis = np.hstack([even, odd])
    assert np.allclose(basis.T @ basis, np.eye(2 * M + 1))
    r = build(PotentialSpec.single(3, 1.7).with_strengths({"v:1": 0.4, "u:2": 0.9}), M).real_form()
    assert np.allclose(even.T @ r @ odd, 0)
    assert np.allclose(odd.T @ r @ even, 0)

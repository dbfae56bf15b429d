from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qnetcode import gf

ORDERS = [2, 3, 4, 5, 7, 8, 9, 16, 25, 27, 49]


@pytest.mark.parametrize("q", ORDERS)
def test_field_axioms(q):
    ctx = gf.get_field(q)
    E = ctx.elements()
    a, b = np.meshgrid(E, E, indexing="ij")
    assert np.array_equal(ctx.add(a, b), ctx.add(b, a))
    assert np.array_equal(ctx.mul(a, b), ctx.mul(b, a))
    assert np.array_equal(ctx.add(a, ctx.neg(a)), np.zeros_like(a))
    nz = E[1:]
    assert np.all(ctx.mul(nz, ctx.inv(nz)) == 1)
    # multiplicative group is cyclic of order q-1: some element generates it
    powers = {1}
    for g in nz:
        x, seen = 1, set()
        for _ in range(q - 1):
            x = int(ctx.mul(x, g))
            seen.add(x)
        powers = max(powers, seen, key=len)
    assert len(powers) == q - 1


@pytest.mark.parametrize("q", ORDERS)
def test_distributive(q):
    ctx = gf.get_field(q)
    E = ctx.elements()
    a, b, c = np.meshgrid(E, E, E, indexing="ij")
    assert np.array_equal(ctx.mul(a, ctx.add(b, c)), ctx.add(ctx.mul(a, b), ctx.mul(a, c)))


@pytest.mark.parametrize("q", ORDERS)
def test_trace_is_linear_onto_prime_field(q):
    ctx = gf.get_field(q)
    E = ctx.elements()
    t = ctx.trace(E)
    assert set(int(v) for v in t) == set(range(ctx.p))
    a, b = np.meshgrid(E, E, indexing="ij")
    assert np.array_equal(ctx.trace(ctx.add(a, b)), (ctx.trace(a) + ctx.trace(b)) % ctx.p)


@pytest.mark.parametrize("q", [2, 3, 4, 5, 9])
def test_character_orthogonality(q):
    ctx = gf.get_field(q)
    E = ctx.elements()
    for beta in E:
        s = np.sum(ctx.char_phase(E, beta))
        assert abs(s - (q if beta == 0 else 0)) < 1e-12


def test_char_phase_root_of_unity():
    ctx = gf.get_field(3)
    w = np.exp(-2j * np.pi / 3)
    assert np.allclose([gf.char_phase(ctx, y, 1) for y in range(3)], [1, w, w * w])


def test_element_parsing():
    ctx = gf.get_field(7)
    assert ctx.element("1/2") == 4
    assert ctx.element("-5/8") == ctx.div(ctx.neg(5), 1)
    assert ctx.element(-1) == 6
    with pytest.raises((gf.DivisionByZero, ZeroDivisionError)):
        ctx.element("1/7")


def test_division_by_zero():
    ctx = gf.get_field(5)
    with pytest.raises((gf.DivisionByZero, ZeroDivisionError)):
        ctx.inv(0)


def test_not_a_field():
    with pytest.raises(gf.FieldError):
        gf.get_field(6)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 5, 4, 9]), st.integers(1, 5), st.integers(1, 5), st.integers(0, 2**31))
def test_solve_right_roundtrip(q, r, c, seed):
    ctx = gf.get_field(q)
    rng = np.random.default_rng(seed)
    A = rng.integers(0, q, size=(r, c))
    X = rng.integers(0, q, size=(c, 2))
    B = gf.matmul(ctx, A, X)
    sol = gf.solve_right(ctx, A, B)
    assert sol is not None
    assert np.array_equal(gf.matmul(ctx, A, sol), B)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 5, 4]), st.integers(1, 5), st.integers(0, 2**31))
def test_inverse(q, n, seed):
    ctx = gf.get_field(q)
    A = np.random.default_rng(seed).integers(0, q, size=(n, n))
    inv = gf.inverse(ctx, A)
    if gf.rank(ctx, A) == n:
        assert np.array_equal(gf.matmul(ctx, A, inv), gf.identity(n))
    else:
        assert inv is None


def test_rref_and_rank():
    ctx = gf.get_field(3)
    A = np.array([[1, 2, 0], [2, 1, 0], [0, 0, 1]])
    R, piv = gf.rref(ctx, A)
    assert list(piv) == [0, 2]
    assert gf.rank(ctx, A) == 2
    assert not gf.image_contains(ctx, A, np.array([1, 0, 0]))
    assert gf.image_contains(ctx, A, np.array([1, 2, 1]))


def test_dimension_mismatch():
    ctx = gf.get_field(3)
    with pytest.raises(gf.DimensionMismatch):
        gf.matmul(ctx, np.zeros((2, 3), dtype=np.int64), np.zeros((2, 2), dtype=np.int64))

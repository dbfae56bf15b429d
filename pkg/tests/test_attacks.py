from __future__ import annotations

import numpy as np
import pytest

from qnetcode import gf
from qnetcode.attacks import (NonUnitary, QuantumAttack, build_copy_attack, build_pauli_attack,
                              build_random_unitary_attack, build_swap_attack, cadd_matrix, check_unitary,
                              deterministic_attack, probabilistic_attack, random_deterministic_attack,
                              shift_matrix, simple_attack, swap_matrix)


def test_copy_is_cnot_over_f2():
    att = build_copy_attack(gf.get_field(2), 1)
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    assert np.array_equal(att.unitaries[0], cnot)
    assert att.eve_dims == (2,) and att.eve_dim == 2


def test_copy_with_injection_is_permutation():
    ctx = gf.get_field(3)
    att = build_copy_attack(ctx, 1, x=1)
    U = att.unitaries[0]
    expect = np.kron(shift_matrix(ctx, 1), np.eye(3)) @ cadd_matrix(ctx)
    assert np.array_equal(U, expect)
    assert set(np.unique(U)) == {0, 1} and np.all(U.sum(0) == 1) and np.all(U.sum(1) == 1)
    # |y>|0> -> |y+1>|y>
    for y in range(3):
        out = U @ np.eye(9)[y * 3]
        assert out[((y + 1) % 3) * 3 + y] == 1


def test_injection_only_shifts_basis_labels():
    ctx = gf.get_field(5)
    P = build_pauli_attack(ctx, 1, x=2, z=0).unitaries[0]
    for y in range(5):
        assert np.argmax(np.abs(P @ np.eye(5)[y])) == (y + 2) % 5


def test_swap_matrix_properties():
    S = swap_matrix(2)
    assert np.array_equal(S, [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    assert np.array_equal(swap_matrix(3) @ swap_matrix(3), np.eye(9))


def test_swap_then_measure_is_intercept_resend_zero():
    ctx = gf.get_field(3)
    U = build_swap_attack(ctx, 1).unitaries[0]
    for y in range(3):
        out = U @ np.kron(np.eye(3)[y], np.eye(3)[0])
        # channel now carries |0>, Eve holds |y>
        assert out[0 * 3 + y] == 1


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("eve_dim", [1, 2, 3])
def test_random_unitary(seed, eve_dim):
    ctx = gf.get_field(3)
    att = build_random_unitary_attack(ctx, 2, eve_dim, seed)
    for U in att.unitaries:
        assert U.shape == (3 * eve_dim, 3 * eve_dim)
        assert np.max(np.abs(U.conj().T @ U - np.eye(len(U)))) <= 1e-10
    again = build_random_unitary_attack(ctx, 2, eve_dim, seed)
    assert all(np.array_equal(a, b) for a, b in zip(att.unitaries, again.unitaries))
    assert att.seed == seed


def test_non_unitary_rejected():
    with pytest.raises(NonUnitary):
        check_unitary(np.array([[1, 1], [0, 1]]))
    with pytest.raises(NonUnitary):
        QuantumAttack("bad", (), np.ones(1), (np.array([[2.0]]),), ((),))


def test_bind_edges():
    att = build_copy_attack(gf.get_field(3), 2).at((9, 5))
    assert att.edges == (5, 9)
    with pytest.raises(ValueError):
        att.at((5,))


def test_classical_attacks():
    ctx = gf.get_field(3)
    s = simple_attack((6,), (2,))
    assert s.inject(0, ()) == 2 and s.h == 1
    d = deterministic_attack(ctx, (5, 9), [np.array(1), np.array([0, 2, 1])])
    assert d.inject(0, ()) == 1 and d.inject(1, (1,)) == 2
    with pytest.raises(ValueError):
        deterministic_attack(ctx, (5, 9), [np.array(1), np.zeros((3, 3))])
    r = random_deterministic_attack(ctx, (5, 6, 9), np.random.default_rng(0))
    assert [t.shape for t in r.tables] == [(), (3,), (3, 3)]
    p = probabilistic_attack([(0.25, s), (0.75, simple_attack((6,), (1,)))])
    assert len(p.components) == 2 and p.h == 1
    with pytest.raises(ValueError):
        probabilistic_attack([(0.5, s)])
    with pytest.raises(TypeError):
        p.inject(0, ())


def test_table_size_limit():
    ctx = gf.get_field(11)
    with pytest.raises(ValueError):
        random_deterministic_attack(ctx, tuple(range(6)), np.random.default_rng(0))

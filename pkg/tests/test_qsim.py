from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from qnetcode import gf, qsim
from qnetcode.attacks import haar_unitary

CASES = settings(max_examples=100, deadline=None)
QS = st.sampled_from([2, 3, 4, 5])


def _random_vec(rng, dim):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def _random_circuit(rng, ctx, regs, length):
    gates = []
    for _ in range(length):
        kind = rng.choice(["cadd", "pauli", "unitary"])
        if kind == "cadd":
            t = str(rng.choice(regs))
            ctrls = [r for r in regs if r != t]
            chosen = rng.choice(ctrls, size=int(rng.integers(1, len(ctrls) + 1)), replace=False)
            gates.append(("cadd", (t,), [(str(c), int(rng.integers(0, ctx.q))) for c in chosen]))
        elif kind == "pauli":
            gates.append(("pauli", (str(rng.choice(regs)),), (int(rng.integers(0, ctx.q)), int(rng.integers(0, ctx.q)))))
        else:
            k = int(rng.integers(1, 3))
            rs = tuple(str(r) for r in rng.choice(regs, size=k, replace=False))
            gates.append(("unitary", rs, haar_unitary(ctx.q**k, rng)))
    return gates


def _apply_sparse(st_, gate):
    kind, regs, arg = gate
    if kind == "cadd":
        qsim.apply_cadd(st_, regs[0], arg)
    elif kind == "pauli":
        qsim.apply_pauli(st_, regs[0], x=arg[0], z=arg[1])
    else:
        qsim.apply_unitary(st_, list(regs), arg)


def _apply_dense(ds, gate):
    from qnetcode.attacks import phase_matrix, shift_matrix
    kind, regs, arg = gate
    if kind == "cadd":
        ds.cadd(regs[0], arg)
    elif kind == "pauli":
        ds.apply(regs, phase_matrix(ds.ctx, arg[1]) @ shift_matrix(ds.ctx, arg[0]))
    else:
        ds.apply(regs, arg)


# -- worked examples--------------------------------------------------------

def test_cadd_examples():
    ctx = gf.get_field(3)
    s = qsim.from_dense(ctx, ["a", "b", "t"], [3, 3, 3], np.eye(27)[1 * 9 + 1 * 3 + 0])
    qsim.apply_cadd(s, "t", [("a", 2), ("b", 1)])
    assert s.labels.tolist() == [[1, 1, 0]]
    c2 = gf.get_field(2)
    for a in range(2):
        for t in range(2):
            s = qsim.from_dense(c2, ["a", "t"], [2, 2], np.eye(4)[a * 2 + t])
            qsim.apply_cadd(s, "t", [("a", 1)])
            assert s.labels.tolist() == [[a, t ^ a]]
    s = qsim.from_dense(ctx, ["a", "t"], [3, 3], _random_vec(np.random.default_rng(0), 9))
    before = qsim.to_dense(s)
    qsim.apply_cadd(s, "t", [("a", 0)])
    assert np.allclose(qsim.to_dense(s), before)


def test_dead_register():
    s = qsim.from_dense(gf.get_field(2), ["a"], [2], np.array([1, 0]))
    with pytest.raises(qsim.DeadRegister):
        qsim.apply_pauli(s, "zz", x=1)


def test_pauli_examples():
    ctx = gf.get_field(3)
    s = qsim.from_dense(ctx, ["r"], [3], np.ones(3) / np.sqrt(3))
    qsim.apply_pauli(s, "r", z=1)
    w = np.exp(-2j * np.pi / 3)
    assert np.allclose(qsim.to_dense(s) * np.sqrt(3), [1, w, w * w])
    c2 = gf.get_field(2)
    s = qsim.from_dense(c2, ["r"], [2], np.array([1, 0]))
    qsim.apply_pauli(s, "r", x=1)
    assert np.allclose(qsim.to_dense(s), [0, 1])


def test_unitary_inverse_roundtrip():
    ctx = gf.get_field(3)
    rng = np.random.default_rng(1)
    v = _random_vec(rng, 27)
    s = qsim.from_dense(ctx, ["a", "b", "c"], [3, 3, 3], v)
    U = haar_unitary(9, rng)
    qsim.apply_unitary(s, ["c", "a"], U)
    qsim.apply_unitary(s, ["c", "a"], U.conj().T)
    assert np.allclose(qsim.to_dense(s), v, atol=1e-10)
    with pytest.raises(Exception):
        qsim.apply_unitary(s, ["a"], np.ones((3, 3)))


def test_dephase_examples():
    c2 = gf.get_field(2)
    ens = qsim.fourier_dephase(qsim.from_dense(c2, ["r"], [2], np.array([1, 0])), ["r"], [])
    assert ens.multiplicity * len(ens.branches) == 2
    assert np.isclose(ens.lookup(c2, [0])[0], 0.5) and np.isclose(ens.lookup(c2, [1])[0], 0.5)
    ctx = gf.get_field(3)
    ens = qsim.fourier_dephase(qsim.from_dense(ctx, ["r"], [3], qsim.fourier_state(ctx, 2)), ["r"], [])
    assert len(ens.branches) == 1 and np.isclose(ens.lookup(ctx, [2])[0], 1)
    bell = np.eye(3).ravel() / np.sqrt(3)
    ens = qsim.fourier_dephase(qsim.from_dense(ctx, ["a", "b"], [3, 3], bell), ["a"], ["b"])
    for beta in range(3):
        p, rho = ens.lookup(ctx, [beta])
        assert np.isclose(p, 1 / 3)
        assert np.isclose(np.trace(rho @ rho).real, 1)


def test_partial_trace_examples():
    ctx = gf.get_field(3)
    bell = np.eye(3).ravel() / np.sqrt(3)
    assert np.allclose(qsim.partial_trace(bell, [3, 3], [0]), np.eye(3) / 3)
    assert np.allclose(qsim.partial_trace(bell, [3, 3], [0, 1]), np.outer(bell, bell))
    s = qsim.from_dense(ctx, ["a", "b"], [3, 3], bell)
    assert np.allclose(qsim.reduced_density(s, ["b"]), np.eye(3) / 3)


def _ensemble(rhos, probs, dims, keep):
    branches = tuple(qsim.Branch((i,), p, r) for i, (p, r) in enumerate(zip(probs, rhos)))
    return qsim.BranchEnsemble(tuple(keep), tuple(dims), ("m",), "computational", branches, 2,
                               np.zeros((0, 1), dtype=np.int64))


def test_product_gap_examples():
    rng = np.random.default_rng(2)
    a, b = _random_vec(rng, 2), _random_vec(rng, 3)
    rho = np.outer(np.kron(a, b), np.kron(a, b).conj())
    gap, mi = qsim.product_gap(_ensemble([rho], [1.0], [2, 3], ["L", "R"]), ["L"], ["R"])
    assert gap < 1e-12 and mi < 1e-12
    bell = np.eye(2).ravel() / np.sqrt(2)
    gap, mi = qsim.product_gap(_ensemble([np.outer(bell, bell)], [1.0], [2, 2], ["L", "R"]), ["L"], ["R"])
    assert np.isclose(mi, 2.0)
    rl = np.diag([0.3, 0.7])
    r1, r2 = np.diag([1.0, 0, 0]), np.diag([0, 0.5, 0.5])
    ens = _ensemble([np.kron(rl, r1), np.kron(rl, r2)], [0.4, 0.6], [2, 3], ["L", "R"])
    gap, mi = qsim.product_gap(ens, ["L"], ["R"])
    assert gap < 1e-12 and mi < 1e-12


def test_entropy_of_maximally_mixed():
    for q in (2, 3, 5, 7):
        assert abs(qsim.entropy(np.eye(q) / q) - np.log2(q)) < 1e-9
    assert qsim.entropy(np.diag([1.0, 0.0])) == 0


# -- property suite --------------------------------------------------------

@CASES
@given(QS, st.integers(0, 2**31))
def test_norm_preserved_and_matches_dense(q, seed):
    ctx = gf.get_field(q)
    rng = np.random.default_rng(seed)
    regs = ["a", "b", "c"]
    v = _random_vec(rng, q**3)
    sp_ = qsim.from_dense(ctx, regs, [q] * 3, v)
    ds = oracles.DenseState(ctx)
    ds.regs, ds.dims, ds.vec = list(regs), [q] * 3, v.copy()
    for gate in _random_circuit(rng, ctx, regs, 6):
        _apply_sparse(sp_, gate)
        _apply_dense(ds, gate)
        assert abs(sp_.norm() - 1) <= 1e-10
    assert np.allclose(qsim.to_dense(sp_, regs), ds.vec, atol=1e-10)


@CASES
@given(QS, st.integers(0, 2**31))
def test_character_orthogonality(q, seed):
    ctx = gf.get_field(q)
    rng = np.random.default_rng(seed)
    b1, b2 = (int(x) for x in rng.integers(0, q, size=2))
    E = ctx.elements()
    s = np.sum(ctx.char_phase(E, b1) * np.conj(ctx.char_phase(E, b2)))
    assert abs(s - (q if b1 == b2 else 0)) < 1e-10
    F = qsim.fourier_matrix(ctx)
    assert np.allclose(F @ F.conj().T, np.eye(q), atol=1e-12)
    assert np.allclose(F[b1].conj(), qsim.fourier_state(ctx, b1), atol=1e-12)


@CASES
@given(st.sampled_from([2, 3]), st.integers(0, 2**31))
def test_partial_trace_identities(q, seed):
    rng = np.random.default_rng(seed)
    dims = [q, q, 2]
    v = _random_vec(rng, int(np.prod(dims)))
    rho = np.outer(v, v.conj())
    for keep in ([0], [1], [2], [0, 2], [2, 0], [0, 1, 2]):
        r = qsim.partial_trace(rho, dims, keep)
        assert qsim.is_density(r, 1e-10)
        assert np.allclose(r, qsim.partial_trace(v, dims, keep))
    # nested traces compose
    r02 = qsim.partial_trace(rho, dims, [0, 2])
    assert np.allclose(qsim.partial_trace(r02, [q, 2], [1]), qsim.partial_trace(rho, dims, [2]))
    # product factors come back exactly
    a, b = _random_vec(rng, q), _random_vec(rng, 2)
    pa = np.outer(a, a.conj())
    assert np.allclose(qsim.partial_trace(np.kron(a, b), [q, 2], [0]), pa, atol=1e-12)
    # sparse reduction agrees with dense
    ctx = gf.get_field(q)
    s = qsim.from_dense(ctx, ["x", "y", "z"], dims, v)
    assert np.allclose(qsim.reduced_density(s, ["z", "x"]), qsim.partial_trace(v, dims, [2, 0]), atol=1e-12)


@CASES
@given(st.sampled_from([2, 3, 4]), st.integers(0, 2**31))
def test_dephase_matches_dense_projection(q, seed):
    """Every individual outcome's probability and conditional state match explicit projection."""
    ctx = gf.get_field(q)
    rng = np.random.default_rng(seed)
    regs = ["a", "b", "c"]
    v = _random_vec(rng, q**3)
    if rng.random() < 0.5:
        # sparse supports exercise nontrivial outcome classes
        mask = rng.random(q**3) < 0.3
        mask[0] = True
        v = np.where(mask, v, 0)
        v /= np.linalg.norm(v)
    s = qsim.from_dense(ctx, regs, [q] * 3, v)
    ens = qsim.fourier_dephase(s, ["a", "b"], ["c"])
    T = v.reshape(q, q, q)
    total = np.zeros((q, q), dtype=complex)
    for b1 in range(q):
        for b2 in range(q):
            phi = np.einsum("i,j,ijk->k", qsim.fourier_state(ctx, b1).conj(),
                            qsim.fourier_state(ctx, b2).conj(), T)
            p = float(np.vdot(phi, phi).real)
            pe, rho = ens.lookup(ctx, [b1, b2])
            assert abs(p - pe) < 1e-10
            if p > 1e-9:
                assert np.allclose(rho, np.outer(phi, phi.conj()) / p, atol=1e-9)
            total += p * (np.outer(phi, phi.conj()) / p if p > 1e-12 else 0)
    assert abs(ens.total_probability() - 1) < 1e-9
    # sum of p * rho equals the dephased global state reduced to c
    assert np.allclose(ens.average(), total, atol=1e-10)
    assert np.allclose(ens.average(), qsim.partial_trace(v, [q] * 3, [2]), atol=1e-10)


@CASES
@given(st.sampled_from([2, 3]), st.integers(0, 2**31))
def test_eager_vs_deferred_dephasing(q, seed):
    ctx = gf.get_field(q)
    rng = np.random.default_rng(seed)
    regs = ["a", "b", "c", "d"]
    v = _random_vec(rng, q**4)
    gates = _random_circuit(rng, ctx, regs, int(rng.integers(2, 7)))
    measured = [str(r) for r in rng.choice(regs, size=int(rng.integers(1, 3)), replace=False)]
    rest = [r for r in regs if r not in measured]
    keep = rest[: int(rng.integers(1, len(rest) + 1))]

    deferred = qsim.from_dense(ctx, regs, [q] * 4, v)
    for g in gates:
        _apply_sparse(deferred, g)
    dens = qsim.fourier_dephase(deferred, measured, keep)

    last = {r: max([i for i, g in enumerate(gates) if r in g[1] or
                    (g[0] == "cadd" and r in [c for c, _ in g[2]])], default=-1) for r in measured}
    eager = qsim.from_dense(ctx, regs, [q] * 4, v)
    F = qsim.fourier_matrix(ctx)

    def measure(r):
        qsim.apply_unitary(eager, [r], F)
        qsim.add_register(eager, "rec_" + r)
        qsim.apply_cadd(eager, "rec_" + r, [(r, 1)])

    for r in measured:
        if last[r] == -1:
            measure(r)
    for i, g in enumerate(gates):
        _apply_sparse(eager, g)
        for r in measured:
            if last[r] == i:
                measure(r)
    eens = qsim.fourier_dephase(eager, ["rec_" + r for r in measured], keep, basis="computational")
    seen = 0.0
    for br in eens.branches:
        p, rho = dens.lookup(ctx, br.beta)
        assert abs(p - br.prob) < 1e-10
        assert np.allclose(rho, br.rho, atol=1e-9)
        seen += p
    assert abs(seen - 1) < 1e-9


def test_budget_exceeded():
    ctx = gf.get_field(3)
    s = qsim.from_dense(ctx, ["a", "b"], [3, 3], np.eye(9)[0])
    with pytest.raises(qsim.BudgetExceeded):
        qsim.fourier_dephase(s, [], ["a", "b"], budget=10)


def test_budget_env(monkeypatch):
    monkeypatch.setenv("QNETCODE_BUDGET", "7")
    assert qsim.amplitude_budget() == 7

"""Exact simulation of q-dimensional registers for the coding protocol.

States are kept in sparse form: a list of computational-basis labels (one
column per register) with complex amplitudes.  Every gate the protocol needs
is either a label permutation (controlled adds, X shifts), a diagonal phase,
or a small dense unitary on a few registers, so the support stays small even
when the dense dimension q**registers is astronomically large.

Fourier-basis dephasing is enumerated exactly.  Outcomes beta on the dephased
registers enter the conditional state only through ``beta . y`` for labels y
in the support, so outcomes that agree on the span V of label differences
give identical conditional states.  One representative per coset is computed
and carries the probability of the whole class.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from . import gf
from .attacks import check_unitary

ZERO_TOL = 1e-14
DEFAULT_BUDGET = 2**26


class DeadRegister(KeyError):
    pass


class BudgetExceeded(RuntimeError):
    pass


def amplitude_budget() -> int:
    return int(os.environ.get("QNETCODE_BUDGET", DEFAULT_BUDGET))


@dataclass
class SparseState:
    ctx: gf.FieldCtx
    registers: list[str]
    dims: dict[str, int]
    labels: np.ndarray
    amps: np.ndarray
    roles: dict[str, str] = field(default_factory=dict)

    def col(self, reg: str) -> int:
        try:
            return self.registers.index(reg)
        except ValueError:
            raise DeadRegister(reg) from None

    @property
    def support(self) -> int:
        return len(self.amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def copy(self) -> "SparseState":
        return SparseState(self.ctx, list(self.registers), dict(self.dims), self.labels.copy(),
                           self.amps.copy(), dict(self.roles))


def empty_state(ctx: gf.FieldCtx) -> SparseState:
    return SparseState(ctx, [], {}, np.zeros((1, 0), dtype=np.int64), np.ones(1, dtype=complex))


def add_register(state: SparseState, reg: str, dim: int | None = None, role: str = "", label: int = 0) -> None:
    """Allocate a register in the basis state |label>."""
    if reg in state.dims:
        raise ValueError(f"register {reg} already exists")
    dim = state.ctx.q if dim is None else int(dim)
    state.registers.append(reg)
    state.dims[reg] = dim
    state.roles[reg] = role
    state.labels = np.hstack([state.labels, np.full((state.support, 1), label, dtype=np.int64)])


def add_superposed(state: SparseState, regs: Sequence[str], dims: Sequence[int], vec: np.ndarray,
                   role: str = "") -> None:
    """Tensor a new block of registers in the (dense) state ``vec`` onto the state."""
    vec = np.asarray(vec, dtype=complex)
    nz = np.nonzero(np.abs(vec) > ZERO_TOL)[0]
    local = np.array(np.unravel_index(nz, tuple(dims))).T.reshape(len(nz), len(dims))
    S = state.support
    state.labels = np.hstack([np.repeat(state.labels, len(nz), axis=0), np.tile(local, (S, 1))])
    state.amps = (state.amps[:, None] * vec[nz][None, :]).ravel()
    for r, d in zip(regs, dims):
        state.registers.append(r)
        state.dims[r] = int(d)
        state.roles[r] = role


def from_dense(ctx: gf.FieldCtx, regs: Sequence[str], dims: Sequence[int], vec: np.ndarray) -> SparseState:
    st = empty_state(ctx)
    add_superposed(st, regs, dims, vec)
    return st


def to_dense(state: SparseState, order: Sequence[str] | None = None) -> np.ndarray:
    order = list(state.registers) if order is None else list(order)
    dims = [state.dims[r] for r in order]
    cols = [state.col(r) for r in order]
    out = np.zeros(int(np.prod(dims)) if dims else 1, dtype=complex)
    if dims:
        idx = np.ravel_multi_index(tuple(state.labels[:, cols].T), tuple(dims))
    else:
        idx = np.zeros(state.support, dtype=np.int64)
    np.add.at(out, idx, state.amps)
    return out


def compact(state: SparseState) -> None:
    """Merge repeated labels and drop vanishing amplitudes."""
    if state.support == 0:
        return
    uniq, inv = np.unique(state.labels, axis=0, return_inverse=True)
    inv = inv.ravel()
    amps = np.bincount(inv, state.amps.real, len(uniq)) + 1j * np.bincount(inv, state.amps.imag, len(uniq))
    keep = np.abs(amps) > ZERO_TOL
    state.labels, state.amps = uniq[keep], amps[keep]


# -- gates -----------------------------------------------------------------

def apply_cadd(state: SparseState, target: str, controls: Iterable[tuple[str, int]]) -> None:
    """target label y -> y + sum(theta_k * y_k); a permutation of the support."""
    ctx = state.ctx
    t = state.col(target)
    acc = state.labels[:, t].copy()
    for reg, theta in controls:
        if reg == target:
            raise ValueError("a register cannot control itself")
        c = state.col(reg)
        if theta:
            acc = ctx.add_table[acc, ctx.mul_table[int(theta), state.labels[:, c]]]
    state.labels[:, t] = acc


def apply_pauli(state: SparseState, reg: str, x: int = 0, z: int = 0) -> None:
    """Apply Z(z) X(x): shift first, then the phase omega^tr(y z)."""
    ctx = state.ctx
    c = state.col(reg)
    if x:
        state.labels[:, c] = ctx.add_table[state.labels[:, c], int(x)]
    if z:
        state.amps = state.amps * ctx.char_phase(state.labels[:, c], int(z))


def apply_unitary(state: SparseState, regs: Sequence[str], U: np.ndarray, check: bool = True) -> None:
    U = np.asarray(U, dtype=complex)
    regs = list(regs)
    dims = tuple(state.dims[r] for r in regs)
    D = int(np.prod(dims)) if dims else 1
    if U.shape != (D, D):
        raise gf.DimensionMismatch(f"unitary of shape {U.shape} on registers of total dimension {D}")
    if check:
        check_unitary(U)
    if not regs:
        state.amps = state.amps * U[0, 0]
        return
    cols = [state.col(r) for r in regs]
    rest = [i for i in range(len(state.registers)) if i not in cols]
    li = np.ravel_multi_index(tuple(state.labels[:, cols].T), dims)
    if rest:
        groups, g = np.unique(state.labels[:, rest], axis=0, return_inverse=True)
        g = g.ravel()
    else:
        groups, g = np.zeros((1, 0), dtype=np.int64), np.zeros(state.support, dtype=np.int64)
    V = np.zeros((len(groups), D), dtype=complex)
    np.add.at(V, (g, li), state.amps)
    W = V @ U.T
    gi, lo = np.nonzero(np.abs(W) > ZERO_TOL)
    labels = np.zeros((len(gi), len(state.registers)), dtype=np.int64)
    labels[:, rest] = groups[gi]
    labels[:, cols] = np.array(np.unravel_index(lo, dims)).T.reshape(len(lo), len(cols))
    state.labels, state.amps = labels, W[gi, lo]


def fourier_matrix(ctx: gf.FieldCtx) -> np.ndarray:
    """F with F|beta~> = |beta>, i.e. F[beta, y] = <beta~|y>."""
    y = ctx.elements()
    return np.conj(ctx.char_phase(y[None, :], y[:, None])) / np.sqrt(ctx.q)


def fourier_state(ctx: gf.FieldCtx, beta: int) -> np.ndarray:
    return ctx.char_phase(ctx.elements(), beta) / np.sqrt(ctx.q)


# -- branch ensembles ------------------------------------------------------

@dataclass(frozen=True)
class Branch:
    beta: tuple[int, ...]
    prob: float          # probability of the whole outcome class
    rho: np.ndarray


@dataclass(frozen=True)
class BranchEnsemble:
    keep: tuple[str, ...]
    dims: tuple[int, ...]
    dephased: tuple[str, ...]
    basis: str
    branches: tuple[Branch, ...]
    q: int
    span: np.ndarray = field(repr=False)
    pivots: tuple[int, ...] = ()

    @property
    def multiplicity(self) -> int:
        """Number of individual outcomes represented by each branch."""
        if self.basis == "computational":
            return 1
        return self.q ** (len(self.dephased) - len(self.pivots))

    def total_probability(self) -> float:
        return float(sum(b.prob for b in self.branches))

    def lookup(self, ctx: gf.FieldCtx, beta: Sequence[int]) -> tuple[float, np.ndarray | None]:
        """Probability and conditional state of one individual outcome."""
        beta = np.asarray(beta, dtype=np.int64)
        if self.basis == "computational":
            key = tuple(int(v) for v in beta)
        else:
            rep = np.zeros(len(self.dephased), dtype=np.int64)
            if len(self.pivots):
                rep[list(self.pivots)] = gf.matmul(ctx, self.span, beta)
            key = tuple(int(v) for v in rep)
        for b in self.branches:
            if b.beta == key:
                return b.prob / self.multiplicity, b.rho
        return 0.0, None

    def average(self) -> np.ndarray:
        return sum(b.prob * b.rho for b in self.branches)


def _components(states) -> list[tuple[float, SparseState]]:
    if isinstance(states, SparseState):
        return [(1.0, states)]
    return [(float(w), s) for w, s in states]


def _radix(labels: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    if not len(dims):
        return np.zeros(len(labels), dtype=np.int64)
    return np.ravel_multi_index(tuple(labels.T), tuple(dims))


def fourier_dephase(states, registers: Sequence[str], keep: Sequence[str], basis: str = "fourier",
                    correction: tuple[Sequence[str], np.ndarray] | None = None,
                    budget: int | None = None) -> BranchEnsemble:
    """Enumerate every outcome of measuring ``registers`` and return states on ``keep``.

    Registers in neither list are traced out.  ``states`` is a pure state or a
    weighted list of pure states.  ``correction=(targets, C)`` applies, for each
    outcome beta, Z((C.T beta)_t) to target register t before tracing; C has one
    row per dephased register and one column per target.
    """
    comps = _components(states)
    ctx = comps[0][1].ctx
    budget = amplitude_budget() if budget is None else budget
    registers, keep = list(registers), list(keep)
    if set(registers) & set(keep):
        raise ValueError("a register cannot be both dephased and kept")
    ref = comps[0][1]
    kdims = [ref.dims[r] for r in keep]
    dimK = int(np.prod(kdims)) if kdims else 1
    if dimK * dimK > budget:
        raise BudgetExceeded(f"conditional states of dimension {dimK} exceed the budget {budget}")

    Ys, kidx, tkeys, amps = [], [], [], []
    for ci, (w, st) in enumerate(comps):
        if set(st.registers) != set(ref.registers):
            raise ValueError("mixture components must share their registers")
        L = st.labels
        Y = L[:, [st.col(r) for r in registers]] if registers else np.zeros((st.support, 0), dtype=np.int64)
        if correction is not None and registers:
            targets, C = correction
            X = L[:, [st.col(t) for t in targets]]
            Y = gf.msub(ctx, Y, gf.matmul(ctx, X, np.asarray(C).T))
        traced = [r for r in ref.registers if r not in registers and r not in keep]
        T = L[:, [st.col(r) for r in traced]]
        tkeys.append(np.hstack([np.full((st.support, 1), ci, dtype=np.int64), T]))
        kidx.append(_radix(L[:, [st.col(r) for r in keep]], kdims))
        Ys.append(Y)
        amps.append(np.sqrt(w) * st.amps)
    Y = np.vstack(Ys)
    kidx = np.concatenate(kidx)
    amps = np.concatenate(amps)
    _, tidx = np.unique(np.vstack(tkeys), axis=0, return_inverse=True)
    tidx = tidx.ravel()
    nT = int(tidx.max()) + 1 if len(tidx) else 1
    # rho = sum over support pairs sharing a trace key; use whichever of the
    # pair list or the dense (trace key, kept index) accumulator is smaller
    order = np.argsort(tidx, kind="stable")
    counts = np.bincount(tidx, minlength=nT)
    n_pairs = int(np.sum(counts.astype(np.int64) ** 2))
    if n_pairs <= nT * dimK:
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        rep = counts[tidx[order]]
        ps = np.repeat(order, rep)
        offs = np.arange(n_pairs) - np.repeat(np.cumsum(rep) - rep, rep)
        pp = order[np.repeat(starts[tidx[order]], rep) + offs]
        gather = sp.csr_matrix((np.ones(n_pairs), (np.arange(n_pairs), kidx[ps] * dimK + kidx[pp])),
                               shape=(n_pairs, dimK * dimK))

        def rhos(A: np.ndarray) -> np.ndarray:
            prod_ = A[:, ps] * A[:, pp].conj()
            return np.asarray((gather.T @ prod_.T).T).reshape(len(A), dimK, dimK)
        width = n_pairs
    else:
        scatter = sp.csr_matrix((np.ones(len(amps)), (np.arange(len(amps)), tidx * dimK + kidx)),
                                shape=(len(amps), nT * dimK))

        def rhos(A: np.ndarray) -> np.ndarray:
            acc = np.asarray((scatter.T @ A.T).T).reshape(len(A), nT, dimK)
            return np.matmul(acc.transpose(0, 2, 1), acc.conj())
        width = nT * dimK

    branches: list[Branch] = []
    P = len(registers)
    if basis == "computational":
        span, pivots = np.zeros((0, P), dtype=np.int64), ()
        uniq, cls = np.unique(Y, axis=0, return_inverse=True)
        cls = cls.ravel()
        for c, beta in enumerate(uniq):
            A = np.where(cls == c, amps, 0)[None, :]
            rho = rhos(A)[0]
            p = float(np.real(np.trace(rho)))
            if p > ZERO_TOL:
                branches.append(Branch(tuple(int(v) for v in beta), p, rho / p))
    elif basis == "fourier":
        if P:
            diffs = gf.msub(ctx, Y, np.broadcast_to(Y[0], Y.shape))
            span, pivots = gf.row_space_basis(ctx, diffs)
            pivots = tuple(pivots)
        else:
            span, pivots = np.zeros((0, 0), dtype=np.int64), ()
        r = len(pivots)
        n_cls = ctx.q**r
        if n_cls * dimK * dimK > 64 * budget:
            raise BudgetExceeded(f"{n_cls} outcome classes of dimension {dimK} exceed the budget")
        Yp = Y[:, list(pivots)]
        chunk = max(1, min(n_cls, (1 << 22) // max(1, width + dimK * dimK, len(amps))))
        reps = np.array(list(product(range(ctx.q), repeat=r)), dtype=np.int64).reshape(n_cls, r)
        for start in range(0, n_cls, chunk):
            R = reps[start:start + chunk]
            t = np.zeros((len(R), len(amps)), dtype=np.int64)
            for i in range(r):
                t += ctx.trace_table[ctx.mul_table[R[:, i, None], Yp[None, :, i]]]
            # conditional amplitude picks up <beta~|y> = omega^-tr(beta y)
            A = amps[None, :] * np.exp(2j * np.pi * (t % ctx.p) / ctx.p)
            block = rhos(A) / ctx.q**r
            for c in range(len(R)):
                p = float(np.real(np.trace(block[c])))
                if p > ZERO_TOL:
                    beta = np.zeros(P, dtype=np.int64)
                    beta[list(pivots)] = R[c]
                    branches.append(Branch(tuple(int(v) for v in beta), p, block[c] / p))
    else:
        raise ValueError(f"unknown basis {basis!r}")
    return BranchEnsemble(tuple(keep), tuple(kdims), tuple(registers), basis, tuple(branches), ctx.q,
                          span, tuple(pivots))


def reduced_density(states, keep: Sequence[str]) -> np.ndarray:
    return fourier_dephase(states, [], keep).branches[0].rho


# -- dense helpers ---------------------------------------------------------

def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduce a density matrix (or a state vector) on factors ``dims`` to the factors in ``keep``, in that order."""
    rho = np.asarray(rho)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    dims = list(dims)
    n = len(dims)
    T = rho.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    row = list(letters[:n])
    colm = list(letters[n:2 * n])
    for i in range(n):
        if i not in keep:
            colm[i] = row[i]
    out = "".join(row[i] for i in keep) + "".join(colm[i] for i in keep)
    red = np.einsum("".join(row) + "".join(colm) + "->" + out, T)
    d = int(np.prod([dims[i] for i in keep])) if keep else 1
    return red.reshape(d, d)


def entropy(rho: np.ndarray) -> float:
    """von Neumann entropy in bits."""
    w = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    w = w[w > 1e-15]
    return float(-np.sum(w * np.log2(w)))


def trace_norm(X: np.ndarray) -> float:
    return float(np.sum(np.abs(np.linalg.eigvalsh((X + X.conj().T) / 2))))


def is_density(rho: np.ndarray, tol: float = 1e-9) -> bool:
    herm = np.max(np.abs(rho - rho.conj().T)) <= tol
    unit = abs(np.trace(rho) - 1) <= tol
    psd = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() >= -tol
    return bool(herm and unit and psd)


def _split(ens: BranchEnsemble, left: Sequence[str], right: Sequence[str]):
    idx = {r: i for i, r in enumerate(ens.keep)}
    li, ri = [idx[r] for r in left], [idx[r] for r in right]
    dims = list(ens.dims)
    for b in ens.branches:
        lr = partial_trace(b.rho, dims, li + ri)
        yield b, lr


def product_gap(ens: BranchEnsemble, left: Sequence[str], right: Sequence[str]) -> tuple[float, float]:
    """(max over branches of ||rho_LR|b - rho_L_avg (x) rho_R|b||_1, I(L : R, b) in bits)."""
    dl = int(np.prod([ens.dims[ens.keep.index(r)] for r in left])) if left else 1
    dr = int(np.prod([ens.dims[ens.keep.index(r)] for r in right])) if right else 1
    parts = []
    for b, lr in _split(ens, left, right):
        T = lr.reshape(dl, dr, dl, dr)
        parts.append((b.prob, lr, np.einsum("ijkj->ik", T), np.einsum("ijil->jl", T)))
    rho_l = sum(p * l for p, _, l, _ in parts)
    gap = max((trace_norm(lr - np.kron(rho_l, r)) for _, lr, _, r in parts), default=0.0)
    mi = entropy(rho_l) + sum(p * (entropy(r) - entropy(lr)) for p, lr, _, r in parts)
    return gap, max(mi, 0.0)


def left_marginal(ens: BranchEnsemble, left: Sequence[str]) -> np.ndarray:
    idx = [ens.keep.index(r) for r in left]
    return sum(b.prob * partial_trace(b.rho, list(ens.dims), idx) for b in ens.branches)

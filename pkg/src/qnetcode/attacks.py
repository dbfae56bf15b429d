"""Classical injection strategies and quantum eavesdropper unitaries."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .gf import FieldCtx

UNITARY_TOL = 1e-10
MAX_TABLE = 10_000


class NonUnitary(ValueError):
    pass


# -- classical -------------------------------------------------------------

@dataclass(frozen=True)
class ClassicalAttack:
    """Eve's injections C_j; ``tables[j]`` maps the earlier wiretaps (Z_1..Z_j) to C_{j+1}."""

    kind: str
    edges: tuple[int, ...] = ()
    constants: tuple[int, ...] = ()
    tables: tuple[np.ndarray, ...] = ()
    mixture: tuple[tuple[float, "ClassicalAttack"], ...] = ()

    @property
    def h(self) -> int:
        if self.kind == "probabilistic":
            return self.mixture[0][1].h
        return len(self.constants) if self.kind == "simple" else len(self.tables)

    def inject(self, i: int, z_prefix: tuple[int, ...]) -> int:
        if self.kind == "simple":
            return int(self.constants[i])
        if self.kind == "deterministic":
            return int(self.tables[i][tuple(z_prefix)])
        raise TypeError("a probabilistic attack has no single injection; iterate its components")

    @property
    def components(self) -> tuple["ClassicalAttack", ...]:
        return tuple(a for _, a in self.mixture) if self.kind == "probabilistic" else (self,)


def simple_attack(edges: Sequence[int], c: Sequence[int]) -> ClassicalAttack:
    if len(edges) != len(c):
        raise ValueError("one constant per attacked edge")
    return ClassicalAttack("simple", tuple(sorted(edges)), tuple(int(x) for x in c))


def deterministic_attack(ctx: FieldCtx, edges: Sequence[int], tables: Sequence) -> ClassicalAttack:
    tabs = []
    for j, t in enumerate(tables):
        t = np.asarray(t, dtype=np.int64)
        if t.shape != (ctx.q,) * j:
            raise ValueError(f"table {j + 1} must have shape {(ctx.q,) * j}")
        if t.size > MAX_TABLE:
            raise ValueError("lookup table too large; use the simple-attack reduction instead")
        tabs.append(t)
    if len(tabs) != len(edges):
        raise ValueError("one table per attacked edge")
    return ClassicalAttack("deterministic", tuple(sorted(edges)), tables=tuple(tabs))


def random_deterministic_attack(ctx: FieldCtx, edges: Sequence[int], rng: np.random.Generator) -> ClassicalAttack:
    tables = [rng.integers(0, ctx.q, size=(ctx.q,) * j) for j in range(len(edges))]
    return deterministic_attack(ctx, edges, tables)


def probabilistic_attack(weighted: Sequence[tuple[float, ClassicalAttack]]) -> ClassicalAttack:
    total = sum(w for w, _ in weighted)
    if abs(total - 1) > 1e-9 or any(w < 0 for w, _ in weighted):
        raise ValueError("weights must be non-negative and sum to 1")
    if any(a.kind == "probabilistic" for _, a in weighted):
        raise ValueError("components must be deterministic")
    edges = weighted[0][1].edges
    return ClassicalAttack("probabilistic", edges, mixture=tuple((float(w), a) for w, a in weighted))


# -- quantum ---------------------------------------------------------------

@dataclass(frozen=True)
class QuantumAttack:
    """Unitaries W_j on (channel register, a slice of Eve's memory factors).

    Eve's memory is a tensor product of factors with dimensions ``eve_dims``;
    ``slices[j]`` lists the factors W_j touches.
    """

    name: str
    eve_dims: tuple[int, ...]
    initial: np.ndarray
    unitaries: tuple[np.ndarray, ...]
    slices: tuple[tuple[int, ...], ...]
    edges: tuple[int, ...] = ()
    seed: int | None = None
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        dim = int(np.prod(self.eve_dims)) if self.eve_dims else 1
        init = np.asarray(self.initial, dtype=complex)
        if init.shape != (dim,) or abs(np.linalg.norm(init) - 1) > 1e-10:
            raise ValueError("initial Eve state must be a unit vector of length prod(eve_dims)")
        if len(self.slices) != len(self.unitaries):
            raise ValueError("one slice per unitary")
        for j, (U, sl) in enumerate(zip(self.unitaries, self.slices)):
            if any(not 0 <= f < len(self.eve_dims) for f in sl):
                raise ValueError(f"slice {sl} does not fit Eve's memory")
            check_unitary(U, f"W_{j + 1}")
        if self.edges and len(self.edges) != len(self.unitaries):
            raise ValueError("one attacked edge per unitary")

    @property
    def h(self) -> int:
        return len(self.unitaries)

    @property
    def eve_dim(self) -> int:
        return int(np.prod(self.eve_dims)) if self.eve_dims else 1

    def at(self, edges: Sequence[int]) -> "QuantumAttack":
        edges = tuple(sorted(int(e) for e in edges))
        if len(edges) != self.h:
            raise ValueError(f"attack has {self.h} unitaries but {len(edges)} edges were given")
        return replace(self, edges=edges)


def check_unitary(U: np.ndarray, label: str = "U") -> None:
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise NonUnitary(f"{label} is not square")
    err = np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) if U.size else 0.0
    if err > UNITARY_TOL:
        raise NonUnitary(f"{label} deviates from unitarity by {err:.2e}")


def shift_matrix(ctx: FieldCtx, x: int) -> np.ndarray:
    """X(x): |y> -> |y + x>."""
    X = np.zeros((ctx.q, ctx.q))
    X[ctx.add_table[np.arange(ctx.q), x], np.arange(ctx.q)] = 1
    return X


def phase_matrix(ctx: FieldCtx, z: int) -> np.ndarray:
    """Z(z): |y> -> omega^tr(y z) |y>."""
    return np.diag(ctx.char_phase(np.arange(ctx.q), z))


def cadd_matrix(ctx: FieldCtx) -> np.ndarray:
    """|y>|w> -> |y>|w + y> on (channel, Eve register)."""
    q = ctx.q
    U = np.zeros((q * q, q * q))
    for y in range(q):
        for w in range(q):
            U[y * q + ctx.add_table[w, y], y * q + w] = 1
    return U


def swap_matrix(dim: int) -> np.ndarray:
    U = np.zeros((dim * dim, dim * dim))
    for y in range(dim):
        for w in range(dim):
            U[w * dim + y, y * dim + w] = 1
    return U


def _basis(dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[0] = 1
    return v


def build_copy_attack(ctx: FieldCtx, h: int, x: Sequence[int] | int = 0, z: Sequence[int] | int = 0,
                      edges: Sequence[int] = ()) -> QuantumAttack:
    """Eve adds each wiretapped symbol into a fresh register, then optionally applies Z(z)X(x) to the channel."""
    if h < 1:
        raise ValueError("h must be >= 1")
    xs = [x] * h if np.isscalar(x) else list(x)
    zs = [z] * h if np.isscalar(z) else list(z)
    unitaries = []
    for j in range(h):
        pauli = phase_matrix(ctx, zs[j]) @ shift_matrix(ctx, xs[j])
        unitaries.append(np.kron(pauli, np.eye(ctx.q)) @ cadd_matrix(ctx))
    name = "copy" if not any(xs) and not any(zs) else "copy+pauli"
    return QuantumAttack(name, (ctx.q,) * h, _basis(ctx.q**h), tuple(unitaries),
                         tuple((j,) for j in range(h)), tuple(sorted(edges)),
                         params={"x": xs, "z": zs})


def build_swap_attack(ctx: FieldCtx, h: int, edges: Sequence[int] = ()) -> QuantumAttack:
    """Eve swaps the channel register with her j-th fresh register (initialised to |0>)."""
    if h < 1:
        raise ValueError("h must be >= 1")
    return QuantumAttack("swap", (ctx.q,) * h, _basis(ctx.q**h), (swap_matrix(ctx.q),) * h,
                         tuple((j,) for j in range(h)), tuple(sorted(edges)))


def build_pauli_attack(ctx: FieldCtx, h: int, x: int = 1, z: int = 0, edges: Sequence[int] = ()) -> QuantumAttack:
    """Injection without wiretapping: Z(z)X(x) on each attacked channel."""
    P = phase_matrix(ctx, z) @ shift_matrix(ctx, x)
    return QuantumAttack("pauli", (), np.ones(1, dtype=complex), (P,) * h, ((),) * h,
                         tuple(sorted(edges)), params={"x": x, "z": z})


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    G = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    Q, R = np.linalg.qr(G)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def build_random_unitary_attack(ctx: FieldCtx, h: int, eve_dim: int, seed: int,
                                edges: Sequence[int] = ()) -> QuantumAttack:
    if eve_dim < 1:
        raise ValueError("eve_dim must be >= 1")
    rng = np.random.default_rng(seed)
    unitaries = tuple(haar_unitary(ctx.q * eve_dim, rng) for _ in range(h))
    dims = (eve_dim,) if eve_dim > 1 else ()
    sl = ((0,),) * h if eve_dim > 1 else ((),) * h
    return QuantumAttack("random", dims, _basis(eve_dim), unitaries, sl, tuple(sorted(edges)), seed=seed,
                         params={"eve_dim": eve_dim})

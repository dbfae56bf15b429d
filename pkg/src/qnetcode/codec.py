"""Transfer matrices of a linear network code and the classical secrecy/recoverability checks."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import gf
from .netmodel import EdgeSets, ExtendedNetwork, NetworkError, ProtectedContainsRandomnessEdge


class InconsistentReduction(RuntimeError):
    """The triangular recursion for wiretapped values is not causal."""


@dataclass(frozen=True)
class TransferMatrices:
    M0: np.ndarray
    M: np.ndarray
    Mp: np.ndarray
    attacked: tuple[int, ...]
    n: int
    n_rand: int

    @property
    def h(self) -> int:
        return len(self.attacked)


@dataclass(frozen=True)
class Blocks:
    Msigma: np.ndarray
    Miota: np.ndarray
    n: int
    n_rand: int

    @property
    def Msigma1(self) -> np.ndarray:
        return self.Msigma[:, : self.n]

    @property
    def Msigma2(self) -> np.ndarray:
        return self.Msigma[:, self.n: self.n + self.n_rand]

    @property
    def Msigma3(self) -> np.ndarray:
        return self.Msigma[:, self.n + self.n_rand:]

    @property
    def h(self) -> int:
        return self.Msigma.shape[1] - self.n - self.n_rand

    def miota_split(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n, nr = self.n, self.n_rand
        return self.Miota[:, :n], self.Miota[:, n:n + nr], self.Miota[:, n + nr:]


@dataclass(frozen=True)
class SecrecyWitness:
    bmap: np.ndarray  # Msigma1 == Msigma2 @ bmap
    via_inverse: bool = False


@dataclass(frozen=True)
class RecoveryWitness:
    m1: np.ndarray
    m2: np.ndarray

    def decode(self, ctx: gf.FieldCtx, y, b) -> np.ndarray:
        """a = m1 y - m2 b."""
        return gf.msub(ctx, gf.matmul(ctx, self.m1, np.asarray(y)), gf.matmul(ctx, self.m2, np.asarray(b)))


# -- matrix construction ---------------------------------------------------

def _head_rows(net: ExtendedNetwork, width: int) -> np.ndarray:
    """Rows of input and randomness edges: unit vectors on A_j and B_group."""
    rows = np.zeros((net.n + net.l, width), dtype=np.int64)
    for j in net.input_edges:
        rows[j - 1, j - 1] = 1
    for j in net.randomness_edges:
        rows[j - 1, net.n + net.randomness_group(j) - 1] = 1
    return rows


def _theta_rows(net: ExtendedNetwork) -> dict[int, list[tuple[int, int]]]:
    rows: dict[int, list[tuple[int, int]]] = {}
    for (j, k), v in net.theta.items():
        rows.setdefault(j, []).append((k, v))
    return rows


def _combine(ctx, terms, table: np.ndarray, width: int) -> np.ndarray:
    acc = np.zeros(width, dtype=np.int64)
    for k, v in terms:
        acc = ctx.add_table[acc, ctx.mul_table[v, table[k - 1]]]
    return acc


def compute_m0(net: ExtendedNetwork) -> np.ndarray:
    ctx = net.ctx
    width = net.n + net.n_rand
    M0 = np.zeros((net.size, width), dtype=np.int64)
    M0[: net.n + net.l] = _head_rows(net, width)
    theta = _theta_rows(net)
    for j in range(net.n + net.l + 1, net.size + 1):
        M0[j - 1] = _combine(ctx, theta.get(j, ()), M0, width)
    return M0


def is_multiple_unicast(net: ExtendedNetwork, M0: np.ndarray) -> bool:
    tail = np.asarray(M0)[net.size - net.n:]
    target = np.zeros_like(tail)
    target[np.arange(net.n), np.arange(net.n)] = 1
    return bool(np.array_equal(tail, target))


def _attacked_tuple(net: ExtendedNetwork, attacked) -> tuple[int, ...]:
    if isinstance(attacked, EdgeSets):
        return attacked.attacked
    return EdgeSets.build(net, (), attacked).attacked


def compute_m_mprime(net: ExtendedNetwork, attacked) -> tuple[np.ndarray, np.ndarray]:
    """M and M' through the step-function recurrence, attacked columns appended after (A, B)."""
    ctx = net.ctx
    sigma = _attacked_tuple(net, attacked)
    h = len(sigma)
    base = net.n + net.n_rand
    width = base + h
    M = np.zeros((net.size, width), dtype=np.int64)
    M[: net.n + net.l] = _head_rows(net, width)
    theta = _theta_rows(net)
    for j in range(net.n + net.l + 1, net.size + 1):
        row = _combine(ctx, theta.get(j, ()), M, width)
        for kp, s in enumerate(sigma):
            # correction applies strictly after the attacked edge's own time
            if j - s - 1 < 0:
                continue
            t = net.theta_at(j, s)
            if t == 0:
                continue
            delta = np.zeros(width, dtype=np.int64)
            delta[base + kp] = 1
            row = ctx.add_table[row, ctx.mul_table[t, gf.msub(ctx, delta, M[s - 1])]]
        M[j - 1] = row
    Mp = M.copy()
    for kp, s in enumerate(sigma):
        Mp[s - 1] = 0
        Mp[s - 1, base + kp] = 1
    return M, Mp


def compute_m_direct(net: ExtendedNetwork, attacked) -> tuple[np.ndarray, np.ndarray]:
    """Same matrices from m(j) = sum theta m'(k) with substituted rows; used as a cross-check."""
    ctx = net.ctx
    sigma = _attacked_tuple(net, attacked)
    base = net.n + net.n_rand
    width = base + len(sigma)
    M = np.zeros((net.size, width), dtype=np.int64)
    M[: net.n + net.l] = _head_rows(net, width)
    Mp = M.copy()
    slot = {s: base + i for i, s in enumerate(sigma)}
    theta = _theta_rows(net)
    for j in range(net.n + net.l + 1, net.size + 1):
        M[j - 1] = _combine(ctx, theta.get(j, ()), Mp, width)
        Mp[j - 1] = M[j - 1]
        if j in slot:
            Mp[j - 1] = 0
            Mp[j - 1, slot[j]] = 1
    return M, Mp


def transfer_matrices(net: ExtendedNetwork, attacked=()) -> TransferMatrices:
    sigma = _attacked_tuple(net, attacked)
    M, Mp = compute_m_mprime(net, sigma)
    return TransferMatrices(compute_m0(net), M, Mp, sigma, net.n, net.n_rand)


def extract_blocks(net: ExtendedNetwork, tm: TransferMatrices, protected: Sequence[int]) -> Blocks:
    prot = sorted(set(int(j) for j in protected))
    for j in prot:
        if net.role(j) == "randomness":
            raise ProtectedContainsRandomnessEdge(f"e({j}) is a shared-randomness edge")
    sig = [s - 1 for s in tm.attacked]
    width = tm.M.shape[1]
    Msigma = tm.M[sig] if sig else np.zeros((0, width), dtype=np.int64)
    Miota = tm.Mp[[j - 1 for j in prot]] if prot else np.zeros((0, width), dtype=np.int64)
    return Blocks(Msigma, Miota, tm.n, tm.n_rand)


# -- verdicts --------------------------------------------------------------

def check_secrecy(ctx: gf.FieldCtx, blocks: Blocks) -> SecrecyWitness | None:
    M1, M2 = blocks.Msigma1, blocks.Msigma2
    h, nr = M2.shape
    if h == nr and h > 0:
        inv = gf.inverse(ctx, M2)
        if inv is not None:
            return SecrecyWitness(gf.matmul(ctx, inv, M1), via_inverse=True)
    if not np.any(M1):
        return SecrecyWitness(np.zeros((nr, M1.shape[1]), dtype=np.int64))
    X = gf.solve_right(ctx, M2, M1)
    return None if X is None else SecrecyWitness(X)


def check_recoverability(ctx: gf.FieldCtx, blocks: Blocks) -> RecoveryWitness | None:
    A, B, C = blocks.miota_split()
    n = blocks.n
    lhs = np.hstack([A, C])  # h' x (n + h)
    rhs = np.hstack([gf.identity(n), np.zeros((n, C.shape[1]), dtype=np.int64)])
    # m1 @ lhs == rhs  <=>  lhs.T @ m1.T == rhs.T
    X = gf.solve_right(ctx, lhs.T, rhs.T)
    if X is None:
        return None
    m1 = X.T.copy()
    return RecoveryWitness(m1, gf.matmul(ctx, m1, B))


@dataclass(frozen=True)
class Verdict:
    attacked: tuple[int, ...]
    secrecy: SecrecyWitness | None
    recovery: RecoveryWitness | None

    @property
    def secure(self) -> bool:
        return self.secrecy is not None

    @property
    def recoverable(self) -> bool:
        return self.recovery is not None

    @property
    def ok(self) -> bool:
        return self.secure and self.recoverable

    def to_doc(self) -> dict:
        doc = {"attacked_edges": list(self.attacked), "secure": self.secure, "recoverable": self.recoverable}
        if self.secrecy is not None:
            doc["witness_bmap"] = self.secrecy.bmap.tolist()
        if self.recovery is not None:
            doc["m1"] = self.recovery.m1.tolist()
            doc["m2"] = self.recovery.m2.tolist()
        return doc


def analyze(net: ExtendedNetwork, attacked: Sequence[int], protected: Sequence[int]) -> Verdict:
    tm = transfer_matrices(net, attacked)
    blocks = extract_blocks(net, tm, protected)
    return Verdict(tm.attacked, check_secrecy(net.ctx, blocks), check_recoverability(net.ctx, blocks))


# -- classical execution under attack --------------------------------------

def simulate_classical(net: ExtendedNetwork, a, b, attack, attacked=None):
    """Time-ordered evaluation; returns (Y, Y', Z) with the injected values applied at attacked edges.

    ``attack`` is anything with ``inject(i, z_prefix) -> int`` (see :mod:`qnetcode.attacks`);
    ``attacked`` defaults to the attack's own edge list.
    """
    ctx = net.ctx
    sigma = tuple(attacked if attacked is not None else attack.edges)
    slot = {s: i for i, s in enumerate(sorted(sigma))}
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    Y = np.zeros(net.size, dtype=np.int64)
    Yp = np.zeros(net.size, dtype=np.int64)
    Z: list[int] = []
    theta = _theta_rows(net)
    for j in range(1, net.size + 1):
        if j <= net.n:
            y = int(a[j - 1])
        elif j <= net.n + net.l:
            y = int(b[net.randomness_group(j) - 1])
        else:
            y = 0
            for k, v in theta.get(j, ()):
                y = int(ctx.add_table[y, ctx.mul_table[v, Yp[k - 1]]])
        Y[j - 1] = y
        if j in slot:
            i = slot[j]
            Z.append(y)
            Yp[j - 1] = int(attack.inject(i, tuple(Z[:i])))
        else:
            Yp[j - 1] = y
    return Y, Yp, np.array(Z, dtype=np.int64)


def reconstruct_wiretap(ctx: gf.FieldCtx, tm: TransferMatrices, z_tilde, attack) -> np.ndarray:
    """Solve Z_j = Z~_j + sum_k m(s(j), n+n'+k) g_k(Z_<k) sequentially."""
    base = tm.n + tm.n_rand
    Msig3 = tm.M[[s - 1 for s in tm.attacked]][:, base:]
    if np.any(np.triu(Msig3)):
        raise InconsistentReduction("wiretap at an attacked edge depends on a later or same-time injection")
    Z: list[int] = []
    injected: list[int] = []
    for j in range(tm.h):
        z = int(z_tilde[j])
        for k in range(j):
            z = int(ctx.add_table[z, ctx.mul_table[Msig3[j, k], injected[k]]])
        Z.append(z)
        injected.append(int(attack.inject(j, tuple(Z[:j]))))
    return np.array(Z, dtype=np.int64)


def verify_attack_reduction(net: ExtendedNetwork, tm: TransferMatrices, attack, trials: int = 50,
                            rng: np.random.Generator | None = None) -> bool:
    """Check that Z rebuilt from the c=0 wiretap matches direct simulation on random inputs."""
    ctx = net.ctx
    rng = rng if rng is not None else np.random.default_rng(0)
    base = tm.n + tm.n_rand
    Msig = tm.M[[s - 1 for s in tm.attacked]][:, :base]
    for _ in range(trials):
        a = rng.integers(0, ctx.q, size=tm.n)
        b = rng.integers(0, ctx.q, size=tm.n_rand)
        for component in getattr(attack, "components", (attack,)):
            z_tilde = gf.matmul(ctx, Msig, np.concatenate([a, b])) if tm.h else np.zeros(0, dtype=np.int64)
            _, _, Z = simulate_classical(net, a, b, component, tm.attacked)
            if not np.array_equal(reconstruct_wiretap(ctx, tm, z_tilde, component), Z):
                return False
    return True


def require_multiple_unicast(net: ExtendedNetwork) -> np.ndarray:
    M0 = compute_m0(net)
    if not is_multiple_unicast(net, M0):
        raise NetworkError("the code is not a multiple-unicast network code")
    return M0

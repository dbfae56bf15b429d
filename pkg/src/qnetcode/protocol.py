"""The quantum protocol derived from a linear code: execution, certificates and sweeps."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Sequence

import numpy as np

from . import codec, qsim
from .attacks import (QuantumAttack, build_copy_attack, build_pauli_attack, build_random_unitary_attack,
                      build_swap_attack)
from .netmodel import EdgeSets, ExtendedNetwork

SECURITY_TOL = 1e-8
MI_TOL = 1e-7
FIDELITY_TOL = 1e-9


class PreconditionViolated(ValueError):
    pass


@dataclass(frozen=True)
class ProtocolOutcome:
    fidelities: tuple[float, ...] | None
    security_gap: float
    mutual_info: float
    input_marginal_gap: float
    public_edges: tuple[int, ...]
    protected_edges: tuple[int, ...]
    attacked: tuple[int, ...] = ()
    attack: str = "none"
    seed: int | None = None
    n_branches: int = 0
    mode: str = "mixture"

    def to_doc(self) -> dict:
        return {
            "attack": self.attack,
            "attacked_edges": list(self.attacked),
            "seed": self.seed,
            "mode": self.mode,
            "fidelities": None if self.fidelities is None else list(self.fidelities),
            "security_gap": self.security_gap,
            "mutual_info_bits": self.mutual_info,
            "input_marginal_gap": self.input_marginal_gap,
            "public_edges": list(self.public_edges),
            "protected_edges": list(self.protected_edges),
            "branches": self.n_branches,
        }


def _reg(j: int) -> str:
    return f"H{j}"


def _ireg(j: int) -> str:
    return f"I{j}"


def prepare(net: ExtendedNetwork, attack: QuantumAttack | None, mode: str = "mixture",
            randomness: bool = True) -> list[tuple[float, qsim.SparseState, tuple[int, ...] | None]]:
    """Initial (weight, state, b) triples: entangled (I_j, H_j) pairs, Eve's memory, shared randomness.

    In mixture mode there is one pure state per value of b; in purified mode b
    lives in registers ``B1..`` prepared in uniform superposition and b is None.
    """
    ctx = net.ctx
    q = ctx.q
    st = qsim.empty_state(ctx)
    bell = np.eye(q).ravel() / np.sqrt(q)
    for j in net.input_edges:
        qsim.add_superposed(st, [_ireg(j), _reg(j)], [q, q], bell, role="input")
    if attack is not None and attack.eve_dims:
        qsim.add_superposed(st, [f"W{f}" for f in range(len(attack.eve_dims))], attack.eve_dims,
                            attack.initial, role="eve")
    nr = net.n_rand
    if mode == "purified":
        vec = np.ones(q) / np.sqrt(q) if randomness else np.eye(q)[0]
        for g in range(1, nr + 1):
            qsim.add_superposed(st, [f"B{g}"], [q], vec, role="randomness")
        return [(1.0, st, None)]
    if mode != "mixture":
        raise ValueError(f"unknown mode {mode!r}")
    if not randomness or nr == 0:
        return [(1.0, st, (0,) * nr)]
    return [(q**-nr, st.copy(), b) for b in product(range(q), repeat=nr)]


def transmit(net: ExtendedNetwork, state: qsim.SparseState, attack: QuantumAttack | None,
             b: Sequence[int] | None = None) -> None:
    """Step 2: controlled adds, randomness shifts and Eve's unitaries in time order.

    With ``b=None`` the randomness is read coherently from registers ``B1..``.
    """
    ctx = net.ctx
    slot = {s: i for i, s in enumerate(attack.edges)} if attack is not None else {}
    for j in range(net.n + net.l + 1, net.size + 1):
        qsim.add_register(state, _reg(j), role="output" if j in net.output_edges else "channel")
        qsim.apply_cadd(state, _reg(j), [(_reg(k), net.theta_at(j, k)) for k in net.qin(j)])
        # cin lists randomness edges; their coefficient multiplies the group's value
        coeff: dict[int, int] = {}
        for k in net.cin(j):
            g = net.randomness_group(k)
            coeff[g] = int(ctx.add(coeff.get(g, 0), net.theta_at(j, k)))
        if coeff:
            if b is None:
                qsim.apply_cadd(state, _reg(j), [(f"B{g}", c) for g, c in coeff.items()])
            else:
                x = 0
                for g, c in coeff.items():
                    x = int(ctx.add(x, ctx.mul(c, b[g - 1])))
                qsim.apply_pauli(state, _reg(j), x=x)
        if j in slot:
            i = slot[j]
            regs = [_reg(j)] + [f"W{f}" for f in attack.slices[i]]
            qsim.apply_unitary(state, regs, attack.unitaries[i], check=False)
            qsim.compact(state)


def run(net: ExtendedNetwork, protected: Sequence[int], attack: QuantumAttack | None = None,
        mode: str = "mixture", randomness: bool = True, fidelity: bool | None = None) -> ProtocolOutcome:
    M0 = codec.compute_m0(net)
    if not codec.is_multiple_unicast(net, M0):
        raise PreconditionViolated("the classical code is not a multiple-unicast network code")
    attacked = attack.edges if attack is not None else ()
    if attack is not None and len(attacked) != attack.h:
        raise PreconditionViolated("bind the attack to edges with QuantumAttack.at(...)")
    sets = EdgeSets.build(net, protected, attacked)
    comps = []
    for w, st, b in prepare(net, attack, mode, randomness):
        transmit(net, st, attack, b)
        comps.append((w, st))

    measured = list(net.measured_edges)
    prot = tuple(j for j in measured if j in sets.protected)
    public = tuple(j for j in measured if j not in sets.protected)
    inputs = [_ireg(j) for j in net.input_edges]
    eve = [f"W{f}" for f in range(len(attack.eve_dims))] if attack is not None else []

    ens = qsim.fourier_dephase(comps, [_reg(j) for j in public], inputs + eve)
    gap, mi = qsim.product_gap(ens, inputs, eve)
    rho_i = qsim.left_marginal(ens, inputs)
    marginal = qsim.trace_norm(rho_i - np.eye(len(rho_i)) / len(rho_i))

    fids = None
    if fidelity or (fidelity is None and attack is None):
        fids = tuple(pair_fidelity(net, comps, M0, j) for j in net.input_edges)
    return ProtocolOutcome(fids, gap, mi, marginal, public, prot, tuple(attacked),
                           attack.name if attack is not None else "none",
                           attack.seed if attack is not None else None, len(ens.branches), mode)


def pair_fidelity(net: ExtendedNetwork, comps, M0: np.ndarray, j: int) -> float:
    """Fidelity of (I_j, output j) with the maximally entangled state after the Step 4 correction."""
    q = net.ctx.q
    measured = list(net.measured_edges)
    out = _reg(net.N + net.n + net.l + j)
    C = M0[[k - 1 for k in measured]][:, [j - 1]]
    ens = qsim.fourier_dephase(comps, [_reg(k) for k in measured], [_ireg(j), out], correction=([out], C))
    phi = np.eye(q).ravel() / np.sqrt(q)
    return float(sum(b.prob * np.real(phi.conj() @ b.rho @ phi) for b in ens.branches))


def verify_correctness(outcome: ProtocolOutcome, tol: float = FIDELITY_TOL) -> bool:
    if outcome.fidelities is None:
        raise ValueError("correctness is only defined for attack-free runs")
    return min(outcome.fidelities) >= 1 - tol


def verify_security(outcome: ProtocolOutcome, tol: float = SECURITY_TOL) -> bool:
    return outcome.security_gap <= tol and outcome.input_marginal_gap <= tol


# -- sweeps ----------------------------------------------------------------

def build_suite(ctx, h: int, names: Sequence[str], seed: int = 0) -> list[QuantumAttack]:
    """Attack family: copy, swap, pauli (copy then X(1)Z(1)), inject (X(1)Z(1) only), random:N."""
    out: list[QuantumAttack] = []
    for name in names:
        name = name.strip()
        if name == "copy":
            out.append(build_copy_attack(ctx, h))
        elif name == "swap":
            out.append(build_swap_attack(ctx, h))
        elif name == "pauli":
            out.append(build_copy_attack(ctx, h, x=1, z=1))
        elif name == "inject":
            out.append(build_pauli_attack(ctx, h, x=1, z=1))
        elif name.startswith("random"):
            count = int(name.split(":", 1)[1]) if ":" in name else 1
            out += [build_random_unitary_attack(ctx, h, ctx.q, seed + i) for i in range(count)]
        elif name == "none":
            continue
        else:
            raise ValueError(f"unknown attack family {name!r}")
    return out


def candidate_sets(net: ExtendedNetwork, selection: str) -> list[tuple[int, ...]]:
    chans = list(net.physical_edges)
    if selection == "none":
        return [()]
    if selection == "all-singles":
        return [(e,) for e in chans]
    if selection == "all-pairs":
        return list(combinations(chans, 2))
    sets = []
    for part in selection.split(";"):
        part = part.strip()
        if part:
            sets.append(tuple(sorted(int(e.strip().lstrip("e")) for e in part.split(","))))
    return sets


@dataclass(frozen=True)
class SweepEntry:
    attacked: tuple[int, ...]
    verdict: codec.Verdict
    outcomes: tuple[ProtocolOutcome, ...] = ()
    error: str | None = None

    @property
    def max_gap(self) -> float:
        return max((o.security_gap for o in self.outcomes), default=0.0)

    @property
    def max_mi(self) -> float:
        return max((o.mutual_info for o in self.outcomes), default=0.0)

    @property
    def max_marginal(self) -> float:
        return max((o.input_marginal_gap for o in self.outcomes), default=0.0)

    def passed(self, tol: float = SECURITY_TOL, mi_tol: float = MI_TOL) -> bool:
        if not self.verdict.ok or self.error:
            return False
        return self.max_gap <= tol and self.max_marginal <= tol and self.max_mi <= mi_tol

    def to_doc(self) -> dict:
        doc = self.verdict.to_doc()
        doc["quantum"] = [o.to_doc() for o in self.outcomes]
        if self.error:
            doc["error"] = self.error
        return doc


def _run_task(args):
    net, protected, attack, mode = args
    return run(net, protected, attack, mode=mode)


def sweep(net: ExtendedNetwork, protected: Sequence[int], suite: Sequence[str], candidates,
          seed: int = 0, workers: int = 1, quantum: bool = True, mode: str = "mixture") -> list[SweepEntry]:
    """Classical verdicts for each attacked set, plus the quantum suite whenever both conditions hold."""
    if isinstance(candidates, str):
        candidates = candidate_sets(net, candidates)
    tasks, plan = [], []
    verdicts = {}
    for ea in candidates:
        ea = tuple(sorted(ea))
        v = codec.analyze(net, ea, protected)
        verdicts[ea] = v
        if quantum and v.ok and ea:
            for att in build_suite(net.ctx, len(ea), suite, seed):
                plan.append(ea)
                tasks.append((net, tuple(protected), att.at(ea), mode))
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]
    grouped: dict[tuple[int, ...], list[ProtocolOutcome]] = {}
    for ea, res in zip(plan, results):
        grouped.setdefault(ea, []).append(res)
    return [SweepEntry(ea, verdicts[ea], tuple(grouped.get(ea, ()))) for ea in verdicts]

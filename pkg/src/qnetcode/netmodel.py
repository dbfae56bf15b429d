"""Base networks, their extension by virtual input/output/randomness edges, and the edge clock.

Edges of the extended network are numbered 1..|E| in time order:

* ``1..n``                 input edges ``(in:j, source_j)``
* ``n+1..n+l``             shared-randomness edges, grouped by randomness vertex
* ``n+l+1..N+n+l``         physical channels in the user-supplied order
* ``N+n+l+1..N+2n+l``      output edges ``(terminal_j, out:j)``

All public indices are 1-based so they read the same as edge labels ``e(j)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .gf import FieldCtx, FieldError, get_field


class NetworkError(ValueError):
    pass


class BadEndpoints(NetworkError):
    pass


class CausalityViolation(NetworkError):
    def __init__(self, j: int, k: int, reason: str = ""):
        self.j, self.k = j, k
        msg = f"theta[{j},{k}] references edge e({k}) which is not in inc({j})"
        super().__init__(msg + (f": {reason}" if reason else ""))


class IndexOutOfRange(NetworkError, IndexError):
    pass


class ProtectedContainsRandomnessEdge(NetworkError):
    pass


class ParseError(NetworkError):
    def __init__(self, where: str, message: str):
        self.where = where
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class BaseNetwork:
    nodes: tuple[str, ...]
    channels: tuple[tuple[str, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(str(v) for v in self.nodes))
        object.__setattr__(self, "channels", tuple((str(u), str(v)) for u, v in self.channels))
        if len(set(self.nodes)) != len(self.nodes):
            raise BadEndpoints("duplicate node identifiers")
        known = set(self.nodes)
        for i, (u, v) in enumerate(self.channels, 1):
            if u not in known or v not in known:
                raise BadEndpoints(f"channel {i} ({u}->{v}) has an undeclared endpoint")
            if u == v:
                raise BadEndpoints(f"channel {i} is a self-loop on {u}")

    @property
    def N(self) -> int:
        return len(self.channels)


@dataclass(frozen=True)
class CodeSpec:
    """Message endpoints, randomness distribution and the node coefficients theta[j, k]."""

    n: int
    message_endpoints: tuple[tuple[str, str], ...]
    randomness_groups: tuple[tuple[str, ...], ...] = ()
    theta: Mapping[tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "message_endpoints",
                           tuple((str(s), str(t)) for s, t in self.message_endpoints))
        object.__setattr__(self, "randomness_groups",
                           tuple(tuple(str(v) for v in g) for g in self.randomness_groups))
        object.__setattr__(self, "theta", {(int(j), int(k)): int(v) for (j, k), v in self.theta.items()})
        if self.n < 1 or len(self.message_endpoints) != self.n:
            raise NetworkError("need exactly n message endpoint pairs, n >= 1")
        if any(len(g) == 0 for g in self.randomness_groups):
            raise NetworkError("randomness groups must be non-empty")

    @property
    def n_rand(self) -> int:
        return len(self.randomness_groups)

    @property
    def l(self) -> int:
        return sum(len(g) for g in self.randomness_groups)


def input_vertex(j: int) -> str:
    return f"in:{j}"


def output_vertex(j: int) -> str:
    return f"out:{j}"


def randomness_vertex(j: int) -> str:
    return f"rand:{j}"


@dataclass(frozen=True)
class ExtendedNetwork:
    ctx: FieldCtx
    base: BaseNetwork
    code: CodeSpec
    edges: tuple[tuple[str, str], ...]
    theta: Mapping[tuple[int, int], int]
    channel_ids: tuple[int, ...]  # 1-based base-channel index of each physical edge

    @property
    def n(self) -> int:
        return self.code.n

    @property
    def n_rand(self) -> int:
        return self.code.n_rand

    @property
    def l(self) -> int:
        return self.code.l

    @property
    def N(self) -> int:
        return self.base.N

    @property
    def size(self) -> int:
        return len(self.edges)

    # index ranges, 1-based inclusive
    @property
    def input_edges(self) -> range:
        return range(1, self.n + 1)

    @property
    def randomness_edges(self) -> range:
        return range(self.n + 1, self.n + self.l + 1)

    @property
    def physical_edges(self) -> range:
        return range(self.n + self.l + 1, self.N + self.n + self.l + 1)

    @property
    def output_edges(self) -> range:
        return range(self.N + self.n + self.l + 1, self.size + 1)

    @property
    def measured_edges(self) -> tuple[int, ...]:
        """Edges whose registers are measured in the Fourier basis (inputs and channels)."""
        return tuple(self.input_edges) + tuple(self.physical_edges)

    def edge(self, j: int) -> tuple[str, str]:
        self._check(j)
        return self.edges[j - 1]

    def v_in(self, j: int) -> str:
        return self.edge(j)[0]

    def v_out(self, j: int) -> str:
        return self.edge(j)[1]

    def role(self, j: int) -> str:
        self._check(j)
        if j <= self.n:
            return "input"
        if j <= self.n + self.l:
            return "randomness"
        if j <= self.N + self.n + self.l:
            return "channel"
        return "output"

    def randomness_group(self, j: int) -> int:
        """1-based index of the shared randomness carried by randomness edge j."""
        if self.role(j) != "randomness":
            raise IndexOutOfRange(f"e({j}) is not a shared-randomness edge")
        return self._group_of[j]

    @cached_property
    def _group_of(self) -> dict[int, int]:
        out, j = {}, self.n + 1
        for g, members in enumerate(self.code.randomness_groups, 1):
            for _ in members:
                out[j] = g
                j += 1
        return out

    def _check(self, j: int) -> None:
        if not 1 <= j <= len(self.edges):
            raise IndexOutOfRange(f"edge index {j} outside 1..{len(self.edges)}")

    @cached_property
    def _inc(self) -> tuple[tuple[int, ...], ...]:
        table = []
        for j in range(1, self.size + 1):
            tail = self.edges[j - 1][0]
            table.append(tuple(k for k in range(1, j) if self.edges[k - 1][1] == tail))
        return tuple(table)

    def inc(self, j: int) -> tuple[int, ...]:
        """Earlier edges arriving at the tail of e(j)."""
        self._check(j)
        return self._inc[j - 1]

    def qin(self, j: int) -> tuple[int, ...]:
        return tuple(k for k in self.inc(j) if k <= self.n or k > self.n + self.l)

    def cin(self, j: int) -> tuple[int, ...]:
        return tuple(k for k in self.inc(j) if self.n < k <= self.n + self.l)

    def theta_at(self, j: int, k: int) -> int:
        return self.theta.get((j, k), 0)

    @property
    def source_vertices(self) -> set[str]:
        return {self.v_out(j) for j in self.input_edges}

    @property
    def terminal_vertices(self) -> set[str]:
        return {self.v_in(j) for j in self.output_edges}

    @property
    def randomness_vertices(self) -> set[str]:
        return {self.v_out(j) for j in self.randomness_edges}

    def terminal(self, j: int) -> str:
        """Terminal node of message j."""
        return self.v_in(self.N + self.n + self.l + j)

    def edge_sets(self, protected: Iterable[int] = (), attacked: Iterable[int] = ()) -> "EdgeSets":
        return EdgeSets.build(self, protected, attacked)


@dataclass(frozen=True)
class EdgeSets:
    protected: tuple[int, ...]  # iota(1..h') as a sorted tuple
    attacked: tuple[int, ...]   # varsigma(1..h) as a sorted tuple

    @classmethod
    def build(cls, net: ExtendedNetwork, protected: Iterable[int], attacked: Iterable[int]) -> "EdgeSets":
        prot = tuple(sorted(set(int(j) for j in protected)))
        att = tuple(sorted(set(int(j) for j in attacked)))
        for j in prot:
            if net.role(j) == "randomness":
                raise ProtectedContainsRandomnessEdge(f"e({j}) is a shared-randomness edge")
        for j in att:
            if net.role(j) != "channel":
                raise NetworkError(f"e({j}) is a virtual {net.role(j)} edge and cannot be attacked")
        return cls(prot, att)

    @property
    def h(self) -> int:
        return len(self.attacked)

    @property
    def h_prot(self) -> int:
        return len(self.protected)


def extend(base: BaseNetwork, code: CodeSpec, ctx: FieldCtx,
           physical_edge_order: Sequence[int] | None = None) -> ExtendedNetwork:
    """Build the extended network; ``physical_edge_order`` lists 1-based base channel ids in time order."""
    known = set(base.nodes)
    for s, t in code.message_endpoints:
        if s not in known or t not in known:
            raise BadEndpoints(f"message endpoint ({s}, {t}) is not a declared node")
    for g in code.randomness_groups:
        for v in g:
            if v not in known:
                raise BadEndpoints(f"randomness node {v} is not declared")
    order = list(range(1, base.N + 1)) if physical_edge_order is None else [int(i) for i in physical_edge_order]
    if sorted(order) != list(range(1, base.N + 1)):
        raise NetworkError("physical_edge_order must be a permutation of the channel ids")

    edges: list[tuple[str, str]] = []
    for j, (s, _) in enumerate(code.message_endpoints, 1):
        edges.append((input_vertex(j), s))
    for g, members in enumerate(code.randomness_groups, 1):
        for v in members:
            edges.append((randomness_vertex(g), v))
    for i in order:
        edges.append(base.channels[i - 1])
    for j, (_, t) in enumerate(code.message_endpoints, 1):
        edges.append((t, output_vertex(j)))

    theta = {}
    for (j, k), value in code.theta.items():
        theta[(j, k)] = ctx.element(value)
    net = ExtendedNetwork(ctx, base, code, tuple(edges), theta, tuple(order))
    if 2 * net.n + net.l > net.size:
        raise NetworkError("2n + l exceeds the number of edges")
    first = net.n + net.l + 1
    for (j, k), value in theta.items():
        if not first <= j <= net.size:
            raise CausalityViolation(j, k, "only physical and output edges carry coefficients")
        if k >= j or k not in net.inc(j):
            if value == 0:
                continue
            raise CausalityViolation(j, k)
    # explicit zeros outside inc(j) carry no information
    theta = {key: v for key, v in theta.items() if v != 0}
    return ExtendedNetwork(ctx, base, code, tuple(edges), theta, tuple(order))


def terminal_map(net: ExtendedNetwork, M0: np.ndarray, edge: int) -> set[str]:
    """Terminals whose recovered message depends on a message carried by ``edge``."""
    row = np.asarray(M0)[edge - 1, : net.n]
    return {net.terminal(j) for j in range(1, net.n + 1) if row[j - 1] != 0}


# -- file format -----------------------------------------------------------

def network_to_doc(net: ExtendedNetwork, protected: Iterable[int] = (),
                   attacked: Iterable[int] = ()) -> dict:
    """Canonical JSON-able document; channels are listed in time order."""
    return {
        "p": net.ctx.p,
        "d": net.ctx.d,
        "nodes": list(net.base.nodes),
        "channels": [list(net.edges[j - 1]) for j in net.physical_edges],
        "messages": [list(m) for m in net.code.message_endpoints],
        "randomness_groups": [list(g) for g in net.code.randomness_groups],
        "theta": [[j, k, int(v)] for (j, k), v in sorted(net.theta.items())],
        "protected": sorted(int(j) for j in protected),
        "attacked": sorted(int(j) for j in attacked),
    }


def _need(doc: Mapping, key: str, kind, default=None):
    if key not in doc:
        if default is not None:
            return default
        raise ParseError(key, "missing field")
    value = doc[key]
    if not isinstance(value, kind):
        raise ParseError(key, f"expected {getattr(kind, '__name__', kind)}")
    return value


def network_from_doc(doc: Mapping) -> tuple[ExtendedNetwork, EdgeSets]:
    if not isinstance(doc, Mapping):
        raise ParseError("<root>", "expected a JSON object")
    p = _need(doc, "p", int)
    d = _need(doc, "d", int, 1)
    try:
        ctx = get_field(p**d)
    except (FieldError, KeyError) as exc:
        raise ParseError("p", str(exc)) from exc
    nodes = _need(doc, "nodes", list)
    channels = _need(doc, "channels", list)
    for i, c in enumerate(channels):
        if not (isinstance(c, list) and len(c) == 2):
            raise ParseError(f"channels[{i}]", "expected [from, to]")
    messages = _need(doc, "messages", list)
    for i, m in enumerate(messages):
        if not (isinstance(m, list) and len(m) == 2):
            raise ParseError(f"messages[{i}]", "expected [source, terminal]")
    groups = _need(doc, "randomness_groups", list, [])
    theta_rows = _need(doc, "theta", list)
    theta = {}
    for i, row in enumerate(theta_rows):
        if not (isinstance(row, list) and len(row) == 3):
            raise ParseError(f"theta[{i}]", "expected [j, k, value]")
        j, k, v = row
        if not (isinstance(j, int) and isinstance(k, int)):
            raise ParseError(f"theta[{i}]", "edge indices must be integers")
        try:
            theta[(j, k)] = ctx.element(v)
        except (FieldError, ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"theta[{i}]", f"bad coefficient {v!r}: {exc}") from exc
    try:
        base = BaseNetwork(tuple(nodes), tuple(tuple(c) for c in channels))
        code = CodeSpec(len(messages), tuple(tuple(m) for m in messages),
                        tuple(tuple(g) for g in groups), theta)
        net = extend(base, code, ctx)
    except CausalityViolation as exc:
        raise ParseError(f"theta[{exc.j},{exc.k}]", str(exc)) from exc
    except NetworkError as exc:
        raise ParseError("network", str(exc)) from exc
    try:
        sets = EdgeSets.build(net, _need(doc, "protected", list, []), _need(doc, "attacked", list, []))
    except NetworkError as exc:
        raise ParseError("protected/attacked", str(exc)) from exc
    return net, sets


def load_network(path) -> tuple[ExtendedNetwork, EdgeSets]:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {exc.lineno}", exc.msg) from exc
    return network_from_doc(doc)


def dump_network(net: ExtendedNetwork, sets: EdgeSets | None = None) -> str:
    sets = sets or EdgeSets((), ())
    return json.dumps(network_to_doc(net, sets.protected, sets.attacked), indent=2)

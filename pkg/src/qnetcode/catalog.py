"""Built-in example networks with their codes and protected-edge sets."""
from __future__ import annotations

from fractions import Fraction
from math import gcd

from .gf import FieldCtx, _is_prime, get_field
from .netmodel import BaseNetwork, CodeSpec, ExtendedNetwork, extend


class IllegalFieldOrder(ValueError):
    pass


def _fe(ctx: FieldCtx, value) -> int:
    """Embed an integer or Fraction through the prime subfield."""
    value = Fraction(value)
    num = value.numerator % ctx.p
    den = value.denominator % ctx.p
    if den == 0:
        raise IllegalFieldOrder(f"{value} is undefined in F_{ctx.q}")
    return int(ctx.div(num, den))


def _require_coprime(q: int, avoid: tuple[int, ...], name: str) -> FieldCtx:
    ctx = get_field(q)
    for m in avoid:
        if gcd(ctx.p, m) != 1:
            raise IllegalFieldOrder(f"{name} needs q coprime to {', '.join(map(str, avoid))}; got q={q}")
    return ctx


def smallest_prime_coprime(*ms: int) -> int:
    p = 2
    while not (_is_prime(p) and all(gcd(p, m) == 1 for m in ms)):
        p += 1
    return p


def _build(ctx, nodes, channels, messages, groups, theta) -> ExtendedNetwork:
    th = {key: _fe(ctx, v) for key, v in theta.items()}
    code = CodeSpec(len(messages), tuple(messages), tuple(groups), th)
    return extend(BaseNetwork(tuple(nodes), tuple(channels)), code, ctx)


def butterfly(q: int = 3) -> tuple[ExtendedNetwork, tuple[int, ...]]:
    ctx = _require_coprime(q, (2,), "butterfly")
    nodes = [f"v{i}" for i in range(1, 7)]
    channels = [("v1", "v3"), ("v2", "v3"), ("v1", "v5"), ("v2", "v6"),
                ("v3", "v4"), ("v4", "v5"), ("v4", "v6")]
    messages = [("v1", "v6"), ("v2", "v5")]
    half = Fraction(1, 2)
    # theta[5,3] is 1: the published M0 row for e(5) is (2, 0, 1)
    theta = {(5, 1): 2, (5, 3): 1, (6, 2): 2, (6, 4): 1,
             (7, 1): 1, (7, 3): 1, (8, 2): 1, (8, 4): 1,
             (9, 5): 1, (9, 6): 1, (10, 9): 1, (11, 9): 1,
             (12, 8): -1, (12, 11): half, (13, 7): -1, (13, 10): half}
    net = _build(ctx, nodes, channels, messages, [("v1", "v2")], theta)
    return net, (11, 12, 13)


def nsource(n: int = 3, q: int | None = None) -> tuple[ExtendedNetwork, tuple[int, ...]]:
    if n < 2:
        raise ValueError("nsource needs n >= 2")
    q = smallest_prime_coprime(n, n - 1) if q is None else q
    ctx = _require_coprime(q, (n, n - 1), "nsource")
    nodes = [f"v{i}" for i in range(1, n + 3)]
    hub, term = f"v{n + 1}", f"v{n + 2}"
    channels = [(f"v{j}", hub) for j in range(1, n + 1)]
    channels += [(f"v{j}", term) for j in range(1, n + 1)]
    channels.append((hub, term))
    messages = [(f"v{j}", term) for j in range(1, n + 1)]
    r = Fraction(1, n - 1)
    theta = {}
    for k in range(1, n + 1):
        theta[(2 * n + k, k)] = n
        theta[(2 * n + k, n + k)] = 1
        theta[(3 * n + k, k)] = 1
        theta[(3 * n + k, n + k)] = 1
        theta[(4 * n + 1, 2 * n + k)] = Fraction(1, n)
        theta[(4 * n + k + 1, 3 * n + k)] = 1 - r
        for l in range(1, n + 1):
            if l != k:
                theta[(4 * n + k + 1, 3 * n + l)] = -r
        theta[(4 * n + k + 1, 4 * n + 1)] = r
    groups = [tuple(f"v{j}" for j in range(1, n + 1))]
    net = _build(ctx, nodes, channels, messages, groups, theta)
    return net, tuple(range(3 * n + 1, 4 * n + 2))


_TWOEDGE_INNER = {
    (7, 1): 1, (7, 3): 1, (7, 5): 0,
    (9, 1): 1, (9, 3): 1, (9, 5): 1,
    (11, 1): 1, (11, 3): 0, (11, 5): 1,
    (8, 2): 1, (8, 4): 2, (8, 6): 1,
    (10, 2): 2, (10, 4): 1, (10, 6): 2,
    (12, 2): 1, (12, 4): 1, (12, 6): 3,
}


def twoedge(q: int = 7) -> tuple[ExtendedNetwork, tuple[int, ...]]:
    ctx = _require_coprime(q, (2, 3, 5), "twoedge")
    nodes = [f"v{i}" for i in range(1, 6)]
    channels = [("v1", "v3"), ("v2", "v3"), ("v1", "v4"), ("v2", "v4"),
                ("v1", "v5"), ("v2", "v5"), ("v3", "v5"), ("v4", "v5")]
    messages = [("v1", "v5"), ("v2", "v5")]
    F = Fraction
    theta = dict(_TWOEDGE_INNER)
    theta.update({(13, 7): 1, (13, 8): 1, (14, 9): 1, (14, 10): 1,
                  (15, 11): F(3, 4), (15, 12): F(-1, 2), (15, 13): 0, (15, 14): F(1, 4),
                  (16, 11): F(-5, 8), (16, 12): F(-3, 4), (16, 13): F(-1, 2), (16, 14): F(9, 8)})
    groups = [("v1", "v2"), ("v1", "v2")]
    net = _build(ctx, nodes, channels, messages, groups, theta)
    return net, (11, 12, 13, 14)


def ramp_nsource(n: int = 3, q: int | None = None) -> tuple[ExtendedNetwork, tuple[int, ...]]:
    """The n-source code with all sources merged and the hub merged into the terminal.

    Output edges are renumbered to the standard positions 4n+1..5n.
    """
    if n < 2:
        raise ValueError("ramp_nsource needs n >= 2")
    q = smallest_prime_coprime(n, n - 1) if q is None else q
    ctx = _require_coprime(q, (n, n - 1), "ramp_nsource")
    nodes = ["v1", f"v{n + 2}"]
    channels = [("v1", f"v{n + 2}")] * (2 * n)
    messages = [("v1", f"v{n + 2}")] * n
    r = Fraction(1, n - 1)
    theta = {}
    for k in range(1, n + 1):
        theta[(2 * n + k, k)] = n
        theta[(2 * n + k, n + k)] = 1
        theta[(3 * n + k, k)] = 1
        theta[(3 * n + k, n + k)] = 1
        out = 4 * n + k
        theta[(out, 3 * n + k)] = 1 - r
        for l in range(1, n + 1):
            if l != k:
                theta[(out, 3 * n + l)] = -r
            # the contracted hub edge contributed to every output, including l == k
            theta[(out, 2 * n + l)] = Fraction(1, n) * r
    groups = [("v1",) * n]
    net = _build(ctx, nodes, channels, messages, groups, theta)
    return net, tuple(range(2 * n + 1, 4 * n + 1))


def ramp_twoedge(q: int = 7) -> tuple[ExtendedNetwork, tuple[int, ...]]:
    """The two-edge code with v2 merged into v1 and v3, v4 merged into v5; outputs are e(13), e(14)."""
    ctx = _require_coprime(q, (2, 3, 5), "ramp_twoedge")
    F = Fraction
    theta = dict(_TWOEDGE_INNER)
    theta.update({(13, 9): F(1, 4), (13, 10): F(1, 4), (13, 11): F(3, 4), (13, 12): F(-1, 2),
                  (14, 7): F(-1, 2), (14, 8): F(-1, 2), (14, 9): F(9, 8), (14, 10): F(9, 8),
                  (14, 11): F(-5, 8), (14, 12): F(-3, 4)})
    net = _build(ctx, ["v1", "v5"], [("v1", "v5")] * 6, [("v1", "v5")] * 2,
                 [("v1", "v1"), ("v1", "v1")], theta)
    return net, tuple(range(7, 13))


def toy(q: int = 3) -> tuple[ExtendedNetwork, tuple[int, ...]]:
    """One message sent over two parallel channels and averaged at the terminal."""
    ctx = _require_coprime(q, (2,), "toy")
    half = Fraction(1, 2)
    theta = {(2, 1): 1, (3, 1): 1, (4, 2): half, (4, 3): half}
    net = _build(ctx, ["s1", "t1"], [("s1", "t1"), ("s1", "t1")], [("s1", "t1")], [], theta)
    return net, (3, 4)


def chain(q: int = 3) -> tuple[ExtendedNetwork, tuple[int, ...]]:
    """A single message forwarded over one channel between two nodes."""
    ctx = get_field(q)
    net = _build(ctx, ["v1", "v2"], [("v1", "v2")], [("v1", "v2")], [], {(2, 1): 1, (3, 2): 1})
    return net, (2, 3)


CATALOG = {
    "butterfly": butterfly,
    "nsource": nsource,
    "twoedge": twoedge,
    "ramp_nsource": ramp_nsource,
    "ramp_twoedge": ramp_twoedge,
    "toy": toy,
    "chain": chain,
}


def default_q(name: str, n: int | None = None) -> int:
    if name in ("nsource", "ramp_nsource"):
        n = 3 if n is None else n
        return smallest_prime_coprime(n, n - 1)
    return {"butterfly": 3, "twoedge": 7, "ramp_twoedge": 7, "toy": 3, "chain": 3}[name]


def load_builtin(name: str, q: int | None = None, n: int | None = None):
    if name not in CATALOG:
        raise KeyError(f"unknown builtin {name!r}; choose from {', '.join(CATALOG)}")
    q = default_q(name, n) if q is None else q
    if name in ("nsource", "ramp_nsource"):
        return CATALOG[name](3 if n is None else n, q)
    return CATALOG[name](q)

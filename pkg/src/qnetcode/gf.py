"""Arithmetic over F_{p^d} and exact linear algebra on matrices of field elements.

Field elements are plain integers in ``[0, q)`` encoding the polynomial-basis
coefficients as ``value = sum(coeffs[i] * p**i)``.  Matrices are ``numpy``
integer arrays holding such encodings; every routine takes the field context
explicitly.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

# Monic irreducible moduli, coefficients low -> high.  For each (p, d) this is
# the irreducible polynomial with the smallest encoded lower part.
IRREDUCIBLE_MODULI: dict[tuple[int, int], tuple[int, ...]] = {
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (2, 5): (1, 0, 1, 0, 0, 1),
    (2, 6): (1, 1, 0, 0, 0, 0, 1),
    (2, 7): (1, 1, 0, 0, 0, 0, 0, 1),
    (2, 8): (1, 1, 0, 1, 1, 0, 0, 0, 1),
    (3, 2): (1, 0, 1),
    (3, 3): (1, 2, 0, 1),
    (3, 4): (2, 1, 0, 0, 1),
    (3, 5): (1, 2, 0, 0, 0, 1),
    (5, 2): (2, 0, 1),
    (5, 3): (1, 1, 0, 1),
    (7, 2): (1, 0, 1),
    (11, 2): (1, 0, 1),
    (13, 2): (2, 0, 1),
}

MAX_ORDER = 256


class FieldError(ValueError):
    pass


class DivisionByZero(ZeroDivisionError):
    pass


class DimensionMismatch(ValueError):
    pass


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % k for k in range(2, int(n**0.5) + 1))


def factor_prime_power(q: int) -> tuple[int, int]:
    """Return ``(p, d)`` with ``p**d == q`` or raise ``FieldError``."""
    for p in range(2, q + 1):
        if q % p == 0:
            if not _is_prime(p):
                break
            d, r = 0, q
            while r % p == 0:
                r //= p
                d += 1
            if r == 1:
                return p, d
            break
    raise FieldError(f"{q} is not a prime power")


def _polymulmod(a, b, modulus, p):
    d = len(modulus) - 1
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % p
    for i in range(len(prod) - 1, d - 1, -1):
        c = prod[i]
        if c:
            for k in range(d + 1):
                prod[i - d + k] = (prod[i - d + k] - c * modulus[k]) % p
    out = prod[:d] + [0] * max(0, d - len(prod))
    return out


@dataclass(frozen=True)
class FieldCtx:
    """The finite field F_q with q = p**d, plus lookup tables for its arithmetic."""

    p: int
    d: int = 1
    modulus: tuple[int, ...] = ()
    add_table: np.ndarray = field(init=False, repr=False, compare=False)
    mul_table: np.ndarray = field(init=False, repr=False, compare=False)
    neg_table: np.ndarray = field(init=False, repr=False, compare=False)
    inv_table: np.ndarray = field(init=False, repr=False, compare=False)
    trace_table: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not _is_prime(self.p):
            raise FieldError(f"characteristic {self.p} is not prime")
        if self.d < 1:
            raise FieldError("extension degree must be >= 1")
        if self.p**self.d > MAX_ORDER:
            raise FieldError(f"fields larger than {MAX_ORDER} are not supported")
        modulus = tuple(self.modulus)
        if not modulus:
            modulus = (0, 1) if self.d == 1 else IRREDUCIBLE_MODULI[(self.p, self.d)]
        if len(modulus) != self.d + 1 or modulus[-1] != 1:
            raise FieldError("modulus must be monic of degree d")
        object.__setattr__(self, "modulus", modulus)

        p, d, q = self.p, self.d, self.p**self.d
        coeffs = [[(v // p**i) % p for i in range(d)] for v in range(q)]
        weights = np.array([p**i for i in range(d)])
        cmat = np.array(coeffs, dtype=np.int64)
        add = ((cmat[:, None, :] + cmat[None, :, :]) % p) @ weights
        neg = ((-cmat) % p) @ weights
        if d == 1:
            v = np.arange(q)
            mul = (v[:, None] * v[None, :]) % p
        else:
            mul = np.zeros((q, q), dtype=np.int64)
            for a in range(q):
                for b in range(a, q):
                    c = _polymulmod(coeffs[a], coeffs[b], modulus, p)
                    mul[a, b] = mul[b, a] = int(np.dot(c, weights))
        inv = np.zeros(q, dtype=np.int64)
        for a in range(1, q):
            inv[a] = int(np.nonzero(mul[a] == 1)[0][0])
        # Frobenius sum a + a^p + ... + a^(p^(d-1)); lands in the prime subfield.
        tr = np.zeros(q, dtype=np.int64)
        for a in range(q):
            acc, x = 0, a
            for _ in range(d):
                acc = add[acc, x]
                x = _pow(mul, x, p)
            tr[a] = acc
        for name, table in (("add_table", add), ("mul_table", mul), ("neg_table", neg),
                            ("inv_table", inv), ("trace_table", tr)):
            table = np.asarray(table, dtype=np.int64)
            table.setflags(write=False)
            object.__setattr__(self, name, table)

    @property
    def q(self) -> int:
        return self.p**self.d

    # -- scalars -----------------------------------------------------------
    def coeffs(self, a: int) -> tuple[int, ...]:
        return tuple((int(a) // self.p**i) % self.p for i in range(self.d))

    def from_coeffs(self, coeffs) -> int:
        if len(coeffs) != self.d or any(not 0 <= c < self.p for c in coeffs):
            raise FieldError(f"bad coefficient vector {coeffs!r}")
        return int(sum(int(c) * self.p**i for i, c in enumerate(coeffs)))

    def element(self, value) -> int:
        """Coerce an int (or a ``Fraction``-like ``num/den`` pair string) into the field."""
        if isinstance(value, str):
            return self.parse(value)
        v = int(value)
        if self.d == 1:
            return v % self.p
        if not 0 <= v < self.q:
            raise FieldError(f"{v} is not an element encoding of F_{self.q}")
        return v

    def parse(self, text: str) -> int:
        """Parse ``"3"``, ``"-1"`` or ``"-5/8"`` (integers embed via the prime subfield)."""
        text = text.strip()
        if "/" in text:
            num, den = text.split("/", 1)
            return self.div(self._embed_int(int(num)), self._embed_int(int(den)))
        return self._embed_int(int(text)) if self.d > 1 else int(text) % self.p

    def _embed_int(self, k: int) -> int:
        return k % self.p

    def add(self, a, b):
        return self.add_table[a, b]

    def sub(self, a, b):
        return self.add_table[a, self.neg_table[b]]

    def neg(self, a):
        return self.neg_table[a]

    def mul(self, a, b):
        return self.mul_table[a, b]

    def inv(self, a):
        if np.any(np.asarray(a) == 0):
            raise DivisionByZero("inverse of zero in F_%d" % self.q)
        return self.inv_table[a]

    def div(self, a, b):
        return self.mul_table[a, self.inv(b)]

    def trace(self, a):
        """Absolute trace F_q -> F_p (the result encodes an element of the prime subfield)."""
        return self.trace_table[a]

    def char_phase(self, y, beta):
        """omega**tr(y*beta) with omega = exp(-2*pi*i/p)."""
        t = self.trace_table[self.mul_table[y, beta]]
        return np.exp(-2j * np.pi * t / self.p)

    def elements(self) -> np.ndarray:
        return np.arange(self.q, dtype=np.int64)

    def mult_matrix(self, a: int) -> np.ndarray:
        """Matrix over F_p of x -> a*x in the polynomial basis (columns = images of basis)."""
        cols = [self.coeffs(self.mul_table[a, self.p**i]) for i in range(self.d)]
        return np.array(cols, dtype=np.int64).T


def _pow(mul, x, e):
    acc = 1
    for _ in range(e):
        acc = mul[acc, x]
    return acc


@lru_cache(maxsize=None)
def get_field(q: int) -> FieldCtx:
    """Cached context for F_q using the built-in modulus table."""
    p, d = factor_prime_power(q)
    return FieldCtx(p, d)


def fe_arith(ctx: FieldCtx, a: int, b: int, kind: str) -> int:
    ops = {"add": ctx.add, "sub": ctx.sub, "mul": ctx.mul, "div": ctx.div}
    if kind not in ops:
        raise ValueError(f"unknown operation {kind!r}")
    return int(ops[kind](a, b))


def char_phase(ctx: FieldCtx, y: int, beta: int) -> complex:
    return complex(cmath.exp(-2j * cmath.pi * int(ctx.trace(ctx.mul(y, beta))) / ctx.p))


# -- matrices --------------------------------------------------------------

def asmatrix(ctx: FieldCtx, rows) -> np.ndarray:
    m = np.array(rows, dtype=np.int64)
    if m.ndim == 1:
        m = m.reshape(1, -1) if m.size else m.reshape(0, 0)
    if m.size and (m.min() < 0 or m.max() >= ctx.q):
        raise FieldError("matrix entries must lie in [0, q)")
    return m


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.int64)


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def matmul(ctx: FieldCtx, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    vec = B.ndim == 1
    if vec:
        B = B[:, None]
    if A.shape[1] != B.shape[0]:
        raise DimensionMismatch(f"cannot multiply {A.shape} by {B.shape}")
    if ctx.d == 1:
        out = (A @ B) % ctx.p
    else:
        out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
        for k in range(A.shape[1]):
            out = ctx.add_table[out, ctx.mul_table[A[:, k, None], B[None, k, :]]]
    return out[:, 0] if vec else out


def madd(ctx: FieldCtx, A, B) -> np.ndarray:
    return ctx.add_table[np.asarray(A), np.asarray(B)]


def msub(ctx: FieldCtx, A, B) -> np.ndarray:
    return ctx.add_table[np.asarray(A), ctx.neg_table[np.asarray(B)]]


def scale(ctx: FieldCtx, c: int, A) -> np.ndarray:
    return ctx.mul_table[c, np.asarray(A)]


def rref(ctx: FieldCtx, A: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form with first-nonzero pivoting; returns (R, pivot columns)."""
    R = np.array(A, dtype=np.int64, copy=True)
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(R[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            R[[r, piv]] = R[[piv, r]]
        R[r] = ctx.mul_table[ctx.inv_table[R[r, c]], R[r]]
        col = R[:, c].copy()
        col[r] = 0
        hit = np.nonzero(col)[0]
        if hit.size:
            R[hit] = ctx.add_table[R[hit], ctx.neg_table[ctx.mul_table[col[hit, None], R[r][None, :]]]]
        pivots.append(c)
        r += 1
    return R, pivots


def rank(ctx: FieldCtx, A: np.ndarray) -> int:
    A = np.asarray(A, dtype=np.int64)
    if A.size == 0:
        return 0
    return len(rref(ctx, A)[1])


def solve_right(ctx: FieldCtx, A: np.ndarray, B: np.ndarray) -> np.ndarray | None:
    """Some X with A @ X == B over F_q, or None when B is not in the column image of A."""
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    vec = B.ndim == 1
    if vec:
        B = B[:, None]
    if A.ndim != 2 or A.shape[0] != B.shape[0]:
        raise DimensionMismatch(f"A has {A.shape[0]} rows but B has {B.shape[0]}")
    m, k = A.shape
    nb = B.shape[1]
    if k == 0:
        return (np.zeros((0, nb), dtype=np.int64) if not vec else np.zeros(0, dtype=np.int64)) \
            if not np.any(B) else None
    R, pivots = rref(ctx, np.hstack([A, B]))
    if any(c >= k for c in pivots):
        return None
    X = np.zeros((k, nb), dtype=np.int64)
    for i, c in enumerate(pivots):
        X[c] = R[i, k:]
    return X[:, 0] if vec else X


def image_contains(ctx: FieldCtx, A: np.ndarray, v: np.ndarray) -> bool:
    return solve_right(ctx, A, v) is not None


def inverse(ctx: FieldCtx, A: np.ndarray) -> np.ndarray | None:
    A = np.asarray(A, dtype=np.int64)
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatch("only square matrices have inverses")
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if rank(ctx, A) < n:
        return None
    return solve_right(ctx, A, identity(n))


def row_space_basis(ctx: FieldCtx, vectors: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """RREF basis of the span of the given row vectors and its pivot columns."""
    vectors = np.asarray(vectors, dtype=np.int64)
    if vectors.shape[0]:
        vectors = np.unique(vectors, axis=0)
    if vectors.shape[0] == 0:
        return np.zeros((0, vectors.shape[1]), dtype=np.int64), []
    R, pivots = rref(ctx, vectors)
    return R[: len(pivots)], pivots

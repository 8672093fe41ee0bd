"""Explicit construction of F_{p^f} with a fixed primitive element.

Elements are polynomials of degree < f over F_p, stored as coefficient
tuples (constant term first).  An element's integer *code* is
sum(c_i * p**i); the code is what indexes the discrete-log table.

The pair (modulus, gamma) is chosen deterministically: the modulus is the
monic irreducible polynomial whose lower coefficients have the smallest
code, and gamma is the primitive element with the smallest code.  Fixing
gamma fixes the reduction map from Z[zeta_{q-1}] to F_q
(zeta_{q-1} -> gamma), and with it every multiplicative character used
downstream: chi(gamma) = exp(2*pi*i/N).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
import sympy

from .errors import InvalidInput

__all__ = [
    "FieldElement",
    "FieldSpec",
    "build_field",
    "field_parameters",
    "trace_blocks",
    "trace",
    "dlog",
    "char_index",
    "ZERO",
]

# Sentinel returned by char_index for x = 0 (chi(0) = 0).
ZERO = None


class FieldDomainError(InvalidInput):
    pass


# ---------------------------------------------------------------------------
# Polynomials over F_p (coefficient lists, constant term first)
# ---------------------------------------------------------------------------

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mulmod(a: Sequence[int], b: Sequence[int], mod: Sequence[int], p: int) -> list[int]:
    """(a * b) mod (mod, p); mod is monic."""
    if not a or not b:
        return []
    prod = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] += ai * bj
    return _poly_rem(prod, mod, p)


def _poly_rem(a: Sequence[int], mod: Sequence[int], p: int) -> list[int]:
    a = [c % p for c in a]
    d = len(mod) - 1
    for k in range(len(a) - 1, d - 1, -1):
        c = a[k]
        if c:
            for j in range(d + 1):
                a[k - d + j] = (a[k - d + j] - c * mod[j]) % p
    return _trim(a[:d])


def _poly_powmod(a: Sequence[int], e: int, mod: Sequence[int], p: int) -> list[int]:
    result = [1]
    base = _poly_rem(a, mod, p)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, mod, p)
        base = _poly_mulmod(base, base, mod, p)
        e >>= 1
    return result


def _poly_sub(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    out = [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)]
    return _trim(out)


def _poly_gcd(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        inv = pow(b[-1], -1, p)
        monic = [c * inv % p for c in b]
        a, b = b, _poly_rem(a, monic, p)
    if not a:
        return a
    inv = pow(a[-1], -1, p)
    return [c * inv % p for c in a]


def is_irreducible(modulus: Sequence[int], p: int) -> bool:
    """Rabin's test for a monic polynomial of degree f over F_p.

    The polynomial divides x^{p^f} - x, and shares no factor with
    x^{p^d} - x for d = f/l, l a prime divisor of f.
    """
    f = len(modulus) - 1
    if f == 1:
        return True
    x = [0, 1]
    if _poly_sub(_poly_powmod(x, p**f, modulus, p), x, p):
        return False
    for ell in sympy.primefactors(f):
        d = f // ell
        h = _poly_sub(_poly_powmod(x, p**d, modulus, p), x, p)
        if len(_poly_gcd(modulus, h, p)) > 1:
            return False
    return True


# ---------------------------------------------------------------------------
# Field
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldElement:
    coeffs: tuple[int, ...]

    def is_zero(self) -> bool:
        return not any(self.coeffs)


@dataclass(frozen=True, eq=False)
class FieldSpec:
    """F_q = F_p[x]/(modulus) together with a generator of F_q^*.

    ``power_traces[j]`` is the trace of gamma**j and ``dlog_table[code(x)]``
    the exponent j with gamma**j = x (-1 at code 0).
    """

    p: int
    f: int
    q: int
    modulus: tuple[int, ...]
    gamma: FieldElement
    power_traces: Optional[np.ndarray] = field(repr=False)
    dlog_table: Optional[np.ndarray] = field(repr=False)

    def element(self, coeffs: Sequence[int]) -> FieldElement:
        c = [int(v) % self.p for v in coeffs]
        if len(c) > self.f:
            c = _poly_rem(c, self.modulus, self.p)
        return FieldElement(tuple(c + [0] * (self.f - len(c))))

    def from_int(self, c: int) -> FieldElement:
        return self.element([c])

    def code(self, x: FieldElement) -> int:
        return sum(c * self.p**i for i, c in enumerate(x.coeffs))

    def add(self, x: FieldElement, y: FieldElement) -> FieldElement:
        return FieldElement(tuple((a + b) % self.p for a, b in zip(x.coeffs, y.coeffs)))

    def scale(self, c: int, x: FieldElement) -> FieldElement:
        return FieldElement(tuple(c * a % self.p for a in x.coeffs))

    def mul(self, x: FieldElement, y: FieldElement) -> FieldElement:
        return self.element(_poly_mulmod(_trim(list(x.coeffs)), _trim(list(y.coeffs)), self.modulus, self.p))

    def pow(self, x: FieldElement, e: int) -> FieldElement:
        if e < 0:
            if x.is_zero():
                raise FieldDomainError("zero has no inverse")
            e %= self.q - 1
        return self.element(_poly_powmod(_trim(list(x.coeffs)), e, self.modulus, self.p))

    def gamma_pow(self, j: int) -> FieldElement:
        return self.pow(self.gamma, j % (self.q - 1))

    def prime_field_value(self, x: FieldElement) -> Optional[int]:
        """The residue c if x = c lies in F_p, else None."""
        if any(x.coeffs[1:]):
            return None
        return x.coeffs[0]


def _lowest_irreducible(p: int, f: int) -> tuple[int, ...]:
    if f == 1:
        return (0, 1)
    for code in range(1, p**f):
        low = [(code // p**i) % p for i in range(f)]
        if low[0] == 0:
            continue
        mod = tuple(low + [1])
        if is_irreducible(mod, p):
            return mod
    raise AssertionError("no irreducible polynomial found")


def _lowest_generator(p: int, f: int, modulus: tuple[int, ...]) -> tuple[int, ...]:
    q = p**f
    cofactors = [(q - 1) // ell for ell in sympy.primefactors(q - 1)]
    for code in range(2, q):
        g = [(code // p**i) % p for i in range(f)]
        g = _trim(g)
        if all(_poly_powmod(g, e, modulus, p) != [1] for e in cofactors):
            return tuple(g + [0] * (f - len(g)))
    raise AssertionError("no generator found")


def _power_blocks(p: int, f: int, modulus: tuple[int, ...], gamma: tuple[int, ...]):
    """Yield consecutive row blocks of the coefficient table of gamma**j."""
    n = p**f - 1
    block = max(1, int(np.sqrt(n)) + 1)
    first = np.zeros((block, f), dtype=np.int64)
    cur = [1]
    g = _trim(list(gamma))
    for j in range(block):
        first[j, : len(cur)] = cur
        cur = _poly_mulmod(cur, g, modulus, p)
    # multiplication by gamma**block as an F_p-linear map on coefficient rows
    step = np.zeros((f, f), dtype=np.int64)
    for i in range(f):
        col = _poly_mulmod([0] * i + [1], cur, modulus, p)
        step[i, : len(col)] = col
    blk = first
    for start in range(0, n, block):
        stop = min(n, start + block)
        yield start, blk[: stop - start]
        blk = (blk @ step) % p


def _basis_traces(p: int, f: int, modulus: tuple[int, ...]) -> np.ndarray:
    """Traces of 1, x, ..., x^{f-1}; trace is F_p-linear so these suffice."""
    tr = np.zeros(f, dtype=np.int64)
    for i in range(f):
        acc = [0] * f
        y = [0] * i + [1]
        for _ in range(f):
            for k, c in enumerate(y):
                acc[k] = (acc[k] + c) % p
            y = _poly_powmod(y, p, modulus, p)
        assert not any(acc[1:]), "trace left the prime field"
        tr[i] = acc[0]
    return tr


@lru_cache(maxsize=64)
def field_parameters(p: int, f: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """The deterministic (modulus, gamma) pair for F_{p^f}."""
    if p == 2:
        raise FieldDomainError("p = 2 is not supported")
    if not sympy.isprime(p):
        raise FieldDomainError(f"p = {p} is not prime")
    if f < 1:
        raise FieldDomainError("extension degree must be positive")
    modulus = _lowest_irreducible(p, f)
    return modulus, _lowest_generator(p, f, modulus)


@lru_cache(maxsize=4)
def build_field(p: int, f: int, tables: bool = True) -> FieldSpec:
    """Construct F_{p^f} with the deterministic (modulus, gamma) choice.

    With ``tables=False`` no O(q) arrays are built: arithmetic, gamma_pow
    and trace_blocks still work, dlog does not.
    """
    modulus, gamma = field_parameters(p, f)
    q = p**f
    if not tables:
        return FieldSpec(p, f, q, modulus, FieldElement(gamma), None, None)
    weights = np.array([p**i for i in range(f)], dtype=np.int64)
    basis_tr = _basis_traces(p, f, modulus)
    dtab = np.full(q, -1, dtype=np.int64 if q > 2**31 else np.int32)
    traces = np.empty(q - 1, dtype=np.int16)
    for start, blk in _power_blocks(p, f, modulus, gamma):
        stop = start + len(blk)
        dtab[blk @ weights] = np.arange(start, stop)
        traces[start:stop] = (blk @ basis_tr) % p
    for arr in (traces, dtab):
        arr.setflags(write=False)
    return FieldSpec(p, f, q, modulus, FieldElement(gamma), traces, dtab)


def trace_blocks(fs: FieldSpec, block: int):
    """Yield (start, traces of gamma**j for start <= j < start + block).

    Only a block x f table is held: trace(gamma**(s+j)) is the j-th row
    dotted with the trace functional pushed through multiplication by
    gamma**s, and that functional advances by one f x f product per block.
    """
    p, f, n = fs.p, fs.f, fs.q - 1
    g = _trim(list(fs.gamma.coeffs))
    first = np.zeros((block, f), dtype=np.int64)
    cur = [1]
    for j in range(block):
        first[j, : len(cur)] = cur
        cur = _poly_mulmod(cur, g, fs.modulus, p)
    step = np.zeros((f, f), dtype=np.int64)
    for i in range(f):
        col = _poly_mulmod([0] * i + [1], cur, fs.modulus, p)
        step[i, : len(col)] = col
    w = _basis_traces(p, f, fs.modulus)
    for start in range(0, n, block):
        stop = min(n, start + block)
        yield start, (first[: stop - start] @ w) % p
        w = (step @ w) % p


def trace(fs: FieldSpec, x: FieldElement) -> int:
    """T(x) = x + x^p + ... + x^{p^{f-1}}, returned as a residue mod p."""
    acc = fs.from_int(0)
    y = x
    for _ in range(fs.f):
        acc = fs.add(acc, y)
        y = fs.pow(y, fs.p)
    value = fs.prime_field_value(acc)
    assert value is not None, "trace left the prime field"
    return value


def dlog(fs: FieldSpec, x: FieldElement) -> int:
    if x.is_zero():
        raise FieldDomainError("discrete log of zero")
    if fs.dlog_table is None:
        raise FieldDomainError("field was built without tables")
    return int(fs.dlog_table[fs.code(x)])


def char_index(fs: FieldSpec, N: int, r: int, x: FieldElement) -> Optional[int]:
    """k with chi^r(x) = zeta_N^k under chi(gamma) = zeta_N; ZERO for x = 0."""
    if (fs.q - 1) % N:
        raise FieldDomainError(f"N = {N} does not divide q - 1 = {fs.q - 1}")
    if x.is_zero():
        return ZERO
    return r * dlog(fs, x) % N

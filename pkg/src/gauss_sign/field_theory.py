"""(Z/NZ)^*, the subgroup generated by p, and the decomposition field K.

K is the fixed field of <p> inside Q(zeta_N).  Its quadratic subfields
correspond to quadratic Dirichlet characters mod N that are trivial on p;
those are enumerated directly from the fundamental discriminants whose
absolute value divides N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import sympy

from .errors import InvalidInput, ResolutionError, UnsupportedCase


def jacobi_symbol(a: int, m: int) -> int:
    if m <= 0 or m % 2 == 0:
        raise InvalidInput(f"Jacobi symbol needs an odd positive modulus, got {m}")
    a %= m
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if m % 8 in (3, 5):
                result = -result
        a, m = m, a
        if a % 4 == 3 and m % 4 == 3:
            result = -result
        a %= m
    return result if m == 1 else 0


def kronecker_symbol(d: int, n: int) -> int:
    """Kronecker symbol (d/n) for n >= 0."""
    if n < 0:
        raise InvalidInput("kronecker_symbol expects n >= 0")
    if n == 0:
        return 1 if abs(d) == 1 else 0
    result = 1
    while n % 2 == 0:
        if d % 2 == 0:
            return 0
        n //= 2
        if d % 8 in (3, 5):
            result = -result
    return result * jacobi_symbol(d, n) if n > 1 else result


def mult_order(p: int, N: int) -> int:
    if N < 1:
        raise InvalidInput("N must be positive")
    if math.gcd(p, N) != 1:
        raise InvalidInput(f"gcd(p, N) = gcd({p}, {N}) != 1")
    if N == 1:
        return 1
    return int(sympy.n_order(p, N))


def chi_minus_one(q: int, N: int) -> int:
    """chi(-1) = (-1)^{(q-1)/N} for chi = omega^{(q-1)/N}."""
    if (q - 1) % N:
        raise InvalidInput(f"N = {N} does not divide q - 1")
    return -1 if ((q - 1) // N) % 2 else 1


def squarefree_part(d: int) -> int:
    sign = -1 if d < 0 else 1
    out = 1
    for ell, k in sympy.factorint(abs(d)).items():
        if k % 2:
            out *= ell
    return sign * out


def field_discriminant(D: int) -> int:
    """Discriminant of Q(sqrt(D)) for squarefree D != 1."""
    return D if D % 4 == 1 else 4 * D


def fundamental_discriminants_dividing(N: int) -> list[int]:
    """All fundamental discriminants d != 1 with |d| dividing N."""
    odd = [ell if ell % 4 == 1 else -ell for ell in sympy.primefactors(N) if ell != 2]
    two_parts = [1]
    if N % 4 == 0:
        two_parts.append(-4)
    if N % 8 == 0:
        two_parts += [8, -8]
    out = []
    for r in range(len(odd) + 1):
        for combo in combinations(odd, r):
            base = math.prod(combo)
            for t in two_parts:
                d = base * t
                if d != 1:
                    out.append(d)
    return sorted(out, key=lambda d: (abs(d), d))


@dataclass(frozen=True)
class QuadraticSubfield:
    """Q(sqrt(D)) inside K; ``disc`` is its field discriminant.

    ``disc`` doubles as the modulus-|disc| Kronecker character whose kernel
    fixes sqrt(D): sigma_a(sqrt(D)) = kronecker(disc, a) * sqrt(D).
    """

    D: int
    disc: int

    @property
    def imaginary(self) -> bool:
        return self.D < 0

    def sign(self, a: int) -> int:
        return kronecker_symbol(self.disc, a % abs(self.disc))


def quadratic_subfields(N: int, p: int) -> list[QuadraticSubfield]:
    """Quadratic subfields of K: imaginary first (largest |D| first), then real."""
    found = []
    for d in fundamental_discriminants_dividing(N):
        if kronecker_symbol(d, p) == 1:
            D = squarefree_part(d)
            found.append(QuadraticSubfield(D, d))
    found.sort(key=lambda s: (not s.imaginary, -abs(s.D)))
    return found


def roots_of_unity_in_K(quad_discs) -> int:
    ds = {s.D if isinstance(s, QuadraticSubfield) else int(s) for s in quad_discs}
    if -1 in ds and -3 in ds:
        raise ResolutionError("both sqrt(-1) and sqrt(-3) in K", stage="roots_of_unity")
    if -1 in ds:
        return 4
    if -3 in ds:
        return 6
    return 2


def class_number(D: int) -> int:
    """Number of reduced primitive forms ax^2 + bxy + cy^2 of discriminant D < 0."""
    if D >= 0 or D % 4 not in (0, 1):
        raise InvalidInput(f"{D} is not a negative discriminant")
    h = 0
    a = 1
    while 3 * a * a <= -D:
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if math.gcd(math.gcd(a, abs(b)), c) == 1:
                h += 1
        a += 1
    return h


@dataclass(frozen=True)
class IndexStructure:
    N: int
    p: int
    f: int
    e: int
    coset_reps: tuple[int, ...]
    subgroup: frozenset[int]
    is_klein_four: bool
    minus_one_in_p: bool
    subfields: tuple[QuadraticSubfield, ...]

    @property
    def quad_discs(self) -> tuple[int, ...]:
        return tuple(s.D for s in self.subfields)

    @property
    def imaginary_subfields(self) -> tuple[QuadraticSubfield, ...]:
        return tuple(s for s in self.subfields if s.imaginary)

    @property
    def unit_count(self) -> int:
        return roots_of_unity_in_K(self.imaginary_subfields)

    def coset_of(self, a: int) -> int:
        """Index into coset_reps of the coset containing a."""
        a %= self.N
        for i, r in enumerate(self.coset_reps):
            if a * pow(r, -1, self.N) % self.N in self.subgroup:
                return i
        raise InvalidInput(f"{a} is not a unit mod {self.N}")


def quotient_structure(N: int, p: int) -> IndexStructure:
    """Describe (Z/NZ)^*/<p> for the index-2 and index-4 regimes.

    Raises UnsupportedCase for other indices and for a cyclic index-4
    quotient (unless -1 lies in <p>, which is the pure case).
    """
    if N < 3:
        raise InvalidInput("N must be at least 3")
    f = mult_order(p, N)
    phi = int(sympy.totient(N))
    e = phi // f
    H = frozenset(pow(p, k, N) for k in range(f))
    reps: list[int] = []
    covered: set[int] = set()
    for a in range(1, N):
        if math.gcd(a, N) == 1 and a not in covered:
            reps.append(a)
            covered.update(a * h % N for h in H)
    assert len(reps) == e
    minus_one = (N - 1) in H
    klein = e == 4 and all(r * r % N in H for r in reps)
    if e not in (2, 4):
        raise UnsupportedCase(f"index {e} is not 2 or 4", stage="quotient_structure")
    if e == 4 and not klein and not minus_one:
        raise UnsupportedCase(
            "cyclic index 4 quotient is out of scope",
            stage="quotient_structure",
        )
    subs = tuple(quadratic_subfields(N, p))
    expected = 1 if e == 2 else (3 if klein else 1)
    if len(subs) != expected:
        raise ResolutionError(
            f"found {len(subs)} quadratic subfields, expected {expected}", stage="quadratic_subfields"
        )
    for s in subs:
        if any(s.sign(h) != 1 for h in H):
            raise ResolutionError(f"character of {s.disc} not trivial on <p>", stage="quadratic_subfields")
    n_imag = sum(s.imaginary for s in subs)
    if not minus_one and n_imag != (1 if e == 2 else 2):
        raise ResolutionError("K is imaginary but the subfield count disagrees", stage="quadratic_subfields")
    return IndexStructure(N, p, f, e, tuple(reps), H, klein, minus_one, subs)

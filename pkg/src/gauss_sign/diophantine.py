"""Norm equations a^2 + L b^2 = M for the surd coefficients.

A surd factor is (a + b*sqrt(-L)) / 2^y.  When -L = 1 (mod 4) the ring of
integers has basis (1 + sqrt(-L))/2, so such factors are always written
with y = 1 and a = b (mod 2); otherwise y = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt

from .errors import AmbiguityError, InvalidInput, ResolutionError


@dataclass(frozen=True)
class NormSolutionSet:
    L: int
    M: int
    solutions: tuple[tuple[int, int], ...]
    y_used: int = 0


def solve_norm_equation(L: int, M: int) -> NormSolutionSet:
    """Every (a, b) with a, b >= 0 and a^2 + L b^2 = M, by enumeration over b."""
    if L < 1 or M < 1:
        raise InvalidInput("L and M must be positive")
    sols = []
    b = 0
    while L * b * b <= M:
        rest = M - L * b * b
        a = isqrt(rest)
        if a * a == rest:
            sols.append((a, b))
        b += 1
    return NormSolutionSet(L, M, tuple(sorted(sols)))


def norm_rhs(p: int, f: int, x: int, attempt_y: int, sqrt_pstar: bool = False) -> int:
    """2^{2y} p^{f - 2x - h}, the norm of 2^y * G / (p^x sqrt(p*)^h)."""
    exp = f - 2 * x - (1 if sqrt_pstar else 0)
    if exp < 0:
        raise ResolutionError(f"negative norm exponent {exp}", stage="norm_rhs")
    return 4**attempt_y * p**exp


def y_for(L: int) -> int:
    return 1 if L % 4 == 3 else 0


def _unit_classes(L: int) -> int:
    # magnitude classes produced by the units of Q(sqrt(-L)) modulo +-1
    return {1: 2, 3: 3}.get(L, 1)


def choose_y(
    L: int, p: int, f: int, x: int, sqrt_pstar: bool = False, norm_exponent: int | None = None
) -> tuple[int, NormSolutionSet]:
    """Pick y from the ring of integers and keep solutions with p not dividing ab.

    ``norm_exponent`` overrides f - 2x - h (used for the two factors of the
    double-surd form, whose norms are separate powers of p).
    """
    y = y_for(L)
    if norm_exponent is None:
        M = norm_rhs(p, f, x, y, sqrt_pstar)
    else:
        M = 4**y * p**norm_exponent
    raw = solve_norm_equation(L, M)
    keep = tuple(
        (a, b) for a, b in raw.solutions if a % p and b % p and (y == 0 or (a - b) % 2 == 0)
    )
    if not keep:
        raise ResolutionError(f"no primitive solution of a^2 + {L} b^2 = {M}", stage="choose_y")
    if len(keep) > _unit_classes(L):
        raise AmbiguityError(
            f"{len(keep)} primitive classes for a^2 + {L} b^2 = {M}", stage="choose_y"
        )
    return y, NormSolutionSet(L, M, keep, y)


def signed_candidates(sols: NormSolutionSet) -> list[tuple[int, int]]:
    out = []
    for a, b in sols.solutions:
        for sa in (1, -1):
            for sb in (1, -1):
                c = (sa * a, sb * b)
                if c not in out:
                    out.append(c)
    return out

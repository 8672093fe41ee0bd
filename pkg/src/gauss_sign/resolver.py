"""Exact closed forms of G(chi) with the sign / unit-root ambiguity removed.

Pipeline: classify (N, p) from the Stickelberger valuations, build the
mod-p residue targets, solve the 2x2 or 4x4 system over F_p, and pick the
unique norm-equation solution (and root of unity) consistent with the
residues.  Every reduction of sqrt(D) to F_p that the answer depends on is
recorded in ``ClosedForm.convention``.

Shape of the result: G(chi) = zeta_w^k * sqrt(p*)^h * p^x * prod_j (a_j + b_j sqrt(-L_j)) / 2^{y_j},
where sqrt(-L_j) denotes the root with phi(sqrt(-L_j)) = beta_j.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Mapping, Sequence, Union

import sympy

from . import diophantine as dio
from .errors import AmbiguityError, InvalidInput, ResolutionError, UnsupportedCase
from .field_theory import IndexStructure, QuadraticSubfield, quotient_structure
from .stickelberger import (
    ValuationProfile,
    epsilon_form1,
    epsilon_form2,
    eps_p,
    residue_targets,
    valuation_profile,
)

FORM_KINDS = ("I2-1", "I2-2", "I2-3", "I2-4", "I4-1", "I4-2", "I4-3", "PURE")

RootRule = Union[str, Mapping[int, int]]


# ---------------------------------------------------------------------------
# Data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Surd:
    a: int
    b: int
    L: int
    y: int = 0


@dataclass(frozen=True)
class TeichmullerConvention:
    """Chosen residues phi(sqrt(D)) = beta mod p."""

    p: int
    entries: tuple[tuple[int, int], ...]

    def is_valid(self) -> bool:
        return all(
            1 <= beta <= self.p - 1 and (beta * beta - D) % self.p == 0 for D, beta in self.entries
        )


@dataclass(frozen=True)
class ClosedForm:
    p: int
    N: int
    f: int
    form_kind: str
    unit_root: tuple[int, int]
    has_sqrt_pstar: bool
    x: int
    surds: tuple[Surd, ...] = ()
    convention: tuple[tuple[int, int], ...] = ()

    @property
    def y(self) -> tuple[int, ...]:
        return tuple(s.y for s in self.surds)

    @property
    def pstar(self) -> int:
        return self.p if self.p % 4 == 1 else -self.p

    def beta(self, D: int) -> int:
        return dict(self.convention)[D]

    def magnitude_identity(self) -> bool:
        """4^{-sum y} p^{2x} prod(a^2 + L b^2) p^h == p^f, in integers."""
        lhs = self.p ** (2 * self.x) * (self.p if self.has_sqrt_pstar else 1)
        for s in self.surds:
            lhs *= s.a * s.a + s.L * s.b * s.b
        return lhs == self.p**self.f * 4 ** sum(self.y)

    def to_dict(self) -> dict:
        return {
            "p": _num(self.p),
            "N": _num(self.N),
            "f": _num(self.f),
            "form": self.form_kind,
            "unit_root": {"w": self.unit_root[0], "k": self.unit_root[1]},
            "sqrt_pstar": self.has_sqrt_pstar,
            "x": _num(self.x),
            "y": list(self.y),
            "surds": [{"a": _num(s.a), "b": _num(s.b), "L": _num(s.L)} for s in self.surds],
            "convention": [{"D": D, "beta": beta} for D, beta in self.convention],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)

    @classmethod
    def from_dict(cls, d: dict) -> "ClosedForm":
        ys = d["y"] if isinstance(d["y"], list) else [d["y"]] * len(d["surds"])
        surds = tuple(
            Surd(int(s["a"]), int(s["b"]), int(s["L"]), int(y)) for s, y in zip(d["surds"], ys)
        )
        return cls(
            p=int(d["p"]),
            N=int(d["N"]),
            f=int(d["f"]),
            form_kind=d["form"],
            unit_root=(int(d["unit_root"]["w"]), int(d["unit_root"]["k"])),
            has_sqrt_pstar=bool(d["sqrt_pstar"]),
            x=int(d["x"]),
            surds=surds,
            convention=tuple((int(c["D"]), int(c["beta"])) for c in d["convention"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "ClosedForm":
        return cls.from_dict(json.loads(text))

    def render(self) -> str:
        parts = []
        w, k = self.unit_root
        sign = ""
        if w == 2 and k == 1 or w == 4 and k == 2 or w == 6 and k == 3:
            sign = "-"
        elif w == 4 and k % 2:
            parts.append("i" if k == 1 else "-i")
        elif w == 6 and k % 3:
            parts.append(_zeta6_name(k))
        if self.has_sqrt_pstar:
            parts.append(f"√{self.pstar}" if self.pstar > 0 else f"√({self.pstar})")
        if self.x:
            parts.append(f"{self.p}^{self.x}" if self.x > 1 else str(self.p))
        for s in self.surds:
            parts.append(_surd_text(s))
        body = "·".join(parts) if parts else "1"
        text = f"G(χ) = {sign}{body}"
        if self.convention:
            conv = ", ".join(f"φ({_sqrt_name(D)})={beta}" for D, beta in self.convention)
            text += f" with {conv}"
        return text


def _num(v: int):
    return v if abs(v) < 2**53 else str(v)


def _sqrt_name(D: int) -> str:
    return "i" if D == -1 else f"√{D}"


def _zeta6_name(k: int) -> str:
    return {1: "ζ6", 2: "ζ3", 4: "ζ3^2", 5: "ζ6^5"}[k % 6]


def _surd_text(s: Surd) -> str:
    root = "i" if s.L == 1 else f"√-{s.L}"
    if s.b == 1:
        tail = f" + {root}"
    elif s.b == -1:
        tail = f" - {root}"
    elif s.b < 0:
        tail = f" - {-s.b}{root}"
    else:
        tail = f" + {s.b}{root}"
    inner = f"({s.a}{tail})"
    return inner + ("/2" if s.y else "")


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Classification:
    structure: IndexStructure
    form_kind: str
    profiles: tuple[ValuationProfile, ...]
    x: int
    sqrt_pstar: bool
    surd_fields: tuple[tuple[QuadraticSubfield, int], ...]
    restricted_order: int

    @property
    def N(self) -> int:
        return self.structure.N

    @property
    def p(self) -> int:
        return self.structure.p

    @property
    def f(self) -> int:
        return self.structure.f

    @property
    def b_values(self) -> tuple[Fraction, ...]:
        return tuple(v.b_value for v in self.profiles)


def _check_prime(p: int) -> None:
    if p == 2:
        raise UnsupportedCase(
            "p = 2: +-1 cannot be distinguished modulo 2, so the congruence method does not apply",
            stage="classify",
        )
    if p < 2 or not sympy.isprime(p):
        raise InvalidInput(f"p = {p} is not prime", stage="classify")


def classify(N: int, p: int) -> Classification:
    _check_prime(p)
    if N < 3:
        raise InvalidInput("N must be at least 3", stage="classify")
    if math.gcd(N, p) != 1:
        raise InvalidInput(f"gcd(N, p) = gcd({N}, {p}) != 1", stage="classify")
    ist = quotient_structure(N, p)
    f, e = ist.f, ist.e
    q = p**f
    # order of chi restricted to F_p^*
    d = N // math.gcd(N, (q - 1) // (p - 1))
    profiles, _ = valuation_profile(N, p, f, ist.coset_reps)
    half_f = Fraction(f, 2)

    if ist.minus_one_in_p:
        if any(v.b_value != half_f for v in profiles):
            raise ResolutionError("pure case with unequal valuations", stage="classify")
        return Classification(ist, "PURE", tuple(profiles), f // 2, False, (), d)

    if e == 4 and d > 1:
        raise UnsupportedCase(
            f"index 4 needs gcd(p(p-1), N) = 1; chi has order {d} on F_p^*", stage="classify"
        )
    if d > 2:
        raise UnsupportedCase(f"chi has order {d} on F_p^* (beyond sqrt(p*))", stage="classify")
    h = d == 2

    imag = ist.imaginary_subfields
    alphas = [sum(v.b_value * s.sign(v.rep) for v in profiles) / e for s in imag]
    for v in profiles:
        model = half_f + sum(al * s.sign(v.rep) for al, s in zip(alphas, imag))
        if model != v.b_value:
            raise ResolutionError(
                f"valuation {v.b_value} at coset {v.rep} is not explained by the quadratic subfields",
                stage="classify",
            )
    x = half_f - Fraction(h, 2) - sum(abs(al) for al in alphas)
    if x.denominator != 1 or x < 0:
        raise ResolutionError(f"non-integral power of p: x = {x}", stage="classify")
    surds = tuple((s, int(2 * abs(al))) for s, al in zip(imag, alphas) if al)
    if e == 2:
        kind = {(0, False): "I2-1", (0, True): "I2-2", (1, False): "I2-3", (1, True): "I2-4"}[
            (len(surds), h)
        ]
    else:
        kind = ("I4-1", "I4-2", "I4-3")[len(surds)]
    return Classification(ist, kind, tuple(profiles), int(x), h, surds, d)


# ---------------------------------------------------------------------------
# F_p linear algebra and matching
# ---------------------------------------------------------------------------

def sqrt_mod_roots(D: int, p: int) -> list[int]:
    roots = sorted(int(r) for r in sympy.sqrt_mod(D % p, p, all_roots=True))
    roots = [r for r in roots if r]
    if len(roots) != 2:
        raise ResolutionError(f"{D} is not a nonzero square mod {p}", stage="teichmuller_root")
    return roots


def choose_root(D: int, p: int, rule: RootRule = "canonical") -> int:
    """The residue taken for phi(sqrt(D)): smaller root unless overridden."""
    if not isinstance(rule, str):
        if D in rule:
            beta = rule[D] % p
            if (beta * beta - D) % p:
                raise InvalidInput(f"{beta}^2 != {D} mod {p}", stage="teichmuller_root")
            return beta
        rule = "canonical"
    lo, hi = sqrt_mod_roots(D, p)
    if rule == "canonical":
        return lo
    if rule == "alternate":
        return hi
    raise InvalidInput(f"unknown root rule {rule!r}")


def solve_2x2(beta: int, T0: int, T1: int, p: int) -> tuple[int, int]:
    """(a, b) with a + b*beta = T0 and a - b*beta = T1 over F_p."""
    if beta % p == 0:
        raise ResolutionError("beta = 0 mod p", stage="solve_2x2")
    inv2 = pow(2, -1, p)
    a = (T0 + T1) * inv2 % p
    b = (T0 - T1) * inv2 * pow(beta, -1, p) % p
    return a, b


def solve_4x4(beta: int, beta_prime: int, T: Sequence[int], p: int) -> tuple[int, int, int, int]:
    """(aa', a'b, ab', bb') from rows (1, +-beta, +-beta', +-beta*beta').

    Row order is (1, sigma, tau, sigma*tau), sigma negating sqrt(-L) and tau
    negating sqrt(-L').  The matrix is a Hadamard pattern scaled by
    diag(1, beta, beta', beta*beta'), so its inverse is a quarter of the
    transposed sign pattern with the scales divided out.
    """
    if beta % p == 0 or beta_prime % p == 0:
        raise ResolutionError("beta or beta' = 0 mod p", stage="solve_4x4")
    t0, t1, t2, t3 = (v % p for v in T)
    inv4 = pow(4, -1, p)
    u0 = (t0 + t1 + t2 + t3) * inv4
    u1 = (t0 - t1 + t2 - t3) * inv4 * pow(beta, -1, p)
    u2 = (t0 + t1 - t2 - t3) * inv4 * pow(beta_prime, -1, p)
    u3 = (t0 - t1 - t2 + t3) * inv4 * pow(beta * beta_prime, -1, p)
    return tuple(v % p for v in (u0, u1, u2, u3))


def _same_mod(u: Sequence[int], v: Sequence[int], p: int) -> bool:
    return all((a - b) % p == 0 for a, b in zip(u, v))


def factor_products(
    products: Sequence[int],
    solution_set: dio.NormSolutionSet,
    solution_set_prime: dio.NormSolutionSet | None,
    p: int,
) -> tuple[int, ...]:
    """Exact signed coefficients whose residues reproduce ``products``.

    Two residues and one solution set give (a, b); four residues
    (aa', a'b, ab', bb') and two sets give (a, b, a', b') with a > 0 (the
    common sign of both factors does not change the product).
    """
    if all(v % p == 0 for v in products):
        raise AmbiguityError("all residues vanish mod p", stage="factor_products")
    first = dio.signed_candidates(solution_set)
    if solution_set_prime is None:
        hits = [c for c in first if _same_mod(c, products, p)]
    else:
        hits = []
        for (a, b), (a2, b2) in product(first, dio.signed_candidates(solution_set_prime)):
            if a < 0 or (a == 0 and b < 0):
                continue
            if _same_mod((a * a2, a2 * b, a * b2, b * b2), products, p):
                hits.append((a, b, a2, b2))
    if not hits:
        raise ResolutionError("no sign assignment matches the residues", stage="factor_products")
    if len(hits) > 1:
        raise AmbiguityError(f"{len(hits)} sign assignments match", stage="factor_products")
    return hits[0]


def _zeta_residues(w: int, beta: int | None, p: int) -> list[int]:
    if w == 2:
        base = p - 1
    elif w == 4:
        base = beta
    elif w == 6:
        base = (1 + beta) * pow(2, -1, p) % p
    else:
        raise InvalidInput(f"w = {w} not in (2, 4, 6)")
    return [pow(base, k, p) for k in range(w)]


def unit_root_from_residue(
    eps_residue: int, w: int, p: int, rule: RootRule = "canonical"
) -> tuple[int, list[tuple[int, int]]]:
    """k with phi(zeta_w^k) = eps_residue; also the (D, beta) entries used."""
    eps_residue %= p
    if eps_residue == 0:
        raise ResolutionError("zero unit residue", stage="unit_root")
    entries: list[tuple[int, int]] = []
    beta = None
    if w in (4, 6):
        D = -1 if w == 4 else -3
        beta = choose_root(D, p, rule)
        entries.append((D, beta))
    powers = _zeta_residues(w, beta, p)
    if eps_residue not in powers:
        raise ResolutionError(
            f"{eps_residue} is not the image of a {w}-th root of unity mod {p}", stage="unit_root"
        )
    k = powers.index(eps_residue)
    if w == 2 or k % (w // 2) == 0:
        entries = []
    return k, entries


# ---------------------------------------------------------------------------
# Resolution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Resolution:
    classification: Classification
    closed_form: ClosedForm
    targets: tuple[int, ...] = ()
    residues: tuple[int, ...] = ()
    eps_residue: int | None = None
    solution_sets: tuple[dio.NormSolutionSet, ...] = field(default=(), repr=False)


def _role_index(ist: IndexStructure, signs_wanted: Sequence[int], subs: Sequence[QuadraticSubfield]) -> int:
    for i, r in enumerate(ist.coset_reps):
        if all(s.sign(r) == w for s, w in zip(subs, signs_wanted)):
            return i
    raise ResolutionError("no coset with the requested sign pattern", stage="resolve")


def _unit_sign_residue(w: int, k: int, flip: int, beta_unit: int | None, p: int) -> int:
    if k == 0:
        return 1
    powers = _zeta_residues(w, None if w == 2 else beta_unit * flip % p, p)
    return powers[k % w]


def predicted_residues(cf: ClosedForm, structure: IndexStructure) -> list[int]:
    """phi(sigma_a(zeta^k prod(a_j + b_j sqrt(-L_j)))) for each coset rep a."""
    p = cf.p
    conv = dict(cf.convention)
    subs = {s.D: s for s in structure.subfields}
    w, k = cf.unit_root
    unit_D = {4: -1, 6: -3}.get(w)
    out = []
    for r in structure.coset_reps:
        val = 1
        if k and w != 2:
            flip = subs[unit_D].sign(r)
            beta_u = conv.get(unit_D)
            if beta_u is None:
                # k = w/2: the unit is -1
                val = -1
            else:
                val = _unit_sign_residue(w, k, flip, beta_u, p)
        elif k and w == 2:
            val = -1
        for s in cf.surds:
            sg = subs[-s.L].sign(r)
            val = val * (s.a + sg * s.b * conv[-s.L]) % p
        out.append(val % p)
    return out


def resolve_detailed(
    N: int, p: int, roots: RootRule = "canonical", target_sign: int | None = None
) -> Resolution:
    cls = classify(N, p)
    ist = cls.structure
    kind = cls.form_kind
    f, x = cls.f, cls.x
    w = ist.unit_count

    if kind in ("PURE", "I2-1", "I4-1", "I2-2"):
        eps = epsilon_form2(N, p, f) if kind == "I2-2" else epsilon_form1(N, p, f)
        k, entries = unit_root_from_residue(eps, w, p, roots)
        cf = ClosedForm(p, N, f, kind, (w, k), kind == "I2-2", x, (), tuple(entries))
        # the same congruence must hold at every coset
        _check_unit_cosets(cls, cf, eps)
        return Resolution(cls, cf, eps_residue=eps)

    fields_ = [s for s, _ in cls.surd_fields]
    sets = []
    for s, k_norm in cls.surd_fields:
        _, sols = dio.choose_y(-s.D, p, f, x, cls.sqrt_pstar, norm_exponent=k_norm)
        sets.append(sols)
    Y = sum(s.y_used for s in sets)
    T = residue_targets(kind, x, Y, cls.profiles, p, cls.sqrt_pstar, target_sign)
    betas = [choose_root(s.D, p, roots) for s in fields_]
    absorbed = w == 2 or any(s.D == {4: -1, 6: -3}[w] for s in fields_)
    unit_k = 0
    unit_entries: list[tuple[int, int]] = []

    if len(fields_) == 1:
        sub = fields_[0]
        others = [s for s in ist.imaginary_subfields if s is not sub]
        i1 = 0
        i_sigma = _role_index(ist, [-1] + [1] * len(others), [sub] + others)
        t1, t_sigma = T[i1], T[i_sigma]
        if not absorbed:
            # ~ index 4 with sqrt(-3) in K but L != 3: eps in <zeta_6> survives
            unit_k, t1, t_sigma, unit_entries = _strip_zeta6(ist, sub, others[0], T, p, roots)
        residues = solve_2x2(betas[0], t1, t_sigma, p)
        a, b = factor_products(residues, sets[0], None, p)
        surds = (Surd(a, b, -sub.D, sets[0].y_used),)
    else:
        sub, sub2 = fields_
        order = [
            _role_index(ist, sg, [sub, sub2]) for sg in ([1, 1], [-1, 1], [1, -1], [-1, -1])
        ]
        Tv = [T[i] for i in order]
        residues = solve_4x4(betas[0], betas[1], Tv, p)
        a, b, a2, b2 = factor_products(residues, sets[0], sets[1], p)
        surds = (
            Surd(a, b, -sub.D, sets[0].y_used),
            Surd(a2, b2, -sub2.D, sets[1].y_used),
        )

    convention = [(s.D, beta) for s, beta in zip(fields_, betas)]
    for D, beta in unit_entries:
        if D not in dict(convention):
            convention.append((D, beta))
    cf = ClosedForm(p, N, f, kind, (w, unit_k), cls.sqrt_pstar, x, surds, tuple(convention))
    if not cf.magnitude_identity():
        raise ResolutionError("magnitude identity fails", stage="resolve")
    if not _same_mod(predicted_residues(cf, ist), T, p):
        raise ResolutionError("closed form does not reproduce the residue targets", stage="resolve")
    return Resolution(cls, cf, tuple(T), tuple(residues), None, tuple(sets))


def _strip_zeta6(ist, sub, unit_sub, T, p, roots):
    """Find eps = zeta_6^k (k in 0..2) and divide it out of the targets.

    With tau negating sqrt(-3) and fixing sqrt(-L), the cosets 1 and tau (and
    sigma, sigma*tau) see eps and its conjugate against the same surd
    residue, so T_1 * phi(eps-bar) = T_tau * phi(eps) pins k.
    """
    beta3 = choose_root(-3, p, roots)
    z = (1 + beta3) * pow(2, -1, p) % p
    zbar = (1 - beta3) * pow(2, -1, p) % p
    i1 = 0
    i_sigma = _role_index(ist, [-1, 1], [sub, unit_sub])
    i_tau = _role_index(ist, [1, -1], [sub, unit_sub])
    i_st = _role_index(ist, [-1, -1], [sub, unit_sub])
    hits = []
    for k in range(3):
        e, eb = pow(z, k, p), pow(zbar, k, p)
        if (T[i1] * eb - T[i_tau] * e) % p == 0 and (T[i_sigma] * eb - T[i_st] * e) % p == 0:
            hits.append(k)
    if len(hits) != 1:
        raise ResolutionError(f"unit root not pinned ({hits})", stage="unit_root")
    k = hits[0]
    inv = pow(pow(z, k, p), -1, p)
    entries = [(-3, beta3)] if k else []
    return k, T[i1] * inv % p, T[i_sigma] * inv % p, entries


def _check_unit_cosets(cls: Classification, cf: ClosedForm, eps: int) -> None:
    # every coset has the minimal valuation, so every coset gives a target
    p = cf.p
    pred = predicted_residues(cf, cls.structure)
    if cf.has_sqrt_pstar:
        lead = (-1) ** cf.x * eps_p(p)
    else:
        lead = (-1) ** (cf.x + 1)
    for v, r in zip(cls.profiles, pred):
        if (r - lead * v.t_inverse_mod_p) % p:
            raise ResolutionError("unit residue disagrees across cosets", stage="resolve")


def resolve(N: int, p: int, roots: RootRule = "canonical") -> ClosedForm:
    return resolve_detailed(N, p, roots).closed_form


def conjugate(cf: ClosedForm, a: int, structure: IndexStructure | None = None) -> ClosedForm:
    """Closed form of G(chi^a) = sigma_a(G(chi)), same convention."""
    structure = structure or quotient_structure(cf.N, cf.p)
    if math.gcd(a, cf.N) != 1:
        raise InvalidInput("a must be a unit mod N")
    subs = {s.D: s for s in structure.subfields}
    w, k = cf.unit_root
    if w in (4, 6) and k and subs[{4: -1, 6: -3}[w]].sign(a) == -1:
        k = (-k) % w
    surds = tuple(Surd(s.a, s.b * subs[-s.L].sign(a), s.L, s.y) for s in cf.surds)
    return ClosedForm(cf.p, cf.N, cf.f, cf.form_kind, (w, k), cf.has_sqrt_pstar, cf.x, surds, cf.convention)

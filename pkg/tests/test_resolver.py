import json

import mpmath
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from gauss_sign.diophantine import solve_norm_equation
from gauss_sign.errors import AmbiguityError, InvalidInput, ResolutionError, UnsupportedCase
from gauss_sign.field_theory import chi_minus_one, quotient_structure
from gauss_sign.oracle import embed, verify
from gauss_sign.resolver import (
    ClosedForm,
    Surd,
    TeichmullerConvention,
    choose_root,
    classify,
    conjugate,
    factor_products,
    predicted_residues,
    resolve,
    resolve_detailed,
    solve_2x2,
    solve_4x4,
    unit_root_from_residue,
)

# every oracle-checkable kind, plus large cases that only the resolver reaches
SMALL = [(20, 3), (44, 3), (28, 5), (20, 13), (28, 11), (14, 11), (8, 3), (12, 5), (7, 11),
         (21, 37), (21, 67), (21, 79), (5, 19), (17, 13), (46, 3), (70, 3), (36, 5)]
LARGE = [(77, 37), (55, 59), (35, 79), (231, 5), (231, 19), (231, 53), (231, 31), (231, 79),
         (231, 101), (44, 13)]


def test_classify_examples():
    assert classify(20, 13).form_kind == "I2-1"
    c = classify(20, 13)
    assert c.b_values == (2, 2)
    assert classify(28, 5).form_kind == "I2-4"
    assert classify(231, 101).form_kind == "PURE"
    assert classify(35, 79).form_kind == "I4-3"
    assert classify(77, 37).form_kind == "I4-2"
    assert classify(231, 53).form_kind == "I4-1"
    assert classify(14, 11).form_kind == "I2-2"


def test_classify_errors():
    with pytest.raises(UnsupportedCase, match="distinguished modulo 2"):
        classify(20, 2)
    with pytest.raises(UnsupportedCase, match="cyclic"):
        classify(13, 3)
    with pytest.raises(UnsupportedCase, match="gcd"):
        classify(15, 19)
    with pytest.raises(UnsupportedCase):
        classify(6, 7)  # chi has order 6 on F_7^*
    with pytest.raises(InvalidInput):
        classify(20, 5)
    with pytest.raises(InvalidInput):
        classify(20, 9)


def test_solve_2x2_examples():
    assert solve_2x2(1, 0, 1, 3) == (2, 1)
    assert solve_2x2(10, 0, 2 * pow(21, -1, 37), 37) == (30, 34)
    # the linear system with T = 5*7 mod 13 in the first slot
    a, b = solve_2x2(5, 35 % 13, 0, 13)
    assert (a, b) == (11, 10)
    assert (a + 5 * b) % 13 == 35 % 13 and (a - 5 * b) % 13 == 0
    with pytest.raises(ResolutionError):
        solve_2x2(0, 1, 1, 5)


def test_solve_4x4_examples():
    assert solve_4x4(1, 1, (4, 0, 0, 0), 5) == (1, 1, 1, 1)
    with pytest.raises(ResolutionError):
        solve_4x4(0, 1, (1, 0, 0, 0), 5)


@given(st.sampled_from([5, 7, 11, 13, 37, 79, 101]), st.data())
@settings(max_examples=300)
def test_solve_4x4_round_trip(p, data):
    b1 = data.draw(st.integers(1, p - 1))
    b2 = data.draw(st.integers(1, p - 1))
    T = [data.draw(st.integers(0, p - 1)) for _ in range(4)]
    M = sympy.Matrix([[1, s * b1, t * b2, s * t * b1 * b2] for s, t in ((1, 1), (-1, 1), (1, -1), (-1, -1))])
    u = solve_4x4(b1, b2, T, p)
    assert [int(v) % p for v in M * sympy.Matrix(u)] == T
    assert list(u) == [int(v) % p for v in M.inv_mod(p) * sympy.Matrix(T)]


def test_factor_products_examples():
    assert factor_products((30, 34), solve_norm_equation(11, 148), None, 37) == (-7, -3)
    s1 = solve_norm_equation(35, 4 * 79)
    s2 = solve_norm_equation(7, 4 * 79)
    assert factor_products((8, -24, 6, -18), s1, s2, 79) == (1, -3, 8, 6)
    with pytest.raises(AmbiguityError):
        factor_products((0, 0), solve_norm_equation(11, 148), None, 37)
    with pytest.raises(ResolutionError):
        factor_products((1, 1), solve_norm_equation(11, 148), None, 37)


def test_unit_root_examples():
    assert unit_root_from_residue(5, 4, 13) == (1, [(-1, 5)])
    assert unit_root_from_residue(5, 6, 31) == (2, [(-3, 11)])
    assert unit_root_from_residue(23, 6, 79) == (4, [(-3, 32)])
    assert unit_root_from_residue(-1, 4, 13) == (2, [])
    assert unit_root_from_residue(1, 2, 7) == (0, [])
    with pytest.raises(ResolutionError):
        unit_root_from_residue(3, 2, 7)


def test_choose_root():
    assert choose_root(-1, 13) == 5 and choose_root(-1, 13, "alternate") == 8
    assert choose_root(-11, 37) == 10
    assert choose_root(-35, 79, {-35: 53}) == 53
    with pytest.raises(InvalidInput):
        choose_root(-35, 79, {-35: 3})


def test_resolve_examples():
    cf = resolve(20, 3)
    assert cf.x == 1 and len(cf.surds) == 1
    s = cf.surds[0]
    assert (abs(s.a), abs(s.b), s.L) == (2, 1, 5)
    cf = resolve(44, 3)
    assert (cf.x, cf.y, abs(cf.surds[0].a), abs(cf.surds[0].b), cf.surds[0].L) == (4, (1,), 5, 1, 11)
    cf = resolve(231, 53)
    assert cf.form_kind == "I4-1" and cf.x == 15 and cf.unit_root == (2, 0) and not cf.surds
    assert resolve(20, 13).unit_root == (4, 1)
    assert resolve(231, 31).unit_root == (6, 2)
    assert resolve(231, 79).unit_root == (6, 4)


@pytest.mark.parametrize("N,p", SMALL + LARGE)
def test_closed_form_invariants(N, p):
    res = resolve_detailed(N, p)
    cf = res.closed_form
    assert cf.magnitude_identity()
    assert TeichmullerConvention(p, cf.convention).is_valid()
    ist = res.classification.structure
    assert cf.unit_root[0] == ist.unit_count
    if res.targets:
        assert predicted_residues(cf, ist) == [t % p for t in res.targets]


@pytest.mark.parametrize("N,p", SMALL + LARGE)
def test_json_round_trip(N, p):
    cf = resolve(N, p)
    text = cf.to_json()
    d = json.loads(text)
    assert set(d) == {"p", "N", "f", "form", "unit_root", "sqrt_pstar", "x", "y", "surds", "convention"}
    assert ClosedForm.from_json(text) == cf


def test_json_big_integers_are_strings():
    cf = ClosedForm(5, 231, 30, "I4-2", (2, 0), False, 9, (Surd(2**60 + 1, -(2**55), 231, 0),), ((-231, 2),))
    d = json.loads(cf.to_json())
    assert d["surds"][0]["a"] == str(2**60 + 1) and d["surds"][0]["b"] == str(-(2**55))
    assert ClosedForm.from_json(cf.to_json()) == cf


def test_render():
    assert resolve(44, 3).render() == "G(χ) = 3^4·(5 + √-11)/2 with φ(√-11)=1"
    assert resolve(231, 53).render() == "G(χ) = 53^15"
    assert resolve(28, 11).render() == "G(χ) = -11^3"


def _flip(cf, Ds):
    """Expected form after replacing beta by -beta for each D in Ds."""
    w, k = cf.unit_root
    unit_D = {4: -1, 6: -3}.get(w)
    if unit_D in Ds and k:
        k = (-k) % w
    surds = tuple(Surd(s.a, -s.b if -s.L in Ds else s.b, s.L, s.y) for s in cf.surds)
    p = cf.p
    conv = tuple((D, p - b if D in Ds else b) for D, b in cf.convention)
    return ClosedForm(cf.p, cf.N, cf.f, cf.form_kind, (w, k), cf.has_sqrt_pstar, cf.x, surds, conv)


@given(st.sampled_from(SMALL + LARGE), st.data())
@settings(max_examples=1000)
def test_convention_covariance(pair, data):
    cf = resolve(*pair)
    Ds = [D for D, _ in cf.convention]
    flip = data.draw(st.lists(st.sampled_from(Ds), unique=True)) if Ds else []
    rule = {D: cf.p - b for D, b in cf.convention if D in flip}
    alt = resolve(*pair, roots=rule)
    # same complex number once the flipped roots are mapped to the other embedding
    assert abs(embed(alt) - embed(cf, {D: -1 for D in flip})) < 1e-9 * abs(embed(cf))
    assert [(abs(s.a), abs(s.b), s.L) for s in alt.surds] == [(abs(s.a), abs(s.b), s.L) for s in cf.surds]
    assert all(dict(alt.convention)[D] == cf.p - b for D, b in cf.convention if D in flip and D in dict(alt.convention))


@pytest.mark.parametrize("N,p", [(20, 3), (44, 3), (28, 5), (8, 3), (14, 11), (20, 13)])
def test_alternate_rule_flips_everything(N, p):
    cf = resolve(N, p)
    alt = resolve(N, p, roots="alternate")
    assert alt == _flip(cf, {D for D, _ in cf.convention})
    assert verify(alt).passed


@pytest.mark.parametrize("N,p", [(20, 3), (44, 3), (28, 5), (12, 5), (14, 11), (20, 13), (21, 37), (7, 11)])
def test_conjugation_identity(N, p):
    cf = resolve(N, p)
    q = p**cf.f
    lhs = embed(conjugate(cf, N - 1))
    rhs = chi_minus_one(q, N) * mpmath.conj(embed(cf))
    assert abs(lhs - rhs) < 1e-9
    assert verify(cf, r=N - 1).passed


@pytest.mark.parametrize("N,p", [(21, 37), (21, 67), (21, 79)])
def test_galois_orbit_index4(N, p):
    cf = resolve(N, p)
    ist = quotient_structure(N, p)
    patterns = set()
    for a in ist.coset_reps:
        c = conjugate(cf, a, ist)
        assert verify(cf, r=a).passed
        patterns.add((c.unit_root, tuple(s.b for s in c.surds)))
    assert len(patterns) == 4


def test_galois_orbit_index4_signs():
    cf = resolve(35, 79)
    ist = quotient_structure(35, 79)
    signs = {tuple(s.b for s in conjugate(cf, a, ist).surds) for a in ist.coset_reps}
    b1, b2 = (s.b for s in cf.surds)
    assert signs == {(b1, b2), (-b1, b2), (b1, -b2), (-b1, -b2)}


def test_conjugate_rejects_non_unit():
    with pytest.raises(InvalidInput):
        conjugate(resolve(20, 3), 5)

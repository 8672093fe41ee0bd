import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.ntheory import digits as sympy_digits

from gauss_sign.errors import InvalidInput, ResolutionError
from gauss_sign.field_theory import quotient_structure
from gauss_sign.stickelberger import (
    TARGET_SIGN,
    digit_expand,
    eps_p,
    epsilon_form1,
    epsilon_form2,
    residue_targets,
    valuation_profile,
)

PF = [(3, 4), (5, 6), (13, 4), (37, 15), (79, 6), (5, 30), (3, 12), (7, 3)]


def test_digit_examples():
    d = digit_expand(4, 3, 4)
    assert d.digits == (1, 1, 0, 0) and d.S == 2 and d.t_mod_p == 1
    d = digit_expand(-4, 3, 4)
    assert d.a_reduced == 76 and d.S == 6 and d.t_mod_p == 1
    d = digit_expand(-1428, 13, 4)
    assert d.a_reduced == 27132 and d.digits == (1, 7, 4, 12) and d.S == 24
    assert pow(d.t_mod_p, -1, 13) == 8
    assert d.t_mod_p == math.factorial(1) * math.factorial(7) * math.factorial(4) * math.factorial(12) % 13


def test_digit_expand_rejects_multiple_of_q_minus_1():
    with pytest.raises(InvalidInput):
        digit_expand(80, 3, 4)
    with pytest.raises(InvalidInput):
        digit_expand(0, 5, 2)


@given(st.sampled_from(PF), st.data())
@settings(max_examples=1000)
def test_digit_complement(pf, data):
    p, f = pf
    q = p**f
    a = data.draw(st.integers(1, q - 2))
    da, db = digit_expand(a, p, f), digit_expand(q - 1 - a, p, f)
    assert da.S + db.S == f * (p - 1)
    # independent expansion
    ref = list(reversed(sympy_digits(a, p)[1:]))
    assert list(da.digits[: len(ref)]) == ref and not any(da.digits[len(ref):])
    assert sum(c * p**i for i, c in enumerate(da.digits)) == a
    assert 0 < da.S <= f * (p - 1)
    assert da.t_mod_p % p != 0


def test_valuation_profile_examples():
    prof, x = valuation_profile(20, 3, 4, [1, 19])
    assert [v.b_value for v in prof] == [3, 1] and x == 1
    prof, _ = valuation_profile(28, 5, 6, [1, 27])
    assert [v.b_value for v in prof] == [Fraction(7, 2), Fraction(5, 2)]
    prof, x = valuation_profile(35, 79, 6, [1, 2, 3, 6])
    assert [v.s_value for v in prof] == [312, 234, 234, 156] and x == 2
    with pytest.raises(InvalidInput):
        valuation_profile(7, 3, 4, [1])


@pytest.mark.parametrize(
    "N,p", [(20, 3), (28, 5), (44, 3), (35, 79), (77, 37), (231, 5), (55, 59), (21, 37), (231, 101), (28, 11)]
)
def test_valuation_invariants(N, p):
    s = quotient_structure(N, p)
    prof, _ = valuation_profile(N, p, s.f, s.coset_reps)
    for v in prof:
        assert (2 * v.b_value).denominator == 1 and v.b_value >= 0
        assert (2 * v.s_value) % (p - 1) == 0
    assert sum(v.b_value for v in prof) == Fraction(s.e * s.f, 2)
    # the valuation depends only on the coset
    for v in prof:
        for h in list(s.subgroup)[:3]:
            other, _ = valuation_profile(N, p, s.f, [v.rep * h % N])
            assert other[0].s_value == v.s_value


def test_epsilon_examples():
    assert epsilon_form1(20, 13, 4) == 5
    assert epsilon_form1(231, 53, 30) == 1
    assert epsilon_form1(231, 31, 30) == 5
    assert epsilon_form1(231, 79, 30) == 23
    assert eps_p(5) == 2 and eps_p(13) == 5 and eps_p(3) == 1
    with pytest.raises(InvalidInput):
        epsilon_form1(14, 11, 3)
    with pytest.raises(InvalidInput):
        epsilon_form2(20, 13, 4)


def test_residue_targets_examples():
    prof, _ = valuation_profile(20, 3, 4, [1, 19])
    assert residue_targets("I2-3", 1, 0, prof, 3) == [0, 1]
    s = quotient_structure(77, 37)
    prof, _ = valuation_profile(77, 37, 15, s.coset_reps)
    T = residue_targets("I4-2", 7, 1, prof, 37)
    assert T == [0, 2 * pow(21, -1, 37) % 37, 0, 2 * pow(21, -1, 37) % 37]
    s = quotient_structure(35, 79)
    prof, _ = valuation_profile(35, 79, 6, s.coset_reps)
    T = residue_targets("I4-3", 2, 2, prof, 79)
    assert [t != 0 for t in T] == [False, False, False, True]


def test_residue_targets_errors():
    prof, _ = valuation_profile(20, 13, 4, [1, 19])
    with pytest.raises(ResolutionError):
        residue_targets("I2-3", 2, 0, prof, 13)
    prof, _ = valuation_profile(20, 3, 4, [1, 19])
    with pytest.raises(ResolutionError):
        residue_targets("I2-3", 0, 0, prof, 3)


def test_target_sign_table_is_frozen():
    assert TARGET_SIGN == {"I2-3": 1, "I2-4": 1, "I4-2": 1, "I4-3": 1}

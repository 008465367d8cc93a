import cmath
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from eulerscale.bump import BumpOrderError, HalfBump
from eulerscale.terms import (ExactCoef, TermKey, TermSeries, add, conjugate, differentiate,
                              evaluate, linear_combination, scale, shift_frequency, to_records)

TWO_PI = 2 * math.pi
BUMP = HalfBump(1.0)

keys = st.tuples(st.one_of(st.none(), st.integers(0, 5)), st.integers(-3, 3))
small = st.integers(-4, 4)
gauss = st.builds(complex, small, small)
double_series = st.dictionaries(keys, gauss, max_size=6).map(TermSeries)
exact_series = st.dictionaries(keys, gauss, max_size=6).map(lambda d: TermSeries(d, exact=True))
times = st.floats(1.3, 4.0)


def S(d, exact=False):
    return TermSeries(d, exact=exact)


# add / scale -------------------------------------------------------------

def test_add_cancels_to_empty():
    assert add(S({(0, 1): 1}), S({(0, 1): -1})) == TermSeries.zero()
    assert len(S({(0, 1): 1}) + S({(0, 1): -1})) == 0


def test_add_identity_and_disjoint_keys():
    a = S({(None, 2): 1j})
    assert TermSeries.zero() + a == a
    b = a + S({(0, 2): 1})
    assert set(b.terms) == {TermKey(None, 2), TermKey(0, 2)}


def test_scale_examples():
    a = S({(0, 1): 2, (None, -1): 1j})
    assert scale(0, a) == TermSeries.zero()
    assert scale(1, a) == a
    assert scale(1j, S({(None, 0): 1})) == S({(None, 0): 1j})


# differentiate ----------------------------------------------------------

def test_differentiate_examples():
    assert differentiate(S({(None, 1): 1})) == S({(None, 1): TWO_PI * 1j})
    assert differentiate(S({(0, 0): 1})) == S({(1, 0): 1})
    c = 0.5 - 2j
    assert differentiate(S({(0, -2): c})) == S({(1, -2): c, (0, -2): -4j * math.pi * c})


def test_differentiate_exact_product_rule():
    c = ExactCoef.from_value(3)
    d = differentiate(S({(0, -2): c}, exact=True))
    assert d[(1, -2)] == c
    assert d[(0, -2)] == ExactCoef.two_pi_power(1, -2, imag=True) * c  # -4 pi i c


# shift / conjugate -------------------------------------------------------

def test_shift_examples():
    assert shift_frequency(S({(0, 0): 1}), -1) == S({(0, -1): 1})
    a = S({(0, 1): 2, (None, -3): 1j})
    assert shift_frequency(a, 0) == a
    assert shift_frequency(shift_frequency(a, 2), -2) == a


def test_conjugate_examples():
    assert conjugate(S({(0, 1): 1j})) == S({(0, -1): -1j})
    a = S({(0, 1): 2 + 1j, (None, -3): 1j})
    assert conjugate(conjugate(a)) == a
    real = S({(0, 0): 2.5, (3, 0): -1.0, (None, 0): 4})
    assert conjugate(real) == real


# evaluate ---------------------------------------------------------------

def test_evaluate_examples():
    assert evaluate(S({(None, 1): 1}), 0.25) == pytest.approx(1j, abs=1e-16)
    assert evaluate(S({(0, 0): 1}), 2.0, BUMP) == pytest.approx(math.exp(-1), rel=1e-15)
    for t in (0.0, 0.5, 1.0):
        assert evaluate(S({(0, 0): 1}), t, BUMP) == 0
    assert evaluate(TermSeries.zero(), 0.3, BUMP) == 0j


def test_evaluate_order_bound():
    with pytest.raises(BumpOrderError):
        S({(9, 0): 1}).evaluate(2.0, HalfBump(1.0, max_order=8))


def test_evaluate_needs_bump_for_f_terms():
    with pytest.raises((ValueError, TypeError)):
        S({(0, 0): 1}).evaluate(2.0)


# exact coefficients ------------------------------------------------------

def test_exact_coef_arithmetic():
    a = ExactCoef.from_value(Fraction(1, 3), power=-1)
    b = ExactCoef.two_pi_power(1, 3)
    assert a * b == ExactCoef.from_value(1)
    assert complex(ExactCoef.two_pi_power(2)) == pytest.approx(TWO_PI ** 2, rel=1e-15)
    assert (a - a) == ExactCoef()
    assert not (a - a)
    assert ExactCoef.from_value(1 + 2j).conjugate() == ExactCoef.from_value(1 - 2j)


def test_exact_from_float_is_lossless():
    x = 0.1
    c = ExactCoef.from_value(x)
    assert Fraction(x) == c.parts[0][1]
    assert complex(c) == x


def test_mixed_modes_refused():
    with pytest.raises((TypeError, ValueError)):
        S({(0, 0): 1}) + S({(0, 0): 1}, exact=True)


def test_records_sorted_none_first():
    a = S({(2, 1): 1, (None, 5): 2j, (0, -1): 3, (None, -2): 1})
    recs = to_records(a)
    assert [(r["f_order"], r["freq"]) for r in recs] == [(None, -2), (None, 5), (0, -1), (2, 1)]
    assert recs[1]["im"] == 2.0 and recs[1]["re"] == 0.0


def test_linear_combination():
    a, b = S({(0, 0): 1}), S({(1, 1): 2})
    assert linear_combination([(2, a), (1j, b)]) == S({(0, 0): 2, (1, 1): 2j})


# properties ---------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(double_series, double_series, gauss, times)
def test_linearity_double(a, b, c, t):
    lhs = (a + b).evaluate(t, BUMP)
    rhs = a.evaluate(t, BUMP) + b.evaluate(t, BUMP)
    mag = sum(abs(complex(v)) for v in list(a.terms.values()) + list(b.terms.values()))
    scale_ = mag * max(1.0, max(abs(BUMP.deriv(n, t)) for n in range(6)))
    assert abs(lhs - rhs) <= 1e-14 * (1 + scale_)
    assert abs(a.scale(c).evaluate(t, BUMP) - c * a.evaluate(t, BUMP)) <= 1e-14 * (1 + scale_) * (1 + abs(c))


@settings(max_examples=40, deadline=None)
@given(exact_series, exact_series, gauss)
def test_linearity_exact_symbolic(a, b, c):
    assert (a + b) - b == a
    if c:
        assert a.scale(c).scale(ExactCoef.from_value(c).conjugate()) == a.scale((c * c.conjugate()).real)
    assert (a + b).differentiate() == a.differentiate() + b.differentiate()
    assert (a + b).conjugate() == a.conjugate() + b.conjugate()


@settings(max_examples=60, deadline=None)
@given(double_series, st.floats(1.5, 4.0))
def test_derivative_matches_finite_difference(a, t):
    h = 1e-5
    fd = (a.evaluate(t + h, BUMP) - a.evaluate(t - h, BUMP)) / (2 * h)
    exact = a.differentiate().evaluate(t, BUMP)
    mag = sum(abs(complex(c)) * (abs(BUMP.deriv((k.f_order or 0) + 1, t))
                                 + TWO_PI * 3 * abs(BUMP.deriv(k.f_order or 0, t)) + TWO_PI * 3)
              for k, c in a.items())
    assert abs(fd - exact) <= 1e-6 * max(abs(exact), mag, 1e-300) + 1e-12


@settings(max_examples=60, deadline=None)
@given(exact_series, times)
def test_conjugation_exact(a, t):
    assert a.conjugate().evaluate(t, BUMP) == a.evaluate(t, BUMP).conjugate()


@settings(max_examples=60, deadline=None)
@given(double_series, st.integers(-4, 4), times)
def test_shift_multiplies_by_phase(a, dj, t):
    lhs = a.shift_frequency(dj).evaluate(t, BUMP)
    rhs = cmath.exp(2j * math.pi * dj * t) * a.evaluate(t, BUMP)
    mag = sum(abs(complex(c)) * max(1.0, abs(BUMP.deriv(k.f_order or 0, t))) for k, c in a.items())
    assert abs(lhs - rhs) <= 1e-12 * (1 + mag)


@settings(max_examples=60, deadline=None)
@given(exact_series, exact_series, gauss, st.integers(-3, 3))
def test_canonical_no_zero_coefficients(a, b, c, dj):
    for r in (a - a, a + b, a.scale(c), a.differentiate(), a.shift_frequency(dj),
              a.conjugate(), (a - b).differentiate() - a.differentiate() + b.differentiate()):
        assert all(bool(v) for v in r.terms.values())
    assert len(a - a) == 0

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eulerscale.bump import HalfBump
from eulerscale.construction import (ExpLaw, GeneratorData, LatticeFrame, PowerLaw, ZeroLaw,
                                     build_solution)
from eulerscale.multifractal import (NOT_APPLICABLE, Classification, ZeroMeasureError,
                                     check_slice_fast_path, classify_dyadic, classify_sobolev,
                                     dyadic, fit_Dq, initial_sobolev_exact, measure_from_modes,
                                     moment_sum, moment_sum_closed_form, mu_measure,
                                     endpoint_lower_bound, predicted_Dq, renyi_entropy,
                                     sobolev_norm, sobolev_slice_bound, transversal_modes)

T = 1.0
FR = LatticeFrame()


# transversal slice and measure -------------------------------------------------

def test_transversal_modes(sol8, reference_generator):
    modes = transversal_modes(sol8, 0.5, 8)
    assert np.allclose(modes[0], [0, 1, 0]) and np.linalg.norm(modes[0]) == 1.0
    assert all(not np.any(modes[m]) for m in modes if m)
    late = transversal_modes(sol8, T + 1, 8)
    for m in (1, 2, -3):
        assert np.allclose(late[m], [0, 0, reference_generator.g(m) * math.exp(-1)], rtol=1e-14)
    with pytest.raises(ValueError):
        transversal_modes(sol8, 2.0, 9)


def test_mu_examples(sol8):
    delta = mu_measure(sol8, 0.3, 8)
    assert delta.as_dict()[0] == 1.0 and sum(delta.weights) == 1.0
    two = measure_from_modes({0: np.array([1.0, 0, 0]), 1: np.array([0, 0, 1j]), 2: np.zeros(3)})
    assert two.as_dict() == {0: 0.5, 1: 0.5, 2: 0.0}
    mu = mu_measure(sol8, T + 1, 8).as_dict()
    a = 0.3
    for m in (1, 2, 5, -7):
        assert mu[m] / mu[0] == pytest.approx(abs(m) ** (-2 * a), rel=1e-13)


def test_zero_measure_signalled():
    with pytest.raises(ZeroMeasureError):
        measure_from_modes({0: np.zeros(3), 1: np.zeros(3)})


# Renyi ------------------------------------------------------------------------

def test_renyi_examples():
    for N in (1, 5, 40):
        for q in (1.5, 2, 7):
            w = np.full(2 * N + 1, 1 / (2 * N + 1))
            assert renyi_entropy(w, q) == pytest.approx(math.log(2 * N + 1), rel=1e-13)
    assert renyi_entropy([1.0, 0.0, 0.0], 3) == 0.0
    assert renyi_entropy([0.5, 0.5], 2) == pytest.approx(math.log(2), rel=1e-15)
    with pytest.raises(ValueError):
        renyi_entropy([0.5, 0.5], 1.0)


weights = st.lists(st.floats(0, 1e3), min_size=2, max_size=40).filter(lambda w: sum(w) > 1e-6)


@settings(max_examples=80, deadline=None)
@given(weights)
def test_measure_normalized(w):
    modes = {i: np.array([math.sqrt(x), 0, 0]) for i, x in enumerate(w)}
    mu = measure_from_modes(modes)
    assert abs(sum(mu.weights) - 1.0) <= 1e-12
    assert all(x >= 0 for x in mu.weights)


@settings(max_examples=80, deadline=None)
@given(weights, st.floats(1.01, 8), st.floats(1.01, 8))
def test_renyi_monotone_and_bounded(w, q1, q2):
    p = np.asarray(w) / sum(w)
    lo, hi = sorted((q1, q2))
    h_lo, h_hi = renyi_entropy(p, lo), renyi_entropy(p, hi)
    assert h_hi <= h_lo + 1e-9
    n = len(p)
    for h in (h_lo, h_hi):
        assert -1e-12 <= h <= math.log(n) + 1e-9


# moments ----------------------------------------------------------------------

def test_moment_examples(sol8, reference_generator):
    assert moment_sum(sol8, 1.0, 8, 0.5) == 1.0
    a = 0.3
    assert moment_sum(sol8, 1.0, 2, T + 1) == pytest.approx(1 + 2 * (1 + 2 ** (-2 * a)), rel=1e-14)
    q = 40.0
    big = moment_sum(sol8, q, 8, T + 1)
    lead = 1 + math.exp(-2 * q) * 2 * abs(reference_generator.g(1)) ** (2 * q)
    assert big == pytest.approx(lead, rel=1e-3)


@pytest.mark.parametrize("q", [1.0, 1.7, 2.0, 3.5])
@pytest.mark.parametrize("t", [0.5, 1.3, 2.0, 3.0])
def test_moment_closed_form(sol8, reference_generator, q, t):
    for N in (1, 4, 8):
        assert moment_sum(sol8, q, N, t) == pytest.approx(
            moment_sum_closed_form(reference_generator, FR, q, N, t), rel=1e-10)


def test_slice_fast_path(sol8):
    for t in (0.5, 1.2, 2.0, 3.3):
        assert check_slice_fast_path(sol8, t) <= 1e-12


# D_q ---------------------------------------------------------------------------

def test_predicted_examples():
    assert predicted_Dq(0.3, 2) == pytest.approx(0.8)
    assert predicted_Dq(0.25, 3) == pytest.approx(0.75)
    assert predicted_Dq(0.3, 1.5) is NOT_APPLICABLE
    with pytest.raises(ValueError):
        predicted_Dq(0.7, 2)


def test_fit_reference_example(reference_generator):
    fit = fit_Dq(reference_generator, 2.0, T + 1, dyadic(14, 24), FR)
    assert abs(fit.slope - 0.8) <= 0.05


def test_fit_delta_regime():
    gen = GeneratorData(g=ZeroLaw())
    fit = fit_Dq(gen, 2.0, T + 1, dyadic(4, 10), FR)
    assert fit.slope == 0.0 and fit.degenerate


def test_fit_uses_box_modes_inside(sol8, reference_generator):
    a = fit_Dq(sol8, 3.0, T + 1, [1, 2, 4, 8, 16, 32])
    b = fit_Dq(reference_generator, 3.0, T + 1, [1, 2, 4, 8, 16, 32], FR)
    assert a.slope == pytest.approx(b.slope, rel=1e-12)


def test_fit_needs_points(reference_generator):
    with pytest.raises(ValueError):
        fit_Dq(reference_generator, 2.0, 2.0, [1, 2, 4], FR)
    with pytest.raises(ValueError):
        fit_Dq(reference_generator, 1.0, 2.0, dyadic(1, 6), FR)


@pytest.mark.parametrize("alpha,q", [(0.3, 2.0), (0.25, 3.0), (0.3, 4.0), (0.1, 6.0)])
def test_fit_synthetic_power_law(alpha, q):
    # a huge seed amplitude makes the mean mode negligible: mu(m) ~ |m|^{-2 alpha}
    gen = GeneratorData(g=PowerLaw(1e8, alpha))
    fit = fit_Dq(gen, q, T + 1, dyadic(14, 24), FR)
    assert abs(fit.slope - predicted_Dq(alpha, q)) <= 0.02


# Sobolev ----------------------------------------------------------------------

def test_sobolev_s0_t0(frame):
    sol = build_solution(frame, GeneratorData(h=ZeroLaw(), g=PowerLaw(3.0, 0.2)), 4, 4)
    assert sobolev_norm(sol, 0.0, 0.0, 3.0) == 3.0


def test_sobolev_initial_exact(sol8, reference_generator):
    for s in (0.0, 1.0, 2.5):
        assert sobolev_norm(sol8, s, 0.0, 8) == pytest.approx(
            initial_sobolev_exact(reference_generator, s, 8), rel=1e-14)
    # axis-only evaluation may go beyond the box while f vanishes
    assert sobolev_norm(sol8, 1.0, 0.5, 200) == pytest.approx(
        initial_sobolev_exact(reference_generator, 1.0, 200), rel=1e-13)


def test_sobolev_box_guard(sol8):
    with pytest.raises(ValueError):
        sobolev_norm(sol8, 1.0, 2.0, 9)


@pytest.mark.parametrize("s", [0.0, 0.5, 1.0])
def test_sobolev_lower_bound(sol8, reference_generator, s):
    for N in (2, 5, 8):
        assert sobolev_norm(sol8, s, T + 1, N) >= endpoint_lower_bound(reference_generator, s, N) * (1 - 1e-14)


def test_sobolev_dyadic_growth():
    gen = GeneratorData(g=PowerLaw(1.0, 0.3))
    Ns = dyadic(10, 16)
    vals = sobolev_slice_bound(gen, FR, 1.0, T + 1, Ns)
    target = 2 ** (2 + 1 - 0.6)
    for a, b in zip(vals, vals[1:]):
        assert abs(b / a / target - 1) <= 0.1


def test_sobolev_classification():
    gen = GeneratorData(h=ExpLaw(), g=PowerLaw(1.0, 0.3))
    assert classify_sobolev(gen, FR, 10.0, 0.0, 256).classification == Classification.CONVERGENT
    assert classify_sobolev(gen, FR, 1.0, T + 1, 1 << 14).classification == Classification.DIVERGENT


# classifier -------------------------------------------------------------------

def _blocks(term, levels):
    return [math.log(sum(term(n) for n in range(lo + 1, 2 * lo + 1))) for lo in levels]


def test_classifier_synthetic():
    lv = [2 ** j for j in range(0, 12)]
    geo = classify_dyadic(0.0, _blocks(lambda n: n ** -2.0, lv), lv)
    assert geo.classification == Classification.CONVERGENT
    harm = classify_dyadic(0.0, _blocks(lambda n: 1.0 / n, lv), lv)
    assert harm.classification == Classification.DIVERGENT
    few = classify_dyadic(0.0, [0.0, -1.0], [2, 4])
    assert few.classification == Classification.INCONCLUSIVE


@settings(max_examples=30, deadline=None)
@given(st.floats(-3.0, 1.0), st.floats(0.0, 2.0))
def test_classifier_monotone_in_exponent(p, dp):
    # if sum n^p is DIVERGENT then so is sum n^(p + dp)
    lv = [2 ** j for j in range(0, 12)]
    a = classify_dyadic(0.0, [(p + 1) * math.log(lo) for lo in lv], lv).classification
    b = classify_dyadic(0.0, [(p + dp + 1) * math.log(lo) for lo in lv], lv).classification
    if a == Classification.DIVERGENT:
        assert b == Classification.DIVERGENT

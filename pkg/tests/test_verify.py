import dataclasses
import math

import numpy as np
import pytest

from eulerscale.bump import HalfBump
from eulerscale.construction import (ExpLaw, GeneratorData, LatticeFrame, ModeFunction, PowerLaw,
                                     TableLaw, build_solution)
from eulerscale.terms import TermSeries
from eulerscale.verify import (GalerkinSystem, boxed_convolution, branch_contrast,
                               check_structure, galerkin_integrate, initial_modes, ode_residual,
                               reduced_rhs, residual_report, vanishes_identically)

T = 1.0


# residuals --------------------------------------------------------------------

@pytest.mark.parametrize("t", [0.0, 0.5, 1.5, 2.0, 3.0])
@pytest.mark.parametrize("k", [-3, 0, 2, 5])
def test_axis_residual(sol8, k, t):
    assert ode_residual(sol8, k, 0, t) <= 1e-10


@pytest.mark.parametrize("t", [T / 2, T + 1])
def test_off_axis_residual(sol8, t):
    r = ode_residual(sol8, 1, 1, t)
    lhs = np.linalg.norm(sol8.mode(1, 1).differentiate().evaluate(t, sol8.bump))
    assert r / (1 + lhs) <= 1e-9


def test_zero_generator_residual_exact(zero_generator):
    sol = build_solution(LatticeFrame(), zero_generator, 4, 3)
    rep = residual_report(sol, [0.0, 0.37, 2.0])
    assert rep.max_residual == 0.0


def test_residual_report_contents(sol8):
    rep = residual_report(sol8, [0.0, 2.0])
    assert len(rep.rows) == 2 * (2 * 8 - 1) * (2 * 8 + 1)
    assert all(abs(r.k) <= 7 for r in rep.rows)
    assert "K-1" in rep.interior
    assert rep.max_relative <= 1e-12 and rep.mean_residual >= 0


def test_non_interior_rejected(sol8):
    with pytest.raises(ValueError):
        ode_residual(sol8, 8, 0, 1.0)


# structure --------------------------------------------------------------------

def test_structure_passes(sol8, sol8_exact):
    assert check_structure(sol8).ok
    assert check_structure(sol8_exact).ok


def _corrupt(sol, k, m):
    mode = sol.modes[(k, m)]
    comps = list(mode.components)
    series = comps[2]
    key, coef = series.items()[0]
    terms = series.terms
    terms[key] = -coef
    comps[2] = TermSeries(terms, series.exact)
    modes = dict(sol.modes)
    modes[(k, m)] = ModeFunction(comps)
    return dataclasses.replace(sol, modes=modes)


@pytest.mark.parametrize("fixture", ["sol8", "sol8_exact"])
def test_structure_detects_corruption(request, fixture):
    sol = request.getfixturevalue(fixture)
    bad = _corrupt(sol, 2, 3)
    rep = check_structure(bad)
    assert not rep.ok
    assert rep.violation in {(2, 3), (-2, -3)}


def test_structure_detects_pure_oscillation(sol8_exact):
    modes = dict(sol8_exact.modes)
    extra = ModeFunction.along((0, 0, 1), TermSeries({(None, 1): 1}, True))
    modes[(1, 2)] = extra
    modes[(-1, -2)] = extra.conjugate()
    rep = check_structure(dataclasses.replace(sol8_exact, modes=modes))
    assert not rep.ok and rep.violation in {(1, 2), (-1, -2)}


def test_structure_empty_solution():
    fr = LatticeFrame()
    modes = {(k, m): ModeFunction.zero(3, True) for k in range(-2, 3) for m in range(-2, 3)}
    sol = build_solution(fr, GeneratorData(), 2, 2, exact=True)
    assert check_structure(dataclasses.replace(sol, modes=modes)).ok


def test_vanishes_identically(sol8_exact):
    assert vanishes_identically(sol8_exact, 0.5)
    assert not vanishes_identically(sol8_exact, 1.5)


# convolution oracles ----------------------------------------------------------

@pytest.mark.parametrize("t", [0.0, 1.0, 1.5, 2.0, 3.0])
def test_brute_force_equals_reduced(sol8, t):
    U = sol8.evaluate_modes(t)
    brute = boxed_convolution(U, sol8.wavevector_grid())
    red = reduced_rhs(sol8, U)
    ok = np.isfinite(red)
    assert ok[1:-1].all() and not ok[0].any()
    assert np.max(np.abs(brute[ok] - red[ok])) <= 1e-12


def test_oracle_detects_off_support_data(sol8):
    # the reduced form only holds for fields supported on the axis plus f-factor modes;
    # a generic extra off-axis component must break the agreement
    U = sol8.evaluate_modes(2.0).copy()
    U[sol8.K + 3, sol8.M + 2] += np.array([1e-3, 0.0, 0.0])
    brute = boxed_convolution(U, sol8.wavevector_grid())
    red = reduced_rhs(sol8, U)
    ok = np.isfinite(red)
    assert np.max(np.abs(brute[ok] - red[ok])) > 1e-6


def test_fft_rhs_matches_brute_force(sol8):
    U = sol8.evaluate_modes(2.3)
    xi = sol8.wavevector_grid()
    sys_ = GalerkinSystem(xi)
    fft = sys_.rhs(0.0, U.ravel()).reshape(U.shape)
    brute = boxed_convolution(U, xi)
    assert np.max(np.abs(fft - brute)) <= 1e-12 * (1 + np.max(np.abs(brute)))


def test_fft_rhs_random_field():
    rng = np.random.default_rng(0)
    a = np.arange(-3, 4)
    xi = np.stack(np.meshgrid(a, a, indexing="ij"), -1)
    U = rng.normal(size=(7, 7, 2)) + 1j * rng.normal(size=(7, 7, 2))
    fft = GalerkinSystem(xi).rhs(0.0, U.ravel()).reshape(U.shape)
    assert np.allclose(fft, boxed_convolution(U, xi), atol=1e-11)


# Galerkin ---------------------------------------------------------------------

def test_galerkin_zero_stays_zero(sol8):
    U0, xi = initial_modes(sol8, 3, 2)
    run = galerkin_integrate(np.zeros_like(U0), xi, 1.0, sample_times=[0.5])
    assert all(np.all(s.modes == 0) for s in run.states)


def test_galerkin_axis_only(sol8):
    U0, xi = initial_modes(sol8, 8, 4)
    run = galerkin_integrate(U0, xi, 2.0, tol=1e-10, sample_times=[0.5, 1.0, 1.5])
    e0 = run.states[0].energy
    for st in run.states:
        assert abs(st.energy - e0) <= 1e-6 * e0
        assert st.divergence <= 1e-10
        G = st.modes
        off = np.delete(G, 4, axis=1)
        assert np.max(np.abs(off)) <= 1e-8
        k = np.arange(-8, 9)
        expect = U0[:, 4] * np.exp(-2j * math.pi * k * st.t)[:, None]
        assert np.max(np.abs(G[:, 4] - expect)) <= 1e-8


def test_galerkin_rejects_bad_tol(sol8):
    U0, xi = initial_modes(sol8, 2, 2)
    with pytest.raises(ValueError):
        galerkin_integrate(U0, xi, 1.0, tol=0.0)


def test_initial_modes_box_check(sol8):
    with pytest.raises(ValueError):
        initial_modes(sol8, 9, 2)


# branch contrast --------------------------------------------------------------

def test_contrast_seed_discrepancy(frame):
    gen = GeneratorData(h=ExpLaw(1.0, 1.0), g=TableLaw({1: math.e}), bump=HalfBump(T))
    sol = build_solution(frame, gen, 8, 4)
    rows = branch_contrast(sol, T + 1, K=8, M=4)
    by = {(r.k, r.m): r for r in rows}
    assert by[(0, 1)].discrepancy == pytest.approx(1.0, abs=1e-8)
    assert by[(0, 1)].galerkin_norm <= 1e-8
    for m in range(1, 5):
        assert by[(0, m)].discrepancy >= abs(gen.g(m)) * gen.bump(T + 1) - 1e-8


def test_contrast_coincide_without_seeds(frame, zero_generator):
    sol = build_solution(frame, GeneratorData(h=ExpLaw(1.0, 1.0)), 6, 3)
    rows = branch_contrast(sol, T + 1, K=6, M=3)
    assert max(r.discrepancy for r in rows) <= 1e-8


def test_contrast_coincide_before_T(sol8):
    rows = branch_contrast(sol8, 0.9 * T, K=8, M=4)
    assert max(r.discrepancy for r in rows) <= 1e-8

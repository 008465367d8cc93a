"""Independent checks that a built object solves the Fourier-side Euler system.

Two routes to the right-hand side ``-2 pi i sum_{zeta+eta=xi} (u(zeta).eta) u(eta)``
live here and are kept deliberately separate:

* :func:`boxed_convolution` walks every pair in the box, one ``zeta`` at a
  time (the brute-force oracle);
* :class:`GalerkinSystem` assembles the same sum with zero-padded FFTs and
  feeds the adaptive integrator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .construction import FourierSolution3D, LatticeFrame, ModeFunction
from .integrate import Trajectory, dopri5

TWO_PI = 2.0 * math.pi


def _dot_last(vecs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """``sum_j vecs[..., j] * u[..., j]`` accumulated in component order."""
    acc = vecs[..., 0] * u[..., 0]
    for j in range(1, vecs.shape[-1]):
        acc = acc + vecs[..., j] * u[..., j]
    return acc


def boxed_convolution(U: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Brute-force ``-2 pi i sum (u(zeta).eta) u(eta)`` over all box pairs.

    ``U`` has shape ``(n1, n2, d)`` (mode values on a centred coordinate box)
    and ``xi`` holds the matching integer wavevectors.  Pairs whose partner
    ``eta = xi - zeta`` leaves the box are dropped.  ``zeta`` runs in C order,
    and each output accumulates sequentially in that order.
    """
    n1, n2, d = U.shape
    c1, c2 = n1 // 2, n2 // 2
    acc = np.zeros_like(U)
    for i in range(n1):
        for j in range(n2):
            di, dj = i - c1, j - c2
            xs = slice(max(0, di), n1 + min(0, di))
            ys = slice(max(0, dj), n2 + min(0, dj))
            es = slice(max(0, -di), n1 - max(0, di))
            fs = slice(max(0, -dj), n2 - max(0, dj))
            eta = xi[xs, ys] - xi[i, j]
            coupling = _dot_last(eta, np.broadcast_to(U[i, j], eta.shape))
            acc[xs, ys] += coupling[..., None] * U[es, fs]
    return -2j * math.pi * acc


def reduced_rhs(solution: FourierSolution3D, U: np.ndarray) -> np.ndarray:
    """Three-term right-hand side using only ``zeta in {-eta0, 0, eta0}``.

    ``-2 pi i [(u(-eta0).xi) u(xi+eta0) + (u(0).xi) u(xi) + (u(eta0).xi) u(xi-eta0)]``
    for every interior point ``|k| <= K-1``; the boundary rows are NaN.
    """
    K, M = solution.K, solution.M
    xi = solution.wavevector_grid()
    out = np.full_like(U, np.nan)
    inner = slice(1, 2 * K)
    acc = np.zeros_like(U[inner])
    for dk in (-1, 0, 1):  # zeta = dk * eta0, same order as the box walk
        u_zeta = U[K + dk, M]
        coupling = _dot_last(xi[inner], np.broadcast_to(u_zeta, xi[inner].shape))
        partner = U[1 - dk: 2 * K - dk]
        acc = acc + coupling[..., None] * partner
    out[inner] = -2j * math.pi * acc
    return out


# residuals ----------------------------------------------------------------

@dataclass
class ResidualRow:
    k: int
    m: int
    t: float
    residual: float
    relative_residual: float


@dataclass
class ResidualReport:
    K: int
    M: int
    times: List[float]
    rows: List[ResidualRow] = field(default_factory=list)
    interior: str = "points whose +-eta0 neighbours lie in the box (|k| <= K-1)"

    @property
    def max_relative(self) -> float:
        return max((r.relative_residual for r in self.rows), default=0.0)

    @property
    def max_residual(self) -> float:
        return max((r.residual for r in self.rows), default=0.0)

    @property
    def mean_residual(self) -> float:
        return float(np.mean([r.residual for r in self.rows])) if self.rows else 0.0


def _interior_mask(solution: FourierSolution3D) -> np.ndarray:
    mask = np.zeros((2 * solution.K + 1, 2 * solution.M + 1), dtype=bool)
    mask[1:2 * solution.K] = True
    return mask


def residual_report(solution: FourierSolution3D, times: Iterable[float]) -> ResidualReport:
    """Symbolic ``d/dt u`` against the brute-force boxed convolution at interior points."""
    times = [float(t) for t in times]
    rep = ResidualReport(solution.K, solution.M, times)
    xi = solution.wavevector_grid()
    mask = _interior_mask(solution)
    for t in times:
        U = solution.evaluate_modes(t)
        lhs = solution.evaluate_derivatives(t)
        rhs = boxed_convolution(U, xi)
        diff = np.linalg.norm(lhs - rhs, axis=-1)
        scale = 1.0 + np.maximum(np.linalg.norm(lhs, axis=-1), np.linalg.norm(rhs, axis=-1))
        for i, j in zip(*np.nonzero(mask)):
            rep.rows.append(ResidualRow(int(i - solution.K), int(j - solution.M), t,
                                        float(diff[i, j]), float(diff[i, j] / scale[i, j])))
    return rep


def ode_residual(solution: FourierSolution3D, k: int, m: int, t: float) -> float:
    if not (abs(k) <= solution.K - 1 and abs(m) <= solution.M):
        raise ValueError(f"point ({k}, {m}) is not interior to the box")
    rep = residual_report(solution, [t])
    for row in rep.rows:
        if row.k == k and row.m == m:
            return row.residual
    raise AssertionError("unreachable")


# structure ------------------------------------------------------------------

@dataclass
class StructureReport:
    ok: bool
    checked: int
    violation: Optional[Tuple[int, int]] = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def _parallel(mode: ModeFunction, v) -> bool:
    comps = mode.components
    for a in range(3):
        for b in range(a + 1, 3):
            if comps[a].scale(int(v[b])) != comps[b].scale(int(v[a])):
                return False
    return True


def _close(a: ModeFunction, b: ModeFunction, exact: bool, rtol: float) -> bool:
    if exact:
        return a == b
    for sa, sb in zip(a.components, b.components):
        ta, tb = sa.terms, sb.terms
        for key in set(ta) | set(tb):
            x, y = complex(ta.get(key, 0)), complex(tb.get(key, 0))
            if abs(x - y) > rtol * max(abs(x), abs(y), 1e-300):
                return False
    return True


def check_structure(solution: FourierSolution3D, rtol: float = 1e-12) -> StructureReport:
    """Divergence-free, conjugation symmetry, plane support and off-axis f-factors.

    Exact comparisons in exact mode; ``rtol`` on coefficients in double mode.
    """
    fr = solution.frame
    checked = 0
    for (k, m), mode in sorted(solution.modes.items()):
        checked += 1
        xi = fr.wavevector(k, m)
        if mode and int(np.dot(xi, fr.v)) != 0:
            return StructureReport(False, checked, (k, m), "mode outside the plane S")
        div = mode.dot(xi)
        if solution.exact:
            if div:
                return StructureReport(False, checked, (k, m), "u(xi).xi != 0")
        else:
            scale = max((abs(complex(c)) for s in mode.components for c in s.terms.values()),
                        default=0.0)
            if any(abs(complex(c)) > rtol * scale for c in div.terms.values()):
                return StructureReport(False, checked, (k, m), "u(xi).xi != 0")
        partner = solution.modes.get((-k, -m))
        if partner is None:
            return StructureReport(False, checked, (k, m), "box not symmetric")
        if not _close(partner, mode.conjugate(), solution.exact, rtol):
            return StructureReport(False, checked, (k, m), "u(-xi) != conj u(xi)")
        if m != 0 and mode:
            if not _parallel(mode, fr.v):
                return StructureReport(False, checked, (k, m), "off-axis mode not along v")
            if any(s.has_pure_oscillation() for s in mode.components):
                return StructureReport(False, checked, (k, m),
                                       "off-axis term without an f-derivative factor")
    return StructureReport(True, checked)


def vanishes_identically(solution: FourierSolution3D, t: float) -> bool:
    """Structural test: every off-axis mode is zero at ``t`` because ``t`` is outside supp f."""
    if not solution.bump.vanishes_at(t):
        return False
    return all(not any(s.has_pure_oscillation() for s in mode.components)
               for (k, m), mode in solution.modes.items() if m != 0)


# Galerkin oracle ------------------------------------------------------------

class GalerkinSystem:
    """Truncation of the Fourier-side Euler system to a centred coordinate box.

    ``xi`` maps box coordinates to wavevectors (any dimension ``d``).
    The quadratic term is assembled with zero-padded FFT convolutions.
    """

    def __init__(self, xi: np.ndarray):
        self.xi = np.asarray(xi, dtype=float)
        self.shape = self.xi.shape[:-1]
        self.d = self.xi.shape[-1]
        self.pad = tuple(2 * n for n in self.shape)
        self.crop = tuple(slice(n // 2, n // 2 + n) for n in self.shape)
        self.nfev = 0

    def _fft(self, a):
        return np.fft.fftn(a, s=self.pad, axes=(0, 1))

    def _ifft(self, a):
        return np.fft.ifftn(a, axes=(0, 1))[self.crop]

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        self.nfev += 1
        U = y.reshape(*self.shape, self.d)
        FU = [self._fft(U[..., j]) for j in range(self.d)]
        FZ = sum(self._fft(self.xi[..., j] * U[..., j]) for j in range(self.d))
        out = np.empty_like(U)
        for l in range(self.d):
            conv_xi = sum(self.xi[..., j] * self._ifft(FU[j] * FU[l]) for j in range(self.d))
            conv_zeta = self._ifft(FZ * FU[l])
            out[..., l] = conv_xi - conv_zeta
        return (-2j * math.pi * out).ravel()

    def divergence(self, y: np.ndarray) -> float:
        U = y.reshape(*self.shape, self.d)
        return float(np.max(np.abs(_dot_last(self.xi, U))))

    def energy(self, y: np.ndarray) -> float:
        return float(np.sum(np.abs(y) ** 2))


@dataclass
class GalerkinState:
    t: float
    modes: np.ndarray
    divergence: float
    energy: float


@dataclass
class GalerkinRun:
    states: List[GalerkinState]
    trajectory: Trajectory
    system: GalerkinSystem

    def at(self, t: float) -> GalerkinState:
        for s in self.states:
            if s.t == t:
                return s
        raise KeyError(t)


def galerkin_integrate(initial: np.ndarray, xi: np.ndarray, t_end: float,
                       tol: float = 1e-10, sample_times: Sequence[float] = (),
                       t_start: float = 0.0) -> GalerkinRun:
    """Integrate the box truncation from ``initial`` (shape ``(n1, n2, d)``)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    sys_ = GalerkinSystem(xi)
    y0 = np.asarray(initial, dtype=complex).ravel()
    traj = dopri5(sys_.rhs, y0, (t_start, t_end), sample_times, rtol=tol, atol=tol)
    states = [GalerkinState(t, y.reshape(initial.shape), sys_.divergence(y), sys_.energy(y))
              for t, y in zip(traj.times, traj.states)]
    return GalerkinRun(states, traj, sys_)


def initial_modes(solution: FourierSolution3D, K: Optional[int] = None,
                  M: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Mode values at ``t = 0`` restricted to a (possibly smaller) box, plus wavevectors."""
    K = solution.K if K is None else K
    M = solution.M if M is None else M
    if K > solution.K or M > solution.M:
        raise ValueError("requested box exceeds the built solution")
    U = solution.evaluate_modes(0.0)
    sl = (slice(solution.K - K, solution.K + K + 1), slice(solution.M - M, solution.M + M + 1))
    return U[sl], solution.wavevector_grid()[sl]


@dataclass
class ContrastRow:
    k: int
    m: int
    t: float
    symbolic_norm: float
    galerkin_norm: float
    discrepancy: float


def branch_contrast(solution: FourierSolution3D, t_probe: float, K: int = 8, M: int = 4,
                    tol: float = 1e-10, run: Optional[GalerkinRun] = None) -> List[ContrastRow]:
    """Symbolic branch against the regular (Galerkin) branch at ``t_probe``, per mode."""
    U0, xi = initial_modes(solution, K, M)
    if run is None:
        run = galerkin_integrate(U0, xi, t_probe, tol=tol)
    G = run.at(t_probe).modes
    S = solution.evaluate_modes(t_probe)[solution.K - K: solution.K + K + 1,
                                         solution.M - M: solution.M + M + 1]
    rows = []
    for i in range(2 * K + 1):
        for j in range(2 * M + 1):
            rows.append(ContrastRow(i - K, j - M, t_probe,
                                    float(np.linalg.norm(S[i, j])),
                                    float(np.linalg.norm(G[i, j])),
                                    float(np.linalg.norm(S[i, j] - G[i, j]))))
    return rows

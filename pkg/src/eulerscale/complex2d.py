"""Complex-data solution on the 2-torus with finite-time Sobolev blow-up.

With mean mode ``u(0) = i xi0`` and every other mode along ``v`` on the
line ``S = <v>^perp`` the convolution collapses to the ``zeta = 0`` term and

    u(xi, t) = exp(2 pi (xi . xi0) t) u(xi, 0).

For ``u(xi, 0) = g(xi) exp(-gamma |xi|) v`` the Sobolev sums are finite
before ``T = gamma / (2 pi |xi0|)`` and infinite after it; at ``T`` they
diverge exactly for ``s >= alpha - 1/2`` when ``|g(k xi0)| ~ |k xi0|^-alpha``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .multifractal import SeriesVerdict, classify_terms
from .verify import boxed_convolution

TWO_PI = 2.0 * math.pi


def _primitive_perp(v) -> np.ndarray:
    p = np.array([-int(v[1]), int(v[0])])
    g = math.gcd(int(p[0]), int(p[1]))
    return p // g


@dataclass(frozen=True)
class DefaultAmplitude:
    """``|xi|^-alpha`` on the multiples ``k xi0`` (``k != 0``), zero elsewhere on ``S``."""

    xi0: tuple
    alpha: float

    def __call__(self, xi) -> float:
        xi = np.asarray(xi)
        x0 = np.asarray(self.xi0)
        cross = xi[0] * x0[1] - xi[1] * x0[0]
        n2 = float(np.dot(x0, x0))
        k = float(np.dot(xi, x0)) / n2
        if cross != 0 or k != round(k) or k == 0:
            return 0.0
        return float(np.linalg.norm(xi)) ** (-self.alpha)


@dataclass
class Complex2DSolution:
    v: tuple
    xi0: tuple
    gamma: float
    alpha_exp: float
    g: Callable = None
    direction: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.v = tuple(int(x) for x in self.v)
        self.xi0 = tuple(int(x) for x in self.xi0)
        if len(self.v) != 2 or len(self.xi0) != 2 or not any(self.v):
            raise ValueError("v and xi0 must be nonzero integer 2-vectors")
        if self.v[0] * self.xi0[0] + self.v[1] * self.xi0[1] != 0:
            raise ValueError("xi0 must be orthogonal to v")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.g is None:
            self.g = DefaultAmplitude(self.xi0, self.alpha_exp)
        self.direction = _primitive_perp(self.v)

    @property
    def T(self) -> float:
        return self.gamma / (TWO_PI * math.hypot(*self.xi0))

    @property
    def mean_mode(self) -> np.ndarray:
        return 1j * np.array(self.xi0, dtype=float)

    def in_S(self, xi) -> bool:
        return int(xi[0]) * self.v[0] + int(xi[1]) * self.v[1] == 0

    def amplitude(self, xi) -> complex:
        """``f(xi) = g(xi) exp(-gamma |xi|)``."""
        return complex(self.g(np.asarray(xi))) * math.exp(-self.gamma * math.hypot(*xi))

    def mode(self, xi, t: float) -> np.ndarray:
        xi = tuple(int(x) for x in xi)
        if xi == (0, 0):
            return self.mean_mode
        if not self.in_S(xi):
            return np.zeros(2, dtype=complex)
        growth = math.exp(TWO_PI * (xi[0] * self.xi0[0] + xi[1] * self.xi0[1]) * t)
        return growth * self.amplitude(xi) * np.array(self.v, dtype=complex)

    def mode_derivative(self, xi, t: float) -> np.ndarray:
        xi = tuple(int(x) for x in xi)
        if xi == (0, 0) or not self.in_S(xi):
            return np.zeros(2, dtype=complex)
        return TWO_PI * (xi[0] * self.xi0[0] + xi[1] * self.xi0[1]) * self.mode(xi, t)

    def box(self, B: int):
        a = np.arange(-B, B + 1)
        xi = np.stack(np.meshgrid(a, a, indexing="ij"), axis=-1)
        return xi

    def evaluate_box(self, t: float, B: int):
        xi = self.box(B)
        U = np.zeros(xi.shape[:2] + (2,), dtype=complex)
        for i in range(xi.shape[0]):
            for j in range(xi.shape[1]):
                U[i, j] = self.mode(xi[i, j], t)
        return U, xi


def build_complex_solution(v=(1, 0), xi0=(0, 1), gamma: float = 1.0, g: Optional[Callable] = None,
                           alpha_exp: float = 0.75) -> Complex2DSolution:
    return Complex2DSolution(v, xi0, gamma, alpha_exp, g)


def residual_2d(solution: Complex2DSolution, xi, t: float, B: int, relative: bool = False) -> float:
    """Brute-force boxed convolution against the closed-form time derivative at ``xi``."""
    xi = tuple(int(x) for x in xi)
    if max(abs(xi[0]), abs(xi[1])) > B:
        raise ValueError("xi outside the box")
    U, grid = solution.evaluate_box(t, B)
    rhs = boxed_convolution(U, grid)[xi[0] + B, xi[1] + B]
    lhs = solution.mode_derivative(xi, t)
    r = float(np.linalg.norm(lhs - rhs))
    if relative:
        return r / (1.0 + max(float(np.linalg.norm(lhs)), float(np.linalg.norm(rhs))))
    return r


def _line_points(solution: Complex2DSolution, n_max: int):
    n = np.arange(-n_max, n_max + 1)
    n = n[n != 0]
    pts = n[:, None] * solution.direction[None, :]
    return n, pts


def _amplitudes(solution: Complex2DSolution, pts: np.ndarray) -> np.ndarray:
    g = solution.g
    if isinstance(g, DefaultAmplitude):
        x0 = np.asarray(g.xi0)
        n2 = float(np.dot(x0, x0))
        k = pts @ x0 / n2
        on = (pts[:, 0] * x0[1] - pts[:, 1] * x0[0] == 0) & (k == np.round(k)) & (k != 0)
        r = np.linalg.norm(pts, axis=1)
        out = np.zeros(len(pts))
        out[on] = r[on] ** (-g.alpha)
        return out
    return np.array([abs(complex(g(p))) for p in pts])


def energy(solution: Complex2DSolution, t: float, N: float) -> float:
    """``|xi0|^2 + |v|^2 sum_{xi in S, 0<|xi|<=N} |f(xi)|^2 exp(4 pi (xi . xi0) t)``."""
    p = solution.direction
    n_max = int(math.floor(N / math.hypot(*p) + 1e-12))
    base = float(np.dot(solution.xi0, solution.xi0))
    if n_max < 1:
        return base
    _, pts = _line_points(solution, n_max)
    g = _amplitudes(solution, pts)
    r = np.linalg.norm(pts, axis=1)
    expo = -2.0 * solution.gamma * r + 2.0 * TWO_PI * (pts @ np.asarray(solution.xi0)) * t
    vv = float(np.dot(solution.v, solution.v))
    return base + vv * math.fsum(g ** 2 * np.exp(expo))


def log_sobolev_terms(solution: Complex2DSolution, s: float, t: float, n_max: int):
    """``(|n|, log[(1+|xi|^2)^s |u(xi,t)|^2])`` for ``xi = n p`` on ``S``, ``n != 0``."""
    n, pts = _line_points(solution, n_max)
    g = _amplitudes(solution, pts)
    r2 = np.sum(pts.astype(float) ** 2, axis=1)
    vv = float(np.dot(solution.v, solution.v))
    with np.errstate(divide="ignore"):
        log_g2 = np.where(g > 0, 2.0 * np.log(np.where(g > 0, g, 1.0)), -np.inf)
    expo = (-2.0 * solution.gamma * np.sqrt(r2)
            + 2.0 * TWO_PI * (pts @ np.asarray(solution.xi0, dtype=float)) * t)
    return np.abs(n), s * np.log1p(r2) + log_g2 + expo + math.log(vv)


def sobolev_2d(solution: Complex2DSolution, s: float, t: float, n_max: int) -> float:
    """Partial sum ``sum_{|n| <= n_max} (1+|xi|^2)^s |u(xi,t)|^2`` including the mean mode."""
    _, lt = log_sobolev_terms(solution, s, t, n_max)
    return float(np.dot(solution.xi0, solution.xi0)) + math.fsum(np.exp(lt))


def check_lower_bound(solution: Complex2DSolution, kmax: int = 64) -> None:
    if not solution.alpha_exp > 0.5:
        raise ValueError("alpha_exp must exceed 1/2")
    x0 = np.asarray(solution.xi0)
    for k in range(1, kmax + 1):
        xi = k * x0
        if abs(complex(solution.g(xi))) < (1 - 1e-12) * float(np.linalg.norm(xi)) ** (-solution.alpha_exp):
            raise ValueError(f"|g({k} xi0)| is below |xi|^-alpha")


def classify_blowup(solution: Complex2DSolution, s: float, t: float, N_max: int = 100_000,
                    **kw) -> SeriesVerdict:
    """CONVERGENT / DIVERGENT / INCONCLUSIVE for the Sobolev sum at time ``t``."""
    check_lower_bound(solution)
    idx, lt = log_sobolev_terms(solution, s, t, N_max)
    # the mean mode joins the head of the series
    head_idx = np.concatenate([[0], idx])
    head_lt = np.concatenate([[math.log(float(np.dot(solution.xi0, solution.xi0)))], lt])
    return classify_terms(head_idx, head_lt, N_max, **kw)

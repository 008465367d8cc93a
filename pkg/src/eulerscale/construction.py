"""Explicit Fourier-side solutions of the Euler system on the 3-torus.

The solution lives on the lattice plane ``S`` spanned by ``eta0`` and
``xi1``.  Axis modes ``k*eta0`` are pure oscillations; every off-axis
column ``m != 0`` is generated from the seed pair
``(v_{0,m}, v_{+-1,m}) = (g(m) f(t) v, 0)`` by the two-way recurrence

    v_{k,m}' = alpha_m v_{k-1,m} + beta_k v_{k,m} + alpha~_m v_{k+1,m},

with ``alpha_m = -2 pi i m b e^{-2 pi i a t}``, ``alpha~_m = -conj(alpha_m)``
and ``beta_k = -2 pi i k a`` where ``a = xi0 . eta0`` and ``b = |xi1|^2``
(both 1 for the default frame).
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Mapping, Optional, Tuple, Union

import numpy as np

from .bump import BumpSpec, HalfBump
from .terms import ExactCoef, TermKey, TermSeries, _coerce

Vec = Tuple[int, ...]


def _dot(a, b) -> int:
    return sum(int(x) * int(y) for x, y in zip(a, b))


class FrameError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeFrame:
    v: Vec = (0, 0, 1)
    eta0: Vec = (0, 1, 0)
    xi0: Vec = (0, 1, 0)
    xi1: Vec = (1, 0, 0)

    def __post_init__(self):
        for name in ("v", "eta0", "xi0", "xi1"):
            vec = tuple(int(x) for x in getattr(self, name))
            if len(vec) != 3:
                raise FrameError(f"{name} must be an integer 3-vector")
            if not any(vec):
                raise FrameError(f"{name} must be nonzero")
            object.__setattr__(self, name, vec)
        if self.xi0 != self.eta0:
            raise FrameError("xi0 must equal eta0")
        if _dot(self.eta0, self.xi1):
            raise FrameError("eta0 . xi1 must vanish")
        if _dot(self.eta0, self.v) or _dot(self.xi1, self.v):
            raise FrameError("eta0 and xi1 must lie in the plane orthogonal to v")

    @property
    def a(self) -> int:
        """``xi0 . eta0``: axis phase speed."""
        return _dot(self.xi0, self.eta0)

    @property
    def b(self) -> int:
        """``|xi1|^2``: coupling strength per unit of ``m``."""
        return _dot(self.xi1, self.xi1)

    def wavevector(self, k: int, m: int) -> np.ndarray:
        return k * np.array(self.eta0) + m * np.array(self.xi1)

    def to_dict(self) -> dict:
        return {"v": list(self.v), "eta0": list(self.eta0), "xi0": list(self.xi0),
                "xi1": list(self.xi1)}


# amplitude laws ----------------------------------------------------------

@dataclass(frozen=True)
class PowerLaw:
    """``amplitude * |m|**(-alpha)`` for ``m != 0``."""

    amplitude: float = 1.0
    alpha: float = 0.3

    def __call__(self, m: int) -> float:
        return self.amplitude * abs(m) ** (-self.alpha)

    def array(self, ms: np.ndarray) -> np.ndarray:
        return self.amplitude * np.abs(ms).astype(float) ** (-self.alpha)

    def to_dict(self):
        return {"law": "power", "amplitude": self.amplitude, "alpha": self.alpha}


@dataclass(frozen=True)
class ExpLaw:
    """``amplitude * exp(-rate * |k|)``."""

    amplitude: float = 1.0
    rate: float = 1.0

    def __call__(self, k: int) -> float:
        return self.amplitude * math.exp(-self.rate * abs(k))

    def array(self, ks: np.ndarray) -> np.ndarray:
        return self.amplitude * np.exp(-self.rate * np.abs(ks).astype(float))

    def to_dict(self):
        return {"law": "exp", "amplitude": self.amplitude, "rate": self.rate}


@dataclass(frozen=True)
class ZeroLaw:
    def __call__(self, k: int) -> float:
        return 0.0

    def array(self, ks):
        return np.zeros(np.shape(ks))

    def to_dict(self):
        return {"law": "zero"}


class TableLaw:
    """Explicit table; the negative side is filled by conjugation when absent."""

    def __init__(self, table: Mapping[int, complex]):
        full: dict = {}
        for k, val in table.items():
            full[int(k)] = val
        for k, val in list(full.items()):
            if -k not in full:
                full[-k] = val.conjugate() if isinstance(val, complex) else val
        self.table = full

    def __call__(self, k: int):
        return self.table.get(k, 0.0)

    def array(self, ks):
        return np.array([self(int(k)) for k in np.ravel(ks)]).reshape(np.shape(ks))

    def __eq__(self, other):
        return isinstance(other, TableLaw) and self.table == other.table

    def to_dict(self):
        pos = {k: v for k, v in sorted(self.table.items()) if k > 0}
        return {"law": "table",
                "values": {str(k): ([v.real, v.imag] if isinstance(v, complex) else v)
                           for k, v in pos.items()}}


class CalibratedLaw:
    """``factor * target(index * direction)`` for a user function on lattice vectors."""

    def __init__(self, target: Callable, direction: Vec, factor: float = 1.0):
        self.target = target
        self.direction = np.asarray(direction)
        self.factor = factor

    def __call__(self, k: int):
        return self.factor * self.target(k * self.direction)

    def array(self, ks):
        ks = np.asarray(ks)
        try:
            out = self.factor * np.asarray(self.target(ks[..., None] * self.direction))
            if out.shape == ks.shape:
                return out
        except Exception:
            pass
        return np.array([self(int(k)) for k in np.ravel(ks)]).reshape(ks.shape)


def law_from_dict(d: Optional[dict]):
    if d is None:
        return ZeroLaw()
    d = dict(d)
    law = d.pop("law")
    if law == "power":
        return PowerLaw(**d)
    if law == "exp":
        return ExpLaw(**d)
    if law == "zero":
        return ZeroLaw()
    if law == "table":
        vals = {}
        for k, v in d["values"].items():
            vals[int(k)] = complex(*v) if isinstance(v, (list, tuple)) else float(v)
        return TableLaw(vals)
    raise ValueError(f"unknown amplitude law {law!r}")


@dataclass(frozen=True)
class GeneratorData:
    """Free data of the construction: axis amplitudes ``h``, seeds ``g`` and the bump."""

    h: Callable = field(default_factory=ZeroLaw)
    g: Callable = field(default_factory=ZeroLaw)
    bump: BumpSpec = field(default_factory=HalfBump)

    def check_symmetry(self, K: int, M: int, tol: float = 0.0) -> None:
        for k in range(2, K + 1):
            if abs(complex(self.h(-k)) - complex(self.h(k)).conjugate()) > tol:
                raise ValueError(f"h(-{k}) != conj(h({k}))")
        for m in range(1, M + 1):
            if abs(complex(self.g(-m)) - complex(self.g(m)).conjugate()) > tol:
                raise ValueError(f"g(-{m}) != conj(g({m}))")


def calibrate_initial_data(f1: Callable, f2: Callable, frame: LatticeFrame = LatticeFrame(),
                           bump: Optional[BumpSpec] = None) -> GeneratorData:
    """Pick ``h = f1(k eta0)`` and ``g = e * f2(m xi1)``.

    Then ``|u0(xi)| <= f1(xi)`` for ``|xi| > 1`` and ``|u(m xi1, T+1)| = f2(m xi1)``
    for a half bump, since ``f(T+1) = 1/e``.
    """
    return GeneratorData(h=CalibratedLaw(f1, frame.eta0),
                         g=CalibratedLaw(f2, frame.xi1, factor=math.e),
                         bump=bump if bump is not None else HalfBump())


# modes -------------------------------------------------------------------

class ModeFunction:
    """Vector of three :class:`TermSeries`, one per Cartesian component."""

    __slots__ = ("components",)

    def __init__(self, components):
        self.components = tuple(components)

    @classmethod
    def along(cls, direction: Vec, series: TermSeries) -> "ModeFunction":
        return cls(series.scale(int(c)) for c in direction)

    @classmethod
    def zero(cls, dim: int = 3, exact: bool = False) -> "ModeFunction":
        return cls(TermSeries.zero(exact) for _ in range(dim))

    @property
    def exact(self) -> bool:
        return self.components[0].exact

    def __eq__(self, other):
        return isinstance(other, ModeFunction) and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return f"ModeFunction({list(self.components)!r})"

    def __bool__(self):
        return any(self.components)

    def map(self, fn) -> "ModeFunction":
        return ModeFunction(fn(c) for c in self.components)

    def conjugate(self) -> "ModeFunction":
        return self.map(TermSeries.conjugate)

    def differentiate(self) -> "ModeFunction":
        return self.map(TermSeries.differentiate)

    def dot(self, vec) -> TermSeries:
        out = TermSeries.zero(self.exact)
        for c, x in zip(self.components, vec):
            if x:
                out = out + c.scale(int(x))
        return out

    def n_terms(self) -> int:
        return sum(len(c) for c in self.components)

    def evaluate(self, t: float, bump=None) -> np.ndarray:
        return np.array([c.evaluate(t, bump) if c else 0j for c in self.components])


Scalar = Union[TermSeries, ModeFunction]


def _consts(m: int, k: int, frame: LatticeFrame, exact: bool):
    if m == 0:
        raise ValueError("recurrences are defined for m != 0 only")
    a, b = frame.a, frame.b
    inv = _coerce(ExactCoef.two_pi_power(-1, Fraction(1, m * b), imag=True), exact)
    beta_ratio = _coerce(ExactCoef.from_value(Fraction(-k * a, m * b)), exact)
    return a, inv, beta_ratio


def _step_up_scalar(prev: TermSeries, cur: TermSeries, k: int, m: int,
                    frame: LatticeFrame) -> TermSeries:
    a, inv, beta_ratio = _consts(m, k, frame, cur.exact)
    out = cur.differentiate().scale(inv).shift_frequency(-a)
    out = out - prev.shift_frequency(-2 * a)
    return out + cur.scale(beta_ratio).shift_frequency(-a)


def _step_down_scalar(nxt: TermSeries, cur: TermSeries, k: int, m: int,
                      frame: LatticeFrame) -> TermSeries:
    a, inv, beta_ratio = _consts(m, k, frame, cur.exact)
    out = cur.differentiate().scale(inv).shift_frequency(a)
    out = out - nxt.shift_frequency(2 * a)
    return out + cur.scale(beta_ratio).shift_frequency(a)


def step_up(prev: Scalar, cur: Scalar, k: int, m: int,
            frame: LatticeFrame = LatticeFrame()) -> Scalar:
    """``v_{k+1,m}`` from ``v_{k-1,m}`` and ``v_{k,m}`` (forward recurrence)."""
    if isinstance(cur, ModeFunction):
        return ModeFunction(_step_up_scalar(p, c, k, m, frame)
                            for p, c in zip(prev.components, cur.components))
    return _step_up_scalar(prev, cur, k, m, frame)


def step_down(nxt: Scalar, cur: Scalar, k: int, m: int,
              frame: LatticeFrame = LatticeFrame()) -> Scalar:
    """``v_{k-1,m}`` from ``v_{k+1,m}`` and ``v_{k,m}`` (backward recurrence)."""
    if isinstance(cur, ModeFunction):
        return ModeFunction(_step_down_scalar(n, c, k, m, frame)
                            for n, c in zip(nxt.components, cur.components))
    return _step_down_scalar(nxt, cur, k, m, frame)


def build_axis_modes(h: Callable, frame: LatticeFrame = LatticeFrame(), K: int = 1,
                     exact: bool = False) -> Dict[int, ModeFunction]:
    a = frame.a
    out = {0: ModeFunction.along(frame.xi0, TermSeries.monomial(None, 0, 1, exact))}
    for k in (1, -1):
        if abs(k) <= K:
            out[k] = ModeFunction.along(frame.xi1, TermSeries.monomial(None, -k * a, 1, exact))
    for k in range(2, K + 1):
        for kk in (k, -k):
            out[kk] = ModeFunction.along(
                frame.v, TermSeries.monomial(None, -kk * a, h(kk), exact))
    return out


def seed_column(m: int, g: Callable, exact: bool = False,
                frame: LatticeFrame = LatticeFrame()) -> Tuple[ModeFunction, ModeFunction]:
    """``(v_{0,m}, v_{s,m})`` with ``s = sign(m)``: ``g(m) f v`` and the zero neighbour."""
    if m == 0:
        raise ValueError("seed columns need m != 0")
    v0 = ModeFunction.along(frame.v, TermSeries.monomial(0, 0, g(m), exact))
    return v0, ModeFunction.zero(3, exact)


def _fill_column_scalar(m: int, amp, K: int, frame: LatticeFrame, exact: bool) -> dict:
    """Scalar ``v``-direction series ``{k: v_{k,m}}`` for ``|k| <= K``."""
    s = 1 if m > 0 else -1
    col = {0: TermSeries.monomial(0, 0, amp, exact), s: TermSeries.zero(exact)}
    # the far side of the seed: step away from k = 0 through k = s
    for k in range(1, K):
        kk = s * k
        if s > 0:
            col[kk + 1] = _step_up_scalar(col[kk - 1], col[kk], kk, m, frame)
        else:
            col[kk - 1] = _step_down_scalar(col[kk + 1], col[kk], kk, m, frame)
    # the near side: start from the pair (v_s, v_0)
    for k in range(0, K):
        kk = -s * k
        if s > 0:
            col[kk - 1] = _step_down_scalar(col[kk + 1], col[kk], kk, m, frame)
        else:
            col[kk + 1] = _step_up_scalar(col[kk - 1], col[kk], kk, m, frame)
    return {k: v for k, v in col.items() if abs(k) <= K}


def _column_task(args):
    m, amp, K, frame, exact = args
    return m, _fill_column_scalar(m, amp, K, frame, exact)


@dataclass
class FourierSolution3D:
    """Modes ``u(k eta0 + m xi1, t)`` on the box ``|k| <= K``, ``|m| <= M``."""

    frame: LatticeFrame
    K: int
    M: int
    modes: Dict[Tuple[int, int], ModeFunction]
    generator: GeneratorData
    exact: bool = False

    @property
    def bump(self) -> BumpSpec:
        return self.generator.bump

    def in_box(self, k: int, m: int) -> bool:
        return abs(k) <= self.K and abs(m) <= self.M

    def mode(self, k: int, m: int) -> ModeFunction:
        return self.modes[(k, m)]

    def wavevector(self, k: int, m: int) -> np.ndarray:
        return self.frame.wavevector(k, m)

    def points(self):
        return [(k, m) for k in range(-self.K, self.K + 1) for m in range(-self.M, self.M + 1)]

    def nonzero_points(self):
        return [p for p in self.points() if self.modes[p]]

    def evaluate_modes(self, t: float) -> np.ndarray:
        """Array ``U[k + K, m + M, :]`` of mode values at time ``t``."""
        U = np.zeros((2 * self.K + 1, 2 * self.M + 1, 3), dtype=complex)
        for (k, m), mode in self.modes.items():
            if mode:
                U[k + self.K, m + self.M] = mode.evaluate(t, self.bump)
        return U

    def evaluate_derivatives(self, t: float) -> np.ndarray:
        dU = np.zeros((2 * self.K + 1, 2 * self.M + 1, 3), dtype=complex)
        for (k, m), mode in self.modes.items():
            if mode:
                dU[k + self.K, m + self.M] = mode.differentiate().evaluate(t, self.bump)
        return dU

    def wavevector_grid(self) -> np.ndarray:
        ks = np.arange(-self.K, self.K + 1)[:, None, None]
        ms = np.arange(-self.M, self.M + 1)[None, :, None]
        return ks * np.array(self.frame.eta0) + ms * np.array(self.frame.xi1)

    def to_double(self) -> "FourierSolution3D":
        if not self.exact:
            return self
        modes = {p: mf.map(TermSeries.to_double) for p, mf in self.modes.items()}
        return FourierSolution3D(self.frame, self.K, self.M, modes, self.generator, False)


def build_solution(frame: LatticeFrame, generator: GeneratorData, K: int, M: int,
                   exact: bool = False, workers: int = 1,
                   negative_by_conjugation: bool = False) -> FourierSolution3D:
    """Assemble the explicit solution on the ``(2K+1) x (2M+1)`` box.

    Columns ``m <= -1`` run their own recurrence from ``g(m) = conj(g(-m))``
    unless ``negative_by_conjugation`` asks for them to be mirrored instead.
    """
    if K < 1 or M < 1:
        raise ValueError("box extents K, M must be at least 1")
    generator.check_symmetry(K, M, tol=1e-15)
    modes: Dict[Tuple[int, int], ModeFunction] = {}
    for k, mf in build_axis_modes(generator.h, frame, K, exact).items():
        modes[(k, 0)] = mf
    ms = [m for m in range(-M, M + 1) if m and not (negative_by_conjugation and m < 0)]
    tasks = [(m, generator.g(m), K, frame, exact) for m in ms]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_column_task, tasks))
    else:
        results = [_column_task(t) for t in tasks]
    for m, col in results:
        for k, series in col.items():
            modes[(k, m)] = ModeFunction.along(frame.v, series)
    if negative_by_conjugation:
        for m in range(1, M + 1):
            for k in range(-K, K + 1):
                modes[(-k, -m)] = modes[(k, m)].conjugate()
    return FourierSolution3D(frame, K, M, modes, generator, exact)


def evaluate_physical(solution: FourierSolution3D, x, t: float, N: float,
                      imag_tol: float = 1e-10) -> np.ndarray:
    """Real velocity of the Fourier truncation ``|xi| <= N`` at point ``x``."""
    fr = solution.frame
    need_k = N / math.sqrt(_dot(fr.eta0, fr.eta0))
    need_m = N / math.sqrt(fr.b)
    if need_k > solution.K + 1e-12 or need_m > solution.M + 1e-12:
        raise ValueError(f"cutoff N={N} exceeds the built box")
    x = np.asarray(x, dtype=float)
    U = solution.evaluate_modes(t)
    xi = solution.wavevector_grid()
    mask = np.linalg.norm(xi, axis=-1) <= N + 1e-12
    phase = np.exp(2j * np.pi * (xi @ x))
    total = (U * phase[..., None])[mask].sum(axis=0)
    scale = max(1.0, float(np.max(np.abs(U[mask]))) if mask.any() else 1.0)
    if np.max(np.abs(total.imag)) > imag_tol * scale:
        raise ArithmeticError(f"truncated field is not real: Im = {total.imag}")
    return total.real

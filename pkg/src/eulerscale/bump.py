"""Smooth switch-on functions ``f`` and all their derivatives.

Three kinds are supported:

* ``HalfBump(T)``: ``f(t) = exp(1/(T - t))`` for ``t > T`` and 0 otherwise.
  With ``u = 1/(T - t)`` every derivative is ``P_n(u) e^u`` where
  ``P_0 = 1`` and ``P_{n+1} = u^2 (P_n + P_n')``.
* ``CompactBump(T1, T2)``: ``exp(-1/(t - T1) - 1/(T2 - t))`` on ``(T1, T2)``.
  With ``u1 = 1/(t - T1)``, ``u2 = 1/(T2 - t)`` the derivatives are
  ``Q_n(u1, u2) e^{-u1-u2}`` with
  ``Q_{n+1} = -u1^2 dQ/du1 + u2^2 dQ/du2 + (u1^2 - u2^2) Q``.
* ``MultiBump``: sum of compact bumps over disjoint ordered windows.

Polynomial coefficients are exact Python integers.  Evaluation of orders
above ``EXTENDED_FROM`` happens in 160-bit binary floating point and is
rounded once, since ``u < 0`` makes the Horner sum alternate in sign.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import mpmath

DEFAULT_MAX_ORDER = 64
EXTENDED_FROM = 5
_EXT_PREC = 160

_ctx_local = threading.local()


def _mp():
    # mpmath contexts carry mutable precision state; keep one per thread
    ctx = getattr(_ctx_local, "ctx", None)
    if ctx is None:
        ctx = mpmath.MPContext()
        ctx.prec = _EXT_PREC
        _ctx_local.ctx = ctx
    return ctx


class BumpOrderError(ValueError):
    """Requested derivative order exceeds the oracle's ``max_order``."""


@dataclass(frozen=True)
class DerivPolynomial:
    """``f^(n) = P_n(u) e^u`` for the half bump; ``coeffs[i]`` multiplies ``u**i``."""

    order: int
    coeffs: tuple

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, u):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * u + c
        return acc


@lru_cache(maxsize=None)
def _half_poly(n: int) -> tuple:
    if n == 0:
        return (1,)
    prev = _half_poly(n - 1)
    # P + P'
    s = list(prev) + [0]
    for i in range(1, len(prev)):
        s[i - 1] += i * prev[i]
    while len(s) > 1 and s[-1] == 0:
        s.pop()
    return (0, 0) + tuple(s)


def deriv_polynomial(n: int, max_order: int = DEFAULT_MAX_ORDER) -> DerivPolynomial:
    if n < 0:
        raise ValueError("derivative order must be nonnegative")
    if n > max_order:
        raise BumpOrderError(f"order {n} exceeds max_order {max_order}")
    return DerivPolynomial(n, _half_poly(n))


@lru_cache(maxsize=None)
def compact_polynomial(n: int) -> dict:
    """``Q_n`` as ``{(i, j): c}`` meaning ``c * u1**i * u2**j``."""
    if n == 0:
        return {(0, 0): 1}
    prev = compact_polynomial(n - 1)
    out: dict = {}

    def put(key, val):
        out[key] = out.get(key, 0) + val

    for (i, j), c in prev.items():
        if i:
            put((i + 1, j), -i * c)
        if j:
            put((i, j + 1), j * c)
        put((i + 2, j), c)
        put((i, j + 2), -c)
    return {k: v for k, v in out.items() if v}


def _horner_ext(coeffs: Sequence[int], u: float):
    mp = _mp()
    uu = mp.mpf(u)
    acc = mp.mpf(0)
    for c in reversed(coeffs):
        acc = acc * uu + c
    return acc


def half_bump_deriv(n: int, t: float, T: float, max_order: int = DEFAULT_MAX_ORDER) -> float:
    if n > max_order:
        raise BumpOrderError(f"order {n} exceeds max_order {max_order}")
    if t <= T:
        return 0.0
    u = 1.0 / (T - t)
    coeffs = _half_poly(n)
    if n < EXTENDED_FROM:
        return DerivPolynomial(n, coeffs)(u) * math.exp(u)
    mp = _mp()
    return float(_horner_ext(coeffs, u) * mp.exp(mp.mpf(u)))


def compact_bump_deriv(n: int, t: float, T1: float, T2: float,
                       max_order: int = DEFAULT_MAX_ORDER) -> float:
    if n > max_order:
        raise BumpOrderError(f"order {n} exceeds max_order {max_order}")
    if not T1 < t < T2:
        return 0.0
    u1 = 1.0 / (t - T1)
    u2 = 1.0 / (T2 - t)
    q = compact_polynomial(n)
    if n < EXTENDED_FROM:
        val = sum(c * u1 ** i * u2 ** j for (i, j), c in q.items())
        return val * math.exp(-u1 - u2)
    mp = _mp()
    a, b = mp.mpf(u1), mp.mpf(u2)
    acc = mp.fsum(c * a ** i * b ** j for (i, j), c in q.items())
    return float(acc * mp.exp(-a - b))


class BumpSpec:
    """Base class; subclasses implement :meth:`_deriv` and :meth:`support`."""

    kind = "abstract"
    max_order: int = DEFAULT_MAX_ORDER

    def deriv(self, n: int, t: float) -> float:
        """``f^(n)(t)``; memoized per instance."""
        if n < 0:
            raise ValueError("derivative order must be nonnegative")
        if n > self.max_order:
            raise BumpOrderError(f"order {n} exceeds max_order {self.max_order}")
        cache = self.__dict__.setdefault("_cache", {})
        key = (n, t)
        val = cache.get(key)
        if val is None:
            val = cache[key] = self._deriv(n, float(t))
        return val

    def __call__(self, t: float) -> float:
        return self.deriv(0, t)

    def _deriv(self, n: int, t: float) -> float:
        raise NotImplementedError

    def support(self) -> list:
        """Closed intervals outside which every derivative vanishes."""
        raise NotImplementedError

    def vanishes_at(self, t: float) -> bool:
        """True when ``t`` lies outside the open support, so all ``f^(n)(t) = 0``."""
        return all(not lo < t < hi for lo, hi in self.support())

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=True)
class HalfBump(BumpSpec):
    T: float = 1.0
    max_order: int = DEFAULT_MAX_ORDER
    kind = "half"

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("half bump needs T > 0")

    def _deriv(self, n, t):
        return half_bump_deriv(n, t, self.T, self.max_order)

    def support(self):
        return [(self.T, math.inf)]

    def to_dict(self):
        return {"kind": "half", "T": self.T, "max_order": self.max_order}


@dataclass(frozen=True, eq=True)
class CompactBump(BumpSpec):
    T1: float = 1.0
    T2: float = 2.0
    max_order: int = DEFAULT_MAX_ORDER
    kind = "compact"

    def __post_init__(self):
        if not 0 < self.T1 < self.T2:
            raise ValueError("compact bump needs 0 < T1 < T2")

    def _deriv(self, n, t):
        return compact_bump_deriv(n, t, self.T1, self.T2, self.max_order)

    def support(self):
        return [(self.T1, self.T2)]

    def to_dict(self):
        return {"kind": "compact", "T1": self.T1, "T2": self.T2, "max_order": self.max_order}


@dataclass(frozen=True, eq=True)
class MultiBump(BumpSpec):
    intervals: tuple = ((1.0, 2.0),)
    max_order: int = DEFAULT_MAX_ORDER
    kind = "multi"

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        if not ivs:
            raise ValueError("multi bump needs at least one interval")
        for a, b in ivs:
            if not 0 < a < b:
                raise ValueError(f"interval [{a}, {b}] must satisfy 0 < T1 < T2")
        for (_, b), (c, _) in zip(ivs, ivs[1:]):
            if not b < c:
                raise ValueError("multi bump intervals must be disjoint and ordered")
        object.__setattr__(self, "intervals", ivs)

    @property
    def pieces(self) -> list:
        return [CompactBump(a, b, self.max_order) for a, b in self.intervals]

    def _deriv(self, n, t):
        return math.fsum(compact_bump_deriv(n, t, a, b, self.max_order)
                         for a, b in self.intervals)

    def support(self):
        return list(self.intervals)

    def to_dict(self):
        return {"kind": "multi", "intervals": [list(iv) for iv in self.intervals],
                "max_order": self.max_order}


def bump_from_dict(d: dict) -> BumpSpec:
    d = dict(d)
    kind = d.pop("kind", "half")
    if kind == "half":
        return HalfBump(**d)
    if kind == "compact":
        return CompactBump(**d)
    if kind == "multi":
        d["intervals"] = tuple(tuple(iv) for iv in d.get("intervals", ()))
        return MultiBump(**d)
    raise ValueError(f"unknown bump kind {kind!r}")


def derivative_table(bump: BumpSpec, orders: Sequence[int], times: Sequence[float]) -> list:
    """Rows ``(n, t, f^(n)(t))`` for the ``bump`` CLI subcommand."""
    return [(n, t, bump.deriv(n, t)) for n in orders for t in times]

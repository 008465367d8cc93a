"""Symbolic time series in the basis ``f^(n)(t) e^{2 pi i j t}`` and ``e^{2 pi i j t}``.

A :class:`TermSeries` is a finite linear combination of basis functions
indexed by :class:`TermKey`.  Coefficients are either exact
(:class:`ExactCoef`, Laurent polynomials in ``2*pi`` with Gaussian
rational coefficients) or plain Python ``complex`` in double mode.

The set is closed under everything the mode recurrences need:
differentiation, multiplication by ``e^{2 pi i dj t}``, complex-linear
combination and conjugation.  The scalar bump ``f`` is real, so
conjugation maps ``f^(n) e^{2 pi i j t}`` to ``f^(n) e^{-2 pi i j t}``.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Optional, Union

TWO_PI = 2.0 * math.pi

Number = Union[int, float, complex, Fraction]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"cannot represent {x!r} exactly")
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


class ExactCoef:
    """Exact complex number of the form ``sum_p (a_p + i b_p) (2 pi)^p``.

    ``a_p, b_p`` are rationals and ``p`` ranges over a finite set of
    integers.  Floats are admitted through their exact binary value, so a
    double-precision input such as ``0.1`` is carried as the rational it
    actually stores.
    """

    __slots__ = ("_parts", "_hash")

    def __init__(self, parts: Optional[Mapping[int, tuple]] = None):
        clean = {}
        if parts:
            for p, (re, im) in parts.items():
                re, im = _frac(re), _frac(im)
                if re or im:
                    clean[int(p)] = (re, im)
        self._parts = tuple(sorted((p, re, im) for p, (re, im) in clean.items()))
        self._hash = None

    @classmethod
    def _raw(cls, parts: dict) -> "ExactCoef":
        obj = cls.__new__(cls)
        obj._parts = tuple(sorted((p, re, im) for p, (re, im) in parts.items()
                                  if re or im))
        obj._hash = None
        return obj

    @classmethod
    def from_value(cls, x, power: int = 0) -> "ExactCoef":
        """Exact coefficient ``x * (2 pi)^power`` for a real/complex/rational ``x``."""
        if isinstance(x, ExactCoef):
            return x * cls.two_pi_power(power) if power else x
        if isinstance(x, complex):
            re, im = _frac(x.real), _frac(x.imag)
        else:
            re, im = _frac(x), Fraction(0)
        return cls._raw({power: (re, im)})

    @classmethod
    def two_pi_power(cls, power: int, scale=1, imag: bool = False) -> "ExactCoef":
        s = _frac(scale)
        return cls._raw({power: (Fraction(0), s) if imag else (s, Fraction(0))})

    @property
    def parts(self) -> tuple:
        """Sorted ``(power, re, im)`` triples; no entry is zero."""
        return self._parts

    def __bool__(self):
        return bool(self._parts)

    def __eq__(self, other):
        if isinstance(other, ExactCoef):
            return self._parts == other._parts
        if other == 0:
            return not self._parts
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._parts)
        return self._hash

    def __repr__(self):
        if not self._parts:
            return "ExactCoef(0)"
        body = " + ".join(f"({re}{'+' if im >= 0 else '-'}{abs(im)}i)(2pi)^{p}"
                          for p, re, im in self._parts)
        return f"ExactCoef({body})"

    def __neg__(self):
        return ExactCoef._raw({p: (-re, -im) for p, re, im in self._parts})

    def __add__(self, other):
        if not isinstance(other, ExactCoef):
            other = ExactCoef.from_value(other)
        acc = {p: (re, im) for p, re, im in self._parts}
        for p, re, im in other._parts:
            if p in acc:
                a, b = acc[p]
                acc[p] = (a + re, b + im)
            else:
                acc[p] = (re, im)
        return ExactCoef._raw(acc)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, ExactCoef):
            other = ExactCoef.from_value(other)
        return self + (-other)

    def __rsub__(self, other):
        return ExactCoef.from_value(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return ExactCoef._raw({})
            return ExactCoef._raw({p: (re * other, im * other) for p, re, im in self._parts})
        if not isinstance(other, ExactCoef):
            other = ExactCoef.from_value(other)
        acc: dict = {}
        for p, a, b in self._parts:
            for q, c, d in other._parts:
                re, im = a * c - b * d, a * d + b * c
                if p + q in acc:
                    x, y = acc[p + q]
                    acc[p + q] = (x + re, y + im)
                else:
                    acc[p + q] = (re, im)
        return ExactCoef._raw(acc)

    __rmul__ = __mul__

    def conjugate(self) -> "ExactCoef":
        return ExactCoef._raw({p: (re, -im) for p, re, im in self._parts})

    def __complex__(self):
        re = math.fsum(float(a) * TWO_PI ** p for p, a, _ in self._parts)
        im = math.fsum(float(b) * TWO_PI ** p for p, _, b in self._parts)
        return complex(re, im)


Coef = Union[ExactCoef, complex]


class TermKey(NamedTuple):
    """Basis label: ``f_order`` is ``None`` for a pure oscillation."""

    f_order: Optional[int]
    freq: int

    def sort_key(self):
        return (-1 if self.f_order is None else self.f_order, self.freq)


def _coerce(c, exact: bool) -> Coef:
    if exact:
        return c if isinstance(c, ExactCoef) else ExactCoef.from_value(c)
    return complex(c)


def _two_pi_i(j: int, exact: bool) -> Coef:
    if exact:
        return ExactCoef.two_pi_power(1, j, imag=True)
    return complex(0.0, TWO_PI * j)


def _unit_phase(j: int, t: float) -> complex:
    # fmod keeps the phase argument small and odd in j, so e(-j) == conj(e(j)) bitwise
    theta = TWO_PI * math.fmod(j * t, 1.0)
    return complex(math.cos(theta), math.sin(theta))


class TermSeries:
    """Immutable canonical map ``TermKey -> coefficient`` with no zero entries."""

    __slots__ = ("_terms", "exact", "_numeric")

    def __init__(self, terms: Optional[Mapping] = None, exact: bool = False):
        self.exact = bool(exact)
        clean = {}
        for key, c in (terms or {}).items():
            key = key if isinstance(key, TermKey) else TermKey(*key)
            if key.f_order is not None and key.f_order < 0:
                raise ValueError(f"negative f_order in {key}")
            c = _coerce(c, self.exact)
            if c:
                clean[key] = c
        self._terms = clean
        self._numeric = None

    @classmethod
    def _from_clean(cls, terms: dict, exact: bool) -> "TermSeries":
        obj = cls.__new__(cls)
        obj.exact = exact
        obj._terms = {k: c for k, c in terms.items() if c}
        obj._numeric = None
        return obj

    @classmethod
    def zero(cls, exact: bool = False) -> "TermSeries":
        return cls._from_clean({}, exact)

    @classmethod
    def monomial(cls, f_order: Optional[int], freq: int, coef=1, exact: bool = False):
        return cls({TermKey(f_order, freq): coef}, exact=exact)

    # mapping-ish access
    @property
    def terms(self) -> Mapping[TermKey, Coef]:
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items(), key=lambda kv: kv[0].sort_key())

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __getitem__(self, key) -> Coef:
        key = key if isinstance(key, TermKey) else TermKey(*key)
        if key in self._terms:
            return self._terms[key]
        return ExactCoef() if self.exact else 0j

    def __eq__(self, other):
        if not isinstance(other, TermSeries):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        inner = ", ".join(f"{tuple(k)}: {c!r}" for k, c in self.items())
        return f"TermSeries({{{inner}}}, exact={self.exact})"

    def _check(self, other: "TermSeries"):
        if other.exact != self.exact:
            raise TypeError("cannot combine exact and double-mode series")

    # algebra
    def __add__(self, other: "TermSeries") -> "TermSeries":
        self._check(other)
        acc = dict(self._terms)
        for k, c in other._terms.items():
            acc[k] = acc[k] + c if k in acc else c
        return TermSeries._from_clean(acc, self.exact)

    def __neg__(self):
        return TermSeries._from_clean({k: -c for k, c in self._terms.items()}, self.exact)

    def __sub__(self, other: "TermSeries") -> "TermSeries":
        return self + (-other)

    def scale(self, c) -> "TermSeries":
        c = _coerce(c, self.exact)
        if not c:
            return TermSeries.zero(self.exact)
        return TermSeries._from_clean({k: v * c for k, v in self._terms.items()}, self.exact)

    def __mul__(self, c):
        if isinstance(c, TermSeries):
            return NotImplemented
        return self.scale(c)

    __rmul__ = __mul__

    def differentiate(self) -> "TermSeries":
        acc: dict = {}
        for (n, j), c in self._terms.items():
            if n is not None:
                up = TermKey(n + 1, j)
                acc[up] = acc[up] + c if up in acc else c
            if j:
                k = TermKey(n, j)
                d = c * _two_pi_i(j, self.exact)
                acc[k] = acc[k] + d if k in acc else d
        return TermSeries._from_clean(acc, self.exact)

    def shift_frequency(self, dj: int) -> "TermSeries":
        if not dj:
            return self
        return TermSeries._from_clean(
            {TermKey(k.f_order, k.freq + dj): c for k, c in self._terms.items()}, self.exact)

    def conjugate(self) -> "TermSeries":
        return TermSeries._from_clean(
            {TermKey(k.f_order, -k.freq): c.conjugate() for k, c in self._terms.items()},
            self.exact)

    def to_double(self) -> "TermSeries":
        if not self.exact:
            return self
        return TermSeries._from_clean({k: complex(c) for k, c in self._terms.items()}, False)

    def max_f_order(self) -> int:
        orders = [k.f_order for k in self._terms if k.f_order is not None]
        return max(orders) if orders else -1

    def has_pure_oscillation(self) -> bool:
        return any(k.f_order is None for k in self._terms)

    # numerics
    def _numeric_terms(self):
        if self._numeric is None:
            self._numeric = [(k.f_order, k.freq, complex(c)) for k, c in self.items()]
        return self._numeric

    def evaluate(self, t: float, bump=None) -> complex:
        """Numeric value at time ``t``; ``bump`` supplies ``f^(n)(t)``."""
        re_parts, im_parts = [], []
        phases: dict = {}
        for n, j, c in self._numeric_terms():
            if n is None:
                scale = 1.0
            else:
                if bump is None:
                    raise ValueError("series carries f-derivative terms but no bump was given")
                scale = bump.deriv(n, t)
                if scale == 0.0:
                    continue
            e = phases.get(j)
            if e is None:
                e = phases[j] = _unit_phase(j, t)
            z = c * e * scale
            re_parts.append(z.real)
            im_parts.append(z.imag)
        return complex(math.fsum(re_parts), math.fsum(im_parts))


# functional spellings of the methods above
def add(a: TermSeries, b: TermSeries) -> TermSeries:
    return a + b


def scale(c, a: TermSeries) -> TermSeries:
    return a.scale(c)


def differentiate(a: TermSeries) -> TermSeries:
    return a.differentiate()


def shift_frequency(a: TermSeries, dj: int) -> TermSeries:
    return a.shift_frequency(dj)


def conjugate(a: TermSeries) -> TermSeries:
    return a.conjugate()


def evaluate(a: TermSeries, t: float, bump=None) -> complex:
    return a.evaluate(t, bump)


def linear_combination(pairs: Iterable[tuple], exact: bool = False) -> TermSeries:
    """``sum c_i * s_i`` for ``(c_i, s_i)`` pairs."""
    out = TermSeries.zero(exact)
    for c, s in pairs:
        out = out + s.scale(c)
    return out


def to_records(a: TermSeries) -> list:
    """Serializable term list ``[{f_order, freq, re, im}, ...]`` in canonical order."""
    out = []
    for k, c in a.items():
        z = complex(c)
        out.append({"f_order": k.f_order, "freq": k.freq, "re": z.real, "im": z.imag})
    return out

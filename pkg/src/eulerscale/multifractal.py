"""Spectral measures along the ``xi1`` axis, Renyi entropies and fractal exponents.

Integrating out the two transversal coordinates leaves the circle field
whose Fourier coefficients are ``u(m xi1, t)``.  Normalizing their squared
norms gives the probability measure ``mu_N`` on ``{-N..N}``, and

    H_{q,N} = log(sum mu_N^q) / (1 - q),    D_q = lim H_{q,N} / log N.

The ``xi1`` slice never needs the recurrence (it is the seed row), so large
``N`` is served from ``(g, f)`` directly: the *slice fast path*.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from .construction import FourierSolution3D, GeneratorData, LatticeFrame

NOT_APPLICABLE = None

_BLOCK = 1 << 22


class ZeroMeasureError(ValueError):
    """All transversal modes vanish, so ``mu_N`` is undefined."""


# slices ------------------------------------------------------------------

def transversal_modes(solution: FourierSolution3D, t: float, N: int) -> Dict[int, np.ndarray]:
    """``{m: u(m xi1, t)}`` for ``|m| <= N`` read off the built modes."""
    if N > solution.M:
        raise ValueError(f"N={N} exceeds the built box M={solution.M}")
    return {m: solution.mode(0, m).evaluate(t, solution.bump) for m in range(-N, N + 1)}


def slice_fast(generator: GeneratorData, frame: LatticeFrame, t: float,
               ms: np.ndarray) -> np.ndarray:
    """Closed-form ``u(m xi1, t)`` for an array of ``m``: ``g(m) f(t) v``, and ``xi0`` at 0."""
    ms = np.asarray(ms)
    f = generator.bump.deriv(0, t)
    amp = np.asarray(_law_array(generator.g, ms), dtype=complex) * f
    out = amp[..., None] * np.array(frame.v, dtype=float)
    zero = ms == 0
    out[zero] = np.array(frame.xi0, dtype=float)
    return out


def _law_array(law, ks):
    ks = np.asarray(ks)
    safe = np.where(ks == 0, 1, ks)
    if hasattr(law, "array"):
        vals = np.asarray(law.array(safe))
    else:
        vals = np.array([law(int(k)) for k in np.ravel(safe)]).reshape(ks.shape)
    return np.where(ks == 0, 0, vals)


def check_slice_fast_path(solution: FourierSolution3D, t: float, rtol: float = 1e-12) -> float:
    """Largest relative gap between built ``xi1``-slice modes and the fast path."""
    ms = np.arange(-solution.M, solution.M + 1)
    fast = slice_fast(solution.generator, solution.frame, t, ms)
    built = np.array([solution.mode(0, int(m)).evaluate(t, solution.bump) for m in ms])
    gap = np.max(np.abs(fast - built)) / max(1.0, float(np.max(np.abs(built))))
    if gap > rtol:
        raise AssertionError(f"slice fast path disagrees with built modes by {gap:.3e}")
    return float(gap)


# measures ----------------------------------------------------------------

@dataclass
class SpectralMeasure:
    t: float
    N: int
    ms: np.ndarray
    weights: np.ndarray

    def as_dict(self) -> Dict[int, float]:
        return {int(m): float(w) for m, w in zip(self.ms, self.weights)}


def measure_from_modes(modes: Dict[int, np.ndarray], t: float = 0.0) -> SpectralMeasure:
    ms = np.array(sorted(modes))
    sq = np.array([float(np.sum(np.abs(modes[m]) ** 2)) for m in ms])
    total = math.fsum(sq)
    if total == 0.0:
        raise ZeroMeasureError("all transversal modes vanish")
    N = int(np.max(np.abs(ms))) if ms.size else 0
    return SpectralMeasure(t, N, ms, sq / total)


def mu_measure(solution: FourierSolution3D, t: float, N: int) -> SpectralMeasure:
    return measure_from_modes(transversal_modes(solution, t, N), t)


def renyi_entropy(measure: Union[SpectralMeasure, Sequence[float]], q: float) -> float:
    """``log(sum mu^q) / (1 - q)`` for ``q > 1``."""
    if q == 1:
        raise ValueError("q = 1 (Shannon limit) is excluded")
    if q < 1:
        raise ValueError("only q > 1 is supported")
    w = measure.weights if isinstance(measure, SpectralMeasure) else np.asarray(measure, float)
    w = w[w > 0]
    h = math.log(math.fsum(w ** q)) / (1.0 - q)
    return max(h, 0.0) if h > -1e-15 else h


def moment_sum(solution: FourierSolution3D, q: float, N: int, t: float) -> float:
    """``M_{q,N}(t) = sum_{|m|<=N} |u(m xi1, t)|^{2q}`` from the built modes."""
    modes = transversal_modes(solution, t, N)
    return math.fsum(float(np.sum(np.abs(u) ** 2)) ** q for u in modes.values())


def moment_sum_closed_form(generator: GeneratorData, frame: LatticeFrame, q: float, N: int,
                           t: float) -> float:
    """``|xi0|^{2q} + |f(t)|^{2q} |v|^{2q} sum_{0<|m|<=N} |g(m)|^{2q}``."""
    f = generator.bump.deriv(0, t)
    vv = float(np.dot(frame.v, frame.v))
    x0 = float(np.dot(frame.xi0, frame.xi0))
    gs = math.fsum(abs(complex(generator.g(m))) ** (2 * q)
                   for m in range(-N, N + 1) if m)
    return x0 ** q + (abs(f) ** 2 * vv) ** q * gs


def slice_moment_sums(generator: GeneratorData, frame: LatticeFrame, qs: Sequence[float],
                      Ns: Sequence[int], t: float) -> Dict[float, np.ndarray]:
    """Fast-path ``M_{q,N}`` for every ``q`` in ``qs`` and every ``N`` in increasing ``Ns``.

    Uses ``|g(-m)| = |g(m)|`` to sum the positive side only.
    """
    Ns = [int(n) for n in Ns]
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError("Ns must be strictly increasing")
    f = generator.bump.deriv(0, t)
    vv = float(np.dot(frame.v, frame.v))
    x0 = float(np.dot(frame.xi0, frame.xi0))
    scale2 = abs(f) ** 2 * vv
    out = {q: np.empty(len(Ns)) for q in qs}
    running = {q: 0.0 for q in qs}
    lo = 0
    for idx, N in enumerate(Ns):
        start = lo + 1
        while start <= N:
            stop = min(N, start + _BLOCK - 1)
            ms = np.arange(start, stop + 1)
            a2 = np.abs(_law_array(generator.g, ms)) ** 2 * scale2
            for q in qs:
                running[q] += math.fsum(a2 ** q) if a2.size < 4096 else float(np.sum(a2 ** q))
            start = stop + 1
        lo = N
        for q in qs:
            out[q][idx] = x0 ** q + 2.0 * running[q]
    return out


def renyi_from_moments(Mq: float, M1: float, q: float) -> float:
    return (math.log(Mq) - q * math.log(M1)) / (1.0 - q)


# exponents ---------------------------------------------------------------

def predicted_Dq(alpha: float, q: float) -> Optional[float]:
    """``(1 - 2 alpha) q / (q - 1)`` when ``q > 1/(2 alpha)``, else ``NOT_APPLICABLE``."""
    if not 0 < alpha < 0.5:
        raise ValueError("alpha must lie in (0, 1/2)")
    if not q > 1.0 / (2.0 * alpha):
        return NOT_APPLICABLE
    return (1.0 - 2.0 * alpha) * q / (q - 1.0)


@dataclass
class DqFit:
    q: float
    t: float
    Ns: List[int]
    H: List[float]
    slope: float
    intercept: float
    residual: float
    degenerate: bool = False


def dyadic(lo_exp: int, hi_exp: int) -> List[int]:
    return [1 << e for e in range(lo_exp, hi_exp + 1)]


def fit_slope(Ns: Sequence[int], H: Sequence[float]) -> tuple:
    x = np.log(np.asarray(Ns, dtype=float))
    y = np.asarray(H, dtype=float)
    if np.ptp(y) == 0.0:
        return 0.0, float(y[0]), 0.0, True
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    return float(slope), float(intercept), float(np.sqrt(np.mean(resid ** 2))), False


def fit_Dq(source: Union[FourierSolution3D, GeneratorData], q: float, t: float,
           Ns: Sequence[int], frame: Optional[LatticeFrame] = None) -> DqFit:
    """Least-squares slope of ``H_{q,N}`` against ``log N`` over the dyadic ``Ns``.

    ``N`` inside a built box is read from the modes; anything larger comes
    from the slice fast path.
    """
    if q <= 1:
        raise ValueError("fit_Dq needs q > 1")
    Ns = sorted(int(n) for n in Ns)
    if len(Ns) < 4:
        raise ValueError("the fit needs at least four dyadic points")
    if isinstance(source, FourierSolution3D):
        generator, frame = source.generator, source.frame
        box_M = source.M
    else:
        generator, frame = source, frame or LatticeFrame()
        box_M = 0
    H = []
    fast_Ns = [n for n in Ns if n > box_M]
    fast = slice_moment_sums(generator, frame, (q, 1.0), fast_Ns, t) if fast_Ns else None
    for n in Ns:
        if n <= box_M:
            H.append(renyi_entropy(mu_measure(source, t, n), q))
        else:
            i = fast_Ns.index(n)
            H.append(renyi_from_moments(fast[q][i], fast[1.0][i], q))
    slope, intercept, resid, degenerate = fit_slope(Ns, H)
    return DqFit(q, t, Ns, H, slope, intercept, resid, degenerate)


# Sobolev norms -----------------------------------------------------------

def sobolev_norm(solution: FourierSolution3D, s: float, t: float, N: float) -> float:
    """``sum_{|xi| <= N} (1 + |xi|^2)^s |u(xi, t)|^2`` over the built box.

    When ``t`` lies outside supp f every off-axis mode vanishes identically, so
    only the axis needs to be covered; axis modes beyond the box come from ``h``.
    """
    fr = solution.frame
    e2 = float(np.dot(fr.eta0, fr.eta0))
    x2 = float(fr.b)
    axis_only = solution.bump.vanishes_at(t)
    if not axis_only and (N > solution.K * math.sqrt(e2) + 1e-12
                          or N > solution.M * math.sqrt(x2) + 1e-12):
        raise ValueError(f"radius N={N} is not covered by the box")
    total = []
    if axis_only:
        kmax = int(math.floor(N / math.sqrt(e2) + 1e-12))
        vv = float(np.dot(fr.v, fr.v))
        for k in range(-kmax, kmax + 1):
            w = (1.0 + k * k * e2) ** s
            if k == 0:
                a2 = float(np.dot(fr.xi0, fr.xi0))
            elif abs(k) == 1:
                a2 = x2
            else:
                a2 = abs(complex(solution.generator.h(k))) ** 2 * vv
            total.append(w * a2)
        return math.fsum(total)
    U = solution.evaluate_modes(t)
    xi = solution.wavevector_grid()
    r2 = np.sum(xi.astype(float) ** 2, axis=-1)
    mask = r2 <= N * N + 1e-9
    w = (1.0 + r2[mask]) ** s
    return math.fsum(w * np.sum(np.abs(U[mask]) ** 2, axis=-1))


def sobolev_slice_bound(generator: GeneratorData, frame: LatticeFrame, s: float, t: float,
                        Ns: Sequence[int]) -> np.ndarray:
    """Partial sums ``sum_{|m|<=N} (1 + |m xi1|^2)^s |u(m xi1, t)|^2`` for increasing ``Ns``.

    A lower bound for the full Sobolev sum with cutoff ``N |xi1|``.
    """
    Ns = [int(n) for n in Ns]
    f = generator.bump.deriv(0, t)
    vv = float(np.dot(frame.v, frame.v))
    b = float(frame.b)
    base = float(np.dot(frame.xi0, frame.xi0))
    out = np.empty(len(Ns))
    running = 0.0
    lo = 0
    for i, N in enumerate(Ns):
        ms = np.arange(lo + 1, N + 1)
        if ms.size:
            a2 = np.abs(_law_array(generator.g, ms)) ** 2 * (abs(f) ** 2 * vv)
            running += 2.0 * float(np.sum((1.0 + b * ms.astype(float) ** 2) ** s * a2))
        lo = max(lo, N)
        out[i] = base + running
    return out


def endpoint_lower_bound(generator: GeneratorData, s: float, N: int) -> float:
    """``e^{-2} sum_{0<|m|<=N} (1 + m^2)^s |g(m)|^2``, the bound at ``t = T + 1``."""
    return math.exp(-2.0) * math.fsum((1.0 + m * m) ** s * abs(complex(generator.g(m))) ** 2
                                      for m in range(-N, N + 1) if m)


def initial_sobolev_exact(generator: GeneratorData, s: float, kmax: int) -> float:
    """``1 + 2 * 2^s + 2 sum_{2<=k<=kmax} (1 + k^2)^s |h(k)|^2`` for the default frame."""
    return 1.0 + 2.0 * 2.0 ** s + 2.0 * math.fsum(
        (1.0 + k * k) ** s * abs(complex(generator.h(k))) ** 2 for k in range(2, kmax + 1))


# convergence classification ---------------------------------------------

class Classification(str, enum.Enum):
    CONVERGENT = "CONVERGENT"
    DIVERGENT = "DIVERGENT"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass
class SeriesVerdict:
    classification: Classification
    block_ratios: List[float]
    partial_ratios: List[float]
    levels: List[int] = field(default_factory=list)

    @property
    def last_ratio(self) -> float:
        return self.partial_ratios[-1] if self.partial_ratios else float("nan")


def _logsumexp(a: np.ndarray) -> float:
    if a.size == 0:
        return -math.inf
    m = float(np.max(a))
    if m == -math.inf:
        return -math.inf
    return m + math.log(float(np.sum(np.exp(a - m))))


def classify_dyadic(log_head: float, log_blocks: Sequence[float], levels: Sequence[int],
                    window: int = 3, grow_tol: float = 1e-3, decay_max: float = 0.99
                    ) -> SeriesVerdict:
    """Decide convergence of a positive series from its dyadic block sums.

    ``log_blocks[j]`` is the log of the sum over the ``j``-th dyadic block and
    ``log_head`` the log of everything before the first block.  Over the last
    ``window`` doublings: block ratios all ``>= 1 - grow_tol`` means the
    blocks do not decay (DIVERGENT); all ``<= decay_max`` means the partial-sum
    increments shrink geometrically (CONVERGENT); anything else is flagged.
    """
    lb = np.asarray(log_blocks, dtype=float)
    ratios = []
    for a, b in zip(lb, lb[1:]):
        if b == -math.inf:
            ratios.append(0.0)
        elif a == -math.inf:
            ratios.append(math.inf)
        else:
            d = b - a
            ratios.append(math.exp(d) if d < 700 else math.inf)
    logS = np.logaddexp.accumulate(np.concatenate([[log_head], lb]))
    partial = []
    for a, b in zip(logS[1:], logS[2:]):
        d = b - a
        partial.append(math.exp(d) if d < 700 else math.inf)
    tail = ratios[-window:]
    if len(tail) < window:
        verdict = Classification.INCONCLUSIVE
    elif all(r >= 1.0 - grow_tol for r in tail):
        verdict = Classification.DIVERGENT
    elif all(r <= decay_max for r in tail):
        verdict = Classification.CONVERGENT
    else:
        verdict = Classification.INCONCLUSIVE
    return SeriesVerdict(verdict, ratios, partial, list(levels))


def classify_terms(index: np.ndarray, log_terms: np.ndarray, N_max: int, **kw) -> SeriesVerdict:
    """Group ``log_terms`` (indexed by ``index >= 0``) into dyadic blocks ``(2^j, 2^{j+1}]``."""
    index = np.asarray(index)
    log_terms = np.asarray(log_terms, dtype=float)
    head = _logsumexp(log_terms[index <= 1])
    levels, blocks = [], []
    lo = 1
    # complete doublings only; a truncated last block would bias its ratio
    while 2 * lo <= N_max:
        hi = 2 * lo
        sel = (index > lo) & (index <= hi)
        blocks.append(_logsumexp(log_terms[sel]))
        levels.append(hi)
        lo = hi
    return classify_dyadic(head, blocks, levels, **kw)


def axis_log_terms(generator: GeneratorData, frame: LatticeFrame, s: float, k_max: int):
    """``(|k|, log w_k |u(k eta0)|^2)`` with the +-k pair merged; valid while f vanishes."""
    e2 = float(np.dot(frame.eta0, frame.eta0))
    vv = float(np.dot(frame.v, frame.v))
    ks = np.arange(2, k_max + 1)
    h2 = np.abs(_law_array(generator.h, ks)) ** 2
    with np.errstate(divide="ignore"):
        lt = math.log(2.0 * vv) + s * np.log1p(ks * ks * e2) + np.log(h2)
    head = [math.log(float(np.dot(frame.xi0, frame.xi0))),
            math.log(2.0 * float(frame.b)) + s * math.log1p(e2)]
    return np.concatenate([[0, 1], ks]), np.concatenate([head, lt])


def slice_log_terms(generator: GeneratorData, frame: LatticeFrame, s: float, t: float, m_max: int):
    """``(m, log w_m |u(m xi1, t)|^2)`` on the transversal slice, +-m merged."""
    f = abs(generator.bump.deriv(0, t))
    ms = np.arange(1, m_max + 1)
    g2 = np.abs(_law_array(generator.g, ms)) ** 2
    vv = float(np.dot(frame.v, frame.v))
    with np.errstate(divide="ignore"):
        lt = (math.log(2.0 * vv) + 2.0 * (math.log(f) if f > 0 else -math.inf)
              + s * np.log1p(float(frame.b) * ms * ms) + np.log(g2))
    return np.concatenate([[0], ms]), np.concatenate([[math.log(float(np.dot(frame.xi0, frame.xi0)))], lt])


def classify_sobolev(generator: GeneratorData, frame: LatticeFrame, s: float, t: float,
                     N_max: int, **kw) -> SeriesVerdict:
    """Axis series while the bump is off (the full norm), transversal slice otherwise (a lower bound)."""
    if generator.bump.vanishes_at(t):
        idx, lt = axis_log_terms(generator, frame, s, N_max)
    else:
        idx, lt = slice_log_terms(generator, frame, s, t, N_max)
    return classify_terms(idx, lt, N_max, **kw)


def partial_sum_ratios(values: Sequence[float]) -> List[float]:
    v = list(values)
    return [b / a for a, b in zip(v, v[1:])]


@dataclass
class SpectrumReport:
    t: float
    alpha: Optional[float]
    qs: List[float]
    fits: Dict[float, DqFit]
    predicted: Dict[float, Optional[float]]
    sobolev: List[tuple] = field(default_factory=list)

    def dq_rows(self) -> List[dict]:
        rows = []
        for q in self.qs:
            fit = self.fits[q]
            pred = self.predicted.get(q)
            rows.append({"t": self.t, "q": q, "fitted": fit.slope, "predicted": pred,
                         "abs_error": None if pred is None else abs(fit.slope - pred),
                         "residual": fit.residual})
        return rows

    def entropy_rows(self) -> List[dict]:
        return [{"t": self.t, "q": q, "N": n, "H": h}
                for q in self.qs for n, h in zip(self.fits[q].Ns, self.fits[q].H)]

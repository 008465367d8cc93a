"""Dormand-Prince 5(4) with a PI step-size controller.

Works on arbitrary (complex) numpy arrays.  Output is produced by landing
steps exactly on the requested sample times, so no dense output is needed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Sequence

import numpy as np

# Butcher tableau (Hairer, Norsett & Wanner, table 5.2)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

ORDER = 5


class IntegrationError(RuntimeError):
    """Step size underflow or step budget exhausted."""


@dataclass
class IntegratorStats:
    steps: int = 0
    rejected: int = 0
    nfev: int = 0
    h_min: float = float("inf")
    h_max: float = 0.0


@dataclass
class Trajectory:
    times: List[float] = field(default_factory=list)
    states: List[np.ndarray] = field(default_factory=list)
    stats: IntegratorStats = field(default_factory=IntegratorStats)
    rtol: float = 0.0
    atol: float = 0.0

    def at(self, t: float) -> np.ndarray:
        for tt, y in zip(self.times, self.states):
            if tt == t:
                return y
        raise KeyError(f"time {t} was not sampled")


def _err_norm(err, y0, y1, rtol, atol):
    # max norm: an RMS over many identically-zero components would dilute the error
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.max(np.abs(err) / scale))


def dopri5(fun: Callable, y0: np.ndarray, t_span: Sequence[float], t_eval: Sequence[float] = (),
           rtol: float = 1e-10, atol: float = 1e-10, h0: float = 0.0,
           max_steps: int = 1_000_000, beta: float = 0.04, safety: float = 0.9) -> Trajectory:
    """Integrate ``y' = fun(t, y)`` from ``t_span[0]`` to ``t_span[1]``.

    ``t_eval`` lists sample times (the endpoints are always included).  The
    controller is the PI rule ``h_new = h * safety * err^-(1/5 - 0.75 beta) * err_old^beta``.
    """
    if rtol <= 0 or atol <= 0:
        raise ValueError("tolerances must be positive")
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t1 < t0:
        raise ValueError("only forward integration is supported")
    samples = sorted({t0, t1, *(float(t) for t in t_eval if t0 <= t <= t1)})
    y = np.array(y0, dtype=complex if np.iscomplexobj(y0) else float, copy=True)
    traj = Trajectory(rtol=rtol, atol=atol)
    stats = traj.stats
    traj.times.append(t0)
    traj.states.append(y.copy())
    if t1 == t0:
        return traj

    t = t0
    k1 = fun(t, y)
    stats.nfev += 1
    if h0 <= 0:
        d0 = np.linalg.norm(y) / np.sqrt(y.size) + 1e-300
        d1 = np.linalg.norm(k1) / np.sqrt(y.size) + 1e-300
        h0 = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6
        h0 = min(h0, (t1 - t0))
    h = h0
    expo = 1.0 / ORDER - 0.75 * beta
    err_old = 1e-4
    next_idx = 1
    min_h = 16 * np.finfo(float).eps

    while next_idx < len(samples):
        if stats.steps + stats.rejected >= max_steps:
            raise IntegrationError(f"step budget {max_steps} exhausted at t={t}")
        target = samples[next_idx]
        land = False
        h_free = h
        if t + h >= target - 1e-14 * max(1.0, abs(target)):
            h = target - t
            land = True
            if h <= min_h * max(1.0, abs(t)):
                # remainder below resolution: snap onto the sample time
                t = target
                traj.times.append(t)
                traj.states.append(y.copy())
                next_idx += 1
                h = h_free
                continue
        if h < min_h * max(1.0, abs(t)):
            raise IntegrationError(f"step size underflow (h={h:.3e}) at t={t}")

        ks = [k1]
        for i in range(1, 7):
            yi = y + h * sum(a * kk for a, kk in zip(_A[i], ks) if a)
            ks.append(fun(t + _C[i] * h, yi))
        stats.nfev += 6
        y_new = yi  # FSAL: stage 7 is evaluated at the 5th-order solution
        err = h * sum(e * kk for e, kk in zip(_E, ks) if e)
        en = _err_norm(err, y, y_new, rtol, atol)

        if en <= 1.0:
            t = target if land else t + h
            y = y_new
            k1 = ks[6]
            stats.steps += 1
            stats.h_min = min(stats.h_min, h)
            stats.h_max = max(stats.h_max, h)
            en = max(en, 1e-10)
            fac = safety * en ** (-expo) * err_old ** beta
            fac = min(5.0, max(0.2, fac))
            err_old = en
            if land:
                traj.times.append(t)
                traj.states.append(y.copy())
                next_idx += 1
            h = (max(h, h_free) if land else h) * fac
        else:
            stats.rejected += 1
            h = h * max(0.2, safety * en ** (-1.0 / ORDER))
    return traj

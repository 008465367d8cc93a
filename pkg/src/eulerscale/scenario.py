"""Scenario orchestration: build, verify, analyze, export.

Each step appends named checks to the result and writes its CSV; the run
fails (exit status 1) iff any check fails.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from . import complex2d as c2d
from .bump import BumpSpec, HalfBump, bump_from_dict
from .config import ScenarioConfig, serialize
from .construction import (FourierSolution3D, GeneratorData, LatticeFrame, build_solution,
                           calibrate_initial_data, law_from_dict)
from .export import write_csv, write_json, modes_document
from .multifractal import (Classification, classify_sobolev, dyadic, fit_Dq, predicted_Dq,
                           sobolev_norm, sobolev_slice_bound)
from .verify import (boxed_convolution, branch_contrast, check_structure, galerkin_integrate,
                     initial_modes, reduced_rhs, residual_report, vanishes_identically)

log = logging.getLogger(__name__)


@dataclass
class Check:
    name: str
    passed: bool
    value: Optional[float] = None
    threshold: Optional[float] = None
    detail: str = ""


@dataclass
class ScenarioResult:
    name: str
    checks: List[Check] = field(default_factory=list)
    files: List[str] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, passed, value=None, threshold=None, detail=""):
        self.checks.append(Check(name, bool(passed), value, threshold, detail))

    def summary(self) -> dict:
        return {"scenario": self.name, "ok": self.ok,
                "checks": [c.__dict__ for c in self.checks], "files": sorted(self.files)}


# config -> objects ---------------------------------------------------------

class _NormLaw:
    """Amplitude law applied to the Euclidean length of a lattice vector."""

    def __init__(self, law):
        self.law = law

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        r = np.linalg.norm(xi, axis=-1)
        if np.ndim(r) == 0:
            return self.law(float(r))
        return self.law.array(r)


def frame_of(cfg: ScenarioConfig) -> LatticeFrame:
    return LatticeFrame(**{k: tuple(v) for k, v in cfg.frame.items()})


def generator_of(cfg: ScenarioConfig) -> GeneratorData:
    frame = frame_of(cfg)
    bump = bump_from_dict(cfg.bump)
    if cfg.calibrate is not None:
        f1 = _NormLaw(law_from_dict(cfg.calibrate["f1"]))
        f2 = _NormLaw(law_from_dict(cfg.calibrate["f2"]))
        return calibrate_initial_data(f1, f2, frame, bump)
    return GeneratorData(h=law_from_dict(cfg.h), g=law_from_dict(cfg.g), bump=bump)


def g_exponent(cfg: ScenarioConfig) -> Optional[float]:
    """Decay exponent of ``|g(m)|`` when it is a pure power law."""
    if cfg.calibrate is not None:
        f2 = cfg.calibrate["f2"]
        return f2["alpha"] if f2["law"] == "power" else None
    return cfg.g["alpha"] if cfg.g["law"] == "power" else None


def _h_decays(cfg: ScenarioConfig) -> bool:
    law = (cfg.calibrate or {}).get("f1") or cfg.h
    return law["law"] in ("zero", "table") or (law["law"] == "exp" and law["rate"] > 0)


def reference_time(bump: BumpSpec) -> float:
    """Where the bump is switched on: ``T + 1`` for a half bump, else the first window midpoint."""
    if isinstance(bump, HalfBump):
        return bump.T + 1.0
    a, b = bump.support()[0]
    return 0.5 * (a + b)


def default_times(bump: BumpSpec) -> List[float]:
    if isinstance(bump, HalfBump):
        T = bump.T
        return [0.0, T / 2, T, T + 0.5, T + 1.0, T + 2.0]
    pts = [0.0]
    for a, b in bump.support():
        pts += [a, 0.5 * (a + b), b]
    return pts + [pts[-1] + 1.0]


def build_from_config(cfg: ScenarioConfig, workers: int = 1) -> FourierSolution3D:
    return build_solution(frame_of(cfg), generator_of(cfg), cfg.box["K"], cfg.box["M"],
                          exact=cfg.precision == "exact", workers=workers)


# steps -----------------------------------------------------------------

def _step_structure(ctx):
    rep = check_structure(ctx.solution)
    ctx.result.add("structure", rep.ok, detail=rep.reason or f"{rep.checked} modes checked")


def _step_residuals(ctx):
    rep = residual_report(ctx.numeric, ctx.times)
    rows = [(r.k, r.m, r.t, r.residual, r.relative_residual) for r in rep.rows]
    ctx.write_csv("residuals.csv", ("k", "m", "t", "residual", "relative_residual"), rows)
    ctx.result.add("residual", rep.max_relative <= ctx.cfg.residual_tol, rep.max_relative,
                   ctx.cfg.residual_tol, rep.interior)


def _step_oracle(ctx):
    sol = ctx.numeric
    xi = sol.wavevector_grid()
    worst = 0.0
    for t in ctx.times:
        U = sol.evaluate_modes(t)
        brute = boxed_convolution(U, xi)
        red = reduced_rhs(sol, U)
        ok = np.isfinite(red)
        worst = max(worst, float(np.max(np.abs(brute[ok] - red[ok]))))
    ctx.result.add("oracle_equivalence", worst <= 1e-12, worst, 1e-12,
                   "brute-force boxed convolution against the 3-term reduced form")


def _step_calibration(ctx):
    sol, gen = ctx.numeric, ctx.generator
    t = reference_time(gen.bump)
    f2 = _NormLaw(law_from_dict(ctx.cfg.calibrate["f2"]))
    scale = math.e * gen.bump(t)
    rows, worst = [], 0.0
    for m in range(1, sol.M + 1):
        val = float(np.linalg.norm(sol.mode(0, m).evaluate(t, gen.bump)))
        target = float(f2(sol.wavevector(0, m))) * scale
        rel = abs(val - target) / target
        worst = max(worst, rel)
        rows.append((m, t, target, val, rel))
    ctx.write_csv("calibration.csv", ("m", "t", "target", "value", "relative_error"), rows)
    ctx.result.add("endpoint_calibration", worst <= 1e-12, worst, 1e-12,
                   "|u(m xi1, t)| against f2(m xi1)")


def _step_dq(ctx):
    a = ctx.cfg.analysis
    alpha = a.alpha if a.alpha is not None else g_exponent(ctx.cfg)
    if alpha is not None and not 0 < alpha < 0.5:
        alpha = None
    Ns = dyadic(*a.dyadic)
    dq_rows, h_rows = [], []
    for q in a.q:
        fit = fit_Dq(ctx.generator, q, ctx.t_analysis, Ns, ctx.frame)
        pred = predicted_Dq(alpha, q) if alpha is not None else None
        err = None if pred is None else abs(fit.slope - pred)
        dq_rows.append((ctx.t_analysis, q, fit.slope, pred, err, fit.residual))
        h_rows += [(ctx.t_analysis, q, n, h) for n, h in zip(fit.Ns, fit.H)]
        if pred is not None:
            ctx.result.add(f"dq_q{q:g}", err <= a.tolerance, err, a.tolerance,
                           f"fitted {fit.slope!r} predicted {pred!r}")
    ctx.write_csv("entropy.csv", ("t", "q", "N", "H"), h_rows)
    ctx.write_csv("dq.csv", ("t", "q", "fitted", "predicted", "abs_error", "residual"), dq_rows)


def _step_sobolev(ctx):
    a, gen, frame = ctx.cfg.analysis, ctx.generator, ctx.frame
    alpha = g_exponent(ctx.cfg)
    Ns = dyadic(0, int(math.log2(a.N_max)))
    rows, verdict_rows = [], []
    for t in (a.sobolev_times or [ctx.t_analysis]):
        off = gen.bump.vanishes_at(t)
        for s in a.s:
            if off:
                vals = [sobolev_norm(ctx.numeric, s, t, n * math.sqrt(np.dot(frame.eta0, frame.eta0)))
                        for n in Ns]
            else:
                vals = list(sobolev_slice_bound(gen, frame, s, t, Ns))
            rows += [(t, s, n, v) for n, v in zip(Ns, vals)]
            verdict = classify_sobolev(gen, frame, s, t, a.N_max)
            expected = None
            if off and _h_decays(ctx.cfg):
                expected = Classification.CONVERGENT
            elif not off and alpha is not None and s >= alpha - 0.5:
                expected = Classification.DIVERGENT
            verdict_rows.append((t, s, a.N_max, "axis" if off else "slice",
                                 verdict.classification, expected, verdict.last_ratio))
            if expected is not None:
                ctx.result.add(f"sobolev_class_t{t:g}_s{s:g}", verdict.classification == expected,
                               detail=f"{verdict.classification.value} (expected {expected.value})")
            expo = None if alpha is None else 2 * s + 1 - 2 * alpha
            if not off and expo is not None and expo > 0 and a.N_max >= 2 ** 11:
                target = 2.0 ** expo
                ratios = [vals[i + 1] / vals[i] for i in range(len(Ns) - 1) if Ns[i] >= 2 ** 10]
                dev = max(abs(r / target - 1.0) for r in ratios)
                ctx.result.add(f"sobolev_ratio_t{t:g}_s{s:g}", dev <= a.ratio_tolerance, dev,
                               a.ratio_tolerance, f"dyadic ratios against 2^{expo:g}")
    ctx.write_csv("sobolev.csv", ("t", "s", "N", "partial_sum"), rows)
    ctx.write_csv("sobolev_class.csv", ("t", "s", "N_max", "scope", "classification",
                                        "expected", "last_ratio"), verdict_rows)


def _step_regain(ctx):
    sol, gen = ctx.numeric, ctx.generator
    rows = []
    seeded = [m for m in range(1, sol.M + 1) if abs(complex(gen.g(m))) > 0]
    for t in ctx.times:
        structural = vanishes_identically(ctx.solution, t)
        U = sol.evaluate_modes(t)
        off = np.abs(U[:, [j for j in range(2 * sol.M + 1) if j != sol.M]])
        max_off = float(off.max())
        seed_min = min((float(np.linalg.norm(U[sol.K, sol.M + m])) for m in seeded), default=None)
        expected_zero = gen.bump.vanishes_at(t)
        rows.append((t, gen.bump(t), structural, max_off, seed_min))
        if expected_zero:
            ctx.result.add(f"regain_zero_t{t:g}", structural and max_off == 0.0, max_off, 0.0,
                           "all off-axis modes structurally and numerically zero")
        elif seeded:
            ctx.result.add(f"regain_active_t{t:g}", (not structural) and seed_min > 0.0,
                           seed_min, 0.0, "seeded columns nonzero")
    ctx.write_csv("regain.csv", ("t", "f", "structurally_zero", "max_off_axis", "min_seeded"), rows)


def _step_contrast(ctx):
    gc = ctx.cfg.galerkin
    sol, gen = ctx.numeric, ctx.generator
    t_end = gc.t_end if gc.t_end is not None else reference_time(gen.bump)
    U0, xi = initial_modes(sol, gc.K, gc.M)
    t0 = time.perf_counter()
    run = galerkin_integrate(U0, xi, t_end, tol=gc.tol)
    ctx.result.timings["galerkin"] = time.perf_counter() - t0
    rows = branch_contrast(sol, t_end, gc.K, gc.M, run=run)
    ctx.write_csv("branch_contrast.csv",
                  ("k", "m", "t", "symbolic_norm", "galerkin_norm", "discrepancy"),
                  [(r.k, r.m, r.t, r.symbolic_norm, r.galerkin_norm, r.discrepancy) for r in rows])
    G = run.at(t_end).modes
    S = sol.evaluate_modes(t_end)[sol.K - gc.K: sol.K + gc.K + 1, sol.M - gc.M: sol.M + gc.M + 1]
    off = max(float(np.linalg.norm(G[i, j])) for i in range(2 * gc.K + 1)
              for j in range(2 * gc.M + 1) if j != gc.M)
    axis = float(np.max(np.linalg.norm(G[:, gc.M] - S[:, gc.M], axis=-1)))
    ctx.result.add("galerkin_off_axis", off <= gc.threshold, off, gc.threshold)
    ctx.result.add("galerkin_axis_phase", axis <= gc.threshold, axis, gc.threshold)
    if abs(complex(gen.g(1))) > 0 and gen.bump(t_end) != 0:
        v01 = float(np.linalg.norm(S[gc.K, gc.M + 1]))
        ctx.result.add("symbolic_branch_active", v01 > 0, v01, 0.0, "|v_{0,1}| at the probe time")


def _step_complex2d(ctx):
    c = ctx.cfg.complex2d
    sol = c2d.build_complex_solution(tuple(c.v), tuple(c.xi0), c.gamma, alpha_exp=c.alpha_exp)
    T = sol.T
    rows = []
    for ratio, s in c.cases:
        t = T if ratio == 1.0 else ratio * T
        verdict = c2d.classify_blowup(sol, s, t, c.N_max)
        if ratio < 1.0:
            expected = Classification.CONVERGENT
        elif ratio > 1.0:
            expected = Classification.DIVERGENT
        else:
            expected = (Classification.DIVERGENT if s >= c.alpha_exp - 0.5
                        else Classification.CONVERGENT)
        rows.append((s, t, c.N_max, verdict.classification, verdict.last_ratio, ratio, expected))
        ctx.result.add(f"blowup_t{ratio:g}T_s{s:g}", verdict.classification == expected,
                       detail=f"{verdict.classification.value} (expected {expected.value})")
    ctx.write_csv("blowup.csv", ("s", "t", "N_max", "classification", "last_ratio", "t_over_T",
                                 "expected"), rows)
    e_rows = [(r * T, c.energy_N, c2d.energy(sol, r * T, c.energy_N)) for r in c.energy_t_over_T]
    ctx.write_csv("energy2d.csv", ("t", "N", "partial_energy"), e_rows)
    es = [e for _, _, e in e_rows]
    ctx.result.add("energy2d_monotone", all(b > a for a, b in zip(es, es[1:])))
    d = sol.direction
    res = max(c2d.residual_2d(sol, tuple(k * d), t * T, c.box, relative=True)
              for k in range(-(c.box // 2), c.box // 2 + 1) for t in (0.0, 0.5, 1.0))
    ctx.result.add("residual_2d", res <= 1e-9, res, 1e-9)


STEP_FUNCS: Dict[str, Callable] = {
    "structure": _step_structure, "residuals": _step_residuals, "oracle": _step_oracle,
    "calibration": _step_calibration, "dq": _step_dq, "sobolev": _step_sobolev,
    "regain": _step_regain, "contrast": _step_contrast, "complex2d": _step_complex2d,
}
NEEDS_3D = {"structure", "residuals", "oracle", "calibration", "sobolev", "regain", "contrast"}


class _Context:
    def __init__(self, cfg: ScenarioConfig, out: Path, result: ScenarioResult, workers: int):
        self.cfg, self.out, self.result, self.workers = cfg, out, result, workers
        self.frame = frame_of(cfg)
        self.generator = generator_of(cfg)
        self.times = list(cfg.times) or default_times(self.generator.bump)
        t = cfg.analysis.t
        self.t_analysis = t if t is not None else reference_time(self.generator.bump)
        self._solution = None

    @property
    def solution(self) -> FourierSolution3D:
        if self._solution is None:
            t0 = time.perf_counter()
            self._solution = build_from_config(self.cfg, self.workers)
            self.result.timings["build"] = time.perf_counter() - t0
            self._numeric = (self._solution.to_double() if self._solution.exact
                             else self._solution)
        return self._solution

    @property
    def numeric(self) -> FourierSolution3D:
        self.solution
        return self._numeric

    def write_csv(self, name, header, rows):
        self.result.files.append(str(write_csv(self.out / name, header, rows).name))


def run_scenario(cfg: ScenarioConfig, out=None, steps=None, workers: int = 1,
                 write_modes: bool = True) -> ScenarioResult:
    """Run the configured steps; files land in ``out`` (default: ``cfg.output``)."""
    out = Path(out if out is not None else cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    result = ScenarioResult(cfg.name)
    ctx = _Context(cfg, out, result, workers)
    steps = list(cfg.steps if steps is None else steps)
    (out / "scenario.yaml").write_text(serialize(cfg), encoding="utf-8")
    result.files.append("scenario.yaml")
    for step in steps:
        t0 = time.perf_counter()
        log.info("step %s", step)
        STEP_FUNCS[step](ctx)
        result.timings[step] = time.perf_counter() - t0
    if write_modes and any(s in NEEDS_3D for s in steps):
        write_json(out / "modes.json", modes_document(ctx.solution))
        result.files.append("modes.json")
    write_json(out / "summary.json", result.summary())
    result.files.append("summary.json")
    return result

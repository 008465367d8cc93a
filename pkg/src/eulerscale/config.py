"""Scenario configuration: YAML in, validated dataclasses out.

Every error carries the line of the offending key.  ``serialize`` writes the
canonical form (all defaults filled in), so ``parse_config(serialize(c)) == c``.
"""
from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import yaml

from .bump import bump_from_dict
from .construction import FrameError, LatticeFrame

STEPS = ("structure", "residuals", "oracle", "calibration", "dq", "sobolev", "regain",
         "contrast", "complex2d")
LAWS = ("zero", "power", "exp", "table")


class ConfigError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.message = message
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


# line tracking -----------------------------------------------------------

class _Loader(yaml.SafeLoader):
    """Safe loader that also reads exponent floats without a dot (``1e-10``)."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"""^[-+]?(?:[0-9][0-9_]*)(?:\.[0-9_]*)?[eE][-+]?[0-9]+$"""),
    list("-+0123456789"))


def _load(text: str) -> Tuple[Any, Dict[tuple, int]]:
    try:
        loader = _Loader(text)
        try:
            node = loader.get_single_node()
            data = loader.construct_document(node) if node is not None else {}
        finally:
            loader.dispose()
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        raise ConfigError(f"syntax error: {exc.problem}", mark.line + 1 if mark else None)
    except yaml.YAMLError as exc:
        raise ConfigError(f"syntax error: {exc}")
    lines: Dict[tuple, int] = {}

    def walk(n, path):
        lines.setdefault(path, n.start_mark.line + 1)
        if isinstance(n, yaml.MappingNode):
            for kn, vn in n.value:
                lines[path + (kn.value,)] = kn.start_mark.line + 1
                walk(vn, path + (kn.value,))
        elif isinstance(n, yaml.SequenceNode):
            for i, vn in enumerate(n.value):
                walk(vn, path + (i,))

    if node is not None:
        walk(node, ())
    return data, lines


class _Ctx:
    def __init__(self, lines):
        self.lines = lines

    def line(self, path):
        path = tuple(path)
        while path and path not in self.lines:
            path = path[:-1]
        return self.lines.get(path)

    def fail(self, path, msg):
        raise ConfigError(f"{'.'.join(map(str, path)) or '<root>'}: {msg}", self.line(path))

    def mapping(self, obj, path, allowed):
        if obj is None:
            return {}
        if not isinstance(obj, dict):
            self.fail(path, "expected a mapping")
        for key in obj:
            if key not in allowed:
                self.fail(tuple(path) + (key,), f"unknown field {key!r}")
        return obj

    def number(self, obj, path, lo=None, hi=None, integer=False, open_lo=False):
        if isinstance(obj, bool) or not isinstance(obj, (int, float)):
            self.fail(path, "expected a number")
        if integer and not (isinstance(obj, int) or float(obj).is_integer()):
            self.fail(path, "expected an integer")
        x = int(obj) if integer else float(obj)
        if not integer and not math.isfinite(x):
            self.fail(path, "expected a finite number")
        if lo is not None and (x <= lo if open_lo else x < lo):
            self.fail(path, f"must be {'>' if open_lo else '>='} {lo}")
        if hi is not None and x > hi:
            self.fail(path, f"must be <= {hi}")
        return x

    def numbers(self, obj, path, **kw):
        if not isinstance(obj, list):
            self.fail(path, "expected a list")
        return [self.number(x, tuple(path) + (i,), **kw) for i, x in enumerate(obj)]

    def vector(self, obj, path, n):
        vals = self.numbers(obj, path, integer=True)
        if len(vals) != n:
            self.fail(path, f"expected {n} integers")
        return vals


# sections ----------------------------------------------------------------

@dataclass
class AnalysisConfig:
    t: Optional[float] = None          # None: T + 1 for a half bump
    alpha: Optional[float] = None      # None: taken from a power-law g
    q: List[float] = field(default_factory=lambda: [2.0, 3.0, 4.0])
    dyadic: List[int] = field(default_factory=lambda: [14, 24])
    s: List[float] = field(default_factory=lambda: [1.0])
    sobolev_times: List[float] = field(default_factory=list)  # empty: [t]
    N_max: int = 1 << 16
    tolerance: float = 0.05
    ratio_tolerance: float = 0.1


@dataclass
class GalerkinConfig:
    K: int = 8
    M: int = 4
    tol: float = 1e-10
    t_end: Optional[float] = None      # None: T + 1
    threshold: float = 1e-8


@dataclass
class Complex2DConfig:
    v: List[int] = field(default_factory=lambda: [1, 0])
    xi0: List[int] = field(default_factory=lambda: [0, 1])
    gamma: float = 1.0
    alpha_exp: float = 0.75
    N_max: int = 100_000
    cases: List[List[float]] = field(default_factory=lambda: [[0.9, 5.0], [1.1, -5.0],
                                                              [1.0, 0.3], [1.0, 0.2]])
    energy_t_over_T: List[float] = field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])
    energy_N: int = 10
    box: int = 6


@dataclass
class ScenarioConfig:
    name: str = "scenario"
    precision: str = "double"
    output: str = "out"
    frame: Dict[str, List[int]] = field(default_factory=lambda: LatticeFrame().to_dict())
    bump: Dict[str, Any] = field(default_factory=lambda: {"kind": "half", "T": 1.0})
    h: Dict[str, Any] = field(default_factory=lambda: {"law": "zero"})
    g: Dict[str, Any] = field(default_factory=lambda: {"law": "zero"})
    calibrate: Optional[Dict[str, Dict[str, Any]]] = None
    box: Dict[str, int] = field(default_factory=lambda: {"K": 8, "M": 8})
    times: List[float] = field(default_factory=list)
    steps: List[str] = field(default_factory=lambda: ["structure", "residuals"])
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    galerkin: GalerkinConfig = field(default_factory=GalerkinConfig)
    complex2d: Optional[Complex2DConfig] = None
    residual_tol: float = 1e-8

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["calibrate"] is None:
            del d["calibrate"]
        if d["complex2d"] is None:
            del d["complex2d"]
        return d


_TOP = ("name", "precision", "output", "frame", "bump", "h", "g", "calibrate", "box", "times",
        "steps", "analysis", "galerkin", "complex2d", "residual_tol")


def _law(ctx: _Ctx, obj, path) -> dict:
    obj = ctx.mapping(obj, path, ("law", "amplitude", "alpha", "rate", "values"))
    law = obj.get("law", "zero")
    if law not in LAWS:
        ctx.fail(tuple(path) + ("law",), f"law must be one of {', '.join(LAWS)}")
    allowed = {"zero": (), "power": ("amplitude", "alpha"), "exp": ("amplitude", "rate"),
               "table": ("values",)}[law]
    for key in obj:
        if key != "law" and key not in allowed:
            ctx.fail(tuple(path) + (key,), f"field {key!r} does not apply to law {law!r}")
    out: Dict[str, Any] = {"law": law}
    if law == "power":
        out["amplitude"] = ctx.number(obj.get("amplitude", 1.0), tuple(path) + ("amplitude",))
        out["alpha"] = ctx.number(obj.get("alpha", 0.3), tuple(path) + ("alpha",))
    elif law == "exp":
        out["amplitude"] = ctx.number(obj.get("amplitude", 1.0), tuple(path) + ("amplitude",))
        out["rate"] = ctx.number(obj.get("rate", 1.0), tuple(path) + ("rate",), lo=0.0)
    elif law == "table":
        vals = obj.get("values")
        if not isinstance(vals, dict) or not vals:
            ctx.fail(tuple(path) + ("values",), "expected a nonempty mapping index -> value")
        table = {}
        for k, v in vals.items():
            p = tuple(path) + ("values", k)
            ki = ctx.number(k, p, integer=True, lo=1)
            if isinstance(v, list):
                re, im = ctx.numbers(v, p)
                table[str(ki)] = [re, im]
            else:
                table[str(ki)] = ctx.number(v, p)
        out["values"] = dict(sorted(table.items(), key=lambda kv: int(kv[0])))
    return out


def _bump(ctx: _Ctx, obj, path) -> dict:
    obj = ctx.mapping(obj, path, ("kind", "T", "T1", "T2", "intervals", "max_order"))
    kind = obj.get("kind", "half")
    out: Dict[str, Any] = {"kind": kind}
    if kind == "half":
        extra = {"T1", "T2", "intervals"} & set(obj)
        out["T"] = ctx.number(obj.get("T", 1.0), path + ("T",))
    elif kind == "compact":
        extra = {"T", "intervals"} & set(obj)
        out["T1"] = ctx.number(obj.get("T1", 1.0), path + ("T1",))
        out["T2"] = ctx.number(obj.get("T2", 2.0), path + ("T2",))
        if not out["T1"] < out["T2"]:
            ctx.fail(path + ("T2",), "compact bump needs T1 < T2")
    elif kind == "multi":
        extra = {"T", "T1", "T2"} & set(obj)
        raw = obj.get("intervals")
        if not isinstance(raw, list) or not raw:
            ctx.fail(path + ("intervals",), "expected a nonempty list of [T1, T2] pairs")
        ivs = []
        for i, iv in enumerate(raw):
            p = path + ("intervals", i)
            pair = ctx.numbers(iv, p)
            if len(pair) != 2 or not pair[0] < pair[1]:
                ctx.fail(p, "each interval must be [T1, T2] with T1 < T2")
            if ivs and pair[0] < ivs[-1][1]:
                ctx.fail(p, "intervals must be disjoint and increasing (overlap found)")
            ivs.append(pair)
        out["intervals"] = ivs
    else:
        ctx.fail(path + ("kind",), "kind must be half, compact or multi")
    if extra:
        ctx.fail(path + (sorted(extra)[0],), f"field does not apply to bump kind {kind!r}")
    if "max_order" in obj:
        out["max_order"] = ctx.number(obj["max_order"], path + ("max_order",), integer=True, lo=1)
    try:
        bump_from_dict(out)
    except ValueError as exc:
        ctx.fail(path, str(exc))
    return out


def _dataclass_section(ctx, cls, obj, path, spec):
    obj = ctx.mapping(obj, path, tuple(spec))
    kw = {}
    for key, check in spec.items():
        if key in obj and obj[key] is not None:
            kw[key] = check(obj[key], path + (key,))
    return cls(**kw)


def parse_config(text: str) -> ScenarioConfig:
    """Validate YAML (or JSON) scenario text; raise :class:`ConfigError` on the first problem."""
    data, lines = _load(text)
    ctx = _Ctx(lines)
    data = ctx.mapping(data, (), _TOP)
    cfg = ScenarioConfig()
    if "name" in data:
        if not isinstance(data["name"], str) or not data["name"]:
            ctx.fail(("name",), "expected a nonempty string")
        cfg.name = data["name"]
    if "output" in data:
        if not isinstance(data["output"], str):
            ctx.fail(("output",), "expected a path string")
        cfg.output = data["output"]
    if "precision" in data:
        if data["precision"] not in ("exact", "double"):
            ctx.fail(("precision",), "precision must be exact or double")
        cfg.precision = data["precision"]
    if "frame" in data:
        fr = ctx.mapping(data["frame"], ("frame",), ("v", "eta0", "xi0", "xi1"))
        vecs = dict(cfg.frame)
        for key in fr:
            vecs[key] = ctx.vector(fr[key], ("frame", key), 3)
        if "eta0" in fr and "xi0" not in fr:
            vecs["xi0"] = vecs["eta0"]
        try:
            LatticeFrame(**{k: tuple(v) for k, v in vecs.items()})
        except FrameError as exc:
            ctx.fail(("frame",), str(exc))
        cfg.frame = vecs
    if "bump" in data:
        cfg.bump = _bump(ctx, data["bump"], ("bump",))
    for key in ("h", "g"):
        if key in data:
            setattr(cfg, key, _law(ctx, data[key], (key,)))
    if data.get("calibrate") is not None:
        cal = ctx.mapping(data["calibrate"], ("calibrate",), ("f1", "f2"))
        cfg.calibrate = {k: _law(ctx, cal.get(k), ("calibrate", k)) for k in ("f1", "f2")}
    if "box" in data:
        box = ctx.mapping(data["box"], ("box",), ("K", "M"))
        cfg.box = {k: ctx.number(box.get(k, 8), ("box", k), integer=True, lo=1) for k in ("K", "M")}
    if "times" in data:
        cfg.times = ctx.numbers(data["times"], ("times",))
    if "steps" in data:
        if not isinstance(data["steps"], list):
            ctx.fail(("steps",), "expected a list")
        for i, s in enumerate(data["steps"]):
            if s not in STEPS:
                ctx.fail(("steps", i), f"unknown step {s!r}; choose from {', '.join(STEPS)}")
        cfg.steps = list(data["steps"])
    if "residual_tol" in data:
        cfg.residual_tol = ctx.number(data["residual_tol"], ("residual_tol",), lo=0.0, open_lo=True)

    def alpha_check(x, p):
        a = ctx.number(x, p)
        if not 0.0 < a < 0.5:
            ctx.fail(p, "α must lie in (0, 1/2)")
        return a

    def dyadic_check(x, p):
        if not isinstance(x, list) or len(x) != 2:
            ctx.fail(p, "expected [lo_exp, hi_exp]")
        lo, hi = ctx.numbers(x, p, integer=True, lo=0)
        if hi - lo < 3:
            ctx.fail(p, "the dyadic range needs at least four points")
        if hi > 30:
            ctx.fail(p, "hi_exp must be <= 30")
        return [lo, hi]

    def qs_check(x, p):
        qs = ctx.numbers(x, p)
        for i, q in enumerate(qs):
            if not q > 1:
                ctx.fail(p + (i,), "q must exceed 1")
        return qs

    pos = dict(lo=0.0, open_lo=True)
    cfg.analysis = _dataclass_section(ctx, AnalysisConfig, data.get("analysis"), ("analysis",), {
        "t": lambda x, p: ctx.number(x, p),
        "alpha": alpha_check,
        "q": qs_check,
        "dyadic": dyadic_check,
        "s": lambda x, p: ctx.numbers(x, p),
        "sobolev_times": lambda x, p: ctx.numbers(x, p),
        "N_max": lambda x, p: ctx.number(x, p, integer=True, lo=16),
        "tolerance": lambda x, p: ctx.number(x, p, **pos),
        "ratio_tolerance": lambda x, p: ctx.number(x, p, **pos),
    })
    cfg.galerkin = _dataclass_section(ctx, GalerkinConfig, data.get("galerkin"), ("galerkin",), {
        "K": lambda x, p: ctx.number(x, p, integer=True, lo=1),
        "M": lambda x, p: ctx.number(x, p, integer=True, lo=1),
        "tol": lambda x, p: ctx.number(x, p, **pos),
        "t_end": lambda x, p: ctx.number(x, p, **pos),
        "threshold": lambda x, p: ctx.number(x, p, **pos),
    })
    if "contrast" in cfg.steps and (cfg.galerkin.K > cfg.box["K"] or cfg.galerkin.M > cfg.box["M"]):
        ctx.fail(("galerkin",), "the Galerkin box must fit inside the construction box")
    if data.get("complex2d") is not None:
        def cases_check(x, p):
            if not isinstance(x, list):
                ctx.fail(p, "expected a list of [t_over_T, s] pairs")
            out = []
            for i, c in enumerate(x):
                pair = ctx.numbers(c, p + (i,))
                if len(pair) != 2 or pair[0] < 0:
                    ctx.fail(p + (i,), "each case is [t_over_T >= 0, s]")
                out.append(pair)
            return out

        c2 = _dataclass_section(ctx, Complex2DConfig, data["complex2d"], ("complex2d",), {
            "v": lambda x, p: ctx.vector(x, p, 2),
            "xi0": lambda x, p: ctx.vector(x, p, 2),
            "gamma": lambda x, p: ctx.number(x, p, **pos),
            "alpha_exp": lambda x, p: ctx.number(x, p, lo=0.5, open_lo=True),
            "N_max": lambda x, p: ctx.number(x, p, integer=True, lo=16),
            "cases": cases_check,
            "energy_t_over_T": lambda x, p: ctx.numbers(x, p),
            "energy_N": lambda x, p: ctx.number(x, p, integer=True, lo=1),
            "box": lambda x, p: ctx.number(x, p, integer=True, lo=1),
        })
        if not any(c2.v) or c2.v[0] * c2.xi0[0] + c2.v[1] * c2.xi0[1] != 0 or not any(c2.xi0):
            ctx.fail(("complex2d",), "need nonzero v and xi0 with xi0 . v = 0")
        cfg.complex2d = c2
    elif "complex2d" in cfg.steps:
        cfg.complex2d = Complex2DConfig()
    if "calibration" in cfg.steps and cfg.calibrate is None:
        ctx.fail(("steps",), "the calibration step needs a calibrate block")
    return cfg


def serialize(config: ScenarioConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=True, default_flow_style=None)


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


# presets -----------------------------------------------------------------

PRESETS: Dict[str, str] = {
    "theorem11": """
name: theorem11
box: {K: 16, M: 16}
calibrate:
  f1: {law: exp, rate: 1.0}
  f2: {law: power, alpha: 0.3}
times: [0.0, 0.5, 1.0, 1.5, 2.0, 3.0]
steps: [structure, residuals, oracle, calibration, contrast, sobolev]
analysis: {t: 2.0, s: [1.0], sobolev_times: [0.0, 2.0]}
""",
    "corollary22": """
name: corollary22
box: {K: 8, M: 8}
h: {law: exp, rate: 1.0}
g: {law: power, amplitude: 2.718281828459045, alpha: 0.3}
steps: [dq, sobolev]
analysis: {t: 2.0, alpha: 0.3, q: [2.0, 3.0, 4.0], dyadic: [14, 24], s: [1.0]}
""",
    "regain": """
name: regain
box: {K: 8, M: 8}
bump: {kind: compact, T1: 2.0, T2: 3.0}
h: {law: exp, rate: 1.0}
g: {law: power, amplitude: 1.0, alpha: 0.3}
times: [1.0, 2.5, 4.0]
steps: [structure, regain, residuals, sobolev]
analysis: {t: 2.5, s: [1.0], sobolev_times: [1.0, 2.5, 4.0]}
""",
    "multi-window": """
name: multi-window
box: {K: 6, M: 6}
bump: {kind: multi, intervals: [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]}
h: {law: exp, rate: 1.0}
g: {law: power, amplitude: 1.0, alpha: 0.3}
times: [0.5, 1.5, 2.5, 3.5, 4.5, 5.5, 6.5]
steps: [regain, sobolev]
analysis: {t: 1.5, s: [1.0], sobolev_times: [0.5, 1.5, 2.5, 3.5, 4.5, 5.5, 6.5]}
""",
    "complex2d": """
name: complex2d
steps: [complex2d]
complex2d:
  v: [1, 0]
  xi0: [0, 1]
  gamma: 1.0
  alpha_exp: 0.75
  N_max: 100000
  cases: [[0.9, 5.0], [1.1, -5.0], [1.0, 0.3], [1.0, 0.2], [1.0, 0.25], [0.5, 0.0], [2.0, 0.0]]
""",
}


def preset(name: str) -> ScenarioConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    return parse_config(PRESETS[name])

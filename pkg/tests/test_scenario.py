import csv
import json

import pytest

from eulerscale.config import parse_config, preset
from eulerscale.scenario import reference_time, run_scenario
from eulerscale.bump import bump_from_dict


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def dimension_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("cor")
    return out, run_scenario(preset("corollary22"), out=out)


def test_dimension_preset_passes(dimension_run):
    out, res = dimension_run
    assert res.ok, [c for c in res.checks if not c.passed]
    dq = _rows(out / "dq.csv")
    assert {float(r["q"]) for r in dq} >= {2.0, 3.0, 4.0}
    for r in dq:
        assert float(r["abs_error"]) <= 0.05
    cls = _rows(out / "sobolev_class.csv")
    assert cls and {r["classification"] for r in cls} <= {"CONVERGENT", "DIVERGENT", "INCONCLUSIVE"}
    assert json.loads((out / "summary.json").read_text())["ok"] is True


def test_regain(tmp_path):
    res = run_scenario(preset("regain"), out=tmp_path)
    assert res.ok
    rows = _rows(tmp_path / "regain.csv")
    zero = {float(r["t"]): r["structurally_zero"] for r in rows}
    assert zero[1.0] == "true" and zero[4.0] == "true" and zero[2.5] == "false"


def test_complex2d_preset(tmp_path):
    res = run_scenario(preset("complex2d"), out=tmp_path)
    assert res.ok
    for r in _rows(tmp_path / "blowup.csv"):
        if r["expected"] != "NA":
            assert r["classification"] == r["expected"]


def test_deterministic(tmp_path):
    cfg = parse_config("box: {K: 3, M: 3}\ng: {law: exp, amplitude: 1, rate: 1}\n"
                       "steps: [structure, residuals, regain]\n")
    a = run_scenario(cfg, out=tmp_path / "a")
    b = run_scenario(cfg, out=tmp_path / "b")
    assert a.summary() == b.summary()
    for name in ("residuals.csv", "modes.json", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_reference_time():
    assert reference_time(bump_from_dict({"kind": "half", "T": 1.0})) == 2.0
    assert reference_time(bump_from_dict({"kind": "compact", "T1": 2, "T2": 3})) == 2.5

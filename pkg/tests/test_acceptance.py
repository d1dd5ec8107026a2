"""Acceptance criteria, each run at its stated parameters, tolerances and time budget.

Every test records one PASS/FAIL line; the lines are printed together in the
"acceptance criteria" section of the pytest terminal summary.
"""

from __future__ import annotations

import subprocess
import sys
import time
from dataclasses import replace

import pytest

from graftflat.experiments import EXPERIMENTS, Params, Result

DEFAULTS = Params()


def _run(name: str, params: Params) -> tuple[Result, float]:
    start = time.perf_counter()
    res = EXPERIMENTS[name](params)
    return res, time.perf_counter() - start


def _record(report: list, n: int, title: str, res: Result, elapsed: float, budget: float | None) -> None:
    in_time = budget is None or elapsed < budget
    ok = res.passed and in_time
    failed = [k for k, v in res.checks.items() if not v]
    if not in_time:
        failed.append(f"runtime {elapsed:.1f} s over {budget:g} s")
    notes = ", ".join(f"{k}={v:.4g}" for k, v in res.notes.items() if isinstance(v, (int, float)))
    limit = f" / {budget:g} s" if budget is not None else ""
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {title} [{elapsed:.1f} s{limit}]"
    if notes:
        line += f" ({notes})"
    if failed:
        line += " failed: " + "; ".join(failed)
    report.append(line)
    print(line)
    assert not failed, line


def test_criterion_01_area_identity(acceptance_report):
    res, dt = _run("area", replace(DEFAULTS, samples=1_000_000, configs=20))
    assert {r["genus"] for r in res.rows} == {2, 3} and len(res.rows) == 40
    _record(acceptance_report, 1, "area identity, 20 configs per genus 2 and 3", res, dt, 30)


def test_criterion_02_spine_oracle(acceptance_report):
    res, dt = _run("spine", replace(DEFAULTS, gridStep=0.01))
    _record(acceptance_report, 2, "spine widths against cut-locus sampling", res, dt, 60)


def test_criterion_03_cone_audit(acceptance_report):
    res, dt = _run("cone-audit", DEFAULTS)
    assert len(res.rows) == 4
    _record(acceptance_report, 3, "generic genus-2 cone angles", res, dt, 1)


def test_criterion_04_deflation_lipschitz(acceptance_report):
    res, dt = _run("deflate-lipschitz", replace(DEFAULTS, nPairs=1000, netStep=0.02))
    assert len(res.rows) == 1000
    _record(acceptance_report, 4, "deflation 1-Lipschitz over 1000 pairs", res, dt, 120)


def test_criterion_05_convergence_rate(acceptance_report):
    res, dt = _run("deflate-rate", replace(DEFAULTS, ts=(1.0, 0.5, 0.25, 0.125), nPairs=500, netStep=0.02))
    _record(acceptance_report, 5, "distortion along the inflation ray", res, dt, 600)


def test_criterion_06_degrafting(acceptance_report):
    res, dt = _run("degraft", replace(DEFAULTS, scales=(1.0, 0.5, 0.25, 0.125)))
    _record(acceptance_report, 6, "degrafting gap linear in the weights", res, dt, 300)


def test_criterion_07_intersection_bound(acceptance_report):
    res, dt = _run("intersection", replace(DEFAULTS, nPairs=500, netStep=0.02))
    assert len(res.rows) == 500
    _record(acceptance_report, 7, "weighted crossings of 500 net paths", res, dt, 120)


def test_criterion_08_slimness(acceptance_report):
    res, dt = _run("slimness", replace(DEFAULTS, ts=(1.0, 0.5, 0.25, 0.125)))
    _record(acceptance_report, 8, "slimness times k constant along the ray", res, dt, 1)


def test_criterion_09_hyperbolic_lemmas(acceptance_report):
    res, dt = _run("hexagon-lemmas", DEFAULTS)
    assert sum(r["kind"] == "trapezium" for r in res.rows) == 100
    _record(acceptance_report, 9, "trapezium inequality and hexagon residuals", res, dt, 30)


def test_criterion_10_cantor(acceptance_report):
    res, dt = _run("cantor", replace(DEFAULTS, depths=(6, 8, 10, 12)))
    _record(acceptance_report, 10, "Cantor grafting in one dimension", res, dt, 10)


def test_criterion_11_round_trip(acceptance_report):
    res, dt = _run("round-trip", replace(DEFAULTS, configs=50))
    assert len(res.rows) == 50
    _record(acceptance_report, 11, "inflate after deflate on 50 theta-spine configs", res, dt, 30)


CONFIG_12 = """
[experiment]
name = "{name}"
seed = 11
nPairs = 60
netStep = 0.05
configs = 2
samples = 20000
"""


@pytest.mark.parametrize("name", ["area", "deflate-lipschitz", "degraft"])
def test_criterion_12_determinism(acceptance_report, tmp_path, name):
    cfg = tmp_path / "c.toml"
    cfg.write_text(CONFIG_12.format(name=name))
    start = time.perf_counter()
    outputs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        subprocess.run(
            [sys.executable, "-m", "graftflat.cli", "--out-dir", str(out), "run", str(cfg)],
            check=False, capture_output=True,
        )
        outputs.append((out / f"{name}.csv").read_bytes())
    dt = time.perf_counter() - start
    same = outputs[0] == outputs[1] and len(outputs[0]) > 0
    res = Result(name, (), checks={f"byte-identical CSV for {name}": same})
    _record(acceptance_report, 12, f"repeated seeded CLI runs ({name})", res, dt, None)

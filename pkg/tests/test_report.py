import json

import numpy as np
import pytest

from opsyscop.report import (
    CheckResult,
    RunReport,
    format_table,
    save_convergence_figure,
    save_ladder_figure,
    save_spectrum_figure,
    save_summary_figure,
    write_report,
)


def test_check_result_verdict_validation():
    CheckResult("x", "pass")
    CheckResult("x", "boundary")
    with pytest.raises(ValueError):
        CheckResult("x", "ok")


def test_exit_codes():
    r = RunReport(command="t")
    r.add("a", "pass")
    assert r.exit_code() == 0
    r.add("b", "boundary")
    assert r.exit_code() == 0  # boundary counts as pass with a note
    r.add("c", "undecided")
    assert r.exit_code() == 3
    r.add("d", "fail")
    assert r.exit_code() == 2


def test_write_report_files(tmp_path):
    r = RunReport(command="t", inputs={"f": "abc"})
    r.add("a", "pass", value=1.25, arr=np.array([1.0, 2.0]))
    out = write_report(r, tmp_path / "rep")
    data = json.loads((out / "report.json").read_text())
    assert data["results"][0]["details"]["value"] == 1.25
    assert data["results"][0]["details"]["arr"] == [1.0, 2.0]
    csv_text = (out / "results.csv").read_text()
    assert "a,pass" in csv_text
    assert "a" in format_table(r)


def test_figures_render_and_skip_empty(tmp_path):
    assert save_convergence_figure({}, tmp_path / "none.png") is None
    assert save_ladder_figure([], tmp_path / "none.png") is None
    assert save_spectrum_figure({}, tmp_path / "none.png") is None

    p = save_convergence_figure({"run": [1.0, 0.1, 0.01]}, tmp_path / "c.png")
    assert p is not None and p.stat().st_size > 0
    p = save_ladder_figure([(0.1, "Feasible", 12), (0.01, "Infeasible", 500)], tmp_path / "l.png")
    assert p.stat().st_size > 0
    p = save_spectrum_figure({"x": [-0.5, 4.5]}, tmp_path / "s.png")
    assert p.stat().st_size > 0
    r = RunReport(command="t")
    r.add("a", "pass")
    p = save_summary_figure(r, tmp_path / "sum.png")
    assert p.stat().st_size > 0

"""Run reports: machine verdicts, a delimited table, and rendered figures.

Each CLI command assembles a RunReport; when a report directory is given the
report is written as JSON plus a CSV of per-check rows, and the commands with
something worth plotting (solver convergence, epsilon ladders, spectra,
suite summaries) render PNG figures next to them.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

VERDICTS = ("pass", "fail", "boundary", "undecided")


@dataclass
class CheckResult:
    name: str
    verdict: str  # one of VERDICTS
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}, got {self.verdict!r}")


@dataclass
class RunReport:
    command: str
    inputs: dict = field(default_factory=dict)  # path -> content digest
    results: list = field(default_factory=list)  # of CheckResult
    elapsed_ms: float = 0.0

    def add(self, name: str, verdict: str, **details):
        self.results.append(CheckResult(name=name, verdict=verdict, details=details))

    @property
    def failed(self) -> bool:
        return any(r.verdict == "fail" for r in self.results)

    @property
    def undecided(self) -> bool:
        return any(r.verdict == "undecided" for r in self.results)

    def exit_code(self) -> int:
        # boundary counts as a pass with a note
        if self.failed:
            return 2
        if self.undecided:
            return 3
        return 0

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "inputs": self.inputs,
            "results": [
                {"name": r.name, "verdict": r.verdict, "details": _plain(r.details)}
                for r in self.results
            ],
            "elapsed_ms": round(self.elapsed_ms, 3),
        }


def _plain(value):
    """Best-effort conversion of numpy scalars/arrays for JSON."""
    import numpy as np

    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def digest_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()[:12]


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed_ms = (time.perf_counter() - self.start) * 1000.0


def format_table(report: RunReport) -> str:
    width = max([len(r.name) for r in report.results] + [5])
    lines = [f"{'check'.ljust(width)}  verdict    details"]
    lines.append("-" * (width + 30))
    for r in report.results:
        detail = "; ".join(f"{k}={_fmt(v)}" for k, v in r.details.items())
        lines.append(f"{r.name.ljust(width)}  {r.verdict.ljust(9)}  {detail}")
    summary = f"[{report.command}] {len(report.results)} checks, exit {report.exit_code()}, {report.elapsed_ms:.0f} ms"
    return "\n".join(lines + [summary])


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)) and len(v) > 6:
        return f"[{len(v)} values]"
    return str(v)


def write_report(report: RunReport, outdir) -> Path:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report.to_json(), fh, indent=2)
        fh.write("\n")
    with open(outdir / "results.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "verdict", "details"])
        for r in report.results:
            detail = ";".join(f"{k}={_fmt(v)}" for k, v in r.details.items())
            writer.writerow([r.name, r.verdict, detail])
    return outdir


# ---------------------------------------------------------------------------
# Figures (matplotlib, Agg backend; imported lazily so library use stays light)
# ---------------------------------------------------------------------------


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_convergence_figure(histories: dict, path) -> Path | None:
    """Semilog plot of solver residual/gap per iteration, one line per labeled run."""
    histories = {k: v for k, v in histories.items() if v}
    if not histories:
        return None
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for label, hist in histories.items():
        ax.semilogy(range(1, len(hist) + 1), hist, label=label)
    ax.set_xlabel("iteration")
    ax.set_ylabel("residual / gap estimate")
    ax.set_title("alternating-projection convergence")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def save_ladder_figure(ladder, path) -> Path | None:
    """Epsilon-ladder trace: iterations per rung, annotated with the verdict."""
    if not ladder:
        return None
    plt = _plt()
    eps = [row[0] for row in ladder]
    iters = [row[2] for row in ladder]
    verdicts = [row[1] for row in ladder]
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    colors = {"Feasible": "tab:green", "Infeasible": "tab:red", "Undecided": "tab:orange"}
    ax.scatter(eps, iters, c=[colors.get(v, "tab:gray") for v in verdicts], zorder=3)
    ax.plot(eps, iters, color="0.7", zorder=2)
    for e, it, v in zip(eps, iters, verdicts):
        ax.annotate(v, (e, it), textcoords="offset points", xytext=(0, 6), fontsize=7, ha="center")
    ax.set_xscale("log")
    ax.set_xlabel("epsilon shift")
    ax.set_ylabel("iterations to verdict")
    ax.set_title("Archimedean ladder trace")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def save_spectrum_figure(spectra: dict, path) -> Path | None:
    """Stem plot of labeled eigenvalue lists."""
    if not spectra:
        return None
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for offset, (label, eigs) in enumerate(spectra.items()):
        xs = [offset] * len(eigs)
        ax.scatter(xs, eigs, label=label)
    ax.axhline(0.0, color="0.5", linewidth=0.8)
    ax.set_xticks(range(len(spectra)))
    ax.set_xticklabels(list(spectra.keys()), fontsize=8)
    ax.set_ylabel("eigenvalue")
    ax.set_title("spectra of the certificate matrices")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def save_summary_figure(report: RunReport, path) -> Path | None:
    if not report.results:
        return None
    plt = _plt()
    counts = {v: 0 for v in VERDICTS}
    for r in report.results:
        counts[r.verdict] += 1
    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    colors = {"pass": "tab:green", "fail": "tab:red", "boundary": "tab:blue", "undecided": "tab:orange"}
    ax.bar(list(counts.keys()), list(counts.values()), color=[colors[v] for v in counts])
    ax.set_ylabel("checks")
    ax.set_title(f"{report.command}: verdict summary")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)

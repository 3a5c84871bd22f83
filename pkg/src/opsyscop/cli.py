"""Command-line interface: batch verification of coproduct constructions.

Subcommands:
  graph        build a graph operator system from an edge-list JSON file
  build        build the amalgamated coproduct of two systems
  member       run a quotient-cone membership query (d or c cone)
  demo-paper   run the built-in worked example with its certificate table
  paper-suite  run the fixed regression suite of structural identities

Exit codes: 0 pass, 1 usage, 2 verification failure, 3 undecided, 4 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import serialize
from .coproduct import (
    build_coproduct,
    c_cone_member,
    d_cone_member,
    intersection_check,
    matched_diagonal_demo,
)
from .cp_maps import full_matrix_system
from .errors import InputFormatError, OperatorSystemError
from .feasibility import DEFAULT_MAX_ITER
from .graph_systems import empty_graph, complete_graph, generated_algebra, graph_system, random_graph
from .matrix_kernel import Tolerance, as_rng, eigvals_hermitian, is_psd, random_hermitian
from .operator_system import DiagonalAlgebra, bimodule_check, random_hermitian_level
from .report import (
    RunReport,
    Timer,
    digest_file,
    format_table,
    save_convergence_figure,
    save_ladder_figure,
    save_spectrum_figure,
    save_summary_figure,
    write_report,
)

USAGE_EXIT = 1
VERIFY_EXIT = 2
UNDECIDED_EXIT = 3
INPUT_EXIT = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _common(parser: argparse.ArgumentParser):
    parser.add_argument("--seed", type=int, default=42, help="RNG seed for sampled checks")
    parser.add_argument("--tol-psd", type=float, default=None, help="absolute PSD slack (default: auto)")
    parser.add_argument("--tol-subspace", type=float, default=1e-8, help="span-membership slack")
    parser.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER, help="solver iteration cap")
    parser.add_argument("--report-dir", type=Path, default=None, help="write report.json/results.csv/figures here")


def build_parser() -> _Parser:
    parser = _Parser(prog="coproduct", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("graph", help="build a graph operator system from edge-list JSON")
    _common(p)
    p.add_argument("input", type=Path, help='graph JSON {"n": int, "edges": [[i, j], ...]}')
    p.add_argument("--out", type=Path, default=None, help="write the system JSON here")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("build", help="build a coproduct from two system JSON files")
    _common(p)
    p.add_argument("--left", type=Path, required=True)
    p.add_argument("--right", type=Path, required=True)
    p.add_argument("--out", type=Path, default=None, help="write the coproduct JSON here")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("member", help="quotient-cone membership query")
    _common(p)
    p.add_argument("--cp", type=Path, required=True, help="coproduct JSON from 'build'")
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--s", dest="s_path", type=Path, required=True, help="left block JSON matrix")
    p.add_argument("--t", dest="t_path", type=Path, required=True, help="right block JSON matrix")
    p.add_argument("--cone", choices=("d", "c"), default="d")
    p.set_defaults(func=cmd_member)

    p = sub.add_parser("demo-paper", help="run the built-in worked example")
    _common(p)
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("paper-suite", help="run the fixed regression suite")
    _common(p)
    p.set_defaults(func=cmd_suite)
    return parser


def _tolerance(args) -> Tolerance:
    return Tolerance(psd_eps=args.tol_psd, subspace_eps=args.tol_subspace)


def _finish(report: RunReport, args, figures=()) -> int:
    print(format_table(report))
    if args.report_dir is not None:
        outdir = write_report(report, args.report_dir)
        save_summary_figure(report, outdir / "summary.png")
        for render in figures:
            render(outdir)
    return report.exit_code()


def cmd_graph(args) -> int:
    tol = _tolerance(args)
    g = serialize.graph_from_json(serialize.load_json_file(args.input))
    with Timer() as t:
        sys_g = graph_system(g, tol)
        bimodule_ok = bimodule_check(sys_g, DiagonalAlgebra(g.vertex_count), rng=as_rng(args.seed), tol=tol)
    report = RunReport(command="graph", inputs={str(args.input): digest_file(args.input)})
    report.elapsed_ms = t.elapsed_ms
    expected = g.vertex_count + 2 * len(g.edges)
    report.add("system dimension n + 2|E|", "pass" if sys_g.dim == expected else "fail",
               dim=sys_g.dim, expected=expected)
    report.add("diagonal bimodule", "pass" if bimodule_ok else "fail")
    if args.out is not None:
        serialize.dump_json_file(serialize.system_to_json(sys_g), args.out)
        print(f"wrote {args.out}")
    return _finish(report, args)


def cmd_build(args) -> int:
    tol = _tolerance(args)
    left = serialize.system_from_json(serialize.load_json_file(args.left), tol)
    right = serialize.system_from_json(serialize.load_json_file(args.right), tol)
    with Timer() as t:
        cp = build_coproduct(left, right, tol=tol, rng=as_rng(args.seed))
    report = RunReport(
        command="build",
        inputs={str(p): digest_file(p) for p in (args.left, args.right)},
        elapsed_ms=t.elapsed_ms,
    )
    expected = left.dim + right.dim - left.ambient_dim
    report.add("dimension formula dim S + dim T - n", "pass" if cp.dim == expected else "fail",
               dim=cp.dim, expected=expected)
    if args.out is not None:
        serialize.dump_json_file(serialize.coproduct_to_json(cp), args.out)
        print(f"wrote {args.out}")
    return _finish(report, args)


def cmd_member(args) -> int:
    tol = _tolerance(args)
    cp = serialize.coproduct_from_json(serialize.load_json_file(args.cp), tol)
    s_blk, ks = serialize.level_block_from_json(serialize.load_json_file(args.s_path), cp.n, args.level)
    t_blk, kt = serialize.level_block_from_json(serialize.load_json_file(args.t_path), cp.n, args.level)
    if ks != kt or ks != args.level:
        raise InputFormatError(f"levels disagree: --level {args.level}, s {ks}, t {kt}")

    figures = []
    if args.cone == "d":
        outcome = d_cone_member(cp, s_blk, t_blk, max_iter=args.max_iter, check_tol=tol, record_history=True)
        verdict_obj = serialize.outcome_to_json(outcome)
        exit_code = 0
        scale = max(float(np.linalg.norm(s_blk)), float(np.linalg.norm(t_blk)))
        boundary_slack = 10.0 * tol.psd_slack(scale)
        if outcome.feasible:
            ok = is_psd(s_blk + outcome.witness, tol) and is_psd(t_blk - outcome.witness, tol)
            verdict_obj["witness_verified"] = bool(ok)
            margin = min(
                float(eigvals_hermitian(s_blk + outcome.witness)[0]),
                float(eigvals_hermitian(t_blk - outcome.witness)[0]),
            )
            verdict_obj["boundary"] = bool(abs(margin) < boundary_slack)
            if not ok:
                exit_code = VERIFY_EXIT
        elif outcome.infeasible:
            verdict_obj["boundary"] = bool(outcome.gap is not None and outcome.gap < boundary_slack)
        elif outcome.undecided:
            exit_code = UNDECIDED_EXIT
        figures.append(lambda outdir: save_convergence_figure(
            {"d-cone query": outcome.history}, outdir / "convergence.png"))
    else:
        result = c_cone_member(cp, s_blk, t_blk, max_iter=args.max_iter, check_tol=tol, record_history=True)
        verdict_obj = serialize.c_cone_to_json(result)
        exit_code = UNDECIDED_EXIT if result.member is None else 0
        ladder = [(eps, out.verdict.value, out.iterations) for eps, out in result.trace]
        figures.append(lambda outdir: save_ladder_figure(ladder, outdir / "ladder.png"))
        figures.append(lambda outdir: save_convergence_figure(
            {f"eps={eps:g}": out.history for eps, out in result.trace}, outdir / "convergence.png"))

    print(json.dumps(verdict_obj, indent=2))
    if args.report_dir is not None:
        report = RunReport(command="member", inputs={
            str(p): digest_file(p) for p in (args.cp, args.s_path, args.t_path)})
        report.add(f"{args.cone}-cone membership",
                   {0: "pass", VERIFY_EXIT: "fail", UNDECIDED_EXIT: "undecided"}[exit_code],
                   outcome=verdict_obj.get("verdict"))
        outdir = write_report(report, args.report_dir)
        for render in figures:
            render(outdir)
    return exit_code


def cmd_demo(args) -> int:
    tol = _tolerance(args)
    with Timer() as t:
        demo = matched_diagonal_demo(max_iter=args.max_iter, check_tol=tol)
    report = RunReport(command="demo-paper", elapsed_ms=t.elapsed_ms)
    for check in demo["checks"]:
        report.add(check["name"], check["verdict"], **check["details"])
    figures = [
        lambda outdir: save_spectrum_figure(demo["spectra"], outdir / "spectra.png"),
        lambda outdir: save_convergence_figure({"witness search": demo["history"]}, outdir / "convergence.png"),
        lambda outdir: save_ladder_figure(demo["ladder"], outdir / "ladder.png"),
    ]
    return _finish(report, args, figures)


def cmd_suite(args) -> int:
    tol = _tolerance(args)
    rng = as_rng(args.seed)
    report = RunReport(command="paper-suite")
    figures = []
    with Timer() as t:
        demo = matched_diagonal_demo(max_iter=args.max_iter, check_tol=tol)
        for check in demo["checks"]:
            report.add(check["name"], check["verdict"], **check["details"])
        figures.append(lambda outdir: save_spectrum_figure(demo["spectra"], outdir / "spectra.png"))
        figures.append(lambda outdir: save_ladder_figure(demo["ladder"], outdir / "ladder.png"))

        m2 = full_matrix_system(2, tol)
        cp2 = build_coproduct(m2, m2, tol=tol, rng=rng)
        inter = intersection_check(cp2, tol)
        report.add("embedded copies meet exactly in the diagonals",
                   "pass" if inter.matches else "fail",
                   dimension=inter.dimension, expected=inter.expected)
        report.add("coproduct dimension of the full 2x2 pair", "pass" if cp2.dim == 6 else "fail",
                   dim=cp2.dim, expected=6)

        formula_ok = True
        detail = []
        for _ in range(3):
            n = int(rng.integers(2, 6))
            a = graph_system(random_graph(n, rng), tol)
            b = graph_system(random_graph(n, rng), tol)
            cp_ab = build_coproduct(a, b, tol=tol, rng=rng)
            formula_ok &= cp_ab.dim == a.dim + b.dim - n
            detail.append(f"n={n}:{cp_ab.dim}")
        report.add("dimension formula on random graph pairs", "pass" if formula_ok else "fail",
                   cases=",".join(detail))

        prox_ok, prox_boundary = True, 0
        for _ in range(6):
            k = int(rng.integers(1, 3))
            s = random_hermitian_level(m2, k, rng)
            u = random_hermitian_level(m2, k, rng)
            d_out = d_cone_member(cp2, s, u, max_iter=args.max_iter, check_tol=tol)
            c_out = c_cone_member(cp2, s, u, max_iter=args.max_iter, check_tol=tol)
            agree = (d_out.feasible and c_out.member is True) or (
                d_out.infeasible and c_out.member is False)
            if d_out.undecided or c_out.member is None:
                prox_boundary += 1
            elif not agree:
                prox_ok = False
        # an undecided draw is a boundary note, not a failure
        prox_verdict = "fail" if not prox_ok else ("boundary" if prox_boundary else "pass")
        report.add("exact and Archimedean cones agree (proximinality)",
                   prox_verdict, undecided=prox_boundary)

        embed_ok = True
        for _ in range(8):
            k = int(rng.integers(1, 3))
            u = random_hermitian(2 * k, rng)
            w = eigvals_hermitian(u)
            if abs(w[0]) < 1e-6:  # skip boundary draws
                continue
            member = c_cone_member(cp2, 2.0 * u, np.zeros_like(u), max_iter=args.max_iter, check_tol=tol)
            if member.member is None:
                continue
            if member.member != bool(w[0] >= 0):
                embed_ok = False
        report.add("embedding is an order isomorphism onto its image",
                   "pass" if embed_ok else "fail")

        alg_k3 = generated_algebra(graph_system(complete_graph(3), tol), tol)
        alg_d3 = generated_algebra(graph_system(empty_graph(3), tol), tol)
        report.add("generated algebra of the triangle system is M_3",
                   "pass" if alg_k3.dim == 9 else "fail", dim=alg_k3.dim)
        report.add("generated algebra of the diagonal system is itself",
                   "pass" if alg_d3.dim == 3 else "fail", dim=alg_d3.dim)
    report.elapsed_ms = t.elapsed_ms
    return _finish(report, args, figures)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) is None:
        parser.print_usage(sys.stderr)
        return USAGE_EXIT
    try:
        return args.func(args)
    except InputFormatError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return INPUT_EXIT
    except OperatorSystemError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return VERIFY_EXIT


if __name__ == "__main__":
    sys.exit(main())

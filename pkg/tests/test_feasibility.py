import numpy as np
import pytest

from opsyscop import (
    FeasibilityProblem,
    ShapeMismatch,
    Verdict,
    brute_force_2x2,
    diag_block_project,
    is_psd,
    solve,
)
from opsyscop.matrix_kernel import frobenius_inner, frobenius_norm, hermitian_part
from helpers import eig2_closed_form, uniform_hermitian

DEMO_S = np.array([[2.0, 2.5], [2.5, 2.0]], dtype=complex)
DEMO_T = 2.0 * np.eye(2, dtype=complex)
INF_S = np.diag([-3.0, 0.0]).astype(complex)
INF_T = np.diag([1.0, 0.0]).astype(complex)


def test_solve_demo_pair_feasible():
    out = solve(FeasibilityProblem(1, 2, DEMO_S, DEMO_T))
    assert out.verdict is Verdict.FEASIBLE
    assert is_psd(DEMO_S + out.witness)
    assert is_psd(DEMO_T - out.witness)
    # the identity is a known valid witness: eigs of s + I are (1/2, 11/2)
    lo, hi = eig2_closed_form(3.0, 3.0, 2.5)
    assert (lo, hi) == (0.5, 5.5)
    assert is_psd(DEMO_S + np.eye(2)) and is_psd(DEMO_T - np.eye(2))


def test_solve_trivial_identity():
    out = solve(FeasibilityProblem(1, 3, np.eye(3, dtype=complex), np.eye(3, dtype=complex)))
    assert out.verdict is Verdict.FEASIBLE
    assert out.iterations == 1
    assert frobenius_norm(out.witness) < 1e-12


def test_solve_interval_infeasible():
    # witness diag(d1, d2) needs d1 >= 3 and d1 <= 1 simultaneously
    out = solve(FeasibilityProblem(1, 2, INF_S, INF_T))
    assert out.verdict is Verdict.INFEASIBLE
    assert out.gap > 10 * 1e-9


def test_solve_iteration_budget_returns_undecided():
    out = solve(FeasibilityProblem(1, 2, DEMO_S, DEMO_T), max_iter=3)
    assert out.verdict is Verdict.UNDECIDED


def test_solve_eps_shift_rescues_boundary():
    s = np.diag([-1e-3, 0.0]).astype(complex)
    out = solve(FeasibilityProblem(1, 2, s, s.copy(), eps_shift=1e-3))
    assert out.verdict is Verdict.FEASIBLE


def test_problem_validation():
    with pytest.raises(ShapeMismatch):
        FeasibilityProblem(1, 2, np.eye(3, dtype=complex), np.eye(3, dtype=complex))
    with pytest.raises(ValueError):
        FeasibilityProblem(1, 2, DEMO_S, DEMO_T, eps_shift=-0.1)


def test_brute_force_examples():
    out = brute_force_2x2(DEMO_S, DEMO_T)
    assert out.verdict is Verdict.FEASIBLE
    w = out.witness
    assert is_psd(DEMO_S + w) and is_psd(DEMO_T - w)

    out = brute_force_2x2(INF_S, INF_T)
    assert out.verdict is Verdict.INFEASIBLE

    out = brute_force_2x2(np.zeros((2, 2)), np.zeros((2, 2)))
    assert out.verdict is Verdict.FEASIBLE
    assert frobenius_norm(out.witness) == 0.0


def test_oracle_equivalence_50_pairs():
    rng = np.random.default_rng(61)
    decisive = 0
    for _ in range(50):
        s = uniform_hermitian(rng, 2)
        t = uniform_hermitian(rng, 2)
        dyk = solve(FeasibilityProblem(1, 2, s, t))
        bf = brute_force_2x2(s, t)
        if dyk.verdict is not Verdict.UNDECIDED and bf.verdict is not Verdict.UNDECIDED:
            decisive += 1
            assert dyk.verdict is bf.verdict, f"opposite verdicts on\n{s}\n{t}"
    assert decisive >= 45


def test_witness_validity_random():
    rng = np.random.default_rng(62)
    for _ in range(25):
        k = int(rng.integers(1, 3))
        n = int(rng.integers(2, 4))
        s = uniform_hermitian(rng, k * n)
        t = uniform_hermitian(rng, k * n)
        out = solve(FeasibilityProblem(k, n, s, t))
        if out.verdict is Verdict.FEASIBLE:
            assert is_psd(s + out.witness)
            assert is_psd(t - out.witness)
            # witness lies in M_k(D_n)
            assert frobenius_norm(out.witness - diag_block_project(out.witness, k, n)) < 1e-12


def test_feasibility_monotone_in_shift():
    rng = np.random.default_rng(63)
    for _ in range(10):
        s = uniform_hermitian(rng, 2)
        t = uniform_hermitian(rng, 2)
        out = solve(FeasibilityProblem(1, 2, s, t))
        if out.verdict is Verdict.FEASIBLE:
            for eps in (0.0, 0.1, 1.0):
                assert is_psd(s + eps * np.eye(2) + out.witness)
                assert is_psd(t + eps * np.eye(2) - out.witness)


def test_feasibility_scale_invariant():
    rng = np.random.default_rng(64)
    for _ in range(10):
        s = uniform_hermitian(rng, 2)
        t = uniform_hermitian(rng, 2)
        base = solve(FeasibilityProblem(1, 2, s, t))
        for c in (0.5, 2.0):
            scaled = solve(FeasibilityProblem(1, 2, c * s, c * t))
            if base.verdict is Verdict.UNDECIDED or scaled.verdict is Verdict.UNDECIDED:
                continue
            assert base.verdict is scaled.verdict
            if base.verdict is Verdict.FEASIBLE:
                assert is_psd(c * s + c * base.witness)
                assert is_psd(c * t - c * base.witness)


def test_diag_block_project_is_orthogonal_projection():
    rng = np.random.default_rng(65)
    k, n = 2, 3
    a = hermitian_part(rng.normal(size=(k * n, k * n)) + 1j * rng.normal(size=(k * n, k * n)))
    b = hermitian_part(rng.normal(size=(k * n, k * n)) + 1j * rng.normal(size=(k * n, k * n)))
    pa, pb = diag_block_project(a, k, n), diag_block_project(b, k, n)
    # idempotent and self-adjoint for the Frobenius pairing
    np.testing.assert_allclose(diag_block_project(pa, k, n), pa, atol=1e-12)
    assert frobenius_inner(pa, b) == pytest.approx(frobenius_inner(a, pb), abs=1e-10)
    # range: every n x n block diagonal; fixes such matrices
    blocks = pa.reshape(k, n, k, n)
    off = blocks * (1.0 - np.eye(n))[None, :, None, :]
    assert frobenius_norm(off) < 1e-12
    d = np.kron(rng.normal(size=(k, k)), np.eye(n))
    d = hermitian_part(d)
    np.testing.assert_allclose(diag_block_project(d, k, n), d, atol=1e-12)


def test_solve_records_history_when_asked():
    out = solve(FeasibilityProblem(1, 2, DEMO_S, DEMO_T), record_history=True)
    assert len(out.history) == out.iterations
    assert out.history[-1] < 1e-8
    out2 = solve(FeasibilityProblem(1, 2, DEMO_S, DEMO_T))
    assert out2.history == []

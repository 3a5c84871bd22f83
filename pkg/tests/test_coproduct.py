import numpy as np
import pytest

from opsyscop import (
    CosetElement,
    IllConditioned,
    IncompatibleSystems,
    Verdict,
    bimodule_map_check,
    build_coproduct,
    c_cone_member,
    complete_graph,
    d_cone_member,
    diagonal_expectation,
    embed_left,
    embed_right,
    empty_graph,
    graph_system,
    identity_map,
    intersection_check,
    is_psd,
    make_system,
    matched_diagonal_demo,
    random_graph,
    sampled_kpositive,
    universal_map,
)
from opsyscop.coproduct import pair_embed
from opsyscop.cp_maps import LinearMatrixMap, full_matrix_system
from opsyscop.matrix_kernel import eigvals_hermitian, frobenius_inner, frobenius_norm
from opsyscop.operator_system import (
    DiagonalAlgebra,
    random_hermitian_level,
    random_psd_level,
)
from helpers import gaussian_hermitian, wishart

DEMO_S = np.array([[2.0, 2.5], [2.5, 2.0]], dtype=complex)
DEMO_T = 2.0 * np.eye(2, dtype=complex)


@pytest.fixture(scope="module")
def cp_m2():
    m2 = full_matrix_system(2)
    return build_coproduct(m2, m2, label="M2+M2")


def test_dimension_examples(cp_m2):
    assert cp_m2.dim == 4 + 4 - 2 == 6
    for n in (2, 3, 4):
        dn = graph_system(empty_graph(n))
        assert build_coproduct(dn, dn).dim == n
    sk2 = graph_system(complete_graph(2))
    d2 = graph_system(empty_graph(2))
    assert build_coproduct(sk2, d2).dim == 4 + 2 - 2 == 4


def test_dimension_formula_random_graph_pairs():
    rng = np.random.default_rng(71)
    for _ in range(8):
        n = int(rng.integers(2, 6))
        a, b = graph_system(random_graph(n, rng)), graph_system(random_graph(n, rng))
        assert build_coproduct(a, b, rng=rng).dim == a.dim + b.dim - n


def test_build_rejects_mismatched_and_non_bimodule():
    with pytest.raises(IncompatibleSystems):
        build_coproduct(full_matrix_system(2), full_matrix_system(3))
    x = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    with pytest.raises(IncompatibleSystems):
        build_coproduct(make_system(2, [x]), full_matrix_system(2))


def test_kernel_contains_no_positive_elements(cp_m2):
    # eigenvalues of a (+) (-a) come in opposite pairs, so PSD forces a = 0
    for b in cp_m2.kernel.basis:
        w = eigvals_hermitian(b)
        np.testing.assert_allclose(w, -w[::-1], atol=1e-12)
        assert not is_psd(b)
    rng = np.random.default_rng(72)
    for _ in range(20):
        a = DiagonalAlgebra(2).random_hermitian(rng)
        elem = pair_embed(a, -a)
        assert is_psd(elem) == (frobenius_norm(a) < 1e-12)
    assert is_psd(pair_embed(np.zeros((2, 2)), np.zeros((2, 2))))


def test_coset_is_orthogonal_to_kernel_and_representative_free(cp_m2):
    rng = np.random.default_rng(73)
    for k in (1, 2):
        s = random_hermitian_level(cp_m2.left, k, rng)
        t = random_hermitian_level(cp_m2.right, k, rng)
        x = cp_m2.coset(s, t, level=k)
        # orthogonal to every kernel element at level k
        for i in range(cp_m2.n):
            a = np.zeros((cp_m2.n, cp_m2.n), dtype=complex)
            a[i, i] = 1.0
            for pos in range(k):
                big = np.zeros((k * cp_m2.n, k * cp_m2.n), dtype=complex)
                big[pos * cp_m2.n : (pos + 1) * cp_m2.n, pos * cp_m2.n : (pos + 1) * cp_m2.n] = a
                ip = frobenius_inner(big, x.s_block) - frobenius_inner(big, x.t_block)
                assert abs(ip) < 1e-10
        # shifting the representative along the kernel does not move the coset
        a = DiagonalAlgebra(cp_m2.n).random_hermitian(rng)
        shift = np.kron(np.eye(k), a)
        y = cp_m2.coset(s + shift, t - shift, level=k)
        np.testing.assert_allclose(y.s_block, x.s_block, atol=1e-10)
        np.testing.assert_allclose(y.t_block, x.t_block, atol=1e-10)


def test_coset_block_diag_roundtrip(cp_m2):
    rng = np.random.default_rng(74)
    x = cp_m2.coset(
        random_hermitian_level(cp_m2.left, 2, rng),
        random_hermitian_level(cp_m2.right, 2, rng),
        level=2,
    )
    y = CosetElement.from_block_diag(x.to_block_diag(), cp_m2.n)
    np.testing.assert_allclose(y.s_block, x.s_block, atol=1e-14)
    np.testing.assert_allclose(y.t_block, x.t_block, atol=1e-14)
    # the shuffle is a permutation similarity of blkdiag(s_block, t_block)
    shuffled = eigvals_hermitian(x.to_block_diag())
    direct = np.sort(np.concatenate([
        eigvals_hermitian(x.s_block), eigvals_hermitian(x.t_block)
    ]))
    np.testing.assert_allclose(shuffled, direct, atol=1e-10)


def test_d_cone_demo_pair(cp_m2):
    out = d_cone_member(cp_m2, DEMO_S, DEMO_T)
    assert out.verdict is Verdict.FEASIBLE
    assert is_psd(DEMO_S + out.witness) and is_psd(DEMO_T - out.witness)


def test_d_cone_trivial_and_infeasible(cp_m2):
    out = d_cone_member(cp_m2, np.eye(2, dtype=complex), np.eye(2, dtype=complex))
    assert out.verdict is Verdict.FEASIBLE
    assert frobenius_norm(out.witness) < 1e-12
    out = d_cone_member(cp_m2, np.diag([-3.0, 0.0]).astype(complex),
                        np.diag([1.0, 0.0]).astype(complex))
    assert out.verdict is Verdict.INFEASIBLE


def test_quotient_map_is_completely_positive(cp_m2):
    # cosets of positive direct-sum elements are d-cone members with witness 0
    rng = np.random.default_rng(75)
    for _ in range(100):
        k = int(rng.integers(1, 3))
        p = random_psd_level(cp_m2.left, k, rng)
        q = random_psd_level(cp_m2.right, k, rng)
        out = d_cone_member(cp_m2, p, q)
        assert out.verdict is Verdict.FEASIBLE
        assert out.iterations == 1
        assert frobenius_norm(out.witness) < 1e-10


def test_c_cone_demo_and_refutations(cp_m2):
    res = c_cone_member(cp_m2, DEMO_S, DEMO_T)
    assert res.member is True
    assert len(res.trace) == 6
    assert all(out.feasible for _, out in res.trace)

    neg = -np.eye(2, dtype=complex)
    res = c_cone_member(cp_m2, neg, neg)
    assert res.member is False
    assert res.trace[0][1].infeasible  # refuted at the first rung already

    res = c_cone_member(cp_m2, np.zeros((2, 2)), np.zeros((2, 2)))
    assert res.member is True


def test_embeddings_unital_and_agree_on_diagonals(cp_m2):
    unit = embed_left(cp_m2, np.eye(2, dtype=complex))
    np.testing.assert_allclose(unit.s_block, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(unit.t_block, np.eye(2), atol=1e-12)

    rng = np.random.default_rng(76)
    for _ in range(10):
        a = DiagonalAlgebra(2).random_hermitian(rng)
        el, er = embed_left(cp_m2, a), embed_right(cp_m2, a)
        assert frobenius_norm(el.s_block - er.s_block) < 1e-12
        assert frobenius_norm(el.t_block - er.t_block) < 1e-12


def test_embedding_positive_elements_need_no_witness(cp_m2):
    rng = np.random.default_rng(77)
    u = wishart(rng, 2)
    x = embed_left(cp_m2, u)
    out = d_cone_member(cp_m2, x.s_block, x.t_block)
    assert out.verdict is Verdict.FEASIBLE


def test_embedding_is_order_isomorphism_sample(cp_m2):
    rng = np.random.default_rng(78)
    checked = 0
    for _ in range(20):
        k = int(rng.integers(1, 3))
        u = wishart(rng, 2 * k) if rng.uniform() < 0.5 else gaussian_hermitian(rng, 2 * k)
        w = eigvals_hermitian(u)
        if abs(w[0]) < 1e-7:
            continue
        res = c_cone_member(cp_m2, 2.0 * u, np.zeros_like(u))
        if res.member is None:
            continue
        assert res.member == bool(w[0] >= 0.0)
        checked += 1
    assert checked >= 15


def test_quotient_cone_diagonal_compatibility(cp_m2):
    # compressing a d-cone member by X in M_{m,k}(D_n) keeps it in the cone,
    # with the witness transforming as X A X*
    rng = np.random.default_rng(79)
    n = cp_m2.n
    for _ in range(15):
        k = int(rng.integers(1, 3))
        m = int(rng.integers(1, 3))
        p = random_psd_level(cp_m2.left, k, rng)
        q = random_psd_level(cp_m2.right, k, rng)
        shift = np.kron(np.eye(k), DiagonalAlgebra(n).random_hermitian(rng))
        s, t = p - shift, q + shift  # member with witness `shift`
        x = np.zeros((m * n, k * n), dtype=complex)
        for i in range(m):
            for j in range(k):
                x[i * n : (i + 1) * n, j * n : (j + 1) * n] = np.diag(
                    rng.normal(size=n) + 1j * rng.normal(size=n)
                )
        new_witness = x @ shift @ x.conj().T
        assert is_psd(x @ s @ x.conj().T + new_witness)
        assert is_psd(x @ t @ x.conj().T - new_witness)
        out = d_cone_member(cp_m2, x @ s @ x.conj().T, x @ t @ x.conj().T)
        assert out.verdict is Verdict.FEASIBLE


def test_proximinality_sample(cp_m2):
    # over a von Neumann diagonal algebra the exact and Archimedean cones agree
    rng = np.random.default_rng(80)
    disagreements = 0
    for _ in range(20):
        k = int(rng.integers(1, 3))
        s = random_hermitian_level(cp_m2.left, k, rng)
        t = random_hermitian_level(cp_m2.right, k, rng)
        d_out = d_cone_member(cp_m2, s, t)
        c_out = c_cone_member(cp_m2, s, t)
        if d_out.undecided or c_out.member is None:
            continue
        if d_out.feasible != c_out.member:
            disagreements += 1
    assert disagreements == 0


def test_intersection_check_examples(cp_m2):
    res = intersection_check(cp_m2)
    assert res
    assert res.dimension == 2

    for n in (2, 3):
        dn = graph_system(empty_graph(n))
        res = intersection_check(build_coproduct(dn, dn))
        assert res and res.dimension == n

    sk2 = graph_system(complete_graph(2))
    d2 = graph_system(empty_graph(2))
    res = intersection_check(build_coproduct(sk2, d2))
    assert res and res.dimension == 2


def test_universal_map_identity_and_expectation(cp_m2):
    phi = universal_map(cp_m2, identity_map(2), diagonal_expectation(2))
    assert phi.is_unital()
    rng = np.random.default_rng(81)
    for _ in range(10):
        s = gaussian_hermitian(rng, 2)
        t = gaussian_hermitian(rng, 2)
        x = cp_m2.coset(s, t)
        expected = (s + np.diag(np.diag(t))) / 2.0
        np.testing.assert_allclose(phi.apply(x.to_block_diag()), expected, atol=1e-10)
    # restriction to the two factors
    for b in cp_m2.left.basis:
        np.testing.assert_allclose(
            phi.apply(embed_left(cp_m2, b).to_block_diag()), b, atol=1e-10
        )
    for b in cp_m2.right.basis:
        np.testing.assert_allclose(
            phi.apply(embed_right(cp_m2, b).to_block_diag()), np.diag(np.diag(b)), atol=1e-10
        )
    assert sampled_kpositive(phi, 2, trials=100, rng=rng)
    assert bimodule_map_check(phi)


def test_universal_map_trivial_average(cp_m2):
    phi = universal_map(cp_m2, identity_map(2), identity_map(2))
    rng = np.random.default_rng(82)
    s, t = gaussian_hermitian(rng, 2), gaussian_hermitian(rng, 2)
    x = cp_m2.coset(s, t)
    np.testing.assert_allclose(phi.apply(x.to_block_diag()), (s + t) / 2.0, atol=1e-10)
    np.testing.assert_allclose(
        phi.apply(cp_m2.unit_coset().to_block_diag()), np.eye(2), atol=1e-12
    )


def test_universal_map_on_graph_system_domains():
    # non-full domains take the sampled-positivity verification path
    from opsyscop import graph, graph_system

    left = graph_system(graph(3, [(1, 2)]))
    right = graph_system(graph(3, [(2, 3)]))
    cp = build_coproduct(left, right)
    assert cp.dim == 5 + 5 - 3

    inc1 = LinearMatrixMap.from_callable(left, 3, lambda m: m, label="incl")
    inc2 = LinearMatrixMap.from_callable(right, 3, lambda m: m, label="incl")
    phi = universal_map(cp, inc1, inc2, rng=np.random.default_rng(84))
    assert phi.is_unital()
    rng = np.random.default_rng(85)
    s = random_hermitian_level(left, 1, rng)
    t = random_hermitian_level(right, 1, rng)
    x = cp.coset(s, t)
    np.testing.assert_allclose(phi.apply(x.to_block_diag()), (s + t) / 2.0, atol=1e-10)
    assert sampled_kpositive(phi, 2, trials=100, rng=rng)


def test_universal_map_rejects_diagonal_disagreement(cp_m2):
    # conjugation by the swap is u.c.p. and a bimodule map for the swapped
    # representation, but it disagrees with the identity on the diagonals
    u = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    e11 = np.diag([1.0, 0.0]).astype(complex)
    e22 = np.diag([0.0, 1.0]).astype(complex)
    swapped = LinearMatrixMap.from_callable(
        full_matrix_system(2), 2, lambda m: u @ m @ u.conj().T,
        target_units=np.array([e22, e11]),
    )
    assert bimodule_map_check(swapped)
    with pytest.raises(IllConditioned):
        universal_map(cp_m2, identity_map(2), swapped)


def test_matched_diagonal_demo_passes():
    demo = matched_diagonal_demo()
    assert [c["verdict"] for c in demo["checks"]] == ["pass", "pass", "pass"]
    a, b, c = demo["checks"]
    assert a["details"]["section_dim"] == 6
    assert a["details"]["quotient_dim"] == 6
    assert b["details"]["identity_witness_valid"] is True
    assert abs(c["details"]["min_eigenvalue"] + 0.5) < 1e-9
    assert demo["spectra"]["s (+) t"][0] == pytest.approx(-0.5, abs=1e-9)
    assert len(demo["ladder"]) == 6

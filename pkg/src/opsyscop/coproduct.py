"""Amalgamated coproducts of diagonal-bimodule operator systems as cone quotients.

Two systems S, T in M_n that are bimodules over the diagonal algebra D_n are
glued along their diagonals: form the direct sum S (+) T in M_2n, quotient by
the amalgamation kernel {a (+) (-a) : a diagonal}, and order the quotient by
witness cones.  A level-k coset [s (+) t] is positive in the exact quotient
cone (the "d" cone) when some Hermitian A in M_k(D_n) makes both s + A and
t - A PSD; the Archimedean "c" cone asks the same after every positive
epsilon shift of the unit.  Because the diagonal algebra is a von Neumann
algebra the two cones coincide; the package keeps both query paths so that
claim is tested rather than assumed.

Cosets are represented canonically by Frobenius-orthogonal projection along
the kernel, which makes the quotient map explicit and linear, and level-k
elements are carried as pairs of kn x kn blocks (the canonical shuffle).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IllConditioned, IncompatibleSystems, NumericalFailure, ShapeMismatch
from .feasibility import (
    DEFAULT_MAX_ITER,
    DEFAULT_SOLVE_TOL,
    FeasibilityOutcome,
    FeasibilityProblem,
    diag_block_project,
    solve,
)
from .matrix_kernel import (
    DEFAULT_TOL,
    Array,
    Tolerance,
    as_rng,
    eigvals_hermitian,
    frobenius_norm,
    hermitian_part,
    is_psd,
    require_hermitian,
)
from .cp_maps import LinearMatrixMap, bimodule_map_check, choi_psd, sampled_kpositive
from .operator_system import (
    DiagonalAlgebra,
    LevelElement,
    MatrixOperatorSystem,
    bimodule_check,
    level_element,
    orthonormal_hermitian_basis,
    random_psd_level,
    require_level_member,
    span_equal,
)

EPS_LADDER = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)


def pair_embed(p: Array, q: Array) -> Array:
    """Block-diagonal embedding (p, q) -> diag(p, q) in M_2n (or M_2kn at level k)."""
    np_, nq = p.shape[0], q.shape[0]
    out = np.zeros((np_ + nq, np_ + nq), dtype=complex)
    out[:np_, :np_] = p
    out[np_:, np_:] = q
    return out


def pair_split(m: Array) -> tuple[Array, Array]:
    half = m.shape[0] // 2
    return m[:half, :half], m[half:, half:]


@dataclass(frozen=True, eq=False)
class DirectSumSystem:
    left: MatrixOperatorSystem
    right: MatrixOperatorSystem
    ambient: MatrixOperatorSystem  # block-diagonal realization in M_2n


@dataclass(frozen=True, eq=False)
class AmalgamationKernel:
    """The kernel {a (+) (-a) : a diagonal}; contains no nonzero positive element."""

    n: int
    basis: Array  # (n, 2n, 2n), unnormalized E_ii (+) (-E_ii)


@dataclass(frozen=True, eq=False)
class CosetElement:
    """Canonical coset representative at level k: a pair of kn x kn Hermitian blocks.

    Canonical means the pair is Frobenius-orthogonal to the kernel at its
    level, i.e. each n x n block of s_block - t_block has zero diagonal.
    """

    level: int
    n: int
    s_block: Array
    t_block: Array

    def to_block_diag(self) -> Array:
        """Realize in M_k(M_2n) via the canonical shuffle."""
        k, n = self.level, self.n
        s4 = self.s_block.reshape(k, n, k, n)
        t4 = self.t_block.reshape(k, n, k, n)
        out = np.zeros((k, 2 * n, k, 2 * n), dtype=complex)
        out[:, :n, :, :n] = s4
        out[:, n:, :, n:] = t4
        return out.reshape(2 * k * n, 2 * k * n)

    @staticmethod
    def from_block_diag(m: Array, n: int) -> "CosetElement":
        k = m.shape[0] // (2 * n)
        m4 = m.reshape(k, 2 * n, k, 2 * n)
        s = m4[:, :n, :, :n].reshape(k * n, k * n)
        t = m4[:, n:, :, n:].reshape(k * n, k * n)
        return CosetElement(level=k, n=n, s_block=s, t_block=t)


@dataclass(frozen=True, eq=False)
class CoproductSystem:
    """The quotient (S (+) T) / kernel with its canonical coset space."""

    left: MatrixOperatorSystem
    right: MatrixOperatorSystem
    sum: DirectSumSystem
    kernel: AmalgamationKernel
    coset_space: MatrixOperatorSystem  # canonical representatives inside M_2n
    label: str = ""

    @property
    def n(self) -> int:
        return self.left.ambient_dim

    @property
    def dim(self) -> int:
        return self.coset_space.dim

    def coset(self, s_block, t_block, level: int | None = None) -> CosetElement:
        """Quotient map: project the pair onto the canonical representative."""
        s = require_hermitian(s_block, what="left block")
        t = require_hermitian(t_block, what="right block")
        if s.shape != t.shape:
            raise ShapeMismatch("coset blocks must share a shape")
        if level is None:
            level = s.shape[0] // self.n
        z = diag_block_project((s - t) / 2.0, level, self.n)
        return CosetElement(level=level, n=self.n, s_block=s - z, t_block=t + z)

    def unit_coset(self, k: int = 1) -> CosetElement:
        eye = np.eye(k * self.n, dtype=complex)
        return CosetElement(level=k, n=self.n, s_block=eye.copy(), t_block=eye.copy())

    def random_positive_coset(self, k: int, rng=None, tol: Tolerance = DEFAULT_TOL) -> CosetElement:
        """Coset of a random positive element of M_k(S (+) T).

        Every exact-cone member arises this way (positive representatives
        exist for d-cone members), so this samples the quotient cone.
        """
        rng = as_rng(rng)
        p = random_psd_level(self.left, k, rng, tol)
        q = random_psd_level(self.right, k, rng, tol)
        return self.coset(p, q, level=k)


def build_coproduct(
    left: MatrixOperatorSystem,
    right: MatrixOperatorSystem,
    label: str = "",
    tol: Tolerance = DEFAULT_TOL,
    rng=None,
    bimodule_trials: int = 6,
) -> CoproductSystem:
    """Construct the amalgamated coproduct of two diagonal-bimodule systems.

    Both systems must share the ambient dimension and pass the diagonal
    bimodule check; the coset space dimension then equals
    dim(S) + dim(T) - n exactly.
    """
    if left.ambient_dim != right.ambient_dim:
        raise IncompatibleSystems(
            f"ambient dims differ: {left.ambient_dim} vs {right.ambient_dim}"
        )
    n = left.ambient_dim
    alg = DiagonalAlgebra(n)
    rng = as_rng(rng)
    for side, sysm in (("left", left), ("right", right)):
        if not bimodule_check(sysm, alg, trials=bimodule_trials, rng=rng, tol=tol):
            raise IncompatibleSystems(f"{side} system is not a diagonal bimodule")

    sum_basis = [pair_embed(b, np.zeros((n, n))) for b in left.basis]
    sum_basis += [pair_embed(np.zeros((n, n)), c) for c in right.basis]
    ambient = MatrixOperatorSystem(
        ambient_dim=2 * n,
        basis=np.array(sum_basis),
        label=f"{left.label}(+){right.label}",
    )

    units = alg.units()
    kernel_basis = np.array([pair_embed(units[i], -units[i]) for i in range(n)])
    kernel = AmalgamationKernel(n=n, basis=kernel_basis)
    kernel_on = kernel_basis / np.sqrt(2.0)  # orthonormal: distinct diagonal positions

    # Canonical coset space: the Frobenius-orthogonal complement of the kernel.
    coeffs = np.einsum("kij,dij->dk", kernel_on.conj(), np.array(sum_basis)).real
    projected = np.array(sum_basis) - np.einsum("dk,kij->dij", coeffs, kernel_on)
    coset_basis = orthonormal_hermitian_basis(list(projected), 2 * n, rank_eps=tol.subspace_eps)

    expected = left.dim + right.dim - n
    if len(coset_basis) != expected:
        raise NumericalFailure(
            f"coset space dimension {len(coset_basis)} != {expected} (rank instability)"
        )
    coset_space = MatrixOperatorSystem(
        ambient_dim=2 * n, basis=coset_basis, label=f"({label or ambient.label})/J"
    )
    return CoproductSystem(
        left=left,
        right=right,
        sum=DirectSumSystem(left=left, right=right, ambient=ambient),
        kernel=kernel,
        coset_space=coset_space,
        label=label or f"{left.label} (+)_D {right.label}",
    )


def _coerce_level(sysm: MatrixOperatorSystem, x, tol: Tolerance) -> tuple[Array, int]:
    if isinstance(x, LevelElement):
        el = x
    else:
        el = level_element(sysm, x)
    require_level_member(sysm, el, tol)
    return el.block, el.level


def d_cone_member(
    cp: CoproductSystem,
    s,
    t,
    *,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_SOLVE_TOL,
    check_tol: Tolerance = DEFAULT_TOL,
    record_history: bool = False,
) -> FeasibilityOutcome:
    """Exact quotient-cone membership of the coset of s (+) t (witness search)."""
    s_blk, ks = _coerce_level(cp.left, s, check_tol)
    t_blk, kt = _coerce_level(cp.right, t, check_tol)
    if ks != kt:
        raise ShapeMismatch(f"levels differ: {ks} vs {kt}")
    problem = FeasibilityProblem(level=ks, n=cp.n, s_block=s_blk, t_block=t_blk, eps_shift=0.0)
    return solve(problem, max_iter=max_iter, tol=tol, check_tol=check_tol, record_history=record_history)


@dataclass(eq=False)
class CConeResult:
    """Archimedean-cone verdict with the per-epsilon feasibility trace."""

    member: bool | None  # None: ladder was not decisive
    trace: list  # of (eps, FeasibilityOutcome), in evaluation order

    def __bool__(self) -> bool:
        return self.member is True


def c_cone_member(
    cp: CoproductSystem,
    s,
    t,
    *,
    eps_ladder=EPS_LADDER,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_SOLVE_TOL,
    check_tol: Tolerance = DEFAULT_TOL,
    record_history: bool = False,
) -> CConeResult:
    """Archimedean-cone membership via a descending epsilon ladder.

    Member iff the shifted problem is feasible at every rung; a single
    infeasible rung refutes membership (feasibility is monotone in epsilon).
    """
    s_blk, ks = _coerce_level(cp.left, s, check_tol)
    t_blk, kt = _coerce_level(cp.right, t, check_tol)
    if ks != kt:
        raise ShapeMismatch(f"levels differ: {ks} vs {kt}")
    trace = []
    saw_undecided = False
    for eps in eps_ladder:
        problem = FeasibilityProblem(
            level=ks, n=cp.n, s_block=s_blk, t_block=t_blk, eps_shift=float(eps)
        )
        outcome = solve(
            problem, max_iter=max_iter, tol=tol, check_tol=check_tol, record_history=record_history
        )
        trace.append((float(eps), outcome))
        if outcome.infeasible:
            return CConeResult(member=False, trace=trace)
        if outcome.undecided:
            saw_undecided = True
    return CConeResult(member=None if saw_undecided else True, trace=trace)


def embed_left(cp: CoproductSystem, u, check_tol: Tolerance = DEFAULT_TOL) -> CosetElement:
    """Canonical embedding of the left system: u -> coset of 2 (u (+) 0)."""
    blk, k = _coerce_level(cp.left, u, check_tol)
    return cp.coset(2.0 * blk, np.zeros_like(blk), level=k)


def embed_right(cp: CoproductSystem, u, check_tol: Tolerance = DEFAULT_TOL) -> CosetElement:
    blk, k = _coerce_level(cp.right, u, check_tol)
    return cp.coset(np.zeros_like(blk), 2.0 * blk, level=k)


def embed_diagonal(cp: CoproductSystem, a) -> CosetElement:
    """Common embedding of a diagonal element (left and right agree on it)."""
    return embed_left(cp, np.asarray(a, dtype=complex))


@dataclass(eq=False)
class IntersectionResult:
    matches: bool
    dimension: int
    expected: int

    def __bool__(self) -> bool:
        return self.matches


def intersection_check(cp: CoproductSystem, tol: Tolerance = DEFAULT_TOL) -> IntersectionResult:
    """Verify that the embedded copies of S and T meet exactly in the diagonals."""
    n = cp.n
    u_mats = [embed_left(cp, b).to_block_diag() for b in cp.left.basis]
    v_mats = [embed_right(cp, b).to_block_diag() for b in cp.right.basis]
    ru = _real_rank(u_mats, tol)
    rv = _real_rank(v_mats, tol)
    rw = _real_rank(u_mats + v_mats, tol)
    inter_dim = ru + rv - rw

    u_sys = MatrixOperatorSystem(2 * n, orthonormal_hermitian_basis(u_mats, 2 * n, tol.subspace_eps))
    v_sys = MatrixOperatorSystem(2 * n, orthonormal_hermitian_basis(v_mats, 2 * n, tol.subspace_eps))
    units = DiagonalAlgebra(n).units()
    diag_inside = True
    for i in range(n):
        j = pair_embed(units[i], units[i])
        for sysm in (u_sys, v_sys):
            _, _, res = sysm.project(j)
            if res > tol.subspace_eps * (1.0 + frobenius_norm(j)):
                diag_inside = False
    return IntersectionResult(matches=diag_inside and inter_dim == n, dimension=inter_dim, expected=n)


def _real_rank(mats, tol: Tolerance) -> int:
    from .operator_system import _real_vec  # shared encoding

    rows = np.array([_real_vec(m) for m in mats])
    s = np.linalg.svd(rows, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol.subspace_eps * s[0]))


def universal_map(
    cp: CoproductSystem,
    phi1: LinearMatrixMap,
    phi2: LinearMatrixMap,
    *,
    rng=None,
    tol: Tolerance = DEFAULT_TOL,
    verify_trials: int = 60,
) -> LinearMatrixMap:
    """The unique map the coproduct factors through: [s (+) t] -> (phi1(s) + phi2(t)) / 2.

    Both inputs must be unital completely positive diagonal-bimodule maps into
    a common M_m agreeing on the diagonal algebra; complete positivity is
    re-verified exactly (Choi) on full-algebra domains and by sampling at
    levels 1 and 2 otherwise.
    """
    rng = as_rng(rng)
    n = cp.n
    if phi1.target_dim != phi2.target_dim:
        raise ShapeMismatch("the two maps must share a target dimension")
    m = phi1.target_dim
    if not span_equal(phi1.domain, cp.left, tol) or not span_equal(phi2.domain, cp.right, tol):
        raise IncompatibleSystems("map domains must span the coproduct factors")

    for name, phi in (("phi1", phi1), ("phi2", phi2)):
        if not phi.is_unital():
            raise IncompatibleSystems(f"{name} is not unital")
        if phi.domain.dim == phi.domain.ambient_dim ** 2:
            if not choi_psd(phi, tol):
                raise IncompatibleSystems(f"{name} is not completely positive (Choi)")
        else:
            for k in (1, 2):
                if not sampled_kpositive(phi, k, trials=verify_trials, rng=rng, tol=tol):
                    raise IncompatibleSystems(f"{name} failed sampled {k}-positivity")
        if not bimodule_map_check(phi, trials=10, rng=rng, tol=tol):
            raise IncompatibleSystems(f"{name} is not a diagonal bimodule map")

    units = DiagonalAlgebra(n).units()
    target_units = []
    for i in range(n):
        a1 = phi1.apply(units[i], tol)
        a2 = phi2.apply(units[i], tol)
        if frobenius_norm(a1 - a2) > 1e-8:
            raise IllConditioned("phi1 and phi2 disagree on the diagonal algebra")
        target_units.append(hermitian_part((a1 + a2) / 2.0))
    target_units = np.array(target_units)

    cols = []
    for b in cp.coset_space.basis:
        p, q = pair_split(b)
        img = (phi1.apply(p, tol) + phi2.apply(q, tol)) / 2.0
        cols.append(img.ravel())
    action = np.stack(cols, axis=1)

    source_units = np.array([pair_embed(units[i], units[i]) for i in range(n)])
    out = LinearMatrixMap(
        domain=cp.coset_space,
        target_dim=m,
        action=action,
        label=f"universal({phi1.label},{phi2.label})",
        module_dim=n,
        source_units=source_units,
        target_units=target_units,
        cone_sampler=lambda k, g: cp.random_positive_coset(k, g, tol).to_block_diag(),
    )

    if not out.is_unital():
        raise NumericalFailure("universal map lost unitality")
    for b in cp.left.basis:
        lhs = out.apply(embed_left(cp, b).to_block_diag(), tol)
        if frobenius_norm(lhs - phi1.apply(b, tol)) > 1e-10 * (1.0 + frobenius_norm(lhs)):
            raise NumericalFailure("universal map does not restrict to phi1")
    for b in cp.right.basis:
        lhs = out.apply(embed_right(cp, b).to_block_diag(), tol)
        if frobenius_norm(lhs - phi2.apply(b, tol)) > 1e-10 * (1.0 + frobenius_norm(lhs)):
            raise NumericalFailure("universal map does not restrict to phi2")
    return out


# ---------------------------------------------------------------------------
# Built-in worked example: the matched-diagonal section of the quotient map.
# ---------------------------------------------------------------------------

DEMO_S = np.array([[2.0, 2.5], [2.5, 2.0]], dtype=complex)
DEMO_T = 2.0 * np.eye(2, dtype=complex)


def matched_diagonal_demo(
    *,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_SOLVE_TOL,
    check_tol: Tolerance = DEFAULT_TOL,
) -> dict:
    """Worked example on M_2 (+)_D M_2 showing the matched-diagonal section
    of the quotient map is a linear bijection whose inverse is not positive.

    Returns a dict with per-step check records plus raw artifacts (solver
    history, spectra, epsilon ladder) for reporting.
    """
    from .cp_maps import full_matrix_system

    m2 = full_matrix_system(2)
    cp = build_coproduct(m2, m2, label="M_2 (+)_D M_2")
    checks = []

    # (a) the matched-diagonal subspace is a linear section of the quotient.
    sum_mats = [pair_embed(b, np.zeros((2, 2))) for b in m2.basis]
    sum_mats += [pair_embed(np.zeros((2, 2)), b) for b in m2.basis]
    rows = []
    for mat in sum_mats:
        p, q = pair_split(mat)
        rows.append([ (p[0, 0] - q[0, 0]).real, (p[1, 1] - q[1, 1]).real ])
    constraint = np.array(rows).T  # (2, 8): diagonal-matching functionals
    null = _nullspace(constraint)
    section_mats = [
        sum(c * mat for c, mat in zip(col, sum_mats)) for col in null.T
    ]
    section_dim = _real_rank(section_mats, check_tol)
    images = [cp.coset(*pair_split(mat)).to_block_diag() for mat in section_mats]
    image_rank = _real_rank(images, check_tol)
    checks.append(
        {
            "name": "matched-diagonal section is a bijection onto the quotient",
            "verdict": "pass" if section_dim == cp.dim == image_rank == 6 else "fail",
            "details": {"section_dim": section_dim, "quotient_dim": cp.dim, "image_rank": image_rank},
        }
    )

    # (b) the coset of the demo pair is positive in the quotient cone.
    d_out = d_cone_member(cp, DEMO_S, DEMO_T, max_iter=max_iter, tol=tol,
                          check_tol=check_tol, record_history=True)
    witness_eye_ok = is_psd(DEMO_S + np.eye(2), check_tol) and is_psd(DEMO_T - np.eye(2), check_tol)
    c_out = c_cone_member(cp, DEMO_S, DEMO_T, max_iter=max_iter, tol=tol, check_tol=check_tol)
    checks.append(
        {
            "name": "coset of the demo pair is positive (witness exists)",
            "verdict": "pass" if (d_out.feasible and witness_eye_ok and c_out.member) else "fail",
            "details": {
                "d_verdict": d_out.verdict.value,
                "iterations": d_out.iterations,
                "identity_witness_valid": witness_eye_ok,
                "c_member": c_out.member,
                "min_eig_s_plus_I": float(eigvals_hermitian(DEMO_S + np.eye(2))[0]),
            },
        }
    )

    # (c) the direct-sum representative itself is not positive.
    direct = pair_embed(DEMO_S, DEMO_T)
    min_eig = float(eigvals_hermitian(direct)[0])
    checks.append(
        {
            "name": "direct-sum representative is not PSD (section inverse not positive)",
            "verdict": "pass" if (not is_psd(direct, check_tol) and abs(min_eig + 0.5) < 1e-9) else "fail",
            "details": {"min_eigenvalue": min_eig},
        }
    )

    return {
        "checks": checks,
        "history": d_out.history,
        "ladder": [(eps, out.verdict.value, out.iterations) for eps, out in c_out.trace],
        "spectra": {
            "s (+) t": [float(x) for x in eigvals_hermitian(direct)],
            "s + A": [float(x) for x in eigvals_hermitian(DEMO_S + np.eye(2))],
            "t - A": [float(x) for x in eigvals_hermitian(DEMO_T - np.eye(2))],
        },
    }


def _nullspace(a: Array, rcond: float = 1e-10) -> Array:
    _, s, vt = np.linalg.svd(a, full_matrices=True)
    rank = int(np.sum(s > rcond * (s[0] if s.size else 1.0)))
    return vt[rank:].T.conj()

"""Finite-dimensional matrix operator systems with a diagonal bimodule action.

A system is stored as a real-orthonormal basis of Hermitian matrices (under
the Frobenius inner product); the system itself is the complex span of that
basis.  Because the basis is Hermitian, real orthonormality coincides with
complex orthonormality, so span projections are one einsum away.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotInSystem, ShapeMismatch
from .matrix_kernel import (
    DEFAULT_TOL,
    Array,
    Tolerance,
    as_matrix,
    as_rng,
    eigvals_hermitian,
    frobenius_norm,
    hermitian_part,
    is_psd,
    require_hermitian,
)


def _real_vec(h: Array) -> Array:
    """Isometry (Hermitian matrices, real Frobenius pairing) -> Euclidean R^(2n^2)."""
    return np.concatenate([h.real.ravel(), h.imag.ravel()])


def _real_unvec(v: Array, n: int) -> Array:
    re = v[: n * n].reshape(n, n)
    im = v[n * n :].reshape(n, n)
    return hermitian_part(re + 1j * im)


def orthonormal_hermitian_basis(mats, n: int, rank_eps: float) -> Array:
    """SVD-orthonormalize a family of Hermitian matrices over the reals.

    Returns a (d, n, n) stack, orthonormal for the Frobenius inner product,
    spanning the same real subspace; near-dependent directions are dropped
    at the relative singular-value cutoff rank_eps.
    """
    rows = np.array([_real_vec(m) for m in mats])
    _, s, vt = np.linalg.svd(rows, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((0, n, n), dtype=complex)
    keep = vt[s > rank_eps * s[0]]
    # fix the SVD sign ambiguity so construction is deterministic
    out = []
    for v in keep:
        lead = v[np.argmax(np.abs(v))]
        out.append(_real_unvec(-v if lead < 0 else v, n))
    return np.array(out)


@dataclass(frozen=True, eq=False)
class MatrixOperatorSystem:
    """Self-adjoint unital subspace of M_n, given by a Hermitian orthonormal basis."""

    ambient_dim: int
    basis: Array  # (dim, n, n) Hermitian, Frobenius-orthonormal
    label: str = ""
    is_algebra: bool = False

    @property
    def dim(self) -> int:
        """Complex dimension of the span (= real dimension of its Hermitian part)."""
        return len(self.basis)

    def project(self, m: Array) -> tuple[Array, Array, float]:
        """Orthogonal projection onto the complex span.

        Returns (projection, coefficients, residual norm).
        """
        coeffs = np.einsum("dij,ij->d", self.basis.conj(), m)
        proj = np.einsum("d,dij->ij", coeffs, self.basis)
        return proj, coeffs, frobenius_norm(m - proj)


@dataclass(frozen=True)
class DiagonalAlgebra:
    """The algebra of diagonal matrices inside M_n."""

    dim: int

    def units(self) -> Array:
        """The diagonal matrix units E_ii, stacked (n, n, n)."""
        out = np.zeros((self.dim, self.dim, self.dim), dtype=complex)
        for i in range(self.dim):
            out[i, i, i] = 1.0
        return out

    def random(self, rng=None, scale: float = 1.0) -> Array:
        rng = as_rng(rng)
        d = rng.normal(size=self.dim) + 1j * rng.normal(size=self.dim)
        return np.diag(scale * d)

    def random_hermitian(self, rng=None, scale: float = 1.0) -> Array:
        rng = as_rng(rng)
        return np.diag(scale * rng.normal(size=self.dim)).astype(complex)

    def as_system(self, tol: Tolerance = DEFAULT_TOL) -> MatrixOperatorSystem:
        return make_system(self.dim, list(self.units()), label=f"D_{self.dim}", tol=tol)


@dataclass(frozen=True, eq=False)
class LevelElement:
    """A level-k element of a system: a Hermitian (k n) x (k n) block matrix."""

    level: int
    ambient_dim: int
    block: Array

    def __post_init__(self):
        expected = self.level * self.ambient_dim
        if self.block.shape != (expected, expected):
            raise ShapeMismatch(
                f"level-{self.level} block must be {expected}x{expected}, got {self.block.shape}"
            )


def level_element(sys: MatrixOperatorSystem, block, level: int | None = None) -> LevelElement:
    """Wrap a Hermitian block as a level element of the given system."""
    b = require_hermitian(block, what="level block")
    n = sys.ambient_dim
    if level is None:
        if b.shape[0] % n:
            raise ShapeMismatch(f"block dim {b.shape[0]} not a multiple of ambient dim {n}")
        level = b.shape[0] // n
    return LevelElement(level=level, ambient_dim=n, block=b)


def unit_level(sys: MatrixOperatorSystem, k: int) -> LevelElement:
    return LevelElement(k, sys.ambient_dim, np.eye(k * sys.ambient_dim, dtype=complex))


def make_system(
    n: int,
    generators=(),
    label: str = "",
    tol: Tolerance = DEFAULT_TOL,
) -> MatrixOperatorSystem:
    """Build the operator system spanned by I_n, the generators and their adjoints.

    The stored basis is a Hermitian orthonormal spanning set, so the unit
    containment and self-adjointness invariants hold by construction.
    """
    if n < 1:
        raise ShapeMismatch("ambient dimension must be positive")
    mats = [np.eye(n, dtype=complex)]
    for g in generators:
        g = as_matrix(g)
        if g.shape != (n, n):
            raise ShapeMismatch(f"generator shape {g.shape} does not match ambient dim {n}")
        mats.append(hermitian_part(g))
        mats.append((g - g.conj().T) / 2j)
    basis = orthonormal_hermitian_basis(mats, n, rank_eps=tol.subspace_eps)
    sys = MatrixOperatorSystem(ambient_dim=n, basis=basis, label=label)
    # Unit containment is structural; a failure here is a numerics bug.
    _, _, res = sys.project(np.eye(n, dtype=complex))
    assert res <= 1e-10 * n, "unit fell out of the span during orthonormalization"
    return sys


def contains(sys: MatrixOperatorSystem, m, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Membership of a matrix in the complex span of the system."""
    m = as_matrix(m)
    if m.shape != (sys.ambient_dim, sys.ambient_dim):
        raise ShapeMismatch(f"matrix shape {m.shape} does not match ambient dim {sys.ambient_dim}")
    _, _, res = sys.project(m)
    return res <= tol.subspace_eps * (1.0 + frobenius_norm(m))


def span_equal(a: MatrixOperatorSystem, b: MatrixOperatorSystem, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Mutual containment of two systems' spans."""
    if a.ambient_dim != b.ambient_dim:
        return False
    return all(contains(b, m, tol) for m in a.basis) and all(contains(a, m, tol) for m in b.basis)


def order_norm(sys: MatrixOperatorSystem, v, tol: Tolerance = DEFAULT_TOL) -> float:
    """Order norm inf{r >= 0 : r I +/- v PSD} of a Hermitian element.

    For a concrete system whose unit is the identity this is the spectral norm.
    """
    v = require_hermitian(v, what="order_norm argument")
    if not contains(sys, v, tol):
        raise NotInSystem("element is not in the system")
    w = eigvals_hermitian(v)
    return float(max(abs(w[0]), abs(w[-1]))) if w.size else 0.0


def level_positive(sys: MatrixOperatorSystem, x: LevelElement, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Positivity of a level element in the inherited cone (plain PSD test)."""
    require_level_member(sys, x, tol)
    return is_psd(x.block, tol)


def level_blocks(block: Array, k: int, n: int) -> Array:
    """View a (kn, kn) matrix as its k x k grid of n x n blocks, shape (k, k, n, n)."""
    return block.reshape(k, n, k, n).transpose(0, 2, 1, 3)


def level_member_residual(sys: MatrixOperatorSystem, block: Array, k: int) -> float:
    """Max relative distance of the n x n blocks from the system span."""
    n = sys.ambient_dim
    worst = 0.0
    for row in level_blocks(block, k, n):
        for sub in row:
            _, _, res = sys.project(sub)
            worst = max(worst, res / (1.0 + frobenius_norm(sub)))
    return worst


def require_level_member(sys: MatrixOperatorSystem, x: LevelElement, tol: Tolerance = DEFAULT_TOL):
    if x.ambient_dim != sys.ambient_dim:
        raise ShapeMismatch("level element ambient dim does not match the system")
    if level_member_residual(sys, x.block, x.level) > tol.subspace_eps:
        raise NotInSystem("level element has blocks outside the system span")


def random_in_span(sys: MatrixOperatorSystem, rng=None, scale: float = 1.0) -> Array:
    """Random element of the complex span (complex Gaussian coefficients)."""
    rng = as_rng(rng)
    c = rng.normal(size=sys.dim) + 1j * rng.normal(size=sys.dim)
    return scale * np.einsum("d,dij->ij", c, sys.basis)


def random_hermitian_in_span(sys: MatrixOperatorSystem, rng=None, scale: float = 1.0) -> Array:
    rng = as_rng(rng)
    c = rng.normal(size=sys.dim)
    return scale * np.einsum("d,dij->ij", c, sys.basis)


def random_hermitian_level(sys: MatrixOperatorSystem, k: int, rng=None, scale: float = 1.0) -> Array:
    """Random Hermitian element of M_k(system)."""
    rng = as_rng(rng)
    n = sys.ambient_dim
    out = np.zeros((k * n, k * n), dtype=complex)
    for i in range(k):
        for j in range(i, k):
            if i == j:
                b = random_hermitian_in_span(sys, rng, scale)
            else:
                b = random_in_span(sys, rng, scale)
            out[i * n : (i + 1) * n, j * n : (j + 1) * n] = b
            out[j * n : (j + 1) * n, i * n : (i + 1) * n] = b.conj().T
    return hermitian_part(out)


def random_level_matrix(sys: MatrixOperatorSystem, k: int, rng=None, scale: float = 1.0) -> Array:
    """Random (not necessarily Hermitian) element of M_k(system)."""
    rng = as_rng(rng)
    n = sys.ambient_dim
    out = np.zeros((k * n, k * n), dtype=complex)
    for i in range(k):
        for j in range(k):
            out[i * n : (i + 1) * n, j * n : (j + 1) * n] = random_in_span(sys, rng, scale)
    return out


def project_level(sys: MatrixOperatorSystem, block: Array, k: int) -> tuple[Array, float]:
    """Blockwise projection of a (kn, kn) matrix onto M_k(span); returns (proj, residual)."""
    n = sys.ambient_dim
    out = np.zeros_like(block)
    for i in range(k):
        for j in range(k):
            sub = block[i * n : (i + 1) * n, j * n : (j + 1) * n]
            out[i * n : (i + 1) * n, j * n : (j + 1) * n] = sys.project(sub)[0]
    return out, frobenius_norm(block - out)


def random_psd_level(
    sys: MatrixOperatorSystem,
    k: int,
    rng=None,
    tol: Tolerance = DEFAULT_TOL,
    scale: float = 1.0,
) -> Array:
    """Random positive element of M_k(system), in span by construction.

    Primary draw is the Wishart-style V* V with V in M_k(span); that stays in
    the span only when the span is closed under multiplication, so when the
    blockwise projection of V* V leaves the span (thin subsystems) we fall
    back to a Hermitian draw shifted by a multiple of the unit.
    """
    rng = as_rng(rng)
    v = random_level_matrix(sys, k, rng, scale)
    p = v.conj().T @ v
    proj, res = project_level(sys, p, k)
    if res <= tol.subspace_eps * (1.0 + frobenius_norm(p)):
        proj = hermitian_part(proj)
        if is_psd(proj, tol):
            return proj
    h = random_hermitian_level(sys, k, rng, scale)
    lam = float(eigvals_hermitian(h)[0])
    shift = max(0.0, -lam) + float(rng.uniform(0.0, 1.0)) * scale
    return h + shift * np.eye(k * sys.ambient_dim)


def bimodule_check(
    sys: MatrixOperatorSystem,
    alg: DiagonalAlgebra,
    trials: int = 25,
    rng=None,
    tol: Tolerance = DEFAULT_TOL,
) -> bool:
    """Verify the diagonal-bimodule axioms for the system.

    The span condition (d . s . d' stays in the span) is checked exhaustively
    over diagonal units and basis elements, which certifies it by bilinearity;
    random diagonals and the positivity-compatibility condition X P X* for
    level elements are sampled on top.
    """
    if alg.dim != sys.ambient_dim:
        raise ShapeMismatch("algebra dimension does not match the system's ambient dimension")
    rng = as_rng(rng)
    n = sys.ambient_dim
    units = alg.units()

    for b in sys.basis:
        for i in range(n):
            for j in range(n):
                if not contains(sys, units[i] @ b @ units[j], tol):
                    return False

    for _ in range(max(1, trials // 5)):
        d1, d2 = alg.random(rng), alg.random(rng)
        s = random_in_span(sys, rng)
        if not contains(sys, d1 @ s @ d2, tol):
            return False

    for _ in range(trials):
        k = int(rng.integers(1, 3))
        m = int(rng.integers(1, 3))
        p = random_psd_level(sys, k, rng, tol)
        x = _random_diag_block_matrix(m, k, n, rng)
        y = hermitian_part(x @ p @ x.conj().T)
        if not is_psd(y, tol):
            return False
        _, res = project_level(sys, y, m)
        if res > tol.subspace_eps * (1.0 + frobenius_norm(y)):
            return False
    return True


def _random_diag_block_matrix(m: int, k: int, n: int, rng) -> Array:
    """Random element of M_{m,k}(D_n): an m x k grid of diagonal n x n blocks."""
    out = np.zeros((m * n, k * n), dtype=complex)
    for i in range(m):
        for j in range(k):
            d = rng.normal(size=n) + 1j * rng.normal(size=n)
            out[i * n : (i + 1) * n, j * n : (j + 1) * n] = np.diag(d)
    return out

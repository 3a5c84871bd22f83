"""Dense complex linear algebra for cone computations.

Everything downstream (operator systems, quotient cones, the feasibility
solver) reduces to Hermitian eigenvalue questions in low dimension, so this
module pins the conventions once: how near-Hermitian input is symmetrized,
how PSD-ness is decided, and which tolerances are in play.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotHermitian, NumericalFailure, ShapeMismatch

Array = np.ndarray

# Relative Frobenius defect beyond which input is rejected instead of symmetrized.
HERMITIAN_REJECT = 1e-6


def as_matrix(m) -> Array:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ShapeMismatch(f"expected a 2-d matrix, got ndim={a.ndim}")
    return a


def frobenius_norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a)))


def frobenius_inner(a, b) -> complex:
    """Frobenius pairing trace(a* b), conjugate-linear in the first slot."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def hermitian_part(m: Array) -> Array:
    return (m + m.conj().T) / 2


def require_hermitian(m, *, what: str = "matrix") -> Array:
    """Symmetrize a near-Hermitian matrix, rejecting genuinely lopsided input.

    Round-off-level asymmetry is absorbed by (M + M*)/2; a relative defect
    above HERMITIAN_REJECT means the caller passed the wrong matrix.
    """
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"{what} must be square, got {a.shape}")
    defect = frobenius_norm(a - a.conj().T)
    if defect > HERMITIAN_REJECT * (1.0 + frobenius_norm(a)):
        raise NotHermitian(f"{what} is not hermitian (defect {defect:.3e})")
    return hermitian_part(a)


@dataclass(frozen=True)
class Tolerance:
    """Tolerance policy for positivity and subspace-membership decisions.

    psd_eps None means auto: 1e-9 * (1 + spectral norm of the operand).
    """

    psd_eps: float | None = None
    subspace_eps: float = 1e-8

    def __post_init__(self):
        if self.psd_eps is not None and self.psd_eps < 0:
            raise ValueError("psd_eps must be nonnegative")
        if self.subspace_eps < 0:
            raise ValueError("subspace_eps must be nonnegative")

    def psd_slack(self, operand_norm: float) -> float:
        if self.psd_eps is not None:
            return self.psd_eps
        return 1e-9 * (1.0 + operand_norm)


DEFAULT_TOL = Tolerance()


def eigvals_hermitian(h) -> Array:
    """Ascending eigenvalues of a Hermitian matrix (no eigenvectors)."""
    h = require_hermitian(h)
    try:
        return np.linalg.eigvalsh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigvalsh failed: {exc}") from exc


def eig_hermitian(h) -> tuple[Array, Array]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, unitary eigenvector matrix) and verifies
    the reconstruction U diag(w) U* against the input.
    """
    h = require_hermitian(h)
    try:
        w, u = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigh failed to converge: {exc}") from exc
    err = frobenius_norm((u * w) @ u.conj().T - h)
    if err > 1e-10 * (1.0 + frobenius_norm(h)):
        raise NumericalFailure(f"eigh reconstruction error {err:.3e} too large")
    return w, u


def spectral_norm(h) -> float:
    """max |eigenvalue| of a Hermitian matrix."""
    w = eigvals_hermitian(h)
    return float(max(abs(w[0]), abs(w[-1]))) if w.size else 0.0


def min_eigenvalue(h) -> float:
    w = eigvals_hermitian(h)
    return float(w[0])


def is_psd(h, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff the minimum eigenvalue is >= -psd slack."""
    w = eigvals_hermitian(h)
    if w.size == 0:
        return True
    operand_norm = float(max(abs(w[0]), abs(w[-1])))
    return float(w[0]) >= -tol.psd_slack(operand_norm)


def psd_project(h) -> Array:
    """Frobenius-nearest PSD matrix: clip negative eigenvalues to zero."""
    h = require_hermitian(h)
    try:
        w, u = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigh failed to converge: {exc}") from exc
    return hermitian_part((u * np.maximum(w, 0.0)) @ u.conj().T)


def as_rng(seed_or_rng=None) -> np.random.Generator:
    """Coerce an int seed / Generator / None into a Generator (None -> seed 0)."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(0 if seed_or_rng is None else seed_or_rng)


def random_hermitian(n: int, rng, scale: float = 1.0) -> Array:
    rng = as_rng(rng)
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return hermitian_part(scale * m)

"""Verification of complete positivity and diagonal-bimodule properties of maps.

Maps on a full matrix algebra get the exact Choi criterion; maps on proper
subsystems are checked by sampling positive elements of the domain cone at a
given level, which can refute but not certify complete positivity.  The
sampling cone defaults to (PSD ambient) intersected with the span; domains
with a different positivity structure (quotients) supply their own sampler.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainNotFull, MissingRepresentation, NotHermitian, NotInSystem, ShapeMismatch
from .matrix_kernel import (
    DEFAULT_TOL,
    Array,
    Tolerance,
    as_matrix,
    as_rng,
    frobenius_norm,
    hermitian_part,
    is_psd,
)
from .operator_system import (
    DiagonalAlgebra,
    MatrixOperatorSystem,
    make_system,
    random_psd_level,
)


def _vec(m: Array) -> Array:
    return np.asarray(m, dtype=complex).ravel()


@dataclass(eq=False)
class LinearMatrixMap:
    """A linear map from an operator system into M_m, stored by its basis action.

    Column j of ``action`` is the vectorized image of the j-th domain basis
    element, so the map is determined on the whole complex span.  The images
    of the Hermitian basis must be Hermitian (within 1e-10).

    ``source_units`` / ``target_units`` carry the diagonal-unit action on each
    side for bimodule checks; they default to the matrix units E_ii whenever
    the relevant dimension equals ``module_dim``.  ``cone_sampler(k, rng)``,
    when set, draws positive domain elements at level k in place of the
    default ambient-PSD sampler.
    """

    domain: MatrixOperatorSystem
    target_dim: int
    action: Array  # (target_dim**2, domain.dim)
    label: str = ""
    module_dim: int | None = None
    source_units: Array | None = None
    target_units: Array | None = None
    cone_sampler: Callable[[int, np.random.Generator], Array] | None = None

    def __post_init__(self):
        m, d = self.target_dim, self.domain.dim
        if self.action.shape != (m * m, d):
            raise ShapeMismatch(f"action must be {(m * m, d)}, got {self.action.shape}")
        if self.module_dim is None:
            object.__setattr__(self, "module_dim", self.domain.ambient_dim)
        for j in range(d):
            img = self.action[:, j].reshape(m, m)
            if frobenius_norm(img - img.conj().T) > 1e-10 * (1.0 + frobenius_norm(img)):
                raise NotHermitian(f"image of hermitian basis element {j} is not hermitian")

    @property
    def source_dim(self) -> int:
        return self.domain.ambient_dim

    @classmethod
    def from_callable(
        cls,
        domain: MatrixOperatorSystem,
        target_dim: int,
        fn: Callable[[Array], Array],
        label: str = "",
        **kwargs,
    ) -> "LinearMatrixMap":
        cols = [_vec(as_matrix(fn(b))) for b in domain.basis]
        action = np.stack(cols, axis=1) if cols else np.zeros((target_dim**2, 0), dtype=complex)
        return cls(domain=domain, target_dim=target_dim, action=action, label=label, **kwargs)

    def coefficients(self, m: Array, tol: Tolerance = DEFAULT_TOL) -> Array:
        m = as_matrix(m)
        n = self.domain.ambient_dim
        if m.shape != (n, n):
            raise ShapeMismatch(f"argument must be {n}x{n}, got {m.shape}")
        proj, coeffs, res = self.domain.project(m)
        if res > tol.subspace_eps * (1.0 + frobenius_norm(m)):
            raise NotInSystem("argument is outside the map's domain span")
        return coeffs

    def apply(self, m: Array, tol: Tolerance = DEFAULT_TOL) -> Array:
        c = self.coefficients(m, tol)
        return (self.action @ c).reshape(self.target_dim, self.target_dim)

    def apply_level(self, block: Array, k: int, tol: Tolerance = DEFAULT_TOL) -> Array:
        """Entrywise amplification: apply the map to each n x n block."""
        n = self.domain.ambient_dim
        block = as_matrix(block)
        if block.shape != (k * n, k * n):
            raise ShapeMismatch(f"level-{k} block must be {(k * n, k * n)}, got {block.shape}")
        m = self.target_dim
        out = np.zeros((k * m, k * m), dtype=complex)
        for i in range(k):
            for j in range(k):
                sub = block[i * n : (i + 1) * n, j * n : (j + 1) * n]
                out[i * m : (i + 1) * m, j * m : (j + 1) * m] = self.apply(sub, tol)
        return out

    def resolved_source_units(self) -> Array:
        if self.source_units is not None:
            return self.source_units
        if self.module_dim == self.domain.ambient_dim:
            return DiagonalAlgebra(self.module_dim).units()
        raise MissingRepresentation("no diagonal-unit action declared on the source")

    def resolved_target_units(self) -> Array:
        if self.target_units is not None:
            return self.target_units
        if self.module_dim == self.target_dim:
            return DiagonalAlgebra(self.module_dim).units()
        raise MissingRepresentation("no diagonal-unit representation declared on the target")

    def is_unital(self, tol: float = 1e-10) -> bool:
        n = self.domain.ambient_dim
        img = self.apply(np.eye(n, dtype=complex))
        return frobenius_norm(img - np.eye(self.target_dim)) <= tol * self.target_dim


def identity_map(n: int, tol: Tolerance = DEFAULT_TOL) -> LinearMatrixMap:
    dom = full_matrix_system(n, tol)
    return LinearMatrixMap.from_callable(dom, n, lambda m: m, label=f"id_{n}")


def transpose_map(n: int, tol: Tolerance = DEFAULT_TOL) -> LinearMatrixMap:
    dom = full_matrix_system(n, tol)
    return LinearMatrixMap.from_callable(dom, n, lambda m: m.T, label=f"transpose_{n}")


def full_matrix_system(n: int, tol: Tolerance = DEFAULT_TOL) -> MatrixOperatorSystem:
    units = [np.zeros((n, n), dtype=complex) for _ in range(n * n)]
    for i in range(n):
        for j in range(n):
            units[i * n + j][i, j] = 1.0
    return make_system(n, units, label=f"M_{n}", tol=tol)


def compose(outer: LinearMatrixMap, inner: LinearMatrixMap, tol: Tolerance = DEFAULT_TOL) -> LinearMatrixMap:
    """outer o inner; the image of inner must lie in outer's domain span."""
    if outer.domain.ambient_dim != inner.target_dim:
        raise ShapeMismatch("composition dimensions do not match")
    return LinearMatrixMap.from_callable(
        inner.domain,
        outer.target_dim,
        lambda m: outer.apply(inner.apply(m, tol), tol),
        label=f"{outer.label}o{inner.label}",
        module_dim=inner.module_dim,
        source_units=inner.source_units,
        target_units=outer.target_units,
        cone_sampler=inner.cone_sampler,
    )


def choi_matrix(phi: LinearMatrixMap, tol: Tolerance = DEFAULT_TOL) -> Array:
    """Block matrix [phi(E_ij)]_ij; defined only for maps on a full M_n."""
    n = phi.domain.ambient_dim
    if phi.domain.dim != n * n:
        raise DomainNotFull("Choi criterion needs the map defined on all of M_n")
    m = phi.target_dim
    out = np.zeros((n * m, n * m), dtype=complex)
    e = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            e[i, j] = 1.0
            out[i * m : (i + 1) * m, j * m : (j + 1) * m] = phi.apply(e, tol)
            e[i, j] = 0.0
    return out


def choi_psd(phi: LinearMatrixMap, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Exact complete-positivity test via positivity of the Choi matrix."""
    return is_psd(hermitian_part(choi_matrix(phi, tol)), tol)


@dataclass
class KPositivityResult:
    passed: bool
    counterexample: Array | None = None
    trials: int = 0

    def __bool__(self) -> bool:
        return self.passed


def sampled_kpositive(
    phi: LinearMatrixMap,
    k: int,
    trials: int = 200,
    rng=None,
    tol: Tolerance = DEFAULT_TOL,
) -> KPositivityResult:
    """Sampled k-positivity: images of random positive level-k domain elements stay PSD.

    A False result carries the offending positive element; True only means no
    counterexample was sampled.
    """
    if k > 4:
        raise ShapeMismatch("levels above 4 are out of scope for sampling")
    rng = as_rng(rng)
    for t in range(trials):
        if phi.cone_sampler is not None:
            p = phi.cone_sampler(k, rng)
        else:
            p = random_psd_level(phi.domain, k, rng, tol)
        img = hermitian_part(phi.apply_level(p, k, tol))
        if not is_psd(img, tol):
            return KPositivityResult(False, counterexample=p, trials=t + 1)
    return KPositivityResult(True, trials=trials)


def bimodule_map_check(
    phi: LinearMatrixMap,
    trials: int = 20,
    rng=None,
    tol: Tolerance = DEFAULT_TOL,
    atol: float = 1e-10,
) -> bool:
    """Exhaustive diagonal-bimodule check plus the unital-criterion check.

    Over all diagonal units U_i, U_j and domain basis elements b this verifies
    phi(U_i b U_j) = pi(E_ii) phi(b) pi(E_jj), and separately that
    phi(a) = pi(a) phi(1) for diagonal a; random diagonal pairs are sampled
    on top of the exhaustive pass.
    """
    rng = as_rng(rng)
    src = phi.resolved_source_units()
    tgt = phi.resolved_target_units()
    nmod = phi.module_dim
    scale = 1.0 + float(np.max(np.abs(phi.action))) if phi.action.size else 1.0

    for b in phi.domain.basis:
        phib = phi.apply(b, tol)
        for i in range(nmod):
            for j in range(nmod):
                try:
                    lhs = phi.apply(src[i] @ b @ src[j], tol)
                except NotInSystem:
                    return False
                rhs = tgt[i] @ phib @ tgt[j]
                if frobenius_norm(lhs - rhs) > atol * scale:
                    return False

    unit = np.eye(phi.domain.ambient_dim, dtype=complex)
    phi_unit = phi.apply(unit, tol)
    for i in range(nmod):
        if frobenius_norm(phi.apply(src[i], tol) - tgt[i] @ phi_unit) > atol * scale:
            return False

    for _ in range(trials):
        d = rng.normal(size=nmod) + 1j * rng.normal(size=nmod)
        a_src = sum(d[i] * src[i] for i in range(nmod))
        a_tgt = sum(d[i] * tgt[i] for i in range(nmod))
        if frobenius_norm(phi.apply(a_src, tol) - a_tgt @ phi_unit) > atol * scale * nmod:
            return False
    return True

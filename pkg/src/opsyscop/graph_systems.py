"""Graph operator systems inside M_n and the diagonal conditional expectation.

The system of a graph on n vertices is spanned by the diagonal matrix units
together with the matrix units of its edges (both directions), so its complex
dimension is n + 2|E|.  These are exactly the operator systems that are
bimodules over the diagonal algebra.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import InputFormatError, NumericalFailure
from .matrix_kernel import DEFAULT_TOL, Array, Tolerance, as_rng
from .cp_maps import LinearMatrixMap, full_matrix_system
from .operator_system import MatrixOperatorSystem, make_system


@dataclass(frozen=True)
class Graph:
    """Undirected graph without self-loops, vertices 1..n."""

    vertex_count: int
    edges: frozenset  # of (i, j) tuples with i < j

    def edge_list(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def graph(n: int, edges) -> Graph:
    if n < 1:
        raise InputFormatError("vertex count must be positive")
    normalized = set()
    for e in edges:
        i, j = int(e[0]), int(e[1])
        if i == j:
            raise InputFormatError(f"self-loop at vertex {i} is not allowed")
        if not (1 <= i <= n and 1 <= j <= n):
            raise InputFormatError(f"edge ({i},{j}) outside 1..{n}")
        normalized.add((min(i, j), max(i, j)))
    return Graph(vertex_count=n, edges=frozenset(normalized))


def complete_graph(n: int) -> Graph:
    return graph(n, itertools.combinations(range(1, n + 1), 2))


def empty_graph(n: int) -> Graph:
    return graph(n, [])


def path_graph(n: int) -> Graph:
    return graph(n, [(i, i + 1) for i in range(1, n)])


def random_graph(n: int, rng=None, p: float = 0.5) -> Graph:
    rng = as_rng(rng)
    edges = [e for e in itertools.combinations(range(1, n + 1), 2) if rng.uniform() < p]
    return graph(n, edges)


def graph_system(g: Graph, tol: Tolerance = DEFAULT_TOL) -> MatrixOperatorSystem:
    """The operator system span{E_ii} + span{E_ij, E_ji : (i,j) edge} in M_n."""
    n = g.vertex_count
    gens = []
    for i in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[i, i] = 1.0
        gens.append(e)
    for i, j in g.edge_list():
        e = np.zeros((n, n), dtype=complex)
        e[i - 1, j - 1] = 1.0
        gens.append(e)
    label = f"S_G(n={n},|E|={len(g.edges)})"
    return make_system(n, gens, label=label, tol=tol)


def diagonal_expectation(n: int, tol: Tolerance = DEFAULT_TOL) -> LinearMatrixMap:
    """Conditional expectation of M_n onto the diagonal algebra (zero off-diagonals)."""
    dom = full_matrix_system(n, tol)
    return LinearMatrixMap.from_callable(
        dom, n, lambda m: np.diag(np.diag(m)), label=f"diag_expectation_{n}"
    )


def generated_algebra(sys: MatrixOperatorSystem, tol: Tolerance = DEFAULT_TOL) -> MatrixOperatorSystem:
    """Smallest subalgebra of M_n containing the system.

    Iterates span <- span + span.span until the dimension stabilizes; the
    dimension is strictly increasing while open and bounded by n^2, so the
    loop terminates in at most n^2 productive rounds.
    """
    n = sys.ambient_dim
    basis = _complex_orthonormal(list(sys.basis), n, tol)
    for _ in range(n * n + 2):
        prods = [a @ b for a in basis for b in basis]
        new_basis = _complex_orthonormal(basis + prods, n, tol)
        if len(new_basis) == len(basis):
            out = make_system(n, basis + prods, label=f"alg({sys.label})", tol=tol)
            _verify_closed(out, tol)
            return MatrixOperatorSystem(
                ambient_dim=n, basis=out.basis, label=out.label, is_algebra=True
            )
        if len(new_basis) > n * n:
            raise NumericalFailure("generated algebra dimension exceeded n^2")
        basis = new_basis
    raise NumericalFailure("generated algebra dimension did not stabilize")


def _complex_orthonormal(mats, n: int, tol: Tolerance) -> list[Array]:
    rows = np.array([m.ravel() for m in mats])
    _, s, vt = np.linalg.svd(rows, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return []
    keep = s > tol.subspace_eps * s[0]
    return [v.reshape(n, n) for v in vt[keep]]


def _verify_closed(sys: MatrixOperatorSystem, tol: Tolerance):
    from .operator_system import contains  # local import to avoid cycles at module load

    for a in sys.basis:
        if not contains(sys, a.conj().T, tol):
            raise NumericalFailure("generated algebra is not closed under adjoints")
        for b in sys.basis:
            if not contains(sys, a @ b, tol):
                raise NumericalFailure("generated algebra is not closed under products")

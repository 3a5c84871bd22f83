"""JSON encoding of matrices, systems, graphs, coproducts and verdicts.

Complex scalars travel as [re, im] pairs; matrices as nested row-major
arrays.  Readers are lenient (bare reals are accepted), writers always emit
the pair form.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import InputFormatError
from .coproduct import CConeResult, CoproductSystem, build_coproduct
from .feasibility import FeasibilityOutcome
from .graph_systems import Graph, graph
from .matrix_kernel import DEFAULT_TOL, Array, Tolerance
from .operator_system import MatrixOperatorSystem, make_system


def complex_to_json(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _scalar_from_json(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise InputFormatError(f"bad complex scalar: {v!r}")


def matrix_to_json(m: Array) -> list:
    m = np.asarray(m, dtype=complex)
    return [[complex_to_json(z) for z in row] for row in m]


def matrix_from_json(obj) -> Array:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise InputFormatError("matrix must be a non-empty list of rows")
    rows = [[_scalar_from_json(v) for v in r] for r in obj]
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise InputFormatError("matrix rows have inconsistent lengths")
    return np.array(rows, dtype=complex)


def system_to_json(sys: MatrixOperatorSystem) -> dict:
    return {
        "ambient_dim": sys.ambient_dim,
        "label": sys.label,
        "generators": [matrix_to_json(b) for b in sys.basis],
    }


def system_from_json(obj, tol: Tolerance = DEFAULT_TOL) -> MatrixOperatorSystem:
    try:
        n = int(obj["ambient_dim"])
        label = str(obj.get("label", ""))
        gens = [matrix_from_json(g) for g in obj.get("generators", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputFormatError(f"bad system object: {exc}") from exc
    for g in gens:
        if g.shape != (n, n):
            raise InputFormatError(f"generator shape {g.shape} does not match ambient_dim {n}")
    return make_system(n, gens, label=label, tol=tol)


def graph_to_json(g: Graph) -> dict:
    return {"n": g.vertex_count, "edges": [list(e) for e in g.edge_list()]}


def graph_from_json(obj) -> Graph:
    try:
        n = int(obj["n"])
        edges = [(int(e[0]), int(e[1])) for e in obj.get("edges", [])]
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InputFormatError(f"bad graph object: {exc}") from exc
    return graph(n, edges)


def coproduct_to_json(cp: CoproductSystem) -> dict:
    return {
        "label": cp.label,
        "left": system_to_json(cp.left),
        "right": system_to_json(cp.right),
    }


def coproduct_from_json(obj, tol: Tolerance = DEFAULT_TOL) -> CoproductSystem:
    try:
        left = system_from_json(obj["left"], tol)
        right = system_from_json(obj["right"], tol)
        label = str(obj.get("label", ""))
    except KeyError as exc:
        raise InputFormatError(f"coproduct object missing {exc}") from exc
    return build_coproduct(left, right, label=label, tol=tol)


def level_block_from_json(obj, n: int, level: int | None = None) -> tuple[Array, int]:
    """Read a level element: either a bare matrix or {"level": k, "block": matrix}."""
    if isinstance(obj, dict):
        if "block" not in obj:
            raise InputFormatError("level element object needs a 'block' field")
        block = matrix_from_json(obj["block"])
        level = int(obj.get("level", level or 0)) or None
    else:
        block = matrix_from_json(obj)
    if block.shape[0] != block.shape[1]:
        raise InputFormatError("level block must be square")
    if block.shape[0] % n:
        raise InputFormatError(f"block dim {block.shape[0]} is not a multiple of n={n}")
    inferred = block.shape[0] // n
    for candidate in (level, inferred):
        if candidate:
            if candidate != inferred:
                raise InputFormatError(f"declared level {level} does not match block dim")
            return block, inferred
    raise InputFormatError("could not infer the level of the block")


def outcome_to_json(outcome: FeasibilityOutcome) -> dict:
    out: dict = {"verdict": outcome.verdict.value, "iterations": outcome.iterations}
    if outcome.witness is not None:
        out["witness"] = matrix_to_json(outcome.witness)
    if outcome.gap is not None:
        out["gap"] = float(outcome.gap)
    return out


def c_cone_to_json(result: CConeResult) -> dict:
    member = result.member
    trace = []
    for eps, out in result.trace:
        row = {"eps": eps, "verdict": out.verdict.value, "iterations": out.iterations}
        if out.gap is not None:
            row["gap"] = float(out.gap)
        trace.append(row)
    out_json: dict = {
        "verdict": {True: "Member", False: "NonMember", None: "Undecided"}[member],
        "trace": trace,
    }
    last = result.trace[-1][1] if result.trace else None
    if member is True and last is not None and last.witness is not None:
        out_json["witness"] = matrix_to_json(last.witness)
    return out_json


def map_to_json(phi) -> dict:
    """Serialize a linear matrix map with its declared source basis.

    The action columns are tied to the order of the source basis, so the
    basis is stored verbatim (it is already Frobenius-orthonormal Hermitian).
    """
    out = {
        "source": {
            "ambient_dim": phi.domain.ambient_dim,
            "label": phi.domain.label,
            "basis": [matrix_to_json(b) for b in phi.domain.basis],
        },
        "target_dim": phi.target_dim,
        "module_dim": phi.module_dim,
        "label": phi.label,
        "action": matrix_to_json(phi.action),
    }
    if phi.target_units is not None:
        out["target_units"] = [matrix_to_json(u) for u in phi.target_units]
    return out


def map_from_json(obj):
    """Rebuild a linear matrix map, reusing the stored basis verbatim."""
    from .cp_maps import LinearMatrixMap
    from .matrix_kernel import frobenius_inner

    try:
        src = obj["source"]
        n = int(src["ambient_dim"])
        basis = np.array([matrix_from_json(b) for b in src["basis"]])
        target_dim = int(obj["target_dim"])
        action = matrix_from_json(obj["action"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputFormatError(f"bad map object: {exc}") from exc
    for b in basis:
        if not np.allclose(b, b.conj().T, atol=1e-10):
            raise InputFormatError("stored source basis is not hermitian")
    gram = np.array([[frobenius_inner(a, b) for b in basis] for a in basis])
    if not np.allclose(gram, np.eye(len(basis)), atol=1e-8):
        raise InputFormatError("stored source basis is not orthonormal")
    domain = MatrixOperatorSystem(ambient_dim=n, basis=basis, label=str(src.get("label", "")))
    units = obj.get("target_units")
    return LinearMatrixMap(
        domain=domain,
        target_dim=target_dim,
        action=action,
        label=str(obj.get("label", "")),
        module_dim=int(obj["module_dim"]) if "module_dim" in obj else None,
        target_units=np.array([matrix_from_json(u) for u in units]) if units else None,
    )


def load_json_file(path) -> object:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputFormatError(f"cannot read JSON from {path}: {exc}") from exc


def dump_json_file(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")

"""Shared test utilities: independent oracles and random-input generators."""

import numpy as np

from opsyscop import is_psd
from opsyscop.matrix_kernel import frobenius_norm


def uniform_hermitian(rng, n, lo=-3.0, hi=3.0):
    """Hermitian matrix with uniform real entries, symmetrized."""
    m = rng.uniform(lo, hi, size=(n, n))
    return ((m + m.T) / 2.0).astype(complex)


def gaussian_hermitian(rng, n, scale=1.0):
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (m + m.conj().T) / 2.0


def wishart(rng, n, scale=1.0):
    """Random PSD matrix V* V with complex Gaussian V."""
    v = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (v.conj().T @ v)


def bisect_order_norm(v, tol=1e-8):
    """Definitional order norm inf{r >= 0 : r I +/- v PSD}, by bisection."""
    v = np.asarray(v, dtype=complex)
    n = v.shape[0]
    eye = np.eye(n)

    def ok(r):
        return is_psd(r * eye + v) and is_psd(r * eye - v)

    lo, hi = 0.0, frobenius_norm(v) + 1.0
    if ok(lo):
        return 0.0
    while hi - lo > tol:
        mid = (lo + hi) / 2.0
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def eig2_closed_form(a, b, c):
    """Eigenvalues of the Hermitian 2x2 [[a, c], [conj(c), b]] (a, b real)."""
    half = (a + b) / 2.0
    rad = np.sqrt(((a - b) / 2.0) ** 2 + abs(c) ** 2)
    return half - rad, half + rad

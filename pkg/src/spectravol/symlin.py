"""Symmetric-matrix kernel.

Symmetric matrices are carried as plain ``(n, n)`` float arrays.  The
isometric vector form ``svec`` lists the ``n`` diagonal entries first and
then the strict upper triangle in row-major order, each scaled by
``sqrt(2)``, so that ``svec(X) @ svec(Y) == trace(X @ Y)``.

Volumes throughout the package are Lebesgue measure in svec coordinates
(the "frobenius" convention).  The "entrywise" convention is Lebesgue
measure on the upper triangle, under which
``int_{PSD} exp(-tr Q) dQ = Gamma_N((N+1)/2)``.  The two differ by the
constant factor ``2**(N(N-1)/4)``.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from .errors import DimensionMismatch, NotPositiveDefinite, NotPSD, NotSymmetric

FROBENIUS = "frobenius"
ENTRYWISE = "entrywise"
CONVENTIONS = (FROBENIUS, ENTRYWISE)
CONVENTION_ALIASES = {"paper": ENTRYWISE}
DEFAULT_CONVENTION = FROBENIUS

SYMMETRY_TOL = 1e-12
PSD_TOL = 1e-10

SQRT2 = math.sqrt(2.0)


def svec_dim(n: int) -> int:
    return n * (n + 1) // 2


def dim_from_svec(k: int) -> int:
    n = int(round((math.sqrt(8 * k + 1) - 1) / 2))
    if svec_dim(n) != k:
        raise DimensionMismatch(f"{k} is not a triangular number")
    return n


@lru_cache(maxsize=64)
def _triu_offdiag(n: int) -> tuple[NDArray[np.intp], NDArray[np.intp]]:
    return np.triu_indices(n, k=1)


def as_sym(X: ArrayLike, tol: float = SYMMETRY_TOL) -> NDArray[np.float64]:
    """Validate and return ``X`` as a square, finite, exactly symmetric array.

    Asymmetry up to ``tol * (1 + max|X|)`` is removed by averaging with the
    transpose; anything larger raises :class:`NotSymmetric`.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("matrix has non-finite entries")
    scale = 1.0 + (np.abs(X).max() if X.size else 0.0)
    if np.abs(X - X.T).max(initial=0.0) > tol * scale:
        raise NotSymmetric("matrix is not symmetric")
    return 0.5 * (X + X.T)


def svec(X: ArrayLike) -> NDArray[np.float64]:
    """Isometric vectorization; accepts a stack ``(..., n, n)``."""
    X = np.asarray(X, dtype=float)
    n = X.shape[-1]
    iu, ju = _triu_offdiag(n)
    diag = np.diagonal(X, axis1=-2, axis2=-1)
    off = X[..., iu, ju] * SQRT2
    return np.concatenate([diag, off], axis=-1)


def smat(v: ArrayLike) -> NDArray[np.float64]:
    """Inverse of :func:`svec`; accepts a stack ``(..., n(n+1)/2)``."""
    v = np.asarray(v, dtype=float)
    n = dim_from_svec(v.shape[-1])
    iu, ju = _triu_offdiag(n)
    X = np.zeros(v.shape[:-1] + (n, n))
    idx = np.arange(n)
    X[..., idx, idx] = v[..., :n]
    off = v[..., n:] / SQRT2
    X[..., iu, ju] = off
    X[..., ju, iu] = off
    return X


def frobenius_inner(X: ArrayLike, Y: ArrayLike) -> float:
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != Y.shape:
        raise DimensionMismatch(f"shapes {X.shape} and {Y.shape} differ")
    # tr(XY) = sum_ij X_ij Y_ji
    return float(np.sum(X * Y.T))


def cholesky_pd(X: ArrayLike) -> NDArray[np.float64]:
    """Lower Cholesky factor, raising :class:`NotPositiveDefinite` on failure."""
    try:
        return linalg.cholesky(np.asarray(X, dtype=float), lower=True, check_finite=True)
    except (linalg.LinAlgError, ValueError) as exc:
        raise NotPositiveDefinite("matrix is not positive definite") from exc


def log_det_pd(X: ArrayLike) -> float:
    L = cholesky_pd(X)
    return 2.0 * float(np.sum(np.log(np.diag(L))))


def inv_pd(X: ArrayLike) -> NDArray[np.float64]:
    L = cholesky_pd(X)
    Xinv = linalg.cho_solve((L, True), np.eye(L.shape[0]))
    return 0.5 * (Xinv + Xinv.T)


def min_eigenvalue(X: ArrayLike) -> float:
    return float(linalg.eigvalsh(np.asarray(X, dtype=float), subset_by_index=[0, 0])[0])


def psd_tolerance(X: ArrayLike) -> float:
    return PSD_TOL * (1.0 + float(np.linalg.norm(X)))


def is_psd(X: ArrayLike) -> bool:
    return min_eigenvalue(X) >= -psd_tolerance(X)


def pd_sqrt(X: ArrayLike) -> NDArray[np.float64]:
    """Principal square root of a PSD matrix.

    Eigenvalues in ``[-tol, 0)`` are clipped to zero; more negative ones
    raise :class:`NotPSD`.
    """
    X = np.asarray(X, dtype=float)
    w, V = linalg.eigh(X)
    if w[0] < -psd_tolerance(X):
        raise NotPSD(f"matrix has eigenvalue {w[0]:.3e}")
    S = (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T
    return 0.5 * (S + S.T)


def check_convention(convention: str) -> str:
    """Return the canonical convention name, resolving aliases."""
    convention = CONVENTION_ALIASES.get(convention, convention)
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown measure convention {convention!r}; use one of {CONVENTIONS}")
    return convention


def log_measure_offset(n: int, convention: str) -> float:
    """``log(d vol_convention / d vol_entrywise)`` on Sym(n): the additive log-volume shift."""
    if check_convention(convention) == ENTRYWISE:
        return 0.0
    return n * (n - 1) / 4.0 * math.log(2.0)

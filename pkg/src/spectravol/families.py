"""Spectrahedron families with closed-form analytic centers.

Tensor convention for ``(R^n)^{(x)k}``: factor 0 is the leftmost (slowest
varying) Kronecker factor, so ``kron(A, B)`` has ``A`` on axis 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import symlin
from .errors import (
    DimensionMismatch,
    MCollinearWithIdentity,
    PreconditionViolation,
    SizeBudgetExceeded,
    XiOutOfRange,
)
from .spectra import Spectrahedron

SCP_MAX_DIM = 4096


def make_spectraplex(A: ArrayLike) -> Spectrahedron:
    """``{P >= 0 : tr(A P) = 1}`` for PD ``A``."""
    A = symlin.as_sym(A)
    symlin.cholesky_pd(A)
    return Spectrahedron(A[None], np.array([1.0]), name=f"spectraplex(N={A.shape[0]})")


def spectraplex_center(A: ArrayLike) -> NDArray[np.float64]:
    A = symlin.as_sym(A)
    return symlin.inv_pd(A.shape[0] * A)


def rank_one_xi(A: ArrayLike, v: ArrayLike) -> float:
    A = symlin.as_sym(A)
    v = np.asarray(v, dtype=float)
    return float(v @ np.linalg.solve(A, v))


def make_rank_one(A: ArrayLike, v: ArrayLike) -> Spectrahedron:
    """``{P >= 0 : tr(A P) = 1, v^T P v = 1}``; requires ``xi = v^T A^{-1} v > 1``."""
    A = symlin.as_sym(A)
    symlin.cholesky_pd(A)
    v = np.asarray(v, dtype=float)
    if v.shape != (A.shape[0],):
        raise DimensionMismatch("v must have length N")
    xi = rank_one_xi(A, v)
    if not xi > 1.0 + 1e-12:
        raise XiOutOfRange(f"xi = v^T A^-1 v = {xi:.6g} must exceed 1")
    return Spectrahedron(
        np.stack([A, np.outer(v, v)]), np.array([1.0, 1.0]), name=f"rank_one(N={A.shape[0]})"
    )


def rank_one_coefficients(N: int, xi: float) -> tuple[float, float]:
    """``(a, b)`` with center ``(a A + b v v^T)^{-1}``."""
    return (N - 1) * xi / (xi - 1), (xi - N) / (xi - 1)


def rank_one_center(A: ArrayLike, v: ArrayLike) -> NDArray[np.float64]:
    A = symlin.as_sym(A)
    v = np.asarray(v, dtype=float)
    a, b = rank_one_coefficients(A.shape[0], rank_one_xi(A, v))
    return symlin.inv_pd(a * A + b * np.outer(v, v))


def make_diag_blocks(alpha: float, beta: float, N: int) -> Spectrahedron:
    """``2N x 2N`` PSD matrices whose diagonal blocks have traces alpha and beta."""
    if not (alpha > 0 and beta > 0):
        raise PreconditionViolation("alpha and beta must be positive")
    if N < 1:
        raise PreconditionViolation("N must be positive")
    M1 = np.zeros((2 * N, 2 * N))
    M2 = np.zeros((2 * N, 2 * N))
    M1[:N, :N] = np.eye(N)
    M2[N:, N:] = np.eye(N)
    return Spectrahedron(
        np.stack([M1, M2]), np.array([alpha, beta], dtype=float), name=f"diag_blocks(N={N})"
    )


def diag_blocks_center(alpha: float, beta: float, N: int) -> NDArray[np.float64]:
    return np.diag(np.concatenate([np.full(N, alpha), np.full(N, beta)])) / N


def _scp_index(n: int, k: int, axis: int, r: int, c: int) -> NDArray[np.float64]:
    E = np.zeros((n, n))
    E[r, c] = 1.0
    left = np.eye(n**axis)
    right = np.eye(n ** (k - axis - 1))
    return np.kron(np.kron(left, E), right)


def make_scp(n: int, k: int) -> Spectrahedron:
    """Multi-way Birkhoff spectrahedron: trace ``n``, every single-factor marginal ``I_n``.

    Constraints per axis are ``(E_{a,a'} + E_{a',a})/2`` embedded on that
    axis for ``a <= a'`` (rhs ``delta_{a,a'}``), minus the redundant
    ``(n-1, n-1)`` one, plus the trace constraint ``tr(P I/n) = 1``.  On
    diagonal matrices this cuts out the multi-way Birkhoff polytope.
    """
    if n < 2 or k < 2:
        raise PreconditionViolation("need n >= 2 and k >= 2")
    N = n**k
    if N > SCP_MAX_DIM:
        raise SizeBudgetExceeded(f"n^k = {N} exceeds the dense budget {SCP_MAX_DIM}")
    mats, rhs = [], []
    for axis in range(k):
        for r in range(n):
            for c in range(r, n):
                if r == c == n - 1:
                    continue
                E = _scp_index(n, k, axis, r, c)
                mats.append(0.5 * (E + E.T))
                rhs.append(1.0 if r == c else 0.0)
    mats.append(np.eye(N) / n)
    rhs.append(1.0)
    return Spectrahedron(np.stack(mats), np.array(rhs), name=f"scp(n={n},k={k})")


def scp_constraint_count(n: int, k: int) -> int:
    return k * (n * (n + 1) // 2) - k + 1


def scp_center(n: int, k: int) -> NDArray[np.float64]:
    return np.eye(n**k) / n ** (k - 1)


def make_central_section(M: ArrayLike) -> Spectrahedron:
    """``{P >= 0 : tr P = 1, tr(M P) = tr(M)/N}``, a hyperplane section through ``I/N``."""
    M = symlin.as_sym(M)
    N = M.shape[0]
    dev = M - np.trace(M) / N * np.eye(N)
    if np.linalg.norm(dev) <= 1e-10 * np.linalg.norm(M):
        raise MCollinearWithIdentity("M must not be a multiple of the identity")
    return Spectrahedron(
        np.stack([np.eye(N), M]), np.array([1.0, np.trace(M) / N]), name=f"central_section(N={N})"
    )


def central_section_center(N: int) -> NDArray[np.float64]:
    return np.eye(N) / N


def random_symmetric(N: int, seed: int | np.random.Generator) -> NDArray[np.float64]:
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((N, N))
    return 0.5 * (G + G.T)


def partial_trace(X: ArrayLike, n: int, axis: int) -> NDArray[np.float64]:
    """Trace out every tensor factor except ``axis`` (0 = leftmost Kronecker factor).

    For ``X = A_0 (x) ... (x) A_{k-1}`` this returns ``prod_{j != axis} tr(A_j) * A_axis``.
    """
    X = np.asarray(X, dtype=float)
    N = X.shape[0]
    if X.shape != (N, N):
        raise DimensionMismatch("X must be square")
    k = round(math.log(N) / math.log(n)) if N > 1 else 0
    if n < 2 or n**k != N:
        raise DimensionMismatch(f"dimension {N} is not a power of {n}")
    if not 0 <= axis < k:
        raise DimensionMismatch(f"axis must lie in [0, {k})")
    T = X.reshape((n,) * (2 * k))
    letters = "abcdefghijklmnopqrstuvwxyz"
    if 2 * k + 2 > len(letters) * 2:
        raise SizeBudgetExceeded("too many tensor factors")
    row = [letters[j] for j in range(k)]
    col = list(row)
    col[axis] = "Z"
    subs = "".join(row) + "".join(col) + "->" + row[axis] + "Z"
    return np.einsum(subs, T)


@dataclass
class FamilySpec:
    """A named family instance; ``build()`` yields the spectrahedron."""

    kind: str
    params: dict[str, Any] = field(default_factory=dict)

    def build(self) -> Spectrahedron:
        p = self.params
        if self.kind == "spectraplex":
            return make_spectraplex(p["A"])
        if self.kind == "rank_one":
            return make_rank_one(p["A"], p["v"])
        if self.kind == "diag_blocks":
            return make_diag_blocks(p["alpha"], p["beta"], p["N"])
        if self.kind == "scp":
            return make_scp(p["n"], p["k"])
        if self.kind == "central_section":
            return make_central_section(p["M"])
        raise ValueError(f"unknown family {self.kind!r}")

    def closed_form_center(self) -> NDArray[np.float64]:
        p = self.params
        if self.kind == "spectraplex":
            return spectraplex_center(p["A"])
        if self.kind == "rank_one":
            return rank_one_center(p["A"], p["v"])
        if self.kind == "diag_blocks":
            return diag_blocks_center(p["alpha"], p["beta"], p["N"])
        if self.kind == "scp":
            return scp_center(p["n"], p["k"])
        if self.kind == "central_section":
            return central_section_center(np.asarray(p["M"]).shape[0])
        raise ValueError(f"unknown family {self.kind!r}")

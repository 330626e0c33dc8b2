"""Spectrahedra {P >= 0 : tr(A_k P) = b_k} and their linear-algebraic views."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, TextIO

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from . import symlin
from .errors import (
    DimensionMismatch,
    InstanceFormatError,
    NotSymmetric,
    RankDeficient,
    SpectravolError,
)

RANK_RTOL = 1e-12
FEAS_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Spectrahedron:
    """The set of PSD ``n x n`` matrices P with ``tr(A_k P) = b_k`` for all k.

    ``constraints`` is stored as an ``(m, n, n)`` array of symmetric
    matrices and ``rhs`` as a length-``m`` vector.
    """

    constraints: NDArray[np.float64]
    rhs: NDArray[np.float64]
    name: str | None = None

    def __post_init__(self) -> None:
        A = np.asarray(self.constraints, dtype=float)
        if A.ndim == 2:
            A = A[None]
        if A.ndim != 3 or A.shape[1] != A.shape[2]:
            raise DimensionMismatch(f"constraints must have shape (m, n, n), got {A.shape}")
        A = np.stack([symlin.as_sym(Ak) for Ak in A]) if len(A) else A
        b = np.atleast_1d(np.asarray(self.rhs, dtype=float))
        if b.shape != (A.shape[0],):
            raise DimensionMismatch(f"rhs has shape {b.shape}, expected ({A.shape[0]},)")
        if A.shape[0] < 1:
            raise DimensionMismatch("at least one constraint is required")
        if not np.all(np.isfinite(b)):
            raise ValueError("rhs has non-finite entries")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "constraints", A)
        object.__setattr__(self, "rhs", b)

    @property
    def n(self) -> int:
        return self.constraints.shape[1]

    @property
    def m(self) -> int:
        return self.constraints.shape[0]

    @property
    def ambient_dim(self) -> int:
        return symlin.svec_dim(self.n)

    @property
    def slice_dim(self) -> int:
        return self.ambient_dim - self.m

    def rows(self) -> NDArray[np.float64]:
        """The constraint operator as an ``(m, n(n+1)/2)`` matrix of svec rows."""
        return symlin.svec(self.constraints)

    def gram(self) -> NDArray[np.float64]:
        """``AA^T`` with entries ``tr(A_i A_j)``."""
        A = self.constraints.reshape(self.m, -1)
        G = A @ A.T
        return 0.5 * (G + G.T)

    def recombine(self, C: ArrayLike) -> "Spectrahedron":
        """The same point set described by constraints ``C A`` and rhs ``C b``."""
        C = np.asarray(C, dtype=float)
        if C.shape != (self.m, self.m):
            raise DimensionMismatch(f"recombination matrix must be {self.m}x{self.m}")
        A = np.einsum("kj,jab->kab", C, self.constraints)
        return Spectrahedron(A, C @ self.rhs, self.name)


@dataclass(frozen=True, eq=False)
class ConjugatedOperatorB:
    """Rows ``svec(Z_k)`` with ``Z_k = sqrt(P) A_k sqrt(P)`` for a PD center ``P``."""

    center: NDArray[np.float64]
    Z: NDArray[np.float64]

    @property
    def m(self) -> int:
        return self.Z.shape[0]

    @property
    def n(self) -> int:
        return self.Z.shape[1]

    def rows(self) -> NDArray[np.float64]:
        return symlin.svec(self.Z)

    def gram(self) -> NDArray[np.float64]:
        Zf = self.Z.reshape(self.m, -1)
        G = Zf @ Zf.T
        return 0.5 * (G + G.T)


@dataclass
class ValidationReport:
    n: int
    m: int
    ambient_dim: int
    rank: int
    singular_values: list[float]
    m_below_ambient: bool
    full_rank: bool
    strictly_feasible: bool | None
    feasibility_status: str
    messages: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.full_rank and self.m_below_ambient and bool(self.strictly_feasible)


def constraint_rank(s: Spectrahedron) -> tuple[int, NDArray[np.float64]]:
    sv = linalg.svdvals(s.constraints.reshape(s.m, -1))
    if sv[0] == 0.0:
        return 0, sv
    return int(np.sum(sv > RANK_RTOL * sv[0])), sv


def require_full_rank(s: Spectrahedron) -> None:
    rank, _ = constraint_rank(s)
    if rank < s.m:
        raise RankDeficient(f"constraint matrices have rank {rank} < m = {s.m}")
    if s.m >= s.ambient_dim:
        raise RankDeficient(f"m = {s.m} must be below dim Sym({s.n}) = {s.ambient_dim}")


def validate(s: Spectrahedron, check_feasibility: bool = True) -> ValidationReport:
    """Structural checks plus a phase-1 strict-feasibility probe.

    Never raises for a malformed instance; failures are carried in the report.
    """
    from .center import find_strictly_feasible  # circular at import time

    rank, sv = constraint_rank(s)
    full_rank = rank == s.m
    below = s.m < s.ambient_dim
    messages = []
    if not full_rank:
        messages.append(f"constraints are linearly dependent (rank {rank} < m = {s.m})")
    if not below:
        messages.append(f"m = {s.m} is not below dim Sym(N) = {s.ambient_dim}")

    strictly: bool | None = None
    status = "not checked"
    if check_feasibility and full_rank and below:
        try:
            find_strictly_feasible(s)
            strictly, status = True, "strictly feasible"
        except SpectravolError as exc:
            strictly, status = False, f"{type(exc).__name__}: {exc}"
            messages.append(status)
    return ValidationReport(
        n=s.n,
        m=s.m,
        ambient_dim=s.ambient_dim,
        rank=rank,
        singular_values=[float(x) for x in sv],
        m_below_ambient=below,
        full_rank=full_rank,
        strictly_feasible=strictly,
        feasibility_status=status,
        messages=messages,
    )


def apply_A(s: Spectrahedron, X: ArrayLike) -> NDArray[np.float64]:
    """``(tr(A_1 X), ..., tr(A_m X))``; ``X`` may be a stack ``(..., n, n)``."""
    X = np.asarray(X, dtype=float)
    if X.shape[-2:] != (s.n, s.n):
        raise DimensionMismatch(f"expected trailing shape ({s.n}, {s.n}), got {X.shape}")
    return np.einsum("kab,...ba->...k", s.constraints, X)


def feasibility_residual(s: Spectrahedron, X: ArrayLike) -> float:
    return float(np.linalg.norm(apply_A(s, X) - s.rhs))


def feasibility_tolerance(s: Spectrahedron) -> float:
    return FEAS_TOL * (1.0 + float(np.linalg.norm(s.rhs)))


def build_B(s: Spectrahedron, Pstar: ArrayLike) -> ConjugatedOperatorB:
    Pstar = symlin.as_sym(Pstar)
    if Pstar.shape != (s.n, s.n):
        raise DimensionMismatch("center has the wrong dimension")
    symlin.cholesky_pd(Pstar)
    R = symlin.pd_sqrt(Pstar)
    Z = np.einsum("ab,kbc,cd->kad", R, s.constraints, R)
    Z = 0.5 * (Z + np.swapaxes(Z, 1, 2))
    return ConjugatedOperatorB(center=Pstar, Z=Z)


def orthonormalize(s: Spectrahedron, Pstar: ArrayLike) -> Spectrahedron:
    """Re-express ``s`` so that the conjugated operator at ``Pstar`` has ``B'B'^T = I``.

    With the thin SVD ``B = U D V^T`` of the conjugated rows, the new
    constraints are ``C A`` and rhs ``C b`` where ``C = D^{-1} U^T``.
    """
    B = build_B(s, Pstar)
    U, d, _ = linalg.svd(B.rows(), full_matrices=False)
    if d[-1] <= RANK_RTOL * d[0]:
        raise RankDeficient("conjugated constraint operator is rank deficient")
    C = U.T / d[:, None]
    return s.recombine(C)


def least_norm_point(s: Spectrahedron) -> NDArray[np.float64]:
    """The point of the affine slice closest to 0 in Frobenius norm."""
    L = linalg.cho_factor(s.gram())
    y = linalg.cho_solve(L, s.rhs)
    return np.einsum("k,kab->ab", y, s.constraints)


def project_to_kernel(s: Spectrahedron, X: ArrayLike) -> NDArray[np.float64]:
    """Orthogonal (Frobenius) projection of ``X`` (or a stack) onto ``ker A``."""
    X = np.asarray(X, dtype=float)
    L = linalg.cho_factor(s.gram())
    y = linalg.cho_solve(L, apply_A(s, X).T).T
    return X - np.einsum("...k,kab->...ab", y, s.constraints)


def slice_basis(s: Spectrahedron) -> NDArray[np.float64]:
    """Orthonormal basis of ``ker A`` in svec coordinates, shape ``(d, n(n+1)/2)``."""
    require_full_rank(s)
    Q = linalg.null_space(s.rows(), rcond=RANK_RTOL)
    if Q.shape[1] != s.slice_dim:
        raise RankDeficient("kernel dimension does not match n(n+1)/2 - m")
    return Q.T


# -- JSON instance files -----------------------------------------------------


def to_dict(s: Spectrahedron) -> dict[str, Any]:
    out: dict[str, Any] = {
        "n": s.n,
        "constraints": [
            {"matrix": Ak.tolist(), "b": float(bk)} for Ak, bk in zip(s.constraints, s.rhs)
        ],
    }
    if s.name is not None:
        out["name"] = s.name
    return out


def from_dict(data: Any) -> Spectrahedron:
    if not isinstance(data, dict):
        raise InstanceFormatError("instance must be a JSON object")
    try:
        n = int(data["n"])
        entries = data["constraints"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceFormatError(f"missing or invalid field: {exc}") from exc
    if n < 1 or not isinstance(entries, list) or not entries:
        raise InstanceFormatError("need n >= 1 and a non-empty constraint list")
    mats, rhs = [], []
    for i, entry in enumerate(entries):
        try:
            M = np.asarray(entry["matrix"], dtype=float)
            b = float(entry["b"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InstanceFormatError(f"constraint {i}: {exc}") from exc
        if M.shape != (n, n):
            raise InstanceFormatError(f"constraint {i}: matrix shape {M.shape} != ({n}, {n})")
        try:
            mats.append(symlin.as_sym(M))
        except NotSymmetric as exc:
            raise InstanceFormatError(f"constraint {i}: matrix is not symmetric") from exc
        except ValueError as exc:
            raise InstanceFormatError(f"constraint {i}: {exc}") from exc
        rhs.append(b)
    name = data.get("name")
    return Spectrahedron(np.stack(mats), np.array(rhs), None if name is None else str(name))


def dump(s: Spectrahedron, fp: TextIO) -> None:
    json.dump(to_dict(s), fp)
    fp.write("\n")


def dumps(s: Spectrahedron) -> str:
    return json.dumps(to_dict(s))


def load(fp: TextIO) -> Spectrahedron:
    try:
        data = json.load(fp)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"invalid JSON: {exc}") from exc
    return from_dict(data)


def load_path(path: str | Path) -> Spectrahedron:
    with open(path) as fp:
        return load(fp)


def save_path(s: Spectrahedron, path: str | Path) -> None:
    with open(path, "w") as fp:
        dump(s, fp)

"""Analytic center of a spectrahedron: argmax log det P over the slice.

Both phases use equality-constrained Newton steps whose KKT system is
reduced to the m x m Schur complement ``S_ij = tr(A_i P A_j P)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from . import symlin
from .errors import (
    Infeasible,
    LineSearchStalled,
    MaxIterationsExceeded,
    NotPositiveDefinite,
    NotStrictlyFeasible,
    UnboundedSuspected,
)
from .maxent import EntropyValue, phi
from .spectra import (
    Spectrahedron,
    apply_A,
    feasibility_residual,
    feasibility_tolerance,
    least_norm_point,
    project_to_kernel,
    require_full_rank,
)

log = logging.getLogger(__name__)

ARMIJO = 0.01
SHRINK = 0.5
MIN_STEP = 1e-14
FEAS_MARGIN = 1e-8  # relative eigenvalue margin counted as strictly feasible


@dataclass
class SolverOptions:
    tol: float = 1e-10
    max_iter: int = 200
    verbosity: int = 0


@dataclass
class CenterResult:
    center: NDArray[np.float64]
    entropy: EntropyValue
    dual_multipliers: NDArray[np.float64]
    iterations: int
    stationarity_residual: float
    feasibility_residual: float
    newton_decrement: float
    objective_history: list[float] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "phi_star": self.entropy.value,
            "convention": self.entropy.convention,
            "log_det_center": self.objective_history[-1] if self.objective_history else None,
            "iterations": self.iterations,
            "newton_decrement": self.newton_decrement,
            "stationarity_residual": self.stationarity_residual,
            "feasibility_residual": self.feasibility_residual,
            "dual_multipliers": self.dual_multipliers.tolist(),
        }


def _try_cholesky(X: NDArray[np.float64]) -> NDArray[np.float64] | None:
    try:
        return linalg.cholesky(X, lower=True)
    except linalg.LinAlgError:
        return None


def _log_det_from_chol(L: NDArray[np.float64]) -> float:
    return 2.0 * float(np.sum(np.log(np.diag(L))))


def _schur(s: Spectrahedron, X: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Return ``X A_j X`` for all j and ``S_ij = tr(A_i X A_j X)``."""
    XAX = np.einsum("ab,kbc,cd->kad", X, s.constraints, X, optimize=True)
    S = np.einsum("iab,jba->ij", s.constraints, XAX, optimize=True)
    return XAX, 0.5 * (S + S.T)


def _decrement_sq(L: NDArray[np.float64], D: NDArray[np.float64]) -> float:
    """``tr(X^{-1} D X^{-1} D)`` given the Cholesky factor of X."""
    W = linalg.solve_triangular(L, D, lower=True)
    W = linalg.solve_triangular(L, W.T, lower=True)
    return float(np.sum(W * W))


def _phase1_step(
    s: Spectrahedron, X: NDArray[np.float64], sc: float, a: NDArray[np.float64], t: float
):
    """Newton step for ``min t*s - log det X  s.t.  A(X) - s*a = b``.

    Works in coordinates whitened by ``X = L L^T`` and solves the KKT
    system through a QR factorization of the whitened constraint rows,
    which avoids squaring their condition number near the boundary.
    Returns ``(L, D, ds, eig(D))`` where ``dX = L D L^T``.
    """
    L = _try_cholesky(X)
    if L is None:
        return None
    At = np.einsum("ba,kbc,cd->kad", L, s.constraints, L, optimize=True)
    M = symlin.svec(At)  # m x d
    Q, R = linalg.qr(M.T, mode="economic")
    r = s.rhs - apply_A(s, X) + sc * a  # drift off the phase-1 slice
    c = np.trace(At, axis1=1, axis2=2)
    a_t = linalg.solve_triangular(R, a, trans="T")
    g = linalg.solve_triangular(R, r - c, trans="T")
    ds = (-t - a_t @ g) / (a_t @ a_t)
    w = g + a_t * ds
    D = np.eye(s.n) + symlin.smat(Q @ w)
    D = 0.5 * (D + D.T)
    return L, D, ds, linalg.eigvalsh(D)


def find_strictly_feasible(
    s: Spectrahedron,
    start: ArrayLike | None = None,
    seed: int | None = None,
    max_outer: int = 60,
    max_inner: int = 100,
) -> NDArray[np.float64]:
    """Return a PD matrix on the affine slice.

    Starts from ``start`` (default: the least-norm slice point, optionally
    displaced along a random kernel direction drawn from ``seed``) and
    solves ``min s  s.t.  P + s I >= 0, A(P) = b`` with a log-barrier
    method in the variables ``X = P + s I`` and ``s``.  A negative optimal
    ``s`` certifies strict feasibility; a positive lower bound on it
    certifies that the slice misses the cone.
    """
    require_full_rank(s)
    n = s.n
    P = least_norm_point(s)
    if start is not None:
        P = P + project_to_kernel(s, symlin.as_sym(start))
    if seed is not None:
        rng = np.random.default_rng(seed)
        R = rng.standard_normal((n, n))
        R = project_to_kernel(s, 0.5 * (R + R.T))
        scale = max(np.linalg.norm(P), 1.0) / max(np.linalg.norm(R), 1e-300)
        P = P + scale * R

    scale = max(float(np.linalg.norm(P)), 1e-300)
    lam_min = symlin.min_eigenvalue(P)
    if lam_min > FEAS_MARGIN * scale:
        return P

    a = np.trace(s.constraints, axis1=1, axis2=2)
    if np.linalg.norm(a) <= 1e-14 * np.linalg.norm(s.constraints.reshape(s.m, -1)):
        # identity lies in ker A: shifting by a multiple of I stays on the slice
        return P + (scale - lam_min) * np.eye(n)

    tol = FEAS_MARGIN * (1.0 + scale)
    sc = -lam_min + scale / n
    X = P + sc * np.eye(n)
    t = n / sc

    for outer in range(max_outer):
        stalled = False
        for inner in range(max_inner):
            step = _phase1_step(s, X, sc, a, t)
            if step is None:
                raise NotPositiveDefinite("phase-1 iterate left the PD cone")
            L, Dw, ds, mu = step
            lam2 = float(np.sum(mu * mu))
            if lam2 / 2.0 <= 1e-9:
                break
            slope = t * ds - float(np.sum(mu))

            def f(alpha: float) -> float:
                return t * alpha * ds - float(np.sum(np.log1p(alpha * mu)))

            alpha = 1.0
            if mu[0] < 0:
                alpha = min(1.0, 0.99 / -mu[0])
            while f(alpha) > ARMIJO * alpha * slope:
                alpha *= SHRINK
                if alpha < MIN_STEP:
                    stalled = True
                    break
            if stalled:
                break
            dX = L @ Dw @ L.T
            X = X + alpha * dX
            X = 0.5 * (X + X.T)
            sc = sc + alpha * ds
            if np.linalg.norm(X) > 1e12 * (1.0 + scale):
                raise UnboundedSuspected("phase-1 iterates diverge; the spectrahedron may be unbounded")
        gap = n / t
        if sc < -tol:
            P = X - sc * np.eye(n)
            log.debug("phase 1 finished after %d outer steps, margin %.3e", outer + 1, -sc)
            return 0.5 * (P + P.T)
        if sc - gap > tol:
            raise Infeasible(
                f"the affine slice misses the PSD cone (max lambda_min <= {-(sc - gap):.3e})"
            )
        if gap <= tol or stalled:
            raise NotStrictlyFeasible(
                f"max lambda_min over the slice is {-sc:.3e} within {gap:.1e}: no interior point"
            )
        t *= 10.0
    raise MaxIterationsExceeded("phase 1 did not decide feasibility")


def stationarity_check(s: Spectrahedron, P: ArrayLike) -> float:
    """Norm of the component of ``P^{-1}`` in ``ker A``; zero exactly at the center."""
    Pinv = symlin.inv_pd(symlin.as_sym(P))
    return float(np.linalg.norm(project_to_kernel(s, Pinv)))


def analytic_center(
    s: Spectrahedron,
    opts: SolverOptions | None = None,
    start: ArrayLike | None = None,
    convention: str = symlin.DEFAULT_CONVENTION,
) -> CenterResult:
    """Maximize ``log det P`` over the spectrahedron by damped Newton.

    ``start`` must be a PD point of the slice; by default one is found
    with :func:`find_strictly_feasible`.  Iteration stops once half the
    squared Newton decrement is at most ``opts.tol`` (the final full step
    is still applied).
    """
    opts = opts or SolverOptions()
    require_full_rank(s)
    if start is None:
        P = find_strictly_feasible(s)
    else:
        P = symlin.as_sym(start)
        if feasibility_residual(s, P) > feasibility_tolerance(s):
            raise ValueError("start point is not on the affine slice")
    L = _try_cholesky(P)
    if L is None:
        raise NotPositiveDefinite("start point is not positive definite")

    history = [_log_det_from_chol(L)]
    lam2 = math.inf
    converged = False
    it = 0
    while it < opts.max_iter:
        PAP, S = _schur(s, P)
        try:
            cS = linalg.cho_factor(S)
        except linalg.LinAlgError as exc:
            raise NotPositiveDefinite("Schur complement is not positive definite") from exc
        # A(D) = b - A(P) also absorbs round-off drift off the slice
        nu = linalg.cho_solve(cS, 2.0 * apply_A(s, P) - s.rhs)
        D = P - np.einsum("k,kab->ab", nu, PAP)
        D = 0.5 * (D + D.T)
        lam2 = _decrement_sq(L, D)
        slope = float(np.sum(linalg.cho_solve((L, True), D).diagonal()))
        it += 1
        if opts.verbosity:
            log.info("iter %3d  log det %.12g  decrement^2 %.3e", it, history[-1], lam2)

        if lam2 / 2.0 <= opts.tol:
            Lnew = _try_cholesky(P + D)
            if Lnew is not None:
                P = 0.5 * (P + D + (P + D).T)
                L = Lnew
                history.append(_log_det_from_chol(L))
            converged = True
            break

        alpha = 1.0
        while True:
            Lnew = _try_cholesky(P + alpha * D)
            if Lnew is not None:
                f1 = _log_det_from_chol(Lnew)
                if f1 >= history[-1] + ARMIJO * alpha * slope:
                    break
            alpha *= SHRINK
            if alpha < MIN_STEP:
                raise LineSearchStalled(f"line search stalled at decrement^2 {lam2:.3e}")
        P = P + alpha * D
        P = 0.5 * (P + P.T)
        L = Lnew
        history.append(f1)
    if not converged:
        raise MaxIterationsExceeded(
            f"no convergence in {opts.max_iter} iterations (decrement^2 {lam2:.3e})"
        )

    Pinv = symlin.inv_pd(P)
    cG = linalg.cho_factor(s.gram())
    nu = linalg.cho_solve(cG, apply_A(s, Pinv))
    stat = float(np.linalg.norm(Pinv - np.einsum("k,kab->ab", nu, s.constraints)))
    return CenterResult(
        center=P,
        entropy=phi(P, convention),
        dual_multipliers=(s.n + 1) / 2.0 * nu,
        iterations=it,
        stationarity_residual=stat,
        feasibility_residual=feasibility_residual(s, P),
        newton_decrement=math.sqrt(max(lam2, 0.0)),
        objective_history=history,
    )

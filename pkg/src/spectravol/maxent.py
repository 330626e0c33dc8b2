"""Maximum-entropy distributions on the PSD cone.

For a PD mean ``P`` the entropy-maximizing distribution on PSD(N) is the
Wishart law ``W_N(P/(N+1), N+1)``: density proportional to
``exp(-tr(Y Q))`` with ``Y = (N+1)/2 * P^{-1}``.  Its differential entropy
is the entropy function

    phi(P) = log Gamma_N((N+1)/2) - N(N+1)/2 * log((N+1)/(2e))
             + (N+1)/2 * log det P,

and when ``P`` is the analytic center of a spectrahedron the density is
constant (``exp(-phi(P))``) on the whole spectrahedron.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import symlin
from .errors import DimensionMismatch, NotPSD, PreconditionViolation
from .spectra import Spectrahedron, apply_A, project_to_kernel


def log_multivariate_gamma(n: int, a: float) -> float:
    """``log Gamma_n(a) = n(n-1)/4 log(pi) + sum_{j=1..n} log Gamma(a - (j-1)/2)``."""
    if n < 1:
        raise ValueError("dimension must be positive")
    if a <= (n - 1) / 2:
        raise PreconditionViolation(f"Gamma_{n}(a) has a pole for a = {a} <= {(n - 1) / 2}")
    return n * (n - 1) / 4.0 * math.log(math.pi) + math.fsum(
        math.lgamma(a - j / 2.0) for j in range(n)
    )


def phi_constant(n: int, convention: str = symlin.DEFAULT_CONVENTION) -> float:
    """The dimension-only part of the entropy function."""
    return (
        log_multivariate_gamma(n, (n + 1) / 2.0)
        - n * (n + 1) / 2.0 * math.log((n + 1) / (2.0 * math.e))
        + symlin.log_measure_offset(n, convention)
    )


@dataclass(frozen=True)
class EntropyValue:
    value: float
    n: int
    convention: str = symlin.DEFAULT_CONVENTION

    def __float__(self) -> float:
        return self.value


def phi(P: ArrayLike, convention: str = symlin.DEFAULT_CONVENTION) -> EntropyValue:
    """Entropy function at a PD matrix, in nats.

    Under ``convention="entrywise"`` this is exactly the closed form above;
    the default frobenius convention adds ``N(N-1)/4 * log 2``.
    """
    P = symlin.as_sym(P)
    n = P.shape[0]
    value = phi_constant(n, convention) + (n + 1) / 2.0 * symlin.log_det_pd(P)
    return EntropyValue(value, n, symlin.check_convention(convention))


def phi_gradient(P: ArrayLike) -> NDArray[np.float64]:
    P = symlin.as_sym(P)
    return (P.shape[0] + 1) / 2.0 * symlin.inv_pd(P)


@dataclass(frozen=True, eq=False)
class WishartMaxEnt:
    """Max-entropy Wishart law with mean ``center`` and ``N+1`` degrees of freedom."""

    center: NDArray[np.float64]
    convention: str = symlin.DEFAULT_CONVENTION

    def __post_init__(self) -> None:
        C = symlin.as_sym(self.center)
        symlin.cholesky_pd(C)
        object.__setattr__(self, "convention", symlin.check_convention(self.convention))
        C.setflags(write=False)
        object.__setattr__(self, "center", C)

    @property
    def n(self) -> int:
        return self.center.shape[0]

    @property
    def degrees(self) -> int:
        return self.n + 1

    def natural_parameter(self) -> NDArray[np.float64]:
        """``Y = (N+1)/2 * center^{-1}``, the dual minimizer."""
        return phi_gradient(self.center)

    def sample(self, rng_seed: int | np.random.Generator, count: int) -> NDArray[np.float64]:
        """``count`` draws ``sqrt(P) G G^T sqrt(P) / (N+1)`` with ``G`` standard normal ``N x (N+1)``."""
        rng = np.random.default_rng(rng_seed)
        n = self.n
        if count <= 0:
            return np.empty((0, n, n))
        R = symlin.pd_sqrt(self.center)
        G = rng.standard_normal((count, n, n + 1))
        W = G @ np.swapaxes(G, 1, 2) / (n + 1)
        X = R @ W @ R
        return 0.5 * (X + np.swapaxes(X, 1, 2))

    def log_normalizer(self) -> float:
        """``log int_{PSD} exp(-tr(Y Q)) dQ`` in this distribution's convention."""
        Y = self.natural_parameter()
        return (
            log_multivariate_gamma(self.n, (self.n + 1) / 2.0)
            - (self.n + 1) / 2.0 * symlin.log_det_pd(Y)
            + symlin.log_measure_offset(self.n, self.convention)
        )

    def log_density(self, Q: ArrayLike, check: bool = True) -> NDArray[np.float64] | float:
        """Log density at ``Q`` (or a stack of matrices)."""
        Q = np.asarray(Q, dtype=float)
        if Q.shape[-2:] != (self.n, self.n):
            raise DimensionMismatch("argument has the wrong dimension")
        if check:
            mats = Q.reshape(-1, self.n, self.n)
            lam = np.linalg.eigvalsh(mats)[:, 0]
            tol = symlin.PSD_TOL * (1.0 + np.linalg.norm(mats, axis=(1, 2)))
            if np.any(lam < -tol):
                raise NotPSD("density is supported on the PSD cone")
        Y = self.natural_parameter()
        out = -np.einsum("ab,...ba->...", Y, Q) - self.log_normalizer()
        return float(out) if np.ndim(out) == 0 else out


def wishart_sample(dist: WishartMaxEnt, rng_seed: int, count: int) -> NDArray[np.float64]:
    return dist.sample(rng_seed, count)


def wishart_log_density(dist: WishartMaxEnt, Q: ArrayLike) -> float:
    return dist.log_density(Q)


@dataclass
class DualityReport:
    """Residuals that vanish exactly when ``center`` is the analytic center."""

    trace_residual: float
    dual_gap: float
    stationarity_residual: float
    log_density_gap: float
    n_points: int


def verify_duality(
    s: Spectrahedron,
    Pstar: ArrayLike,
    points: ArrayLike | None = None,
    count: int = 100,
    seed: int = 0,
    convention: str = symlin.DEFAULT_CONVENTION,
) -> DualityReport:
    """Check the max-entropy duality facts at a candidate center.

    ``trace_residual`` is ``max |tr(Pstar^{-1} P) - N|`` over feasible points
    ``P`` (drawn by hit-and-run when ``points`` is omitted);
    ``log_density_gap`` is ``max |log f(P) + phi(Pstar)|`` over the same
    points; ``dual_gap`` compares the dual objective at ``Y = (N+1)/2
    Pstar^{-1}`` with ``phi(Pstar)``; ``stationarity_residual`` is the norm
    of the projection of ``grad phi(Pstar)`` onto ``ker A``.
    """
    Pstar = symlin.as_sym(Pstar)
    n = s.n
    if points is None:
        from .oracle import hit_and_run_samples

        points = hit_and_run_samples(s, Pstar, count, seed)
    pts = np.asarray(points, dtype=float).reshape(-1, n, n)

    Pinv = symlin.inv_pd(Pstar)
    traces = np.einsum("ab,kba->k", Pinv, pts)
    trace_residual = float(np.max(np.abs(traces - n))) if len(pts) else 0.0

    dist = WishartMaxEnt(Pstar, convention)
    phi_star = phi(Pstar, convention).value
    Y = dist.natural_parameter()
    dual_objective = symlin.frobenius_inner(Y, Pstar) + dist.log_normalizer()
    dual_gap = abs(dual_objective - phi_star)

    grad = phi_gradient(Pstar)
    stationarity = float(np.linalg.norm(project_to_kernel(s, grad)))

    if len(pts):
        logf = np.atleast_1d(dist.log_density(pts, check=False))
        log_density_gap = float(np.max(np.abs(logf + phi_star)))
    else:
        log_density_gap = 0.0

    # points must lie on the slice for the residuals above to mean anything
    if len(pts):
        off = np.max(np.abs(apply_A(s, pts) - s.rhs))
        if off > 1e-6 * (1.0 + np.linalg.norm(s.rhs)):
            raise ValueError(f"supplied points are not on the affine slice (off by {off:.2e})")

    return DualityReport(
        trace_residual=trace_residual,
        dual_gap=dual_gap,
        stationarity_residual=stationarity,
        log_density_gap=log_density_gap,
        n_points=len(pts),
    )

"""Monte Carlo ground truth at desk scale.

Everything here works in isometric (svec) coordinates of the affine slice,
so the volumes are always in the frobenius convention.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from . import symlin
from .errors import (
    ChordError,
    NotPositiveDefinite,
    SliceDimensionTooLarge,
    UnboundedSuspected,
    ZeroAcceptances,
)
from .spectra import (
    Spectrahedron,
    feasibility_residual,
    feasibility_tolerance,
    least_norm_point,
    project_to_kernel,
    slice_basis,
)

MAX_SLICE_DIM = 12
BATCH = 100_000
ACCEPT_TOL = 1e-10


@dataclass(frozen=True)
class MCEstimate:
    log_volume: float
    std_error_log: float
    samples_total: int
    samples_accepted: int
    method: str
    seed: int
    convention: str = symlin.FROBENIUS

    @property
    def acceptance(self) -> float:
        return self.samples_accepted / self.samples_total

    def to_dict(self) -> dict:
        return {
            "log_volume": self.log_volume,
            "log10_volume": self.log_volume / math.log(10.0),
            "std_error_log": self.std_error_log,
            "samples_total": self.samples_total,
            "samples_accepted": self.samples_accepted,
            "method": self.method,
            "seed": self.seed,
            "convention": self.convention,
        }


@dataclass(frozen=True)
class BoundingBox:
    """``S`` is contained in ``{P0 + smat(c @ basis) : lo <= c <= hi}``."""

    origin: NDArray[np.float64]
    basis: NDArray[np.float64]
    lo: NDArray[np.float64]
    hi: NDArray[np.float64]

    @property
    def intervals(self) -> list[tuple[float, float]]:
        return list(zip(self.lo.tolist(), self.hi.tolist()))

    @property
    def log_volume(self) -> float:
        return float(np.sum(np.log(self.hi - self.lo)))


def worker_count() -> int:
    try:
        k = int(os.environ.get("SPECTRAVOL_THREADS", "0"))
    except ValueError:
        k = 0
    return k if k > 0 else (os.cpu_count() or 1)


def frobenius_radius(s: Spectrahedron, center: ArrayLike | None = None) -> float:
    """Radius R with ``||P||_F <= R`` on the whole spectrahedron.

    At the analytic center ``P*`` the inverse ``W = P*^{-1}`` lies in the
    span of the constraints, so ``tr(W P) = tr(W P*) = N`` for all feasible
    P.  For PSD P that gives ``||P||_F <= tr P <= N lambda_max(P*)``.
    """
    if center is None:
        from .center import analytic_center

        center = analytic_center(s).center
    P = symlin.as_sym(center)
    W = symlin.inv_pd(P)
    if np.linalg.norm(project_to_kernel(s, W)) > 1e-6 * np.linalg.norm(W):
        raise UnboundedSuspected("center inverse is not in the constraint span; no certificate")
    return s.n * float(linalg.eigvalsh(P)[-1])


def bounding_box(
    s: Spectrahedron,
    P0: ArrayLike | None = None,
    basis: ArrayLike | None = None,
    center: ArrayLike | None = None,
) -> BoundingBox:
    """Axis-aligned box in slice coordinates containing the spectrahedron.

    Uses the Frobenius ball from :func:`frobenius_radius`.  The origin
    ``P0`` defaults to the least-norm slice point; since it is orthogonal to
    the slice directions, every coordinate obeys ``|c_i| <= sqrt(R^2 - |P0'|^2)``
    where ``P0'`` is the least-norm point, shifted by ``P0``'s own coordinates.
    """
    Pmin = least_norm_point(s)
    P0 = Pmin if P0 is None else symlin.as_sym(P0)
    if feasibility_residual(s, P0) > feasibility_tolerance(s):
        raise ValueError("P0 is not on the affine slice")
    Q = slice_basis(s) if basis is None else np.asarray(basis, dtype=float)
    R = frobenius_radius(s, center)
    r2 = R * R - float(np.sum(Pmin * Pmin))
    if r2 <= 0:
        raise UnboundedSuspected("ball certificate misses the slice")
    r = math.sqrt(r2) * (1.0 + 1e-12)
    offset = Q @ symlin.svec(P0 - Pmin)
    return BoundingBox(P0, Q, -r - offset, r - offset)


def _count_batch(
    seed: np.random.SeedSequence, size: int, box: BoundingBox
) -> int:
    rng = np.random.default_rng(seed)
    c = box.lo + (box.hi - box.lo) * rng.random((size, len(box.lo)))
    P = box.origin + symlin.smat(c @ box.basis)
    lam = np.linalg.eigvalsh(P)[:, 0]
    tol = ACCEPT_TOL * (1.0 + np.linalg.norm(P, axis=(1, 2)))
    return int(np.count_nonzero(lam >= -tol))


def mc_volume_rejection(
    s: Spectrahedron,
    samples: int,
    seed: int = 0,
    box: BoundingBox | None = None,
    threads: int | None = None,
) -> MCEstimate:
    """Rejection-sampling estimate of the log-volume.

    Samples are drawn in fixed-size batches whose generators are spawned
    from ``seed``, so the result does not depend on the thread count.
    """
    if s.slice_dim > MAX_SLICE_DIM:
        raise SliceDimensionTooLarge(
            f"slice dimension {s.slice_dim} exceeds {MAX_SLICE_DIM}; rejection would be hopeless"
        )
    if samples < 1:
        raise ValueError("need at least one sample")
    if box is None:
        from .center import find_strictly_feasible, analytic_center
        from .errors import SpectravolError

        try:
            find_strictly_feasible(s)
        except SpectravolError as exc:
            raise ZeroAcceptances(f"no feasible points: {exc}") from exc
        box = bounding_box(s, center=analytic_center(s).center)
    sizes = [BATCH] * (samples // BATCH)
    if samples % BATCH:
        sizes.append(samples % BATCH)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    workers = min(threads or worker_count(), len(sizes))
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            counts = list(ex.map(_count_batch, seeds, sizes, [box] * len(sizes)))
    else:
        counts = [_count_batch(sd, sz, box) for sd, sz in zip(seeds, sizes)]
    accepted = sum(counts)
    if accepted == 0:
        raise ZeroAcceptances(f"no acceptances in {samples} samples")
    p = accepted / samples
    return MCEstimate(
        log_volume=box.log_volume + math.log(p),
        std_error_log=math.sqrt((1.0 - p) / (p * samples)),
        samples_total=samples,
        samples_accepted=accepted,
        method="rejection",
        seed=seed,
    )


def chord(P: NDArray[np.float64], V: NDArray[np.float64]) -> tuple[float, float]:
    """Interval of t with ``P + t V`` PSD, for PD ``P``.

    With ``P = L L^T`` the condition is ``I + t L^{-1} V L^{-T} >= 0``, so
    the endpoints are ``-1/mu_max`` and ``-1/mu_min`` over the eigenvalues
    ``mu`` of the congruent direction.
    """
    try:
        L = linalg.cholesky(P, lower=True)
    except linalg.LinAlgError as exc:
        raise NotPositiveDefinite("chord base point is not positive definite") from exc
    W = linalg.solve_triangular(L, V, lower=True)
    W = linalg.solve_triangular(L, W.T, lower=True)
    mu = linalg.eigvalsh(0.5 * (W + W.T))
    scale = float(np.max(np.abs(mu)))
    if scale == 0.0 or not np.isfinite(scale):
        raise ChordError("degenerate direction")
    if mu[-1] <= 1e-14 * scale or mu[0] >= -1e-14 * scale:
        raise UnboundedSuspected("chord is unbounded; the spectrahedron is not compact")
    return -1.0 / mu[-1], -1.0 / mu[0]


def _kernel_direction(s: Spectrahedron, rng: np.random.Generator) -> NDArray[np.float64]:
    G = rng.standard_normal((s.n, s.n))
    V = project_to_kernel(s, 0.5 * (G + G.T))
    nrm = np.linalg.norm(V)
    if nrm == 0.0:
        raise ChordError("the slice is a single point")
    return V / nrm


def hit_and_run_samples(
    s: Spectrahedron,
    P0: ArrayLike,
    count: int,
    seed: int = 0,
    burn_in: int = 1000,
    thin: int = 10,
) -> NDArray[np.float64]:
    """Hit-and-run chain on the spectrahedron started at a PD slice point.

    Directions are isotropic in the slice (Gaussian in svec coordinates,
    projected onto ``ker A``).  Returns ``count`` states, every ``thin``-th
    after ``burn_in`` steps.
    """
    P = symlin.as_sym(P0)
    if feasibility_residual(s, P) > feasibility_tolerance(s):
        raise ValueError("P0 is not on the affine slice")
    symlin.cholesky_pd(P)
    rng = np.random.default_rng(seed)
    Pls = least_norm_point(s)
    out = np.empty((max(count, 0), s.n, s.n))
    total = burn_in + thin * count
    kept = 0
    for step in range(1, total + 1):
        V = _kernel_direction(s, rng)
        lo, hi = chord(P, V)
        P = P + rng.uniform(lo, hi) * V
        P = 0.5 * (P + P.T)
        if step % 100 == 0:
            # drop round-off drift off the slice
            P = Pls + project_to_kernel(s, P)
        if step > burn_in and (step - burn_in) % thin == 0:
            out[kept] = P
            kept += 1
    return out

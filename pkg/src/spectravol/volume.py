"""Volume approximation from the max-entropy center, and its applicability checks.

The approximation is

    log vol(S) ~ (m/2) log((N+1)/(4 pi)) + 1/2 log det(AA^T)
                 - 1/2 log det(BB^T) + phi(P*),

where ``(AA^T)_ij = tr(A_i A_j)`` and ``(BB^T)_ij = tr(Z_i Z_j)`` with
``Z_k = sqrt(P*) A_k sqrt(P*)``.  Every quantity is kept in natural-log
space; ``VolumeReport.log10`` and ``VolumeReport.linear`` are for display.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg, optimize

from . import symlin
from .errors import DimensionMismatch, PreconditionViolation, RankDeficient
from .maxent import log_multivariate_gamma, phi, phi_constant
from .spectra import ConjugatedOperatorB, Spectrahedron, build_B

GAMMA_TECHNICAL = 1e5  # constant in the (A3) form
GAMMA_MAIN = 32e5  # constant in the headline condition
EPS_MAX_MAIN = math.exp(-1.0)
EPS_MAX_A3 = 0.5
LINEAR_LIMIT = 700.0

FORMULA = "formula"
EXACT_ONE = "exact_oneconstraint"
ASYMPTOTIC = "asymptotic_family"


@dataclass(frozen=True)
class VolumeComponents:
    m_half_log_term: float
    half_log_det_AAt: float
    half_log_det_BBt: float
    phi_star: float

    def total(self) -> float:
        return math.fsum(
            [self.m_half_log_term, self.half_log_det_AAt, -self.half_log_det_BBt, self.phi_star]
        )


@dataclass(frozen=True)
class VolumeReport:
    """A log-volume in nats together with how it was obtained."""

    log_volume: float
    convention: str
    method: str
    components: VolumeComponents | None = None

    @property
    def log10(self) -> float:
        return self.log_volume / math.log(10.0)

    @property
    def linear(self) -> float | None:
        if abs(self.log_volume) < LINEAR_LIMIT:
            return math.exp(self.log_volume)
        return None

    def to_dict(self) -> dict:
        out = {
            "log_volume": self.log_volume,
            "log10_volume": self.log10,
            "volume": self.linear,
            "convention": self.convention,
            "method": self.method,
        }
        if self.components is not None:
            out["components"] = asdict(self.components)
        return out


def _log_det_gram(G: NDArray[np.float64], what: str) -> float:
    try:
        L = linalg.cholesky(G, lower=True)
    except linalg.LinAlgError as exc:
        raise RankDeficient(f"{what} Gram matrix is singular") from exc
    d = np.diag(L)
    if d.min() <= 1e-14 * d.max():
        raise RankDeficient(f"{what} Gram matrix is numerically singular")
    return 2.0 * float(np.sum(np.log(d)))


def approx_log_volume(
    s: Spectrahedron, center, convention: str | None = None
) -> VolumeReport:
    """Evaluate the approximation at a center.

    ``center`` may be a :class:`~spectravol.center.CenterResult` (its
    convention is used unless overridden) or a PD matrix.
    """
    if hasattr(center, "center"):
        P = center.center
        convention = convention or center.entropy.convention
    else:
        P = center
    convention = symlin.check_convention(convention or symlin.DEFAULT_CONVENTION)
    B = build_B(s, P)
    n, m = s.n, s.m
    comps = VolumeComponents(
        m_half_log_term=m / 2.0 * math.log((n + 1) / (4.0 * math.pi)),
        half_log_det_AAt=0.5 * _log_det_gram(s.gram(), "AA^T"),
        half_log_det_BBt=0.5 * _log_det_gram(B.gram(), "BB^T"),
        phi_star=phi(B.center, convention).value,
    )
    return VolumeReport(comps.total(), symlin.check_convention(convention), FORMULA, comps)


def exact_log_volume_one_constraint(
    A: ArrayLike, convention: str = symlin.DEFAULT_CONVENTION
) -> VolumeReport:
    """Exact log-volume of ``{P >= 0 : tr(A P) = 1}``.

    In entrywise measure the volume is
    ``Gamma_N((N+1)/2) ||A||_F det(A)^{-(N+1)/2} / (K-1)!`` with
    ``K = N(N+1)/2``; the frobenius value carries the extra
    ``2^{N(N-1)/4}``.
    """
    A = symlin.as_sym(A)
    n = A.shape[0]
    K = symlin.svec_dim(n)
    val = (
        log_multivariate_gamma(n, (n + 1) / 2.0)
        + math.log(np.linalg.norm(A))
        - (n + 1) / 2.0 * symlin.log_det_pd(A)
        - math.lgamma(K)
        + symlin.log_measure_offset(n, convention)
    )
    return VolumeReport(val, symlin.check_convention(convention), EXACT_ONE)


def asymptotic_log_volume_scp(
    n: int, k: int, convention: str = symlin.DEFAULT_CONVENTION
) -> VolumeReport:
    """Closed-form approximation for the multi-way Birkhoff spectrahedron.

    ``((N+1)/4pi)^{m/2} (N/n)^m (2en/(N(N+1)))^{N(N+1)/2} Gamma_N((N+1)/2)``
    with ``N = n^k`` and ``m = k n(n+1)/2 - k + 1``.  No accuracy guarantee
    is known for ``k < 7``; a warning is issued there.
    """
    if n < 2 or k < 2:
        raise PreconditionViolation("need n >= 2 and k >= 2")
    if k < 7:
        warnings.warn(
            f"k = {k} < 7: the asymptotic guarantee does not cover this case",
            RuntimeWarning,
            stacklevel=2,
        )
    N = n**k
    m = k * (n * (n + 1) // 2) - k + 1
    K = N * (N + 1) / 2.0
    comps = VolumeComponents(
        m_half_log_term=m / 2.0 * math.log((N + 1) / (4.0 * math.pi)),
        half_log_det_AAt=m * math.log(N / n),
        half_log_det_BBt=0.0,
        phi_star=K * math.log(2.0 * math.e * n / (N * (N + 1)))
        + log_multivariate_gamma(N, (N + 1) / 2.0)
        + symlin.log_measure_offset(N, convention),
    )
    return VolumeReport(comps.total(), symlin.check_convention(convention), ASYMPTOTIC, comps)


# -- closed forms for the other worked families -------------------------------


def spectraplex_asymptotic_log_volume(
    A: ArrayLike, convention: str = symlin.DEFAULT_CONVENTION
) -> VolumeReport:
    """``Gamma_N((N+1)/2) ||A||_F det(A)^{-(N+1)/2} (2e/(N(N+1)))^K (N(N+1)/(4pi))^{1/2}``."""
    A = symlin.as_sym(A)
    n = A.shape[0]
    K = symlin.svec_dim(n)
    val = (
        log_multivariate_gamma(n, (n + 1) / 2.0)
        + math.log(np.linalg.norm(A))
        - (n + 1) / 2.0 * symlin.log_det_pd(A)
        + K * math.log(2.0 * math.e / (n * (n + 1)))
        + 0.5 * math.log(n * (n + 1) / (4.0 * math.pi))
        + symlin.log_measure_offset(n, convention)
    )
    return VolumeReport(val, symlin.check_convention(convention), ASYMPTOTIC)


def rank_one_log_volume(
    A: ArrayLike, v: ArrayLike, convention: str = symlin.DEFAULT_CONVENTION
) -> VolumeReport:
    """Closed-form approximation for ``{tr(AP) = 1, v^T P v = 1}``."""
    A = symlin.as_sym(A)
    v = np.asarray(v, dtype=float)
    n = A.shape[0]
    K = symlin.svec_dim(n)
    xi = float(v @ np.linalg.solve(A, v))
    if not xi > 1.0:
        raise PreconditionViolation("needs xi = v^T A^-1 v > 1")
    det_AAt = np.linalg.norm(A) ** 2 * float(v @ v) ** 2 - float(v @ A @ v) ** 2
    val = (
        1.0
        - math.log(2.0 * math.pi)
        + n / 2.0 * math.log(n - 1)
        + (K - 1) * math.log(2.0 * math.e / (n * n - 1))
        + log_multivariate_gamma(n, (n + 1) / 2.0)
        - (n + 1) / 2.0 * math.log(xi - 1)
        + (K - 1) * math.log((xi - 1) / xi)
        + 0.5 * (math.log(det_AAt) - (n + 1) * symlin.log_det_pd(A))
        + symlin.log_measure_offset(n, convention)
    )
    return VolumeReport(val, symlin.check_convention(convention), ASYMPTOTIC)


def diag_blocks_log_volume(
    alpha: float, beta: float, N: int, convention: str = symlin.DEFAULT_CONVENTION
) -> VolumeReport:
    """Approximation for the two block-trace constraints on ``2N x 2N`` matrices."""
    n = 2 * N
    Pstar = np.diag(np.concatenate([np.full(N, alpha), np.full(N, beta)])) / N
    comps = VolumeComponents(
        m_half_log_term=math.log((n + 1) / (4.0 * math.pi)),
        half_log_det_AAt=math.log(N),
        half_log_det_BBt=math.log(alpha * beta / N),
        phi_star=phi(Pstar, convention).value,
    )
    return VolumeReport(comps.total(), symlin.check_convention(convention), ASYMPTOTIC, comps)


def central_section_log_volume(N: int, convention: str = symlin.DEFAULT_CONVENTION) -> VolumeReport:
    """``(N^2(N+1)/4pi) (2e/(N(N+1)))^{N(N+1)/2} Gamma_N((N+1)/2)``, the same for every M."""
    K = symlin.svec_dim(N)
    val = (
        math.log(N * N * (N + 1) / (4.0 * math.pi))
        + K * math.log(2.0 * math.e / (N * (N + 1)))
        + log_multivariate_gamma(N, (N + 1) / 2.0)
        + symlin.log_measure_offset(N, convention)
    )
    return VolumeReport(val, symlin.check_convention(convention), ASYMPTOTIC)


# -- applicability quantities --------------------------------------------------


def q_form(B: ConjugatedOperatorB, t: ArrayLike) -> float:
    """``q(t) = tr((sum_k t_k Z_k)^2) / (N+1)``, cross-checked against ``t^T BB^T t / (N+1)``."""
    t = np.asarray(t, dtype=float)
    if t.shape != (B.m,):
        raise DimensionMismatch(f"t must have length {B.m}")
    T = np.einsum("k,kab->ab", t, B.Z)
    trace_form = float(np.sum(T * T)) / (B.n + 1)
    gram_form = float(t @ B.gram() @ t) / (B.n + 1)
    scale = max(abs(trace_form), abs(gram_form))
    if abs(trace_form - gram_form) > 1e-10 * scale + 1e-300:
        raise ArithmeticError(
            f"q(t) disagreement: trace form {trace_form!r} vs Gram form {gram_form!r}"
        )
    return trace_form


def compute_lambda(B: ConjugatedOperatorB) -> float:
    """Best constant in ``q(t) >= lambda |t|^2``: ``lambda_min(BB^T)/(N+1)``."""
    return float(linalg.eigvalsh(B.gram())[0]) / (B.n + 1)


@dataclass(frozen=True)
class ThetaBound:
    bound: float
    exact: float | None = None


def compute_theta_bound(B: ConjugatedOperatorB) -> ThetaBound:
    """Spectral upper bound ``2 sqrt(lambda_max(BB^T))/(N+1)``; exact when ``m = 1``."""
    lam_max = float(linalg.eigvalsh(B.gram())[-1])
    bound = 2.0 * math.sqrt(max(lam_max, 0.0)) / (B.n + 1)
    exact = None
    if B.m == 1:
        exact = 2.0 * float(np.max(np.abs(linalg.eigvalsh(B.Z[0])))) / (B.n + 1)
    return ThetaBound(bound, exact)


def condition_main(epsilon: float, N: int, m: int, gamma: float = GAMMA_MAIN) -> bool:
    """``eps^2 / log^3(1/eps) >= gamma m^3 log N / N``."""
    lhs = epsilon**2 / math.log(1.0 / epsilon) ** 3
    return lhs >= gamma * m**3 * math.log(N) / N


def condition_a3(
    lam: float, theta: float, epsilon: float, N: int, m: int, gamma: float = GAMMA_TECHNICAL
) -> bool:
    """``lambda >= gamma theta^2 eps^-2 m (m + log 1/eps)^2 log(N/eps)``."""
    L = math.log(1.0 / epsilon)
    return lam >= gamma * theta**2 / epsilon**2 * m * (m + L) ** 2 * math.log(N / epsilon)


def condition_a3_prime(epsilon: float, N: int, m: int, gamma: float = GAMMA_TECHNICAL) -> bool:
    """(A3) after orthonormalization: ``eps^2 (N+1) >= 4 gamma m (m + log 1/eps)^2 log(N/eps)``."""
    L = math.log(1.0 / epsilon)
    return epsilon**2 * (N + 1) >= 4.0 * gamma * m * (m + L) ** 2 * math.log(N / epsilon)


def min_epsilon_a3_prime(N: int, m: int, gamma: float = GAMMA_TECHNICAL) -> float | None:
    """Smallest ``eps <= 1/2`` passing the orthonormalized condition, or None."""

    def gap(log_eps: float) -> float:
        eps = math.exp(log_eps)
        L = -log_eps
        return 2.0 * log_eps + math.log(N + 1) - math.log(
            4.0 * gamma * m * (m + L) ** 2 * math.log(N / eps)
        )

    hi = math.log(EPS_MAX_A3)
    if gap(hi) < 0:
        return None
    lo = -1.0
    while gap(lo) >= 0:
        lo *= 2.0
        if lo < -700:
            return math.exp(lo)
    return math.exp(optimize.brentq(gap, lo, hi, xtol=1e-14, rtol=1e-14))


def required_N(epsilon: float, m: int, gamma: float = GAMMA_MAIN) -> float:
    """Smallest real ``N >= 3`` with ``N / log N >= gamma m^3 log^3(1/eps) / eps^2``."""
    if not 0 < epsilon <= EPS_MAX_MAIN:
        raise PreconditionViolation(f"epsilon must lie in (0, 1/e], got {epsilon}")
    target = math.log(gamma * m**3 * math.log(1.0 / epsilon) ** 3 / epsilon**2)

    def gap(logN: float) -> float:
        return logN - math.log(logN) - target

    lo = 1.0  # N/log N is increasing for N > e
    if gap(lo) >= 0:
        return math.e
    hi = 2.0
    while gap(hi) < 0:
        hi *= 2.0
    return math.exp(optimize.brentq(gap, lo, hi, xtol=1e-14, rtol=1e-14))


def rank_one_epsilon_schedule(N: float) -> float:
    """``eps(N) = 10^3 log^{3/2}(N+1) / (N+1)^{1/2}``, the schedule for two constraints."""
    return 1e3 * math.log(N + 1) ** 1.5 / math.sqrt(N + 1)


def schedule_passes(N: float, m: int = 2) -> bool:
    """Whether the two-constraint schedule activates the orthonormalized condition at N."""
    eps = rank_one_epsilon_schedule(N)
    return eps <= EPS_MAX_A3 and condition_a3_prime(eps, N, m)


def schedule_threshold(m: int = 2, lo: float = 1e3, hi: float = 1e20) -> float:
    """Smallest N (to ~1e-9 relative) beyond which :func:`schedule_passes` holds."""
    if schedule_passes(lo, m) or not schedule_passes(hi, m):
        raise PreconditionViolation("threshold is not bracketed")
    a, b = math.log(lo), math.log(hi)
    while b - a > 1e-10:
        c = 0.5 * (a + b)
        if schedule_passes(math.exp(c), m):
            b = c
        else:
            a = c
    return math.exp(b)


@dataclass
class ConditionReport:
    n: int
    m: int
    lambda_: float
    theta: float
    theta_exact: float | None
    epsilon_requested: float
    gamma_main: float
    gamma_technical: float
    condition_main_satisfied: bool
    a3_satisfied: bool
    a3_prime_satisfied: bool
    min_epsilon_feasible: float | None
    required_N_main: float | None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lambda_")
        return d


def check_conditions(
    s: Spectrahedron, center, epsilon: float, strict: bool = True
) -> ConditionReport:
    """Evaluate the applicability conditions at ``epsilon``.

    The headline form uses ``gamma = 32e5`` and needs ``eps <= 1/e``; the
    (A3) and orthonormalized forms use ``gamma = 1e5`` and need
    ``eps <= 1/2``.  With ``strict`` any ``eps > 1/e`` is rejected;
    otherwise ``eps`` up to 1/2 is accepted and the headline form is
    reported as failing.  ``theta`` is the spectral bound (exact for one
    constraint), so the (A3) verdict is conservative.
    """
    upper = EPS_MAX_MAIN if strict else EPS_MAX_A3
    if not (0.0 < epsilon <= upper):
        raise PreconditionViolation(f"epsilon must lie in (0, {upper:.6g}], got {epsilon}")
    main_applies = epsilon <= EPS_MAX_MAIN
    P = center.center if hasattr(center, "center") else center
    B = build_B(s, P)
    n, m = s.n, s.m
    lam = compute_lambda(B)
    th = compute_theta_bound(B)
    theta = th.exact if th.exact is not None else th.bound
    return ConditionReport(
        n=n,
        m=m,
        lambda_=lam,
        theta=th.bound,
        theta_exact=th.exact,
        epsilon_requested=epsilon,
        gamma_main=GAMMA_MAIN,
        gamma_technical=GAMMA_TECHNICAL,
        condition_main_satisfied=main_applies and n > 1 and condition_main(epsilon, n, m),
        a3_satisfied=condition_a3(lam, theta, epsilon, n, m),
        a3_prime_satisfied=condition_a3_prime(epsilon, n, m),
        min_epsilon_feasible=min_epsilon_a3_prime(n, m),
        required_N_main=required_N(epsilon, m) if main_applies else None,
    )


def stirling_ratio_log(K: int) -> float:
    """``log(K! (2 pi K)^{-1/2} (K/e)^{-K})``, the log of approximate over exact for a spectraplex."""
    return math.lgamma(K + 1) - 0.5 * math.log(2 * math.pi * K) - K * (math.log(K) - 1.0)


def phi_of_scaled_identity(N: int, scale: float, convention: str = symlin.DEFAULT_CONVENTION) -> float:
    """``phi(scale * I_N)`` without forming the matrix."""
    return phi_constant(N, convention) + (N + 1) / 2.0 * N * math.log(scale)

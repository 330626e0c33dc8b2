import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectravol import families, spectra
from spectravol.center import analytic_center, stationarity_check
from spectravol.errors import (
    DimensionMismatch,
    MCollinearWithIdentity,
    NotPositiveDefinite,
    PreconditionViolation,
    SizeBudgetExceeded,
    XiOutOfRange,
)
from spectravol.volume import approx_log_volume

from conftest import random_pd, random_sym


def _closed_form_ok(s, P):
    assert spectra.feasibility_residual(s, P) <= 1e-10
    assert stationarity_check(s, P) <= 1e-9
    assert spectra.validate(s).ok


def test_spectraplex(rng):
    s = families.make_spectraplex(np.eye(3))
    assert s.m == 1 and s.n == 3
    A = random_pd(rng, 4)
    _closed_form_ok(families.make_spectraplex(A), families.spectraplex_center(A))
    with pytest.raises(NotPositiveDefinite):
        families.make_spectraplex(np.diag([1.0, -1.0]))


def test_spectraplex_diag():
    s = families.make_spectraplex(np.diag([1.0, 2.0]))
    P = np.array([[0.2, 0.1], [0.1, 0.4]])
    assert spectra.apply_A(s, P)[0] == pytest.approx(P[0, 0] + 2 * P[1, 1])


def test_rank_one(rng):
    A, v = np.eye(4), np.array([np.sqrt(2), 0, 0, 0])
    assert families.rank_one_xi(A, v) == pytest.approx(2.0)
    _closed_form_ok(families.make_rank_one(A, v), families.rank_one_center(A, v))
    with pytest.raises(XiOutOfRange):
        families.make_rank_one(np.eye(3), [1.0, 0.0, 0.0])
    for xi in (1.5, 3.0, 10.0):
        A = random_pd(rng, 5)
        v = rng.standard_normal(5)
        v *= np.sqrt(xi / (v @ np.linalg.solve(A, v)))
        s = families.make_rank_one(A, v)
        P = families.rank_one_center(A, v)
        np.testing.assert_allclose(spectra.apply_A(s, P), [1.0, 1.0], atol=1e-10)
        _closed_form_ok(s, P)


def test_diag_blocks():
    s = families.make_diag_blocks(1.0, 1.0, 2)
    assert s.n == 4 and s.m == 2
    np.testing.assert_allclose(s.gram(), 2 * np.eye(2))
    _closed_form_ok(families.make_diag_blocks(0.3, 2.0, 3), families.diag_blocks_center(0.3, 2.0, 3))
    with pytest.raises(PreconditionViolation):
        families.make_diag_blocks(-1.0, 1.0, 2)


def test_scp_counts():
    s = families.make_scp(2, 2)
    assert (s.n, s.m) == (4, 5)
    assert families.scp_constraint_count(3, 3) == 16
    s = families.make_scp(3, 3)
    assert s.m == 16 and spectra.constraint_rank(s)[0] == 16
    _closed_form_ok(families.make_scp(2, 3), families.scp_center(2, 3))
    with pytest.raises(SizeBudgetExceeded):
        families.make_scp(2, 13)


def test_scp_center_marginals():
    P = families.scp_center(2, 2)
    for axis in range(2):
        np.testing.assert_allclose(families.partial_trace(P, 2, axis), np.eye(2))


def _scp_feasible_by_marginals(P, n, k, tol=1e-9):
    return abs(np.trace(P) - n) <= tol and all(
        np.allclose(families.partial_trace(P, n, i), np.eye(n), atol=tol) for i in range(k)
    )


def test_scp_constraints_are_marginals(rng):
    n, k = 2, 3
    s = families.make_scp(n, k)
    base = families.scp_center(n, k)
    for trial in range(50):
        H = random_sym(rng, n**k)
        if trial % 2 == 0:
            H = spectra.project_to_kernel(s, H)
        P = base + 0.01 * H
        by_A = spectra.feasibility_residual(s, P) <= 1e-10
        assert by_A == _scp_feasible_by_marginals(P, n, k)
        assert by_A == (trial % 2 == 0)


def test_central_section(rng):
    s = families.make_central_section(np.diag([1.0, 0.0, 0.0]))
    np.testing.assert_allclose(spectra.apply_A(s, np.eye(3) / 3), s.rhs)
    with pytest.raises(MCollinearWithIdentity):
        families.make_central_section(2 * np.eye(3))
    for seed in range(20):
        M = families.random_symmetric(5, seed)
        res = analytic_center(families.make_central_section(M))
        np.testing.assert_allclose(res.center, np.eye(5) / 5, atol=1e-9)


def test_central_section_volume_independent_of_M():
    vals = []
    for seed in range(20):
        s = families.make_central_section(families.random_symmetric(6, seed))
        vals.append(approx_log_volume(s, np.eye(6) / 6).log_volume)
    assert max(vals) - min(vals) <= 1e-9


def test_partial_trace_examples(rng):
    for axis in range(3):
        np.testing.assert_allclose(families.partial_trace(np.eye(8), 2, axis), 4 * np.eye(2))
    A, B = random_sym(rng, 3), random_sym(rng, 3)
    X = np.kron(A, B)
    np.testing.assert_allclose(families.partial_trace(X, 3, 0), np.trace(B) * A, atol=1e-12)
    np.testing.assert_allclose(families.partial_trace(X, 3, 1), np.trace(A) * B, atol=1e-12)
    with pytest.raises(DimensionMismatch):
        families.partial_trace(np.eye(6), 4, 0)
    with pytest.raises(DimensionMismatch):
        families.partial_trace(np.eye(4), 2, 2)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_partial_trace_linear(seed, c1, c2):
    r = np.random.default_rng(seed)
    X, Y = random_sym(r, 8), random_sym(r, 8)
    for axis in range(3):
        lhs = families.partial_trace(c1 * X + c2 * Y, 2, axis)
        rhs = c1 * families.partial_trace(X, 2, axis) + c2 * families.partial_trace(Y, 2, axis)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12 * (1 + abs(c1) + abs(c2)) * 10)


def test_partial_trace_elementary_three_factors(rng):
    mats = [random_sym(rng, 2) for _ in range(3)]
    X = np.kron(np.kron(mats[0], mats[1]), mats[2])
    tr = [np.trace(M) for M in mats]
    for i in range(3):
        coef = np.prod([tr[j] for j in range(3) if j != i])
        np.testing.assert_allclose(families.partial_trace(X, 2, i), coef * mats[i], atol=1e-12)


def test_family_spec():
    spec = families.FamilySpec("diag_blocks", {"alpha": 1.0, "beta": 2.0, "N": 2})
    s = spec.build()
    np.testing.assert_allclose(spectra.apply_A(s, spec.closed_form_center()), [1.0, 2.0])
    with pytest.raises(ValueError):
        families.FamilySpec("nope").build()

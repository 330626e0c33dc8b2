import numpy as np
import pytest

from spectravol import families, spectra
from spectravol.center import (
    SolverOptions,
    analytic_center,
    find_strictly_feasible,
    stationarity_check,
)
from spectravol.errors import (
    Infeasible,
    MaxIterationsExceeded,
    NotStrictlyFeasible,
    RankDeficient,
)
from spectravol.spectra import Spectrahedron

from conftest import random_instance, random_pd


def _check_invariants(s, res):
    P = res.center
    assert spectra.feasibility_residual(s, P) <= 1e-8 * (1 + np.linalg.norm(s.rhs))
    assert np.linalg.eigvalsh(P)[0] > 0
    Pinv = np.linalg.inv(P)
    lhs = (s.n + 1) / 2 * Pinv - np.einsum("k,kab->ab", res.dual_multipliers, s.constraints)
    assert np.linalg.norm(lhs) <= 1e-6 * np.linalg.norm(Pinv) * (s.n + 1) / 2
    h = np.array(res.objective_history)
    assert np.all(np.diff(h) >= -1e-12 * np.abs(h[1:]).clip(1))


def test_spectraplex_center(rng):
    A = random_pd(rng, 6)
    s = families.make_spectraplex(A)
    res = analytic_center(s)
    np.testing.assert_allclose(res.center, np.linalg.inv(6 * A), atol=1e-8)
    _check_invariants(s, res)


def test_rank_one_center(rng):
    A = random_pd(rng, 5)
    v = rng.standard_normal(5)
    v *= np.sqrt(3.0 / (v @ np.linalg.solve(A, v)))
    s = families.make_rank_one(A, v)
    res = analytic_center(s)
    assert np.linalg.norm(res.center - families.rank_one_center(A, v)) <= 1e-7
    _check_invariants(s, res)


def test_scp_and_blocks():
    res = analytic_center(families.make_scp(2, 3))
    assert np.linalg.norm(res.center - np.eye(8) / 4) <= 1e-8
    res = analytic_center(families.make_diag_blocks(0.5, 3.0, 3))
    assert np.linalg.norm(res.center - families.diag_blocks_center(0.5, 3.0, 3)) <= 1e-8


def test_random_instances(rng):
    for m in (1, 2, 3, 5):
        s, _ = random_instance(rng, 5, m)
        res = analytic_center(s)
        _check_invariants(s, res)
        assert stationarity_check(s, res.center) <= 1e-9


def test_start_point_used(rng):
    s, P0 = random_instance(rng, 4, 2)
    res = analytic_center(s, start=P0)
    assert res.iterations >= 2
    with pytest.raises(ValueError):
        analytic_center(s, start=np.eye(4) * 100)


def test_max_iter():
    A = np.diag([1.0, 10.0, 100.0, 1000.0])
    s = families.make_spectraplex(A)
    start = find_strictly_feasible(s, seed=5)
    with pytest.raises(MaxIterationsExceeded):
        analytic_center(s, SolverOptions(max_iter=1), start=start)


def test_find_strictly_feasible():
    P = find_strictly_feasible(families.make_spectraplex(np.eye(3)))
    assert np.linalg.eigvalsh(P)[0] > 0 and np.trace(P) == pytest.approx(1)
    s = families.make_scp(2, 3)
    P = find_strictly_feasible(s, seed=1)
    assert np.linalg.eigvalsh(P)[0] > 0
    assert spectra.feasibility_residual(s, P) <= 1e-9


def test_find_strictly_feasible_phase1_needed():
    # least-norm point of this slice is indefinite
    A = np.stack([np.diag([1.0, -1.0, 0.0]), np.eye(3)])
    s = Spectrahedron(A, [0.9, 1.0])
    assert np.linalg.eigvalsh(spectra.least_norm_point(s))[0] < 0
    P = find_strictly_feasible(s)
    assert np.linalg.eigvalsh(P)[0] > 0
    assert spectra.feasibility_residual(s, P) <= 1e-9


def test_infeasible_and_boundary():
    with pytest.raises(Infeasible):
        find_strictly_feasible(Spectrahedron(np.eye(3)[None], [-1.0]))
    # tr(P) = 1 with P_11 = 1 forces P = e1 e1^T
    E = np.zeros((3, 3))
    E[0, 0] = 1.0
    with pytest.raises(NotStrictlyFeasible):
        find_strictly_feasible(Spectrahedron(np.stack([np.eye(3), E]), [1.0, 1.0]))


def test_rank_deficient():
    with pytest.raises(RankDeficient):
        analytic_center(Spectrahedron(np.stack([np.eye(2), 2 * np.eye(2)]), [1.0, 2.0]))


def test_summary_keys():
    res = analytic_center(families.make_spectraplex(np.eye(2)))
    d = res.summary()
    assert d["convention"] == "frobenius" and d["iterations"] == res.iterations

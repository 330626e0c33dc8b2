import math

import numpy as np
import pytest

from spectravol import families, oracle, spectra, symlin, volume
from spectravol.errors import SliceDimensionTooLarge, UnboundedSuspected, ZeroAcceptances
from spectravol.spectra import Spectrahedron


def test_bounding_box_disk():
    box = oracle.bounding_box(families.make_spectraplex(np.eye(2)))
    for lo, hi in box.intervals:
        assert -0.7072 < lo <= -0.7071 and 0.7071 <= hi < 0.7072


def test_bounding_box_radius():
    assert oracle.frobenius_radius(families.make_spectraplex(np.eye(4))) == pytest.approx(1.0)
    assert oracle.frobenius_radius(families.make_scp(2, 2)) == pytest.approx(2.0)
    box = oracle.bounding_box(families.make_spectraplex(np.eye(4)))
    assert np.all(box.hi - box.lo <= 2.0)


def test_bounding_box_contains_walk():
    s = families.make_scp(2, 2)
    box = oracle.bounding_box(s)
    X = oracle.hit_and_run_samples(s, families.scp_center(2, 2), 300, seed=2, burn_in=200, thin=3)
    c = symlin.svec(X - box.origin) @ box.basis.T
    assert np.all(c >= box.lo) and np.all(c <= box.hi)


def test_bounding_box_shifted_origin():
    s = families.make_spectraplex(np.eye(3))
    P0 = np.diag([0.5, 0.3, 0.2])
    box = oracle.bounding_box(s, P0=P0)
    X = oracle.hit_and_run_samples(s, np.eye(3) / 3, 200, seed=4, burn_in=100, thin=3)
    c = symlin.svec(X - P0) @ box.basis.T
    assert np.all(c >= box.lo) and np.all(c <= box.hi)


def test_rejection_unbiased_over_seeds():
    s = families.make_spectraplex(np.eye(2))
    ests = [oracle.mc_volume_rejection(s, 20_000, seed=k).log_volume for k in range(30)]
    sem = np.std(ests, ddof=1) / math.sqrt(len(ests))
    assert abs(np.mean(ests) - math.log(math.pi / 2)) <= 2 * sem


def test_rejection_deterministic_across_threads():
    s = families.make_spectraplex(np.eye(2))
    a = oracle.mc_volume_rejection(s, 250_000, seed=11, threads=1)
    b = oracle.mc_volume_rejection(s, 250_000, seed=11, threads=3)
    assert a == b
    assert a.samples_accepted <= a.samples_total
    assert a.std_error_log == pytest.approx(math.sqrt((1 - a.acceptance) / (a.acceptance * 250_000)))


def test_rejection_errors():
    with pytest.raises(ZeroAcceptances):
        oracle.mc_volume_rejection(Spectrahedron(np.eye(2)[None], [-1.0]), 1000)
    with pytest.raises(SliceDimensionTooLarge):
        oracle.mc_volume_rejection(families.make_spectraplex(np.eye(5)), 1000)


def test_rejection_small_spectraplex_matches_exact():
    A = np.diag([1.0, 2.0])
    est = oracle.mc_volume_rejection(families.make_spectraplex(A), 400_000, seed=5)
    exact = volume.exact_log_volume_one_constraint(A).log_volume
    assert abs(est.log_volume - exact) <= 3 * est.std_error_log


def test_hit_and_run_feasible():
    s = families.make_rank_one(np.eye(3), [1.2, 0.5, 0.0])
    P0 = families.rank_one_center(np.eye(3), [1.2, 0.5, 0.0])
    X = oracle.hit_and_run_samples(s, P0, 200, seed=0)
    assert X.shape == (200, 3, 3)
    assert np.max(np.abs(spectra.apply_A(s, X) - s.rhs)) <= 1e-9
    assert np.linalg.eigvalsh(X)[:, 0].min() >= -1e-12


def test_hit_and_run_mean_disk():
    s = families.make_spectraplex(np.eye(2))
    X = oracle.hit_and_run_samples(s, np.eye(2) / 2, 4000, seed=9)
    # batch means absorb the chain's autocorrelation
    batches = X.reshape(40, 100, 2, 2).mean(axis=1)
    se = batches.std(axis=0, ddof=1) / math.sqrt(40)
    assert np.all(np.abs(batches.mean(axis=0) - np.eye(2) / 2) <= 4 * se + 1e-15)


def test_chord_endpoints_on_boundary(rng):
    s = families.make_scp(2, 2)
    P = families.scp_center(2, 2)
    for _ in range(50):
        G = rng.standard_normal((4, 4))
        V = spectra.project_to_kernel(s, G + G.T)
        lo, hi = oracle.chord(P, V)
        assert lo < 0 < hi
        for t in (lo, hi):
            assert abs(np.linalg.eigvalsh(P + t * V)[0]) <= 1e-8


def test_chord_unbounded():
    with pytest.raises(UnboundedSuspected):
        oracle.chord(np.eye(2), np.eye(2))


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("SPECTRAVOL_THREADS", "3")
    assert oracle.worker_count() == 3
    monkeypatch.setenv("SPECTRAVOL_THREADS", "junk")
    assert oracle.worker_count() >= 1

import io
import json

import numpy as np
import pytest

from spectravol import families, spectra, symlin
from spectravol.errors import DimensionMismatch, InstanceFormatError, RankDeficient
from spectravol.spectra import Spectrahedron

from conftest import random_instance


def test_validate_spectraplex():
    rep = spectra.validate(families.make_spectraplex(np.eye(3)))
    assert rep.rank == 1 and rep.m == 1 and rep.strictly_feasible and rep.ok


def test_validate_duplicate_rank_deficient():
    s = Spectrahedron(np.stack([np.eye(3), np.eye(3)]), [1.0, 1.0])
    rep = spectra.validate(s)
    assert not rep.full_rank and not rep.ok
    with pytest.raises(RankDeficient):
        spectra.require_full_rank(s)


def test_validate_scp22():
    rep = spectra.validate(families.make_scp(2, 2))
    assert rep.m == 5 and rep.rank == 5 and rep.ok


def test_validate_infeasible_reported():
    rep = spectra.validate(Spectrahedron(np.eye(2)[None], [-1.0]))
    assert rep.strictly_feasible is False and "Infeasible" in rep.feasibility_status


def test_too_many_constraints():
    mats = np.stack([symlin.smat(e) for e in np.eye(3)])
    s = Spectrahedron(mats, [1.0, 1.0, 0.0])
    assert not spectra.validate(s).m_below_ambient


def test_apply_A():
    s = families.make_spectraplex(np.eye(4))
    np.testing.assert_allclose(spectra.apply_A(s, np.eye(4) / 4), [1.0])
    np.testing.assert_array_equal(spectra.apply_A(s, np.zeros((4, 4))), [0.0])
    scp = families.make_scp(2, 3)
    np.testing.assert_allclose(spectra.apply_A(scp, np.eye(8) / 4), scp.rhs, atol=1e-15)
    with pytest.raises(DimensionMismatch):
        spectra.apply_A(s, np.eye(3))


def test_apply_A_matches_svec_rows(rng):
    s, _ = random_instance(rng, 5, 3)
    X = rng.standard_normal((5, 5))
    X = X + X.T
    np.testing.assert_allclose(s.rows() @ symlin.svec(X), spectra.apply_A(s, X), atol=1e-12)


def test_build_B():
    n = 5
    B = spectra.build_B(families.make_spectraplex(np.eye(n)), np.eye(n) / n)
    np.testing.assert_allclose(B.gram(), [[1.0 / n]])
    s = families.make_diag_blocks(1.0, 2.0, 2)
    B = spectra.build_B(s, np.eye(4))
    np.testing.assert_allclose(B.Z, s.constraints)


def test_build_B_rank_one_det():
    A, v = np.eye(6), np.array([1.5, 0.5, 0, 0, 0, 0])
    xi = v @ v
    s = families.make_rank_one(A, v)
    B = spectra.build_B(s, families.rank_one_center(A, v))
    N = 6
    assert np.linalg.det(B.gram()) == pytest.approx((xi - 1) ** 2 / ((N - 1) * xi**2), rel=1e-10)


def test_orthonormalize(rng):
    s, P0 = random_instance(rng, 5, 3)
    s2 = spectra.orthonormalize(s, P0)
    B2 = spectra.build_B(s2, P0)
    np.testing.assert_allclose(B2.gram(), np.eye(3), atol=1e-10)
    ratio = lambda t: np.linalg.det(t.gram()) / np.linalg.det(spectra.build_B(t, P0).gram())
    assert ratio(s2) == pytest.approx(ratio(s), rel=1e-8)
    # same affine slice
    np.testing.assert_allclose(spectra.apply_A(s2, P0), s2.rhs, atol=1e-10)


def test_orthonormalize_spectraplex():
    n = 4
    s2 = spectra.orthonormalize(families.make_spectraplex(np.eye(n)), np.eye(n) / n)
    np.testing.assert_allclose(spectra.build_B(s2, np.eye(n) / n).gram(), [[1.0]])
    # the constraint becomes +-sqrt(n) I with rhs +-sqrt(n)
    assert abs(s2.rhs[0]) == pytest.approx(np.sqrt(n))


def test_slice_basis():
    Q = spectra.slice_basis(families.make_spectraplex(np.eye(2)))
    assert Q.shape == (2, 3)
    np.testing.assert_allclose(Q @ symlin.svec(np.eye(2)) / np.sqrt(2), 0, atol=1e-14)
    np.testing.assert_allclose(Q @ Q.T, np.eye(2), atol=1e-12)
    mats = np.stack([symlin.smat(e) for e in np.eye(6)[:5]])
    assert spectra.slice_basis(Spectrahedron(mats, np.ones(5))).shape == (1, 6)


def test_project_to_kernel(rng):
    s, _ = random_instance(rng, 4, 3)
    X = rng.standard_normal((4, 4))
    V = spectra.project_to_kernel(s, X + X.T)
    np.testing.assert_allclose(spectra.apply_A(s, V), 0, atol=1e-12)


def test_json_roundtrip(rng):
    s, _ = random_instance(rng, 3, 2)
    s2 = spectra.load(io.StringIO(spectra.dumps(s)))
    np.testing.assert_array_equal(s2.constraints, s.constraints)
    np.testing.assert_array_equal(s2.rhs, s.rhs)
    assert s2.name == s.name


@pytest.mark.parametrize(
    "text",
    [
        "not json",
        "[]",
        '{"n": 2}',
        '{"n": 2, "constraints": []}',
        '{"n": 2, "constraints": [{"matrix": [[1, 0], [0, 1]]}]}',
        '{"n": 2, "constraints": [{"matrix": [[1, 0, 0]], "b": 1}]}',
        '{"n": 2, "constraints": [{"matrix": [[1, 2], [0, 1]], "b": 1}]}',
    ],
)
def test_json_malformed(text):
    with pytest.raises(InstanceFormatError):
        spectra.load(io.StringIO(text))


def test_family_json_has_name():
    d = json.loads(spectra.dumps(families.make_scp(2, 2)))
    assert d["name"] == "scp(n=2,k=2)" and d["n"] == 4 and len(d["constraints"]) == 5

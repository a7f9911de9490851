import warnings

import numpy as np
import pytest

from machstiff.errors import (
    DegenerateProjection,
    FrameMismatch,
    IllConditioned,
    SingularLoadSet,
    ValidationError,
)
from machstiff.solver import (
    Compliance6,
    PrincipalDecomposition,
    assemble_blocks,
    assemble_compliance,
    assemble_parallel,
    extract_block,
    identify,
    invert_to_stiffness,
    principal_angle_in_plane,
    principal_decomposition,
    symmetry_deviation,
)
from machstiff.torsor import Twist, Wrench


def _cases(C0, T, at=(0.0, 0.0, 0.0)):
    D = C0 @ T
    return [(Wrench.from_vector(T[:, k], at), Twist.from_vector(D[:, k], at)) for k in range(T.shape[1])]


class TestCompliance:
    def test_exact_recovery(self):
        rng = np.random.default_rng(0)
        C0 = rng.normal(size=(6, 6)) * 1e-8
        T = rng.normal(size=(6, 6))
        np.testing.assert_allclose(assemble_compliance(_cases(C0, T)).matrix, C0, rtol=1e-10, atol=1e-20)

    def test_overdetermined(self):
        rng = np.random.default_rng(1)
        C0 = rng.normal(size=(6, 6)) * 1e-8
        T = rng.normal(size=(6, 9))
        np.testing.assert_allclose(assemble_compliance(_cases(C0, T)).matrix, C0, rtol=1e-9, atol=1e-20)

    def test_rank_deficient(self):
        T = np.eye(6)
        T[:, 5] = T[:, 4]
        with pytest.raises(SingularLoadSet):
            assemble_compliance(_cases(1e-8 * np.eye(6), T))

    def test_ill_conditioned_warns(self):
        T = np.diag([1, 1, 1, 1, 1, 1e-7])
        with pytest.warns(IllConditioned):
            assemble_compliance(_cases(1e-8 * np.eye(6), T))

    def test_frame_mismatch(self):
        cases = _cases(1e-8 * np.eye(6), np.eye(6))
        cases[2] = (cases[2][0], Twist.from_vector(cases[2][1].vector, at=(1, 0, 0)))
        with pytest.raises(FrameMismatch):
            assemble_compliance(cases)

    def test_no_symmetrization(self):
        rng = np.random.default_rng(2)
        C0 = rng.normal(size=(6, 6))
        K = invert_to_stiffness(Compliance6(C0))
        np.testing.assert_allclose(K.matrix @ C0, np.eye(6), atol=1e-10)
        assert K.symmetry_deviation > 0.1


class TestBlocks:
    def test_extract_and_reassemble(self, stiffness_fixture):
        K = np.array(stiffness_fixture["stiffness_6x6"])
        blocks = [extract_block(K, b) for b in ("FC", "F", "C", "CF")]
        np.testing.assert_array_equal(assemble_blocks(*blocks), K)

    def test_fixture_block_layout(self, stiffness_fixture):
        K = np.array(stiffness_fixture["stiffness_6x6"])
        np.testing.assert_array_equal(extract_block(K, "F")[0], [6.7e6, 8.7e5, -3.4e6])

    def test_unknown_block(self):
        with pytest.raises(ValidationError):
            extract_block(np.eye(6), "Q")

    def test_symmetry_deviation(self):
        assert symmetry_deviation(np.eye(3)) == 0.0
        assert symmetry_deviation([[0, 1], [0, 0]]) == pytest.approx(np.sqrt(2.0))

    def test_parallel_assembly(self):
        a = np.arange(9.0).reshape(3, 3)
        np.testing.assert_array_equal(assemble_parallel(a, np.zeros((3, 3))), a)
        with pytest.raises(ValidationError):
            assemble_parallel(np.eye(2), np.eye(3))


class TestPrincipal:
    def test_diagonal(self):
        pd = principal_decomposition(np.diag([3.0, 1.0, 2.0]))
        np.testing.assert_allclose(pd.eigenvalues, [1, 2, 3])
        np.testing.assert_allclose(pd.max_deformation_direction, [0, 1, 0])

    @pytest.mark.parametrize("angle", [0.0, 30.0, 52.0, 135.0])
    def test_angle_in_plane(self, angle):
        a = np.radians(angle)
        v = np.array([np.cos(a), np.sin(a), 0.0])
        w = np.array([-np.sin(a), np.cos(a), 0.0])
        K = 1e6 * np.outer(v, v) + 5e6 * np.outer(w, w) + 9e6 * np.outer([0, 0, 1], [0, 0, 1])
        pd = principal_decomposition(K)
        assert principal_angle_in_plane(pd, "xy") == pytest.approx(angle % 180.0, abs=1e-9)

    def test_perpendicular_projection(self):
        pd = PrincipalDecomposition(np.array([1.0, 2, 3]), np.eye(3)[:, [2, 0, 1]])
        with pytest.raises(DegenerateProjection):
            principal_angle_in_plane(pd, "xy")


class TestIdentify:
    def test_noiseless_round_trip(self, noiseless_campaign):
        K, c = noiseless_campaign
        ident = identify(c)
        assert np.linalg.norm(ident.stiffness - K) / np.linalg.norm(K) < 1e-8
        assert ident.relation_residual() < 1e-10
        assert ident.error_matrix.shape == (6, 6)

    def test_transport_to_other_point(self, noiseless_campaign):
        K, c = noiseless_campaign
        p = np.array([0.02, -0.01, 0.3])
        ident = identify(c, at=p)
        # stiffness moves with wrench/twist transport: K_p = A K B^-1
        from machstiff.torsor import twist_transport_matrix, wrench_transport_matrix
        A = wrench_transport_matrix(np.zeros(3), p)
        B = twist_transport_matrix(np.zeros(3), p)
        expected = A @ K @ np.linalg.inv(B)
        assert np.linalg.norm(ident.stiffness - expected) / np.linalg.norm(expected) < 1e-8

import math

import pytest
import torch

from models.quaternion import (DTYPE, qmul, qconj, qabs, qinv, qmatmul, qconj_transpose, realify, realify_col,
                               unrealify, qnorm, qdot, structure_matrices, jrs_project_dense)

ONE = torch.tensor([1., 0., 0., 0.], dtype=DTYPE)
I = torch.tensor([0., 1., 0., 0.], dtype=DTYPE)
J = torch.tensor([0., 0., 1., 0.], dtype=DTYPE)
K = torch.tensor([0., 0., 0., 1.], dtype=DTYPE)


class TestQmul:
    def test_units(self):
        assert torch.equal(qmul(I, J), K)
        assert torch.equal(qmul(J, K), I)
        assert torch.equal(qmul(K, I), J)
        assert torch.equal(qmul(I, I), -ONE)
        assert torch.equal(qmul(qmul(I, J), K), -ONE)

    def test_non_commutative(self):
        assert torch.equal(qmul(I, J), -qmul(J, I))

    def test_identity(self, randn):
        q = randn(4, 5)
        assert torch.equal(qmul(q, ONE[:, None]), q)
        assert torch.equal(qmul(ONE[:, None], q), q)

    def test_modulus_is_multiplicative(self, randn):
        p, q = randn(4, 100), randn(4, 100)
        assert torch.allclose(qabs(qmul(p, q)), qabs(p) * qabs(q), rtol=1e-12)

    def test_associative(self, randn):
        p, q, r = randn(4, 20), randn(4, 20), randn(4, 20)
        assert torch.allclose(qmul(qmul(p, q), r), qmul(p, qmul(q, r)), atol=1e-12)

    def test_matches_real_counterpart(self, randn):
        for _ in range(10):
            p, q = randn(4), randn(4)
            expected = realify(p) @ realify_col(q)
            assert torch.allclose(realify_col(qmul(p, q)), expected, atol=1e-13)

    def test_inverse(self, randn):
        q = randn(4, 50)
        product = qmul(q, qinv(q))
        assert torch.allclose(product, ONE[:, None].expand_as(product), atol=1e-12)

    def test_zero_has_no_inverse(self):
        with pytest.raises(ValueError):
            qinv(torch.zeros(4, dtype=DTYPE))


class TestRealify:
    def test_one_is_identity(self):
        assert torch.equal(realify(ONE), torch.eye(4, dtype=DTYPE))

    def test_i_pattern(self):
        expected = torch.tensor([[0., -1., 0., 0.],
                                 [1., 0., 0., 0.],
                                 [0., 0., 0., -1.],
                                 [0., 0., 1., 0.]], dtype=DTYPE)
        assert torch.equal(realify(I), expected)

    def test_homomorphism(self, randn):
        for n in (1, 3, 8):
            a, b = randn(4, n, n), randn(4, n, n)
            lhs = realify(qmatmul(a, b))
            rhs = realify(a) @ realify(b)
            assert (lhs - rhs).abs().max() <= 1e-12 * max(1., rhs.abs().max().item())

    def test_rectangular_homomorphism(self, randn):
        a, b = randn(4, 3, 5), randn(4, 5, 2)
        assert torch.allclose(realify(qmatmul(a, b)), realify(a) @ realify(b), atol=1e-12)

    def test_conjugate_transpose_is_exact(self, randn):
        a = randn(4, 4, 6)
        assert torch.equal(realify(qconj_transpose(a)), realify(a).T)

    def test_jrs_symmetry(self, randn):
        a = randn(4, 5, 5)
        mat = realify(a)
        for struct in structure_matrices(5):
            assert torch.allclose(struct @ mat @ struct.T, mat, atol=1e-13)

    def test_structure_matrices_are_orthogonal(self):
        for struct in structure_matrices(3):
            assert torch.equal(struct @ struct.T, torch.eye(12, dtype=DTYPE))


class TestUnrealify:
    def test_identity(self):
        a = unrealify(torch.eye(12, dtype=DTYPE))
        assert torch.equal(a[0], torch.eye(3, dtype=DTYPE))
        assert torch.equal(a[1:], torch.zeros(3, 3, 3, dtype=DTYPE))

    def test_round_trip(self, randn):
        a = randn(4, 4, 3)
        assert torch.equal(unrealify(realify(a)), a)
        mat = realify(a)
        assert torch.equal(realify(unrealify(mat)), mat)

    def test_rejects_unstructured(self, randn):
        with pytest.raises(ValueError):
            unrealify(randn(8, 8))

    def test_rejects_bad_dims(self, randn):
        with pytest.raises(ValueError):
            unrealify(randn(6, 8))

    def test_projection_output_is_quaternion(self, randn):
        mat = jrs_project_dense(randn(12, 12))
        a = unrealify(mat, tol=1e-12)
        assert torch.allclose(realify(a), mat, atol=1e-12)

    def test_projection_is_idempotent(self, randn):
        mat = realify(randn(4, 3, 3))
        assert torch.allclose(jrs_project_dense(mat), mat, atol=1e-13)


class TestNorms:
    def test_zero(self):
        assert qnorm(torch.zeros(4, 3, dtype=DTYPE)) == 0.

    def test_one_plus_i(self):
        v = torch.tensor([[1.], [1.], [0.], [0.]], dtype=DTYPE)
        assert qnorm(v) == pytest.approx(math.sqrt(2.), rel=1e-15)
        assert qnorm(v, p=1) == pytest.approx(math.sqrt(2.), rel=1e-15)

    def test_vector_identities(self, randn):
        v = randn(4, 7)
        two_norm = qnorm(v, p=2)
        assert two_norm == pytest.approx(torch.linalg.norm(realify_col(v)).item(), rel=1e-12)
        assert two_norm == pytest.approx(0.5 * torch.linalg.norm(realify(v)).item(), rel=1e-12)

    def test_matrix_frobenius_identities(self, randn):
        a = randn(4, 5, 3)
        fro = qnorm(a, p='fro')
        assert fro == pytest.approx(torch.linalg.norm(realify_col(a)).item(), rel=1e-12)
        assert fro == pytest.approx(0.5 * torch.linalg.norm(realify(a)).item(), rel=1e-12)

    def test_unknown_norm(self, randn):
        with pytest.raises(ValueError):
            qnorm(randn(4, 3), p=3)


class TestQdot:
    def test_unit(self):
        x = I[:, None]
        assert qdot(x, x) == 1.

    def test_symmetric(self, randn):
        x, y = randn(4, 9), randn(4, 9)
        assert qdot(x, y) == pytest.approx(qdot(y, x), rel=1e-14)

    def test_real_part_of_inner_product(self, randn):
        x, y = randn(4, 6, 1), randn(4, 6, 1)
        inner = qmatmul(qconj_transpose(x), y)
        assert qdot(x, y) == pytest.approx(inner[0, 0, 0].item(), rel=1e-12)
        assert qdot(x, y) == pytest.approx(torch.dot(realify_col(x).flatten(), realify_col(y).flatten()).item(),
                                           rel=1e-12)

    def test_norm_consistency(self, randn):
        x = randn(4, 11)
        assert qdot(x, x) == pytest.approx(qnorm(x) ** 2, rel=1e-12)

    def test_shape_mismatch(self, randn):
        with pytest.raises(ValueError):
            qdot(randn(4, 3), randn(4, 4))

    def test_conj_is_involution(self, randn):
        q = randn(4, 3)
        assert torch.equal(qconj(qconj(q)), q)

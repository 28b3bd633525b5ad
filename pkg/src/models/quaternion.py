"""
# -*- coding: utf-8 -*-
-----------------------------------------------------------------------------------
# DoC: 2024.03.02
-----------------------------------------------------------------------------------
# Description: Quaternion algebra on component-first torch tensors.
# A quaternion array has shape (4, ...) holding the (a0, a1, a2, a3) planes:
#   scalar (4,), vector (4, n), matrix (4, m, n), pixel field (4, H, W)
# The real counterpart of a quaternion matrix A = A0 + A1 i + A2 j + A3 k is
#   [[A0, -A1, -A2, -A3],
#    [A1,  A0, -A3,  A2],
#    [A2,  A3,  A0, -A1],
#    [A3, -A2,  A1,  A0]]
"""

import torch

__all__ = ['DTYPE', 'REALIFY_PATTERN', 'qmul', 'qconj', 'qabs', 'qinv', 'qmatmul',
           'qconj_transpose', 'realify_blocks', 'realify', 'realify_col', 'unrealify', 'qnorm', 'qdot',
           'structure_matrices', 'jrs_project_dense']

DTYPE = torch.float64

# (component index, sign) of every block of the real counterpart, row by row
REALIFY_PATTERN = (
    ((0, 1), (1, -1), (2, -1), (3, -1)),
    ((1, 1), (0, 1), (3, -1), (2, 1)),
    ((2, 1), (3, 1), (0, 1), (1, -1)),
    ((3, 1), (2, -1), (1, 1), (0, 1)),
)

# Right multiplication by i, j, k acting on the column form [x0; x1; x2; x3]
_RIGHT_I = ((0, -1, 0, 0), (1, 0, 0, 0), (0, 0, 0, 1), (0, 0, -1, 0))
_RIGHT_J = ((0, 0, -1, 0), (0, 0, 0, -1), (1, 0, 0, 0), (0, 1, 0, 0))
_RIGHT_K = ((0, 0, 0, -1), (0, 0, 1, 0), (0, -1, 0, 0), (1, 0, 0, 0))

STRUCTURE_TOL = 1e-12


def qmul(p, q):
    """Hamilton product, element-wise with broadcasting over the trailing axes.

    Works on real tensors and on complex spectra alike, so the product of two
    transformed fields is the transform of a quaternion convolution.
    """
    p0, p1, p2, p3 = p[0], p[1], p[2], p[3]
    q0, q1, q2, q3 = q[0], q[1], q[2], q[3]
    return torch.stack([
        p0 * q0 - p1 * q1 - p2 * q2 - p3 * q3,
        p0 * q1 + p1 * q0 + p2 * q3 - p3 * q2,
        p0 * q2 - p1 * q3 + p2 * q0 + p3 * q1,
        p0 * q3 + p1 * q2 - p2 * q1 + p3 * q0,
    ], dim=0)


def qconj(q):
    return torch.cat([q[:1], -q[1:]], dim=0)


def qabs(q):
    """Modulus of every quaternion entry"""
    return torch.sqrt((q * q).sum(dim=0))


def qinv(q):
    sq_norm = (q * q).sum(dim=0)
    if bool((sq_norm == 0).any()):
        raise ValueError('The zero quaternion has no inverse')
    return qconj(q) / sq_norm


def qmatmul(a, b):
    """Quaternion matrix product of (4, m, n) and (4, n, p) arrays"""
    a0, a1, a2, a3 = a[0], a[1], a[2], a[3]
    b0, b1, b2, b3 = b[0], b[1], b[2], b[3]
    return torch.stack([
        a0 @ b0 - a1 @ b1 - a2 @ b2 - a3 @ b3,
        a0 @ b1 + a1 @ b0 + a2 @ b3 - a3 @ b2,
        a0 @ b2 - a1 @ b3 + a2 @ b0 + a3 @ b1,
        a0 @ b3 + a1 @ b2 - a2 @ b1 + a3 @ b0,
    ], dim=0)


def qconj_transpose(a):
    return qconj(a).transpose(-1, -2)


def realify_blocks(a):
    """Stack the real-counterpart blocks of a into a (4, 4, ...) grid.

    The trailing axes of a are kept, so this assembles dense matrices as well
    as grids of kernels or kernel spectra.
    """
    rows = []
    for pattern_row in REALIFY_PATTERN:
        rows.append(torch.stack([sign * a[comp] for comp, sign in pattern_row], dim=0))
    return torch.stack(rows, dim=0)


def _as_matrix(a):
    if a.dim() == 1:
        return a.reshape(4, 1, 1)
    if a.dim() == 2:
        return a.unsqueeze(-1)
    assert a.dim() == 3, 'realify expects a scalar, vector or matrix, got shape {}'.format(tuple(a.shape))
    return a


def realify(a):
    """Real counterpart: a (4m, 4n) real matrix for a (4, m, n) quaternion matrix"""
    a = _as_matrix(a)
    _, m, n = a.shape
    grid = realify_blocks(a)
    return grid.permute(0, 2, 1, 3).reshape(4 * m, 4 * n)


def realify_col(v):
    """Column form: the components stacked along the rows"""
    if v.dim() <= 2:
        return v.reshape(-1)
    return v.reshape(4 * v.shape[1], *v.shape[2:])


def unrealify(mat, tol=STRUCTURE_TOL):
    """Recover the quaternion matrix from its real counterpart.

    Raises ValueError when mat does not carry the real-counterpart block pattern.
    """
    rows, cols = mat.shape
    if rows % 4 or cols % 4:
        raise ValueError('Real counterpart dims must be multiples of 4, got {}x{}'.format(rows, cols))
    m, n = rows // 4, cols // 4
    blocks = mat.reshape(4, m, 4, n).permute(0, 2, 1, 3)
    a = blocks[:, 0].clone()
    deviation = (realify(a) - mat).abs().max().item()
    if deviation > tol:
        raise ValueError('Matrix is not the real counterpart of a quaternion matrix (deviation {:.3e})'.format(
            deviation))
    return a


def qnorm(v, p=2):
    """p-norm of a quaternion vector (p in {1, 2, 'fro'}); 'fro' also applies to matrices"""
    moduli = qabs(v)
    if p == 1:
        return moduli.sum().item()
    if p in (2, 'fro', 'F'):
        return torch.sqrt((moduli * moduli).sum()).item()
    raise ValueError('Unsupported quaternion norm: {}'.format(p))


def qdot(x, y):
    """Real part of x^H y summed over all entries"""
    if x.shape != y.shape:
        raise ValueError('qdot needs equal shapes, got {} and {}'.format(tuple(x.shape), tuple(y.shape)))
    return (x * y).sum().item()


def structure_matrices(n, dtype=DTYPE):
    """The J, R, S structure matrices of size 4n x 4n"""
    eye = torch.eye(n, dtype=dtype)
    return tuple(torch.kron(torch.tensor(m, dtype=dtype), eye) for m in (_RIGHT_I, _RIGHT_J, _RIGHT_K))


def jrs_project_dense(mat):
    """JRS-symmetric part 1/4 (M + J M J^T + R M R^T + S M S^T) of a (4n, 4n) matrix"""
    assert mat.shape[0] == mat.shape[1] and mat.shape[0] % 4 == 0, 'Expect a square 4n x 4n matrix'
    j_mat, r_mat, s_mat = structure_matrices(mat.shape[0] // 4, dtype=mat.dtype)
    return 0.25 * (mat + j_mat @ mat @ j_mat.T + r_mat @ mat @ r_mat.T + s_mat @ mat @ s_mat.T)

"""
# -*- coding: utf-8 -*-
-----------------------------------------------------------------------------------
# DoC: 2024.03.05
-----------------------------------------------------------------------------------
# Description: Periodic finite differences, the SVTV / CTV regularizers, the
# orthogonal colour transform P and the grouped soft-shrinkage operators.
# Colour images are (3, H, W) float64 tensors.
"""

import sys
import math

import torch

sys.path.append('../')

from models.quaternion import DTYPE

# Rows: two saturation directions orthogonal to the gray axis, then the gray (value) axis
P_MATRIX = torch.tensor([
    [1. / math.sqrt(2.), -1. / math.sqrt(2.), 0.],
    [1. / math.sqrt(6.), 1. / math.sqrt(6.), -2. / math.sqrt(6.)],
    [1. / math.sqrt(3.), 1. / math.sqrt(3.), 1. / math.sqrt(3.)],
], dtype=DTYPE)

# C u = 3u - (sum u) 1, so ||C u|| / 3 is the distance of u to the gray axis
SATURATION_MATRIX = torch.tensor([
    [2., -1., -1.],
    [-1., 2., -1.],
    [-1., -1., 2.],
], dtype=DTYPE)


def grad_x(u):
    """Backward difference along the rows: u(i, j) - u(i-1, j)"""
    return u - torch.roll(u, shifts=1, dims=-2)


def grad_y(u):
    """Backward difference along the columns: u(i, j) - u(i, j-1)"""
    return u - torch.roll(u, shifts=1, dims=-1)


def grad_x_adjoint(p):
    return p - torch.roll(p, shifts=-1, dims=-2)


def grad_y_adjoint(p):
    return p - torch.roll(p, shifts=-1, dims=-1)


def grad(u):
    return grad_x(u), grad_y(u)


def grad_adjoint(px, py):
    """Negative discrete divergence, the adjoint of grad"""
    return grad_x_adjoint(px) + grad_y_adjoint(py)


def laplacian_symbol(shape, dtype=DTYPE, device=None):
    """rfft2 symbol of Dx^T Dx + Dy^T Dy on an (H, W) grid"""
    height, width = shape
    k = torch.arange(height, dtype=dtype, device=device)
    l = torch.arange(width // 2 + 1, dtype=dtype, device=device)
    sym_x = 2. - 2. * torch.cos(2. * math.pi * k / height)
    sym_y = 2. - 2. * torch.cos(2. * math.pi * l / width)
    return sym_x[:, None] + sym_y[None, :]


def _pixelwise(mat, img):
    return torch.einsum('ij,...jhw->...ihw', mat.to(img.device, img.dtype), img)


def apply_p(img):
    return _pixelwise(P_MATRIX, img)


def apply_p_inverse(img):
    return _pixelwise(P_MATRIX.T, img)


def sv_components(img):
    """Per-pixel saturation |u|_s = ||C u|| / 3 and value |u|_v = |sum u| / sqrt(3)"""
    saturation = torch.linalg.norm(_pixelwise(SATURATION_MATRIX, img), dim=-3) / 3.
    value = img.sum(dim=-3).abs() / math.sqrt(3.)
    return saturation, value


def svtv_value(img, alpha=1.):
    """Saturation-value TV evaluated on the RGB gradients"""
    gx, gy = grad(img)
    sat_x, val_x = sv_components(gx)
    sat_y, val_y = sv_components(gy)
    saturation_tv = torch.sqrt(sat_x ** 2 + sat_y ** 2).sum()
    value_tv = torch.sqrt(val_x ** 2 + val_y ** 2).sum()
    return (saturation_tv + alpha * value_tv).item()


def svtv_value_transformed(img, alpha=1.):
    """Saturation-value TV evaluated in the P coordinates s = P u"""
    sx, sy = grad(apply_p(img))
    saturation_tv = torch.sqrt((sx[..., :2, :, :] ** 2 + sy[..., :2, :, :] ** 2).sum(dim=-3)).sum()
    value_tv = torch.sqrt(sx[..., 2, :, :] ** 2 + sy[..., 2, :, :] ** 2).sum()
    return (saturation_tv + alpha * value_tv).item()


def ctv2_value(img):
    """Pixel-wise root of the gradient energy summed over the channels"""
    gx, gy = grad(img)
    return torch.sqrt((gx ** 2 + gy ** 2).sum(dim=-3)).sum().item()


def tv_norm(channel):
    """Isotropic TV of a single (H, W) channel"""
    gx, gy = grad(channel)
    return torch.sqrt(gx ** 2 + gy ** 2).sum().item()


def ctv1_value(img):
    """Root of the squared per-channel TV totals"""
    gx, gy = grad(img)
    channel_tv = torch.sqrt(gx ** 2 + gy ** 2).sum(dim=(-2, -1))
    return torch.sqrt((channel_tv ** 2).sum()).item()


def ctv(img, kind='ctv2'):
    if kind == 'ctv2':
        return ctv2_value(img)
    if kind == 'ctv1':
        return ctv1_value(img)
    raise ValueError('Unknown colour TV: {}'.format(kind))


def group_shrink(components, threshold):
    """Grouped soft thresholding: every component is scaled by max(0, n - thr) / n,
    n being the pixel-wise norm over the group; the output is 0 where n = 0.
    """
    assert threshold >= 0, 'Shrinkage threshold must be nonnegative, got {}'.format(threshold)
    norm = torch.sqrt(sum(c * c for c in components))
    safe_norm = torch.where(norm > 0, norm, torch.ones_like(norm))
    scale = torch.where(norm > 0, torch.clamp(norm - threshold, min=0.) / safe_norm, torch.zeros_like(norm))
    return tuple(c * scale for c in components)


def shrink_sv(tx1, ty1, tx2, ty2, threshold):
    """Saturation group: both gradient directions of the first two P channels"""
    return group_shrink((tx1, ty1, tx2, ty2), threshold)


def shrink_v(tx3, ty3, threshold):
    """Value group: both gradient directions of the third P channel"""
    return group_shrink((tx3, ty3), threshold)

"""
# -*- coding: utf-8 -*-
-----------------------------------------------------------------------------------
# DoC: 2024.03.04
-----------------------------------------------------------------------------------
# Description: Cross-channel blur operators and their quaternion splitting B = Q + R.
# Every convolution is circular and applied through torch.fft.rfft2 / irfft2.
# A blur is an EasyDict {'kernels': 3x3 kernel specs, 'weights': 3x3 matrix}.
"""

import sys
import math

import torch
import torch.fft
from easydict import EasyDict as edict

sys.path.append('../')

from models.quaternion import DTYPE, qmul, qconj, realify_blocks
from utils.misc import ConfigError

KERNEL_KINDS = ('delta', 'average', 'gaussian', 'motion', 'custom')
_SHORT_KINDS = {'D': 'delta', 'A': 'average', 'G': 'gaussian', 'M': 'motion'}
ROW_SUM_TOL = 1e-9


def kernel_spec(kind, size=None, sigma=None, length=None, angle=None, taps=None):
    """Build a kernel spec, keeping only the fields its kind uses"""
    kind = _SHORT_KINDS.get(kind, kind)
    if kind not in KERNEL_KINDS:
        raise ConfigError('Unknown kernel kind: {}'.format(kind))
    spec = edict({'kind': kind})
    if kind == 'average':
        spec.size = size
    elif kind == 'gaussian':
        spec.size = size
        spec.sigma = sigma
    elif kind == 'motion':
        spec.length = length
        spec.angle = 0. if angle is None else angle
    elif kind == 'custom':
        if taps is None:
            raise ConfigError('A custom kernel needs taps')
        spec.taps = [list(map(float, row)) for row in taps]
    return spec


def parse_kernel_spec(spec):
    """Accept a dict with a 'kind' key or the short notation ('G', 5, 5), ('A', 5), ('M', 11, 45)"""
    if isinstance(spec, dict):
        if 'kind' not in spec:
            raise ConfigError('Kernel spec without kind: {}'.format(spec))
        params = {k: spec[k] for k in ('size', 'sigma', 'length', 'angle', 'taps') if k in spec}
        return kernel_spec(spec['kind'], **params)
    if isinstance(spec, (list, tuple)) and len(spec) > 0:
        kind = _SHORT_KINDS.get(spec[0], spec[0])
        args = list(spec[1:])
        if kind == 'delta':
            return kernel_spec(kind)
        if kind == 'average' and len(args) == 1:
            return kernel_spec(kind, size=args[0])
        if kind == 'gaussian' and len(args) == 2:
            return kernel_spec(kind, size=args[0], sigma=args[1])
        if kind == 'motion' and len(args) in (1, 2):
            return kernel_spec(kind, length=args[0], angle=args[1] if len(args) == 2 else 0.)
    raise ConfigError('Cannot parse kernel spec: {}'.format(spec))


def _check_positive_int(value, name):
    if not isinstance(value, (int, float)) or isinstance(value, bool) or value != int(value) or value < 1:
        raise ConfigError('{} must be a positive integer, got {}'.format(name, value))
    return int(value)


def _motion_taps(length, angle):
    if not isinstance(length, (int, float)) or not math.isfinite(length) or length <= 0:
        raise ConfigError('Motion length must be positive, got {}'.format(length))
    if not isinstance(angle, (int, float)) or not math.isfinite(angle):
        raise ConfigError('Motion angle must be finite, got {}'.format(angle))
    half = max(int(math.ceil((length - 1) / 2.)), 0)
    size = 2 * half + 1
    centre = float(half)
    theta = math.radians(angle)
    num_samples = 8 * int(math.ceil(length)) + 1
    t = torch.linspace(-(length - 1) / 2., (length - 1) / 2., num_samples, dtype=DTYPE)
    cols = torch.floor(centre + t * math.cos(theta) + 0.5).long().clamp(0, size - 1)
    rows = torch.floor(centre - t * math.sin(theta) + 0.5).long().clamp(0, size - 1)
    taps = torch.zeros((size, size), dtype=DTYPE)
    taps[rows, cols] = 1.
    return taps


def make_kernel(spec):
    """Normalised taps (sum 1) of a kernel spec"""
    spec = parse_kernel_spec(spec)
    if spec.kind == 'delta':
        taps = torch.ones((1, 1), dtype=DTYPE)
    elif spec.kind == 'average':
        size = _check_positive_int(spec.size, 'Average size')
        taps = torch.ones((size, size), dtype=DTYPE)
    elif spec.kind == 'gaussian':
        size = _check_positive_int(spec.size, 'Gaussian size')
        if not isinstance(spec.sigma, (int, float)) or not math.isfinite(spec.sigma) or spec.sigma <= 0:
            raise ConfigError('Gaussian sigma must be positive, got {}'.format(spec.sigma))
        x = torch.arange(size, dtype=DTYPE) - (size - 1) / 2.
        taps = torch.exp(-(x[:, None] ** 2 + x[None, :] ** 2) / (2. * spec.sigma ** 2))
    elif spec.kind == 'motion':
        taps = _motion_taps(spec.length, spec.angle)
    else:
        taps = torch.as_tensor(spec.taps, dtype=DTYPE)
        if taps.dim() != 2 or taps.numel() == 0 or not bool(torch.isfinite(taps).all()):
            raise ConfigError('Custom taps must be a finite 2-D array')
        if taps.sum().item() <= 0:
            raise ConfigError('Custom taps must have a positive sum')
    return taps / taps.sum()


def psf2otf(taps, shape):
    """rfft2 spectrum of a centred kernel, circularly padded to shape (H, W)"""
    height, width = shape
    kh, kw = taps.shape
    if kh > height or kw > width:
        raise ConfigError('Kernel support {}x{} exceeds the image size {}x{}'.format(kh, kw, height, width))
    padded = torch.zeros((height, width), dtype=taps.dtype, device=taps.device)
    padded[:kh, :kw] = taps
    padded = torch.roll(padded, shifts=(-(kh // 2), -(kw // 2)), dims=(0, 1))
    return torch.fft.rfft2(padded)


def convolve_direct(taps, u):
    """Spatial circular convolution of the last two axes of u, used as the FFT oracle"""
    kh, kw = taps.shape
    out = torch.zeros_like(u)
    for a in range(kh):
        for b in range(kw):
            if taps[a, b] != 0:
                out = out + taps[a, b] * torch.roll(u, shifts=(a - kh // 2, b - kw // 2), dims=(-2, -1))
    return out


class BlockConvolution(object):
    """A p x q grid of circular convolutions held as rfft2 spectra of shape (p, q, H, W // 2 + 1).

    Maps (..., q, H, W) fields to (..., p, H, W) fields.
    """

    def __init__(self, spectra, shape):
        assert spectra.dim() == 4, 'Expect spectra of shape (p, q, H, W//2+1), got {}'.format(tuple(spectra.shape))
        assert spectra.shape[-1] == shape[1] // 2 + 1, 'Spectra do not match the image shape {}'.format(shape)
        self.spectra = spectra
        self.shape = tuple(shape)

    @classmethod
    def from_kernels(cls, kernel_grid, shape, device=None):
        """kernel_grid: nested p x q lists of tap tensors (None for a zero block)"""
        rows = []
        for kernel_row in kernel_grid:
            row = []
            for taps in kernel_row:
                if taps is None:
                    taps = torch.zeros((1, 1), dtype=DTYPE)
                row.append(psf2otf(torch.as_tensor(taps, dtype=DTYPE, device=device), shape))
            rows.append(torch.stack(row, dim=0))
        return cls(torch.stack(rows, dim=0), shape)

    @property
    def num_in(self):
        return self.spectra.shape[1]

    def apply(self, f):
        f_hat = torch.fft.rfft2(f)
        return torch.fft.irfft2(torch.einsum('pqhw,...qhw->...phw', self.spectra, f_hat), s=self.shape)

    def adjoint(self, g):
        g_hat = torch.fft.rfft2(g)
        return torch.fft.irfft2(torch.einsum('pqhw,...phw->...qhw', self.spectra.conj(), g_hat), s=self.shape)

    def kernels(self):
        """Spatial kernels at full image size, with the centre tap at pixel (0, 0)"""
        return torch.fft.irfft2(self.spectra, s=self.shape)

    def frobenius_norm(self):
        return torch.linalg.norm(self.kernels()).item()

    def to_dense(self):
        """Dense (p*H*W, q*H*W) matrix, for small grids only"""
        height, width = self.shape
        num_cols = self.num_in * height * width
        basis = torch.eye(num_cols, dtype=DTYPE, device=self.spectra.device).reshape(num_cols, self.num_in, height,
                                                                                      width)
        return self.apply(basis).reshape(num_cols, -1).T


def _check_weights(weights):
    w = torch.as_tensor(weights, dtype=DTYPE)
    if w.shape != (3, 3):
        raise ConfigError('The weight matrix must be 3x3, got shape {}'.format(tuple(w.shape)))
    if not bool(torch.isfinite(w).all()):
        raise ConfigError('The weight matrix must be finite')
    if bool((w < 0).any()) or bool((w > 1).any()):
        raise ConfigError('Every weight must lie in [0, 1]')
    row_sums = w.sum(dim=1)
    if bool(((row_sums - 1.).abs() > ROW_SUM_TOL).any()):
        raise ConfigError('The weight matrix must be row-stochastic, row sums are {}'.format(row_sums.tolist()))
    return w


def make_cross_channel_blur(kernels, weights):
    """Validated cross-channel blur from a 3x3 grid of kernel specs and a 3x3 weight matrix"""
    if len(kernels) != 3 or any(len(row) != 3 for row in kernels):
        raise ConfigError('The kernel grid must be 3x3')
    specs = [[parse_kernel_spec(spec) for spec in row] for row in kernels]
    for row in specs:
        for spec in row:
            make_kernel(spec)
    w = _check_weights(weights)
    return edict({'kernels': specs, 'weights': w.tolist()})


def blur_to_json(blur):
    return {
        'kernels': [[dict(spec) for spec in row] for row in blur.kernels],
        'weights': [list(map(float, row)) for row in blur.weights],
    }


def blur_from_json(blur_dict):
    if not isinstance(blur_dict, dict) or 'kernels' not in blur_dict or 'weights' not in blur_dict:
        raise ConfigError('A blur description needs "kernels" and "weights"')
    return make_cross_channel_blur(blur_dict['kernels'], blur_dict['weights'])


def cross_channel_convolution(blur, shape, device=None):
    """The 3x3 block convolution W . K acting on RGB planes"""
    weights = blur.weights
    grid = [[weights[i][j] * make_kernel(blur.kernels[i][j]) for j in range(3)] for i in range(3)]
    return BlockConvolution.from_kernels(grid, shape, device=device)


def apply_cross_channel(blur, img):
    """Output channel i = sum_j w_ij (K_ij * u_j) on a (3, H, W) image"""
    assert img.dim() == 3 and img.shape[0] == 3, 'Expect a (3, H, W) image, got {}'.format(tuple(img.shape))
    return cross_channel_convolution(blur, tuple(img.shape[-2:]), device=img.device).apply(img)


def choose_B_blocks(blur, shape, first_column=None, device=None):
    """Extended 4x4 operator: zero first row, lower-right 3x3 = W . K.

    first_column optionally gives taps for B_11, B_21, B_31, B_41 (zero by default).
    The first row B_12, B_13, B_14 is always zero so that colour fields keep a zero real part.
    """
    inner = cross_channel_convolution(blur, shape, device=device)
    spectra = torch.zeros((4, 4) + tuple(inner.spectra.shape[-2:]), dtype=inner.spectra.dtype,
                          device=inner.spectra.device)
    spectra[1:, 1:] = inner.spectra
    if first_column is not None:
        if len(first_column) != 4:
            raise ConfigError('first_column needs four kernels')
        for row, taps in enumerate(first_column):
            if taps is not None:
                spectra[row, 0] = psf2otf(torch.as_tensor(taps, dtype=DTYPE, device=spectra.device), shape)
    return BlockConvolution(spectra, shape)


def jrs_split(extended):
    """Split a 4x4 block convolution into quaternion spectra Q (4, H, W//2+1) and a residual grid"""
    b = extended.spectra
    assert b.shape[:2] == (4, 4), 'The extended operator must be a 4x4 grid'
    q_spectra = 0.25 * torch.stack([
        b[0, 0] + b[1, 1] + b[2, 2] + b[3, 3],
        b[1, 0] - b[0, 1] + b[3, 2] - b[2, 3],
        b[2, 0] - b[0, 2] + b[1, 3] - b[3, 1],
        b[3, 0] - b[0, 3] + b[2, 1] - b[1, 2],
    ], dim=0)
    residual = BlockConvolution(b - realify_blocks(q_spectra), extended.shape)
    return q_spectra, residual


class QuaternionBlurOperator(object):
    """Quaternion convolution Q plus the residual block convolution R, with B = Q + R"""

    boundary = 'periodic'

    def __init__(self, q_spectra, residual, extended):
        self.q_spectra = q_spectra
        self.residual = residual
        self.extended = extended
        self.shape = extended.shape
        self._q_adjoint_spectra = qconj(q_spectra.conj())
        # pure quaternion blurs skip the residual work
        self.has_residual = bool(residual.spectra.abs().max().item() > 0)

    @classmethod
    def from_extended(cls, extended):
        q_spectra, residual = jrs_split(extended)
        return cls(q_spectra, residual, extended)

    @classmethod
    def from_blur(cls, blur, shape, first_column=None, device=None):
        return cls.from_extended(choose_B_blocks(blur, shape, first_column=first_column, device=device))

    @classmethod
    def from_quaternion_kernels(cls, q_kernels, shape, device=None):
        """Operator of a pure quaternion blur given the four spatial kernels Q0..Q3"""
        q_spectra = torch.stack([psf2otf(torch.as_tensor(k, dtype=DTYPE, device=device), shape) for k in q_kernels])
        extended = BlockConvolution(realify_blocks(q_spectra), shape)
        residual = BlockConvolution(torch.zeros_like(extended.spectra), shape)
        return cls(q_spectra, residual, extended)

    def apply_q(self, f):
        return torch.fft.irfft2(qmul(self.q_spectra, torch.fft.rfft2(f)), s=self.shape)

    def apply_q_adjoint(self, f):
        return torch.fft.irfft2(qmul(self._q_adjoint_spectra, torch.fft.rfft2(f)), s=self.shape)

    def apply_r(self, f):
        return self.residual.apply(f)

    def apply_r_adjoint(self, f):
        return self.residual.adjoint(f)

    def apply_b(self, f):
        return self.extended.apply(f)

    def apply_b_adjoint(self, f):
        return self.extended.adjoint(f)

    def q_kernels(self):
        """Spatial Q0..Q3 at full image size"""
        return torch.fft.irfft2(self.q_spectra, s=self.shape)

    def q_block_operator(self):
        """Q assembled as a 4x4 real block convolution"""
        return BlockConvolution(realify_blocks(self.q_spectra), self.shape)

    def residual_ratio(self):
        """||R||_F / ||B||_F over the spatial kernel grids"""
        b_norm = self.extended.frobenius_norm()
        if b_norm == 0:
            return 0.
        return self.residual.frobenius_norm() / b_norm

"""
# -*- coding: utf-8 -*-
-----------------------------------------------------------------------------------
# DoC: 2024.03.03
-----------------------------------------------------------------------------------
# Description: Read / write 8- and 16-bit RGB rasters (PNG, PPM) and convert
# between (H, W, 3) numpy images, (3, H, W) tensors, quaternion fields and CIELAB
"""

import os
import sys

import cv2
import numpy as np
import torch

sys.path.append('../')

from models.quaternion import DTYPE
from utils.misc import ConfigError

SUPPORTED_EXTENSIONS = ('.png', '.ppm')
_BIT_DEPTH_MAX = {np.dtype(np.uint8): 255., np.dtype(np.uint16): 65535.}

# sRGB (D65) to XYZ, and the D65 reference white
SRGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
D65_WHITE = np.array([0.95047, 1.0, 1.08883])
LAB_DELTA = 6. / 29.


class ImageFormatError(ConfigError):
    """Unsupported, missing or corrupt raster"""


def _check_extension(path):
    ext = os.path.splitext(path)[1].lower()
    if ext not in SUPPORTED_EXTENSIONS:
        raise ImageFormatError('Unsupported image format "{}" ({}), use one of {}'.format(
            ext, path, SUPPORTED_EXTENSIONS))


def load_image(path):
    """Read an 8/16-bit RGB raster as an (H, W, 3) float64 array in [0, 1]"""
    _check_extension(path)
    if not os.path.isfile(path):
        raise ImageFormatError('Image file not found: {}'.format(path))
    raw = cv2.imread(path, cv2.IMREAD_UNCHANGED)  # BGR order
    if raw is None:
        raise ImageFormatError('Cannot decode image: {}'.format(path))
    if raw.ndim != 3 or raw.shape[2] != 3:
        raise ImageFormatError('Expect a 3-channel RGB image, got shape {} ({})'.format(raw.shape, path))
    if raw.dtype not in _BIT_DEPTH_MAX:
        raise ImageFormatError('Expect 8- or 16-bit samples, got {} ({})'.format(raw.dtype, path))
    rgb = cv2.cvtColor(raw, cv2.COLOR_BGR2RGB)
    return rgb.astype(np.float64) / _BIT_DEPTH_MAX[raw.dtype]


def save_image(path, img, bit_depth=16):
    """Clamp to [0, 1], quantise and write; 16-bit by default so restored values survive export"""
    _check_extension(path)
    if bit_depth not in (8, 16):
        raise ConfigError('bit_depth must be 8 or 16, got {}'.format(bit_depth))
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ConfigError('Expect an (H, W, 3) image, got shape {}'.format(img.shape))
    dtype = np.uint8 if bit_depth == 8 else np.uint16
    max_val = _BIT_DEPTH_MAX[np.dtype(dtype)]
    quantised = np.round(np.clip(img, 0., 1.) * max_val).astype(dtype)
    if not cv2.imwrite(path, cv2.cvtColor(quantised, cv2.COLOR_RGB2BGR)):
        raise ImageFormatError('Cannot write image: {}'.format(path))


def image_to_tensor(img, device=None):
    """(H, W, 3) numpy image -> (3, H, W) float64 tensor"""
    return torch.as_tensor(np.ascontiguousarray(np.transpose(img, (2, 0, 1))), dtype=DTYPE, device=device)


def tensor_to_image(tensor):
    """(3, H, W) tensor -> (H, W, 3) numpy image"""
    return tensor.detach().cpu().numpy().transpose(1, 2, 0).copy()


def to_quaternion_field(img):
    """Pure quaternion field (zero real part) with the i, j, k planes holding R, G, B"""
    if isinstance(img, np.ndarray):
        img = image_to_tensor(img)
    assert img.dim() == 3 and img.shape[0] == 3, 'Expect a (3, H, W) image, got {}'.format(tuple(img.shape))
    return torch.cat([torch.zeros_like(img[:1]), img], dim=0)


def from_quaternion_field(field, real_part_policy='discard'):
    """Drop the real part of a (4, H, W) field.

    :return: the (3, H, W) colour image and the Frobenius norm of the discarded real part
    """
    if real_part_policy != 'discard':
        raise ConfigError('Unsupported real part policy: {}'.format(real_part_policy))
    assert field.dim() == 3 and field.shape[0] == 4, 'Expect a (4, H, W) field, got {}'.format(tuple(field.shape))
    return field[1:].clone(), torch.linalg.norm(field[0]).item()


def _lab_f(t):
    return np.where(t > LAB_DELTA ** 3, np.cbrt(t), t / (3. * LAB_DELTA ** 2) + 4. / 29.)


def rgb_to_lab(img):
    """sRGB values in [0, 1], shape (..., 3) -> CIELAB (L*, a*, b*) under D65"""
    rgb = np.asarray(img, dtype=np.float64)
    linear = np.where(rgb <= 0.04045, rgb / 12.92, ((np.maximum(rgb, 0.04045) + 0.055) / 1.055) ** 2.4)
    xyz = linear @ SRGB_TO_XYZ.T / D65_WHITE
    fx, fy, fz = _lab_f(xyz[..., 0]), _lab_f(xyz[..., 1]), _lab_f(xyz[..., 2])
    return np.stack([116. * fy - 16., 500. * (fx - fy), 200. * (fy - fz)], axis=-1)

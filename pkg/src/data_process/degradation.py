"""
# -*- coding: utf-8 -*-
-----------------------------------------------------------------------------------
# DoC: 2024.03.06
-----------------------------------------------------------------------------------
# Description: Degradation z = (W . K) * u + n with seeded Gaussian noise, and the
# two experiment presets
"""

import sys
import math

import torch
from easydict import EasyDict as edict

sys.path.append('../')

from config import presets
from models.blur_operator import make_cross_channel_blur, apply_cross_channel
from utils.misc import ConfigError
from utils.torch_utils import make_generator, RNG_NAME


def noise_spec(sigma=presets.NOISE_SIGMA, seed=0, kind='gaussian'):
    if kind != 'gaussian':
        raise ConfigError('Only Gaussian noise is supported, got {}'.format(kind))
    if not isinstance(sigma, (int, float)) or not math.isfinite(sigma) or sigma < 0:
        raise ConfigError('Noise sigma must be a nonnegative number, got {}'.format(sigma))
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0 or seed >= 2 ** 64:
        raise ConfigError('Noise seed must be an integer in [0, 2^64), got {}'.format(seed))
    return edict({'kind': kind, 'sigma': float(sigma), 'seed': seed, 'rng': RNG_NAME})


def preset(name, seed=0):
    """(blur, noise) of a named experiment setup"""
    if name not in presets.PRESETS:
        raise ConfigError('Unknown preset "{}", choose from {}'.format(name, presets.preset_names))
    kernels, weights = presets.PRESETS[name]
    blur = make_cross_channel_blur(kernels, weights.tolist())
    return blur, noise_spec(presets.NOISE_SIGMA, seed)


def gaussian_noise(shape, sigma, seed, dtype=torch.float64):
    """Seeded i.i.d. N(0, sigma^2) samples, generated on the CPU for reproducibility"""
    generator = make_generator(seed)
    return sigma * torch.randn(shape, generator=generator, dtype=dtype)


def degrade(clean, blur, noise, clamp=False):
    """Blur a (3, H, W) image across channels and add noise; values stay unclamped unless clamp=True"""
    assert clean.dim() == 3 and clean.shape[0] == 3, 'Expect a (3, H, W) image, got {}'.format(tuple(clean.shape))
    observed = apply_cross_channel(blur, clean)
    if noise.sigma > 0:
        observed = observed + gaussian_noise(tuple(clean.shape), noise.sigma, noise.seed,
                                             dtype=clean.dtype).to(clean.device)
    if clamp:
        observed = observed.clamp(0., 1.)
    return observed

"""
# -*- coding: utf-8 -*-
-----------------------------------------------------------------------------------
# DoC: 2024.03.09
-----------------------------------------------------------------------------------
# Description: utils functions that build the blur model and its operator from the configs
"""

import sys

import torch

sys.path.append('../')

from config.cstv_config import load_json_config
from data_process.degradation import preset
from models.blur_operator import blur_from_json, QuaternionBlurOperator
from utils.misc import ConfigError


def create_blur(configs, sidecar=None, default_preset=None):
    """Cross-channel blur from, in order: --blur_config, the config file's "blur"
    section, the degradation sidecar, --preset, then default_preset.
    """
    if configs.get('blur_config') is not None:
        return blur_from_json(load_json_config(configs.blur_config))
    if configs.get('blur_json') is not None:
        return blur_from_json(configs.blur_json)
    if sidecar is not None and 'blur' in sidecar:
        return blur_from_json(sidecar['blur'])
    preset_name = configs.get('preset') or default_preset
    if preset_name is not None:
        blur, _ = preset(preset_name)
        return blur
    raise ConfigError('No blur description: restoration is non-blind, give --blur_config, --preset or a sidecar')


def create_operator(blur, shape, device=None):
    """Quaternion splitting of the extended operator on an image of the given (H, W)"""
    return QuaternionBlurOperator.from_blur(blur, shape, device=device)


def get_operator_summary(operator):
    """Norms of the splitting, for logs and reports"""
    q_norms = torch.linalg.norm(operator.q_kernels().flatten(1), dim=1)
    return {
        'shape': list(operator.shape),
        'boundary': operator.boundary,
        'q_component_norms': q_norms.tolist(),
        'residual_norm': operator.residual.frobenius_norm(),
        'extended_norm': operator.extended.frobenius_norm(),
        'residual_ratio': operator.residual_ratio(),
    }

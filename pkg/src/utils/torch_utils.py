"""
# -*- coding: utf-8 -*-
-----------------------------------------------------------------------------------
# Description: torch helpers shared by the operators, the solver and the scripts
"""

import random

import numpy as np
import torch

__all__ = ['select_device', 'set_seed', 'make_generator', 'RNG_NAME']

# Algorithm behind torch.Generator on the CPU, recorded in degradation metadata
RNG_NAME = 'torch.Generator/mt19937'


def select_device(no_cuda=True, gpu_idx=None):
    if no_cuda or not torch.cuda.is_available():
        return torch.device('cpu')
    return torch.device('cuda' if gpu_idx is None else 'cuda:{}'.format(gpu_idx))


def set_seed(seed):
    # Re-produce results
    random.seed(seed)
    np.random.seed(seed % (2 ** 32))
    torch.manual_seed(seed)
    torch.backends.cudnn.deterministic = True
    torch.backends.cudnn.benchmark = False


def make_generator(seed):
    """Seeded CPU generator, independent of the global torch RNG state"""
    generator = torch.Generator(device='cpu')
    generator.manual_seed(int(seed))
    return generator

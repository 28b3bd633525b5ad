import os
import sys

import pytest
import torch

SRC_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', 'src')
sys.path.insert(0, os.path.abspath(SRC_DIR))

from config.presets import preset_names
from data_process.degradation import preset
from models.quaternion import DTYPE


@pytest.fixture
def generator():
    gen = torch.Generator(device='cpu')
    gen.manual_seed(2024)
    return gen


@pytest.fixture
def randn(generator):
    def _randn(*shape):
        return torch.randn(shape, generator=generator, dtype=DTYPE)

    return _randn


@pytest.fixture
def rand_image(generator):
    """Random (3, H, W) image in [0, 1]"""

    def _rand_image(height=8, width=8):
        return torch.rand((3, height, width), generator=generator, dtype=DTYPE)

    return _rand_image


@pytest.fixture
def smooth_image():
    """Deterministic smooth colourful (3, H, W) image in [0, 1]"""

    def _smooth_image(height=32, width=32):
        rows = torch.arange(height, dtype=DTYPE)[:, None] / height
        cols = torch.arange(width, dtype=DTYPE)[None, :] / width
        red = 0.5 + 0.4 * torch.sin(2 * torch.pi * rows) * torch.cos(2 * torch.pi * cols)
        green = 0.5 + 0.3 * torch.cos(2 * torch.pi * (rows + cols))
        blue = 0.2 + 0.6 * ((rows - 0.5) ** 2 + (cols - 0.5) ** 2 < 0.1).to(DTYPE)
        return torch.stack([red, green, blue], dim=0)

    return _smooth_image


@pytest.fixture(params=preset_names)
def preset_blur(request):
    blur, _ = preset(request.param)
    return blur

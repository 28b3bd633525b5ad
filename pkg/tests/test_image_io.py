import cv2
import numpy as np
import pytest
import torch

from data_process.image_io import (load_image, save_image, image_to_tensor, tensor_to_image, to_quaternion_field,
                                   from_quaternion_field, rgb_to_lab, ImageFormatError)
from models.quaternion import DTYPE
from utils.misc import ConfigError


class TestRasterIO:
    def test_load_8_bit(self, tmp_path):
        rgb = np.zeros((4, 5, 3), dtype=np.uint8)
        rgb[..., 0] = 255
        rgb[1, 2] = (10, 20, 30)
        path = str(tmp_path / 'img.png')
        cv2.imwrite(path, cv2.cvtColor(rgb, cv2.COLOR_RGB2BGR))
        img = load_image(path)
        assert img.shape == (4, 5, 3)
        assert img.dtype == np.float64
        assert img[0, 0, 0] == 1.
        np.testing.assert_allclose(img[1, 2], np.array([10., 20., 30.]) / 255.)

    def test_load_16_bit(self, tmp_path):
        rgb = np.full((3, 3, 3), 65535, dtype=np.uint16)
        rgb[0, 0] = (0, 32768, 1)
        path = str(tmp_path / 'img.png')
        cv2.imwrite(path, cv2.cvtColor(rgb, cv2.COLOR_RGB2BGR))
        img = load_image(path)
        np.testing.assert_allclose(img[0, 0], np.array([0., 32768., 1.]) / 65535.)
        assert img[2, 2, 1] == 1.

    @pytest.mark.parametrize('ext', ['.png', '.ppm'])
    def test_16_bit_save_keeps_precision(self, tmp_path, ext):
        rng = np.random.default_rng(0)
        img = rng.random((6, 7, 3))
        path = str(tmp_path / ('out' + ext))
        save_image(path, img, bit_depth=16)
        np.testing.assert_allclose(load_image(path), img, atol=0.5 / 65535. + 1e-12)

    def test_8_bit_save(self, tmp_path):
        img = np.full((2, 2, 3), 0.5)
        path = str(tmp_path / 'out.png')
        save_image(path, img, bit_depth=8)
        assert cv2.imread(path, cv2.IMREAD_UNCHANGED).dtype == np.uint8
        np.testing.assert_allclose(load_image(path), np.full((2, 2, 3), 128. / 255.))

    def test_save_clamps(self, tmp_path):
        img = np.array([[[-0.2, 0.5, 1.7]]])
        path = str(tmp_path / 'out.png')
        save_image(path, img)
        np.testing.assert_allclose(load_image(path)[0, 0], [0., 32768. / 65535., 1.])

    def test_unsupported_extension(self, tmp_path):
        with pytest.raises(ImageFormatError):
            load_image(str(tmp_path / 'img.jpg'))
        with pytest.raises(ConfigError):
            save_image(str(tmp_path / 'img.bmp'), np.zeros((2, 2, 3)))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ImageFormatError):
            load_image(str(tmp_path / 'absent.png'))

    def test_corrupt_file(self, tmp_path):
        path = tmp_path / 'broken.png'
        path.write_bytes(b'not an image')
        with pytest.raises(ImageFormatError):
            load_image(str(path))

    def test_gray_raster_rejected(self, tmp_path):
        path = str(tmp_path / 'gray.png')
        cv2.imwrite(path, np.zeros((4, 4), dtype=np.uint8))
        with pytest.raises(ImageFormatError):
            load_image(path)

    def test_bad_bit_depth(self, tmp_path):
        with pytest.raises(ConfigError):
            save_image(str(tmp_path / 'out.png'), np.zeros((2, 2, 3)), bit_depth=12)


class TestConversions:
    def test_tensor_layout(self):
        img = np.arange(24, dtype=np.float64).reshape(2, 4, 3)
        tensor = image_to_tensor(img)
        assert tensor.shape == (3, 2, 4)
        assert tensor.dtype == DTYPE
        assert tensor[2, 1, 3].item() == img[1, 3, 2]
        np.testing.assert_array_equal(tensor_to_image(tensor), img)

    def test_quaternion_field(self, rand_image):
        img = rand_image(4, 5)
        field = to_quaternion_field(img)
        assert field.shape == (4, 4, 5)
        assert torch.equal(field[0], torch.zeros(4, 5, dtype=DTYPE))
        assert torch.equal(field[1:], img)
        restored, real_norm = from_quaternion_field(field)
        assert torch.equal(restored, img)
        assert real_norm == 0.

    def test_quaternion_field_from_numpy(self):
        img = np.full((3, 2, 3), 0.25)
        assert torch.equal(to_quaternion_field(img)[1:], torch.full((3, 3, 2), 0.25, dtype=DTYPE))

    def test_real_part_is_reported(self, randn):
        field = randn(4, 3, 3)
        _, real_norm = from_quaternion_field(field)
        assert real_norm == pytest.approx(torch.linalg.norm(field[0]).item())

    def test_unknown_real_part_policy(self, randn):
        with pytest.raises(ConfigError):
            from_quaternion_field(randn(4, 2, 2), real_part_policy='modulus')


class TestLab:
    @pytest.mark.parametrize('rgb,lab', [
        ((1., 0., 0.), (53.2408, 80.0925, 67.2032)),
        ((0., 1., 0.), (87.7347, -86.1827, 83.1793)),
        ((0., 0., 1.), (32.2970, 79.1875, -107.8602)),
        ((1., 1., 1.), (100., 0., 0.)),
        ((0., 0., 0.), (0., 0., 0.)),
    ])
    def test_primaries(self, rgb, lab):
        np.testing.assert_allclose(rgb_to_lab(np.array(rgb)), lab, atol=1e-2)

    def test_gray_has_no_chroma(self):
        lab = rgb_to_lab(np.full((2, 2, 3), 0.3))
        np.testing.assert_allclose(lab[..., 1:], 0., atol=1e-3)

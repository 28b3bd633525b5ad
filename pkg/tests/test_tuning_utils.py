import csv
import math

import pytest

from config.cstv_config import make_solver_params
from data_process.degradation import degrade, preset
from utils.tuning_utils import (lambda_bound, default_lambda_grid, make_grid, sweep, surface_scores, sweet_spot,
                                write_sweep_csv)
from utils.misc import ConfigError


def synthetic_grid(cells):
    grid = make_grid('lambda1', sorted({c[0] for c in cells}), 'lambda2', sorted({c[1] for c in cells}))
    grid.cells = [{'lambda1': a1, 'lambda2': a2, 'axis1': a1, 'axis2': a2, 'psnr': p, 'ssim': s, 'mse': m,
                   'ciede2000': d, 'status': 'ok' if p is not None else 'failed'}
                  for a1, a2, p, s, m, d in cells]
    return grid


class TestGrid:
    def test_lambda_bound(self):
        num_samples = 3 * 256 * 256
        assert lambda_bound(num_samples, 0.01) == pytest.approx(2. * math.sqrt(num_samples * 1e-4) * 1e-3)
        assert lambda_bound(0, 0.01) == 0.

    def test_default_grid(self):
        values = default_lambda_grid(1., 4)
        assert values == pytest.approx([0.25, 0.5, 0.75, 1.])
        with pytest.raises(ConfigError):
            default_lambda_grid(0., 4)

    def test_make_grid(self):
        grid = make_grid('alpha1', [0.1, 0.2], 'alpha2', [0.3])
        assert grid.axis1_values == [0.1, 0.2]
        assert grid.cells == []

    @pytest.mark.parametrize('args', [
        ('lambda1', [0.2, 0.1], 'lambda2', [0.1]),
        ('lambda1', [0.1, 0.1], 'lambda2', [0.1]),
        ('lambda1', [], 'lambda2', [0.1]),
        ('gamma', [0.1], 'lambda2', [0.1]),
        ('lambda1', [0.1], 'lambda1', [0.2]),
    ])
    def test_invalid_grid(self, args):
        with pytest.raises(ConfigError):
            make_grid(*args)


class TestSweetSpot:
    def test_best_weighted_cell(self):
        grid = synthetic_grid([
            (0.1, 0.1, 30., 0.80, 1e-3, 3.),
            (0.1, 0.2, 32., 0.90, 8e-4, 2.5),
            (0.2, 0.1, 31., 0.95, 9e-4, 2.),
            (0.2, 0.2, 29., 0.70, 1.2e-3, 4.),
        ])
        # psnr 1 and ssim 0.8 beat psnr 0.67 and ssim 1 at equal weights
        assert sweet_spot(grid, {'psnr': 0.5, 'ssim': 0.5}) == (0.1, 0.2)
        assert sweet_spot(grid, {'ssim': 1.}) == (0.2, 0.1)
        assert sweet_spot(grid, {'ciede2000': 1.}) == (0.2, 0.1)
        assert sweet_spot(grid, {'mse': 1.}) == (0.1, 0.2)

    def test_invariant_under_monotone_rescaling(self):
        cells = [
            (0.1, 0.1, 30., 0.80, 1e-3, 3.),
            (0.1, 0.2, 32., 0.90, 8e-4, 2.5),
            (0.2, 0.1, 31., 0.95, 9e-4, 2.),
            (0.2, 0.2, 29., 0.70, 1.2e-3, 4.),
        ]
        grid = synthetic_grid(cells)
        affine = synthetic_grid([(a1, a2, 3. * p - 7., s, m, d) for a1, a2, p, s, m, d in cells])
        weights = {'psnr': 0.6, 'ssim': 0.4}
        assert sweet_spot(affine, weights) == sweet_spot(grid, weights)
        _, scores = surface_scores(grid, weights)
        _, affine_scores = surface_scores(affine, weights)
        assert affine_scores.tolist() == pytest.approx(scores.tolist(), abs=1e-12)

        warped = synthetic_grid([(a1, a2, math.exp(p / 10.), s, m, d) for a1, a2, p, s, m, d in cells])
        assert sweet_spot(warped, {'psnr': 1.}) == sweet_spot(grid, {'psnr': 1.}) == (0.1, 0.2)

    def test_ties_go_to_the_smallest_values(self):
        grid = synthetic_grid([
            (0.1, 0.1, 30., 0.9, 1e-3, 1.),
            (0.1, 0.2, 30., 0.9, 1e-3, 1.),
            (0.2, 0.1, 30., 0.9, 1e-3, 1.),
        ])
        assert sweet_spot(grid) == (0.1, 0.1)

    def test_failed_cells_are_ignored(self):
        grid = synthetic_grid([
            (0.1, 0.1, None, None, None, None),
            (0.2, 0.1, 25., 0.5, 1e-2, 5.),
        ])
        assert sweet_spot(grid) == (0.2, 0.1)

    def test_infinite_psnr(self):
        grid = synthetic_grid([
            (0.1, 0.1, math.inf, 1., 0., 0.),
            (0.2, 0.1, 40., 0.99, 1e-4, 0.5),
        ])
        cells, scores = surface_scores(grid, {'psnr': 1.})
        assert scores.tolist() == [1., 0.]

    def test_unknown_weight(self):
        grid = synthetic_grid([(0.1, 0.1, 30., 0.9, 1e-3, 1.)])
        with pytest.raises(ConfigError):
            sweet_spot(grid, {'lpips': 1.})

    def test_all_failed(self):
        grid = synthetic_grid([(0.1, 0.1, None, None, None, None)])
        with pytest.raises(ConfigError):
            sweet_spot(grid)


class TestSweep:
    def test_small_sweep(self, smooth_image, tmp_path):
        clean = smooth_image(12, 12)
        blur, noise = preset('symmetric_va', seed=1)
        z = degrade(clean, blur, noise)
        params = make_solver_params(max_outer=2)
        grid = sweep(z, clean, blur, params, make_grid('lambda1', [1e-3, 1e-2], 'lambda2', [1e-3, 1e-2]))
        assert [(c['axis1'], c['axis2']) for c in grid.cells] == [(1e-3, 1e-3), (1e-3, 1e-2), (1e-2, 1e-3),
                                                                   (1e-2, 1e-2)]
        assert all(c['status'] == 'ok' for c in grid.cells)
        assert all(c['psnr'] > 0 for c in grid.cells)

        path = str(tmp_path / 'sweep.csv')
        write_sweep_csv(grid, path)
        with open(path) as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 4
        assert list(rows[0].keys()) == ['lambda1', 'lambda2', 'psnr', 'ssim', 'mse', 'ciede2000', 'status']

    def test_workers_do_not_change_the_surface(self, smooth_image):
        clean = smooth_image(10, 10)
        blur, noise = preset('symmetric_va', seed=1)
        z = degrade(clean, blur, noise)
        params = make_solver_params(max_outer=2)

        def run(num_workers):
            grid = make_grid('alpha1', [0.5, 1.], 'alpha2', [0.5, 1.])
            return sweep(z, clean, blur, params, grid, num_workers=num_workers).cells

        assert run(1) == run(3)

    def test_failed_cell_is_recorded(self, smooth_image):
        clean = smooth_image(8, 8)
        blur, _ = preset('symmetric_va')
        grid = sweep(clean, clean, blur, make_solver_params(max_outer=1),
                     make_grid('alpha1', [0., 0.5], 'alpha2', [0.5]))
        failed, ok = grid.cells
        assert failed['status'] == 'failed' and failed['psnr'] is None
        assert 'alpha1' in failed['error']
        assert ok['status'] == 'ok'
        assert sweet_spot(grid, {'psnr': 1.}) == (0.5, 0.5)

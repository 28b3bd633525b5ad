"""
# -*- coding: utf-8 -*-
-----------------------------------------------------------------------------------
# DoC: 2024.03.12
-----------------------------------------------------------------------------------
# Description: L-surface parameter selection: restore on a 2-D parameter grid,
# score every cell with the quality metrics and pick the weighted optimum
"""

import sys
import csv
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from tqdm import tqdm
from easydict import EasyDict as edict

sys.path.append('../')

from config import presets
from config.cstv_config import SOLVER_KEYS, validate_solver_params
from models.blur_operator import QuaternionBlurOperator
from models.cstv_solver import restore
from data_process.image_io import tensor_to_image
from utils.evaluation_utils import evaluate_pair, METRIC_NAMES
from utils.misc import ConfigError, NumericalError

# Metrics where smaller is better
LOWER_IS_BETTER = ('mse', 'ciede2000')


def lambda_bound(num_samples, sigma):
    """Upper bound b = 2 sqrt(N sigma^2) 1e-3 of the regularization weights"""
    if num_samples < 0 or sigma < 0:
        raise ConfigError('lambda_bound needs N >= 0 and sigma >= 0, got N={}, sigma={}'.format(num_samples, sigma))
    return 2. * math.sqrt(num_samples * sigma ** 2) * 1e-3


def default_lambda_grid(bound, num_points=presets.LAMBDA_GRID_POINTS):
    """num_points uniform values over (0, bound]"""
    if bound <= 0 or num_points < 1:
        raise ConfigError('A default grid needs bound > 0 and at least one point')
    return [bound * (k + 1) / num_points for k in range(num_points)]


def make_grid(axis1_name, axis1_values, axis2_name, axis2_values):
    for name, values in ((axis1_name, axis1_values), (axis2_name, axis2_values)):
        if name not in SOLVER_KEYS:
            raise ConfigError('Unknown sweep axis: {}'.format(name))
        if len(values) == 0:
            raise ConfigError('Sweep axis {} has no values'.format(name))
        if any(b <= a for a, b in zip(values[:-1], values[1:])):
            raise ConfigError('Sweep axis {} must be strictly increasing: {}'.format(name, list(values)))
    if axis1_name == axis2_name:
        raise ConfigError('The two sweep axes must differ')
    return edict({'axis1_name': axis1_name, 'axis1_values': [float(v) for v in axis1_values],
                  'axis2_name': axis2_name, 'axis2_values': [float(v) for v in axis2_values], 'cells': []})


def _evaluate_cell(z, reference_img, operator, base_params, grid, a1, a2):
    cell = {grid.axis1_name: a1, grid.axis2_name: a2, 'axis1': a1, 'axis2': a2}
    try:
        params = dict(base_params)
        params[grid.axis1_name] = a1
        params[grid.axis2_name] = a2
        report = restore(z, operator, validate_solver_params(params))
        metrics = evaluate_pair(tensor_to_image(report.restored), reference_img)
        cell.update(metrics)
        cell.update({'status': 'ok', 'iterations': report.iterations, 'error': None})
    except (ConfigError, NumericalError) as err:
        cell.update({name: None for name in METRIC_NAMES})
        cell.update({'status': 'failed', 'iterations': None, 'error': str(err)})
    return cell


def sweep(z, reference, blur, base_params, grid, num_workers=1, logger=None):
    """Restore at every grid point and record the four metrics.

    :param z: degraded (3, H, W) tensor
    :param reference: clean (H, W, 3) image or (3, H, W) tensor
    Failed cells are kept with status 'failed'; cells are ordered axis1-major
    whatever the number of workers.
    """
    base_params = validate_solver_params(base_params)
    operator = blur if isinstance(blur, QuaternionBlurOperator) else \
        QuaternionBlurOperator.from_blur(blur, tuple(z.shape[-2:]), device=z.device)
    reference_img = reference if isinstance(reference, np.ndarray) else tensor_to_image(reference)
    points = [(a1, a2) for a1 in grid.axis1_values for a2 in grid.axis2_values]

    def run(point):
        return _evaluate_cell(z, reference_img, operator, base_params, grid, *point)

    if num_workers > 1:
        with ThreadPoolExecutor(max_workers=num_workers) as executor:
            cells = list(tqdm(executor.map(run, points), total=len(points)))
    else:
        cells = [run(point) for point in tqdm(points)]

    grid.cells = cells
    if logger is not None:
        num_failed = sum(cell['status'] == 'failed' for cell in cells)
        logger.info('Sweep over {} x {}: {} cells, {} failed'.format(grid.axis1_name, grid.axis2_name, len(cells),
                                                                      num_failed))
        for cell in cells:
            if cell['status'] == 'failed':
                logger.warning('Cell ({}, {}) failed: {}'.format(cell['axis1'], cell['axis2'], cell['error']))
    return grid


def _normalised_surface(values, name):
    values = np.asarray(values, dtype=np.float64)
    if name == 'psnr' and np.isinf(values).any():
        finite = values[np.isfinite(values)]
        cap = finite.max() + 1. if finite.size else 1.
        values = np.where(np.isinf(values), cap, values)
    if name in LOWER_IS_BETTER:
        values = -values
    span = values.max() - values.min()
    if span == 0:
        return np.zeros_like(values)
    return (values - values.min()) / span


def surface_scores(grid, weights=None):
    """Weighted sum of min-max normalised metric surfaces over the successful cells"""
    weights = dict(presets.SWEEP_WEIGHTS if weights is None else weights)
    unknown = sorted(set(weights) - set(METRIC_NAMES))
    if unknown:
        raise ConfigError('Unknown metric weights: {}'.format(unknown))
    cells = [cell for cell in grid.cells if cell['status'] == 'ok']
    if len(cells) == 0:
        raise ConfigError('The sweep has no successful cell')
    scores = np.zeros(len(cells))
    for name, weight in weights.items():
        if weight != 0:
            scores += weight * _normalised_surface([cell[name] for cell in cells], name)
    return cells, scores


def sweet_spot(grid, weights=None):
    """(axis1, axis2) value of the best weighted cell; ties go to the smallest axis1, then axis2"""
    cells, scores = surface_scores(grid, weights)
    best = min(range(len(cells)), key=lambda i: (-scores[i], cells[i]['axis1'], cells[i]['axis2']))
    return cells[best]['axis1'], cells[best]['axis2']


def write_sweep_csv(grid, path):
    fieldnames = [grid.axis1_name, grid.axis2_name] + METRIC_NAMES + ['status']
    with open(path, 'w', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames, extrasaction='ignore')
        writer.writeheader()
        for cell in grid.cells:
            writer.writerow(cell)

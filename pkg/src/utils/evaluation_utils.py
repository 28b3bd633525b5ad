"""
# -*- coding: utf-8 -*-
-----------------------------------------------------------------------------------
# DoC: 2024.03.10
-----------------------------------------------------------------------------------
# Description: Restoration quality metrics (PSNR, SSIM, MSE, CIEDE2000) on
# (H, W, 3) images in [0, 1], plus report rows and batch evaluation
"""

import os
import sys
import csv
import json
import math

import numpy as np
import torch
from tqdm import tqdm
from easydict import EasyDict as edict
from skimage.metrics import structural_similarity

sys.path.append('../')

from data_process.image_io import load_image, rgb_to_lab, tensor_to_image, SUPPORTED_EXTENSIONS
from utils.misc import ConfigError, json_safe

PIXEL_MAX = 255.0
SSIM_C1 = (0.01 * PIXEL_MAX) ** 2
SSIM_C2 = (0.03 * PIXEL_MAX) ** 2
SSIM_WINDOW = 11
SSIM_WINDOW_SIGMA = 1.5
METRIC_NAMES = ['psnr', 'ssim', 'mse', 'ciede2000']
METRIC_FIELDS = ['image', 'method'] + METRIC_NAMES


def _as_image(img):
    if isinstance(img, torch.Tensor):
        return tensor_to_image(img)
    return np.asarray(img, dtype=np.float64)


def _check_pair(restored, reference):
    restored, reference = _as_image(restored), _as_image(reference)
    if restored.shape != reference.shape:
        raise ConfigError('Image dimensions differ: {} vs {}'.format(restored.shape, reference.shape))
    return restored, reference


def mse(restored, reference):
    """Mean squared difference on the [0, 1] scale"""
    restored, reference = _check_pair(restored, reference)
    return float(np.mean((restored - reference) ** 2))


def psnr(restored, reference):
    """10 log10(255^2 N / ||255 (U_m - U)||_F^2); +inf for identical images"""
    restored, reference = _check_pair(restored, reference)
    sse = float(np.sum(((restored - reference) * PIXEL_MAX) ** 2))
    if sse == 0:
        return math.inf
    return 10. * math.log10(PIXEL_MAX ** 2 * restored.size / sse)


def _ssim_global(x, y):
    mu_x, mu_y = x.mean(), y.mean()
    var_x, var_y = x.var(), y.var()
    cov_xy = np.mean((x - mu_x) * (y - mu_y))
    return ((2. * mu_x * mu_y + SSIM_C1) * (2. * cov_xy + SSIM_C2)) / \
           ((mu_x ** 2 + mu_y ** 2 + SSIM_C1) * (var_x + var_y + SSIM_C2))


def _ssim_windowed(x, y):
    # sigma 1.5 truncated at 3.5 sigma gives the 11x11 window
    return structural_similarity(x, y, data_range=PIXEL_MAX, gaussian_weights=True, sigma=SSIM_WINDOW_SIGMA,
                                 use_sample_covariance=False)


def ssim(restored, reference, windowed=False):
    """Per-channel SSIM on [0, 255] data averaged over the channels.

    The default is the global form over the vectorised channel; windowed=True uses
    an 11x11 Gaussian window (sigma 1.5) and needs images of at least 11x11.
    """
    restored, reference = _check_pair(restored, reference)
    x_all, y_all = restored * PIXEL_MAX, reference * PIXEL_MAX
    if windowed and min(x_all.shape[:2]) < SSIM_WINDOW:
        raise ConfigError('Windowed SSIM needs images of at least {0}x{0}'.format(SSIM_WINDOW))
    scores = []
    for c in range(x_all.shape[2]):
        x, y = x_all[..., c], y_all[..., c]
        scores.append(_ssim_windowed(x, y) if windowed else _ssim_global(x, y))
    return float(np.mean(scores))


def delta_e_cie2000(lab1, lab2, k_l=1., k_c=1., k_h=1.):
    """CIEDE2000 difference between Lab arrays of shape (..., 3)"""
    lab1, lab2 = np.asarray(lab1, dtype=np.float64), np.asarray(lab2, dtype=np.float64)
    l1, a1, b1 = lab1[..., 0], lab1[..., 1], lab1[..., 2]
    l2, a2, b2 = lab2[..., 0], lab2[..., 1], lab2[..., 2]

    c1 = np.sqrt(a1 ** 2 + b1 ** 2)
    c2 = np.sqrt(a2 ** 2 + b2 ** 2)
    c_avg7 = ((c1 + c2) / 2.) ** 7
    g = 0.5 * (1. - np.sqrt(c_avg7 / (c_avg7 + 25. ** 7)))
    a1_prime = a1 * (1. + g)
    a2_prime = a2 * (1. + g)
    c1_prime = np.sqrt(a1_prime ** 2 + b1 ** 2)
    c2_prime = np.sqrt(a2_prime ** 2 + b2 ** 2)
    h1_prime = np.degrees(np.arctan2(b1, a1_prime)) % 360.
    h2_prime = np.degrees(np.arctan2(b2, a2_prime)) % 360.

    delta_l = l2 - l1
    delta_c = c2_prime - c1_prime
    chroma_prod = c1_prime * c2_prime
    dh = h2_prime - h1_prime
    dh = np.where(dh > 180., dh - 360., np.where(dh < -180., dh + 360., dh))
    dh = np.where(chroma_prod == 0, 0., dh)
    delta_h = 2. * np.sqrt(chroma_prod) * np.sin(np.radians(dh) / 2.)

    l_avg = (l1 + l2) / 2.
    c_avg_prime = (c1_prime + c2_prime) / 2.
    h_sum = h1_prime + h2_prime
    h_avg = np.where(np.abs(h1_prime - h2_prime) <= 180., h_sum / 2.,
                     np.where(h_sum < 360., (h_sum + 360.) / 2., (h_sum - 360.) / 2.))
    h_avg = np.where(chroma_prod == 0, h_sum, h_avg)

    t = (1. - 0.17 * np.cos(np.radians(h_avg - 30.))
         + 0.24 * np.cos(np.radians(2. * h_avg))
         + 0.32 * np.cos(np.radians(3. * h_avg + 6.))
         - 0.20 * np.cos(np.radians(4. * h_avg - 63.)))
    s_l = 1. + (0.015 * (l_avg - 50.) ** 2) / np.sqrt(20. + (l_avg - 50.) ** 2)
    s_c = 1. + 0.045 * c_avg_prime
    s_h = 1. + 0.015 * c_avg_prime * t

    delta_theta = 30. * np.exp(-((h_avg - 275.) / 25.) ** 2)
    c_avg_prime7 = c_avg_prime ** 7
    r_c = 2. * np.sqrt(c_avg_prime7 / (c_avg_prime7 + 25. ** 7))
    r_t = -np.sin(np.radians(2. * delta_theta)) * r_c

    term_l = delta_l / (k_l * s_l)
    term_c = delta_c / (k_c * s_c)
    term_h = delta_h / (k_h * s_h)
    return np.sqrt(term_l ** 2 + term_c ** 2 + term_h ** 2 + r_t * term_c * term_h)


def ciede2000(restored, reference):
    """Mean CIEDE2000 difference over the pixels"""
    restored, reference = _check_pair(restored, reference)
    return float(np.mean(delta_e_cie2000(rgb_to_lab(restored), rgb_to_lab(reference))))


def evaluate_pair(restored, reference, windowed_ssim=False):
    """All four metrics as an edict"""
    restored, reference = _check_pair(restored, reference)
    return edict({
        'psnr': psnr(restored, reference),
        'ssim': ssim(restored, reference, windowed=windowed_ssim),
        'mse': mse(restored, reference),
        'ciede2000': ciede2000(restored, reference),
    })


def metric_row(report, image_id, method):
    row = {'image': image_id, 'method': method}
    row.update({name: report[name] for name in METRIC_NAMES})
    return row


def write_metric_rows(rows, path, fmt='csv', provenance=None):
    if fmt == 'csv':
        with open(path, 'w', newline='') as f:
            writer = csv.DictWriter(f, fieldnames=METRIC_FIELDS)
            writer.writeheader()
            for row in rows:
                writer.writerow(row)
    elif fmt == 'json':
        with open(path, 'w') as f:
            payload = {'metrics': rows} if provenance is None else {'metrics': rows, 'provenance': provenance}
            json.dump(json_safe(payload), f, indent=2)
    else:
        raise ConfigError('Unknown report format: {}'.format(fmt))


def evaluate_directory(restored_dir, reference_dir, method='cstv', windowed_ssim=False, logger=None):
    """One metric row per image of restored_dir that has a namesake in reference_dir"""
    names = sorted(fn for fn in os.listdir(restored_dir) if os.path.splitext(fn)[1].lower() in SUPPORTED_EXTENSIONS)
    rows = []
    for fn in tqdm(names):
        ref_path = os.path.join(reference_dir, fn)
        if not os.path.isfile(ref_path):
            if logger is not None:
                logger.warning('No reference for {}, skipped'.format(fn))
            continue
        report = evaluate_pair(load_image(os.path.join(restored_dir, fn)), load_image(ref_path),
                               windowed_ssim=windowed_ssim)
        rows.append(metric_row(report, os.path.splitext(fn)[0], method))
        if logger is not None:
            logger.info('{}: psnr {:.4f}, ssim {:.4f}, mse {:.6f}, ciede2000 {:.4f}'.format(
                fn, report.psnr, report.ssim, report.mse, report.ciede2000))
    return rows

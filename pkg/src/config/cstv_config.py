"""
# -*- coding: utf-8 -*-
-----------------------------------------------------------------------------------
# DoC: 2024.03.09
-----------------------------------------------------------------------------------
# Description: The configurations of the project will be defined here
"""

import os
import sys
import json
import math
import argparse

import torch
from easydict import EasyDict as edict

sys.path.append('../')

from config import presets
from utils.misc import ConfigError, make_folder
from utils.torch_utils import select_device

VERSION = '1.0.0'

SOLVER_KEYS = tuple(presets.SOLVER_DEFAULTS.keys())
_NONNEG_KEYS = ('lambda1', 'lambda2', 'alpha_sv', 'admm_tol')
_POSITIVE_KEYS = ('alpha1', 'alpha2', 'beta', 'tol', 'cg_tol')
_COUNT_KEYS = ('max_outer', 'max_inner_u', 'max_admm', 'max_cg')
_FLAG_KEYS = ('reset_multipliers', 'strict_stop')
S_METHODS = ('fft', 'cg')


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def validate_solver_params(params):
    """Check a solver parameter mapping and complete it with the defaults.

    Raises ConfigError on unknown keys or values outside their ranges.
    """
    if not isinstance(params, dict):
        raise ConfigError('Solver parameters must be a mapping, got {}'.format(type(params).__name__))
    unknown = sorted(set(params.keys()) - set(SOLVER_KEYS))
    if unknown:
        raise ConfigError('Unknown solver parameters: {}'.format(unknown))
    checked = edict(dict(presets.SOLVER_DEFAULTS))
    checked.update(params)

    for key in _NONNEG_KEYS:
        if not _is_number(checked[key]) or checked[key] < 0:
            raise ConfigError('{} must be a finite number >= 0, got {}'.format(key, checked[key]))
    for key in _POSITIVE_KEYS:
        if not _is_number(checked[key]) or checked[key] <= 0:
            raise ConfigError('{} must be a finite number > 0, got {}'.format(key, checked[key]))
    for key in _COUNT_KEYS:
        value = checked[key]
        if not _is_number(value) or value != int(value) or value < 1:
            raise ConfigError('{} must be a positive integer, got {}'.format(key, value))
        checked[key] = int(value)
    for key in _FLAG_KEYS:
        if not isinstance(checked[key], bool):
            raise ConfigError('{} must be true or false, got {}'.format(key, checked[key]))
    if not _is_number(checked.damping) or not 0 < checked.damping <= 1:
        raise ConfigError('damping must lie in (0, 1], got {}'.format(checked.damping))
    if checked.model not in presets.MODELS:
        raise ConfigError('Unknown model "{}", choose from {}'.format(checked.model, presets.MODELS))
    if checked.s_method not in S_METHODS:
        raise ConfigError('Unknown s-subproblem method "{}", choose from {}'.format(checked.s_method, S_METHODS))
    return checked


def make_solver_params(**overrides):
    return validate_solver_params(overrides)


def load_json_config(path):
    if not os.path.isfile(path):
        raise ConfigError('Config file not found: {}'.format(path))
    try:
        with open(path, 'r') as f:
            config = json.load(f)
    except json.JSONDecodeError as err:
        raise ConfigError('Invalid JSON in {}: {}'.format(path, err))
    if not isinstance(config, dict):
        raise ConfigError('The config file must hold a JSON object: {}'.format(path))
    return config


def _add_common_args(parser):
    parser.add_argument('--config', type=str, default=None, metavar='PATH',
                        help='JSON config; its keys override the defaults, command-line flags override it')
    parser.add_argument('--seed', type=int, default=2024,
                        help='re-produce the results with seed random')
    parser.add_argument('--saved_fn', type=str, default='cstv', metavar='FN',
                        help='The name using for saving logs, results,...')
    parser.add_argument('--working-dir', type=str, default='../', metavar='PATH',
                        help='The ROOT working directory')
    parser.add_argument('--out', type=str, default=None, metavar='PATH',
                        help='Output path (file or directory, depending on the command)')
    parser.add_argument('--format', type=str, default='json', choices=['json', 'csv'],
                        help='Format of the metric / sweep report')
    parser.add_argument('--threads', type=int, default=None,
                        help='Number of intra-op torch threads')
    parser.add_argument('--print_freq', type=int, default=10, metavar='N',
                        help='print frequency of the solver (default: 10)')
    parser.add_argument('--tensorboard', action='store_true',
                        help='If true, write the energy trace to tensorboard')
    parser.add_argument('--gpu_idx', default=None, type=int,
                        help='GPU index to use.')
    parser.add_argument('--no_cuda', action='store_true',
                        help='If true, cuda is not used.')


def _add_blur_args(parser):
    parser.add_argument('--preset', type=str, default=None, choices=presets.preset_names,
                        help='Named blur + noise setup')
    parser.add_argument('--blur_config', type=str, default=None, metavar='PATH',
                        help='JSON blur description {"kernels": 3x3, "weights": 3x3}')


def _add_solver_args(parser):
    parser.add_argument('--model', type=str, default=None, choices=presets.MODELS,
                        help='cstv (both regularizers), svtv or ctv only')
    for key in ('lambda1', 'lambda2', 'alpha1', 'alpha2', 'alpha_sv', 'beta', 'tol', 'damping', 'cg_tol',
                'admm_tol'):
        parser.add_argument('--{}'.format(key), type=float, default=None,
                            help='solver parameter {} (default: {})'.format(key, presets.SOLVER_DEFAULTS[key]))
    for key in ('max_outer', 'max_inner_u', 'max_admm', 'max_cg'):
        parser.add_argument('--{}'.format(key), type=int, default=None,
                            help='solver parameter {} (default: {})'.format(key, presets.SOLVER_DEFAULTS[key]))
    parser.add_argument('--reset_multipliers', action='store_true', default=None,
                        help='If true, reset the ADMM multipliers every outer iteration')
    parser.add_argument('--strict_stop', action='store_true', default=None,
                        help='If true, u and w changes also gate the outer stopping test')


def build_parser():
    parser = argparse.ArgumentParser(description='Cross-space TV colour image restoration')
    subparsers = parser.add_subparsers(dest='command')
    subparsers.required = True

    degrade_parser = subparsers.add_parser('degrade', help='blur + noise a clean image')
    _add_common_args(degrade_parser)
    _add_blur_args(degrade_parser)
    degrade_parser.add_argument('--input', type=str, required=True, metavar='PATH', help='clean image')
    degrade_parser.add_argument('--sigma', type=float, default=None,
                                help='noise standard deviation on the [0, 1] scale (default: preset / 0.01)')
    degrade_parser.add_argument('--clamp', action='store_true',
                                help='If true, clamp the degraded image to [0, 1] before export')
    degrade_parser.add_argument('--bit_depth', type=int, default=16, choices=[8, 16],
                                help='bit depth of the written image')

    restore_parser = subparsers.add_parser('restore', help='restore a degraded image')
    _add_common_args(restore_parser)
    _add_blur_args(restore_parser)
    _add_solver_args(restore_parser)
    restore_parser.add_argument('--input', type=str, required=True, metavar='PATH', help='degraded image')
    restore_parser.add_argument('--sidecar', type=str, default=None, metavar='PATH',
                                help='degradation sidecar (default: <input>.json)')
    restore_parser.add_argument('--bit_depth', type=int, default=16, choices=[8, 16],
                                help='bit depth of the written image')

    evaluate_parser = subparsers.add_parser('evaluate', help='quality metrics of restored images')
    _add_common_args(evaluate_parser)
    evaluate_parser.add_argument('--restored', type=str, required=True, metavar='PATH',
                                 help='restored image or directory of images')
    evaluate_parser.add_argument('--reference', type=str, required=True, metavar='PATH',
                                 help='reference image or directory of images with the same names')
    evaluate_parser.add_argument('--method', type=str, default='cstv', help='method name in the report rows')
    evaluate_parser.add_argument('--windowed_ssim', action='store_true',
                                 help='If true, use the Gaussian-window SSIM')

    sweep_parser = subparsers.add_parser('sweep', help='parameter surface over a 2-D grid')
    _add_common_args(sweep_parser)
    _add_blur_args(sweep_parser)
    _add_solver_args(sweep_parser)
    sweep_parser.add_argument('--input', type=str, required=True, metavar='PATH', help='degraded image')
    sweep_parser.add_argument('--reference', type=str, required=True, metavar='PATH', help='clean image')
    sweep_parser.add_argument('--sidecar', type=str, default=None, metavar='PATH',
                              help='degradation sidecar (default: <input>.json)')
    sweep_parser.add_argument('--axes', type=str, default='lambda', choices=['lambda', 'alpha'],
                              help='sweep (lambda1, lambda2) or (alpha1, alpha2)')
    sweep_parser.add_argument('--axis1_values', type=float, nargs='*', default=None,
                              help='grid values of the first axis (default: uniform over (0, b])')
    sweep_parser.add_argument('--axis2_values', type=float, nargs='*', default=None,
                              help='grid values of the second axis (default: uniform over (0, b])')
    sweep_parser.add_argument('--grid_points', type=int, default=presets.LAMBDA_GRID_POINTS,
                              help='points per axis of the default grid')
    sweep_parser.add_argument('--weights', type=str, default=None,
                              help='JSON metric weights of the sweet spot, e.g. \'{"psnr": 0.5, "ssim": 0.5}\'')
    sweep_parser.add_argument('--num_workers', type=int, default=1,
                              help='Number of threads evaluating grid cells')
    parser.command_parsers = {'degrade': degrade_parser, 'restore': restore_parser, 'evaluate': evaluate_parser,
                              'sweep': sweep_parser}
    return parser


def _merge_json(configs, parser):
    """JSON values fill every option the command line left at its default"""
    file_config = load_json_config(configs.config)
    sub_parser = parser.command_parsers[configs.command]
    for key, value in file_config.items():
        if key in ('solver', 'blur', 'noise'):
            continue
        attr = key.replace('-', '_')
        if attr not in configs:
            raise ConfigError('Unknown config key "{}" for the {} command'.format(key, configs.command))
        if configs[attr] == sub_parser.get_default(attr):
            configs[attr] = value
    return file_config


def parse_configs(argv=None):
    parser = build_parser()
    configs = edict(vars(parser.parse_args(argv)))

    file_config = _merge_json(configs, parser) if configs.config is not None else {}

    ####################################################################
    ############## Solver, blur and noise sections #####################
    ####################################################################
    if configs.command in ('restore', 'sweep'):
        solver = dict(file_config.get('solver', {}))
        for key in SOLVER_KEYS:
            if configs.get(key) is not None:
                solver[key] = configs[key]
        configs.solver = validate_solver_params(solver)
    configs.blur_json = file_config.get('blur')
    configs.noise_json = file_config.get('noise')

    ####################################################################
    ############## Hardware configurations #############################
    ####################################################################
    configs.device = select_device(no_cuda=configs.no_cuda, gpu_idx=configs.gpu_idx)
    if configs.threads is not None:
        if configs.threads < 1:
            raise ConfigError('--threads must be >= 1, got {}'.format(configs.threads))
        torch.set_num_threads(configs.threads)

    ####################################################################
    ############## Logs and results dir ################################
    ####################################################################
    configs.logs_dir = os.path.join(configs.working_dir, 'logs', configs.saved_fn)
    configs.results_dir = os.path.join(configs.working_dir, 'results', configs.saved_fn)
    make_folder(configs.logs_dir)
    make_folder(configs.results_dir)

    return configs

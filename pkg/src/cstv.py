import os
import sys
import json
import warnings

warnings.filterwarnings("ignore", category=UserWarning)

from torch.utils.tensorboard import SummaryWriter

sys.path.append('./')

from config import presets
from config.cstv_config import parse_configs, load_json_config, VERSION
from data_process.image_io import load_image, save_image, image_to_tensor, tensor_to_image
from data_process.degradation import degrade, noise_spec
from models.blur_operator import blur_to_json
from models.cstv_solver import restore, write_energy_trace
from models.model_utils import create_blur, create_operator, get_operator_summary
from utils.evaluation_utils import evaluate_pair, evaluate_directory, metric_row, write_metric_rows
from utils.tuning_utils import lambda_bound, default_lambda_grid, make_grid, sweep, sweet_spot, write_sweep_csv
from utils.misc import ConfigError, NumericalError, file_checksum, config_hash, json_safe, make_folder, write_provenance
from utils.torch_utils import set_seed, RNG_NAME
from utils.logger import Logger

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ERROR = 3


def get_provenance(configs):
    config_dict = json_safe({k: v for k, v in configs.items() if k not in ('device', 'logs_dir', 'results_dir')})
    return {
        'version': VERSION,
        'command': configs.command,
        'seed': configs.seed,
        'config_hash': config_hash(config_dict),
        'config': config_dict,
    }


def write_json(payload, path):
    with open(path, 'w') as f:
        json.dump(json_safe(payload), f, indent=2, sort_keys=True)


def _output_path(configs, stem, suffix):
    if configs.out is not None:
        return configs.out
    return os.path.join(configs.results_dir, '{}{}'.format(stem, suffix))


def sidecar_path(image_path):
    return os.path.splitext(image_path)[0] + '.json'


def _load_sidecar(configs):
    path = configs.sidecar if configs.sidecar is not None else sidecar_path(configs.input)
    if os.path.isfile(path):
        return load_json_config(path)
    if configs.sidecar is not None:
        raise ConfigError('Sidecar not found: {}'.format(path))
    return None


def cmd_degrade(configs, logger):
    clean_img = load_image(configs.input)
    clean = image_to_tensor(clean_img, device=configs.device)
    blur = create_blur(configs, default_preset='symmetric_va')

    noise_json = configs.noise_json or {}
    sigma = configs.sigma if configs.sigma is not None else noise_json.get('sigma', presets.NOISE_SIGMA)
    noise = noise_spec(sigma=sigma, seed=configs.seed)

    observed = degrade(clean, blur, noise, clamp=configs.clamp)

    stem = os.path.splitext(os.path.basename(configs.input))[0]
    out_path = _output_path(configs, stem, '_degraded.png')
    make_folder(os.path.dirname(os.path.abspath(out_path)))
    save_image(out_path, tensor_to_image(observed), bit_depth=configs.bit_depth)

    observed_metrics = evaluate_pair(load_image(out_path), clean_img)
    sidecar = {
        'blur': blur_to_json(blur),
        'noise': dict(noise),
        'seed': noise.seed,
        'rng': RNG_NAME,
        'clamp': configs.clamp,
        'source': os.path.basename(configs.input),
        'checksum': file_checksum(out_path),
        'observed_metrics': dict(observed_metrics),
        'provenance': get_provenance(configs),
    }
    write_json(sidecar, sidecar_path(out_path))
    logger.info('Degraded image saved to {} (psnr {:.4f}, checksum {})'.format(
        out_path, observed_metrics.psnr, sidecar['checksum']))


def cmd_restore(configs, logger):
    observed_img = load_image(configs.input)
    sidecar = _load_sidecar(configs)
    blur = create_blur(configs, sidecar=sidecar)
    observed = image_to_tensor(observed_img, device=configs.device)
    operator = create_operator(blur, tuple(observed.shape[-2:]), device=configs.device)

    tb_writer = SummaryWriter(log_dir=os.path.join(configs.logs_dir, 'tensorboard')) if configs.tensorboard else None
    report = restore(observed, operator, configs.solver, logger=logger, tb_writer=tb_writer,
                     print_freq=configs.print_freq)
    if tb_writer is not None:
        tb_writer.close()

    stem = os.path.splitext(os.path.basename(configs.input))[0]
    out_path = _output_path(configs, stem, '_restored.png')
    make_folder(os.path.dirname(os.path.abspath(out_path)))
    save_image(out_path, tensor_to_image(report.restored), bit_depth=configs.bit_depth)
    out_stem = os.path.splitext(out_path)[0]
    write_energy_trace(report.energy_trace, out_stem + '_energy.csv')
    write_provenance(out_stem + '_energy.csv', get_provenance(configs))

    summary = {
        'image': out_path,
        'checksum': file_checksum(out_path),
        'iterations': report.iterations,
        'final_change': report.final_change,
        'converged': report.converged,
        'diagnostics': report.diagnostics,
        'operator': get_operator_summary(operator),
        'params': configs.solver,
        'blur': blur_to_json(blur),
        'provenance': get_provenance(configs),
    }
    write_json(summary, out_stem + '_report.json')
    if report.diagnostics['least_squares']:
        logger.warning('Both regularizers inactive: the output is the regularized least-squares solution')
    if report.diagnostics['u_unconverged_steps'] > 0:
        logger.warning('The u splitting iteration hit max_inner_u in {} of {} outer iterations'.format(
            report.diagnostics['u_unconverged_steps'], report.iterations))
    logger.info('Restored image saved to {} after {} iterations'.format(out_path, report.iterations))


def cmd_evaluate(configs, logger):
    if os.path.isdir(configs.restored) and os.path.isdir(configs.reference):
        rows = evaluate_directory(configs.restored, configs.reference, method=configs.method,
                                  windowed_ssim=configs.windowed_ssim, logger=logger)
    elif os.path.isfile(configs.restored) and os.path.isfile(configs.reference):
        report = evaluate_pair(load_image(configs.restored), load_image(configs.reference),
                               windowed_ssim=configs.windowed_ssim)
        rows = [metric_row(report, os.path.splitext(os.path.basename(configs.restored))[0], configs.method)]
        logger.info('psnr {:.4f}, ssim {:.4f}, mse {:.6f}, ciede2000 {:.4f}'.format(
            report.psnr, report.ssim, report.mse, report.ciede2000))
    else:
        raise ConfigError('--restored and --reference must both be files or both be directories')

    out_path = _output_path(configs, 'metrics', '.{}'.format(configs.format))
    write_metric_rows(rows, out_path, fmt=configs.format, provenance=get_provenance(configs))
    if configs.format == 'csv':
        write_provenance(out_path, get_provenance(configs))
    logger.info('Metrics of {} image(s) saved to {}'.format(len(rows), out_path))


def cmd_sweep(configs, logger):
    observed_img = load_image(configs.input)
    reference_img = load_image(configs.reference)
    sidecar = _load_sidecar(configs)
    blur = create_blur(configs, sidecar=sidecar)
    observed = image_to_tensor(observed_img, device=configs.device)

    if configs.axes == 'lambda':
        axis_names = ('lambda1', 'lambda2')
        sigma = sidecar['noise']['sigma'] if sidecar is not None and 'noise' in sidecar else presets.NOISE_SIGMA
        bound = lambda_bound(observed.numel(), sigma)
        default_values = default_lambda_grid(bound, configs.grid_points)
        default_weights = presets.SWEEP_WEIGHTS
    else:
        axis_names = ('alpha1', 'alpha2')
        default_values = [(k + 1) / configs.grid_points for k in range(configs.grid_points)]
        default_weights = presets.ALPHA_SWEEP_WEIGHTS
    axis1_values = configs.axis1_values or default_values
    axis2_values = configs.axis2_values or default_values
    try:
        weights = json.loads(configs.weights) if configs.weights is not None else default_weights
    except json.JSONDecodeError as err:
        raise ConfigError('Invalid --weights JSON: {}'.format(err))

    grid = make_grid(axis_names[0], axis1_values, axis_names[1], axis2_values)
    operator = create_operator(blur, tuple(observed.shape[-2:]), device=configs.device)
    grid = sweep(observed, reference_img, operator, configs.solver, grid, num_workers=configs.num_workers,
                 logger=logger)
    best = sweet_spot(grid, weights)

    out_path = _output_path(configs, 'sweep_{}'.format(configs.axes), '.csv')
    make_folder(os.path.dirname(os.path.abspath(out_path)))
    write_sweep_csv(grid, out_path)
    write_provenance(out_path, get_provenance(configs))
    write_json({
        'axes': list(axis_names),
        'weights': weights,
        'sweet_spot': {axis_names[0]: best[0], axis_names[1]: best[1]},
        'cells': grid.cells,
        'provenance': get_provenance(configs),
    }, os.path.splitext(out_path)[0] + '.json')
    logger.info('Sweet spot {} = {}, {} = {}; surface saved to {}'.format(axis_names[0], best[0], axis_names[1],
                                                                          best[1], out_path))


COMMANDS = {
    'degrade': cmd_degrade,
    'restore': cmd_restore,
    'evaluate': cmd_evaluate,
    'sweep': cmd_sweep,
}


def main(argv=None):
    logger = None
    try:
        configs = parse_configs(argv)
        # Re-produce results
        set_seed(configs.seed)

        logger = Logger(configs.logs_dir, configs.saved_fn)
        logger.info('>>> configs: {}'.format(configs))
        COMMANDS[configs.command](configs, logger)
    except ConfigError as err:
        print('Configuration error: {}'.format(err), file=sys.stderr)
        if logger is not None:
            logger.error(str(err))
        return EXIT_CONFIG_ERROR
    except NumericalError as err:
        print('Numerical failure: {}'.format(err), file=sys.stderr)
        if logger is not None:
            logger.error(str(err))
        return EXIT_NUMERICAL_ERROR
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())

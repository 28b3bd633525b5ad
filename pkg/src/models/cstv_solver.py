"""
# -*- coding: utf-8 -*-
-----------------------------------------------------------------------------------
# DoC: 2024.03.08
-----------------------------------------------------------------------------------
# Description: Cross-space TV restoration by alternating minimization.
# The coupled problem
#   min  lambda1 SVTV(w) + lambda2 CTV(v) + alpha1/2 ||w - u||^2 + alpha2/2 ||v - u||^2 + 1/2 ||B u - z||^2
# is split into a u-subproblem (quaternion normal equations solved by QCG inside
# the B = Q + R splitting iteration) and two TV proximal subproblems for w and v
# solved by ADMM with FFT-diagonalised linear steps.
"""

import sys
import csv
import math
import time

import torch
import torch.fft
from easydict import EasyDict as edict

sys.path.append('../')

from models.quaternion import qdot
from models.blur_operator import QuaternionBlurOperator
from models.regularizers import (grad_x, grad_y, grad_x_adjoint, grad_y_adjoint, laplacian_symbol, apply_p,
                                 apply_p_inverse, group_shrink, shrink_sv, shrink_v, svtv_value, ctv2_value)
from data_process.image_io import to_quaternion_field, from_quaternion_field
from config.cstv_config import validate_solver_params
from utils.misc import ConfigError, NumericalError, AverageMeter, ProgressMeter

ENERGY_TRACE_FIELDS = ['iteration', 'energy', 'penalized', 'err', 'err_u']

# u-iteration divergence: over this many steps both ||u_k - u_k-1||^2 and ||u_k||^2 grow by DIVERGENCE_FACTOR
DIVERGENCE_WINDOW = 5
DIVERGENCE_FACTOR = 10.


def _check_finite(tensor, what):
    if not bool(torch.isfinite(tensor).all()):
        raise NumericalError('Non-finite values in {}'.format(what))


def relative_change(prev, new):
    """||prev - new||^2 / ||prev||^2, inf when prev is zero and new is not"""
    diff = torch.sum((prev - new) ** 2).item()
    denom = torch.sum(prev ** 2).item()
    if denom == 0:
        return 0. if diff == 0 else math.inf
    return diff / denom


def qcg(apply_A, b, tol=1e-8, max_iter=None, x0=None, logger=None):
    """Quaternion conjugate gradient for a Hermitian positive definite operator.

    :param apply_A: callable realising A on arrays shaped like b
    :param b: right-hand side, a quaternion array (4, ...) or any real field
    :param tol: absolute stop on the residual norm ||b - A x||
    :return: edict(x, iterations, residual_norms, converged)
    """
    _check_finite(b, 'the QCG right-hand side')
    if max_iter is None:
        max_iter = b.numel()
    if x0 is None:
        x = torch.zeros_like(b)
        r = b.clone()
    else:
        x = x0.clone()
        r = b - apply_A(x)
    p = r.clone()
    rr = qdot(r, r)
    residual_norms = [math.sqrt(rr)]
    converged = residual_norms[-1] <= tol
    best_x, best_norm = x, residual_norms[-1]
    iterations = 0
    while not converged and iterations < max_iter:
        q = apply_A(p)
        pq = qdot(p, q)
        if not math.isfinite(pq) or pq <= 0:
            raise NumericalError('QCG breakdown: <p, Ap> = {} (operator not positive definite?)'.format(pq))
        a_k = rr / pq
        x = x + a_k * p
        r = r - a_k * q
        rr_new = qdot(r, r)
        if not math.isfinite(rr_new):
            raise NumericalError('Non-finite residual in QCG')
        iterations += 1
        residual_norms.append(math.sqrt(rr_new))
        if residual_norms[-1] <= tol:
            converged = True
            break
        if residual_norms[-1] < best_norm:
            best_x, best_norm = x, residual_norms[-1]
        b_k = rr_new / rr
        p = r + b_k * p
        rr = rr_new

    if not converged:
        # CG residual norms are not monotone
        x = best_x
        if logger is not None:
            logger.warning('QCG stopped after {} iterations, best residual {:.3e} > tol {:.3e}'.format(
                iterations, best_norm, tol))
    return edict({'x': x, 'iterations': iterations, 'residual_norms': residual_norms, 'converged': converged})


def regularizer_activity(params):
    """(svtv_active, ctv_active) after the model selector and zero weights"""
    svtv_active = params.model in ('cstv', 'svtv') and params.lambda1 > 0
    ctv_active = params.model in ('cstv', 'ctv') and params.lambda2 > 0
    return svtv_active, ctv_active


def init_state(z_field, params):
    """u = 0, w = v = z; ADMM multipliers at zero"""
    z_img = z_field[1:]
    zeros = torch.zeros_like(z_img)
    return edict({
        'u': torch.zeros_like(z_field),
        'w': z_img.clone(),
        'v': z_img.clone(),
        's_w': apply_p(z_img),
        's_v': z_img.clone(),
        'tau_w': (zeros.clone(), zeros.clone()),
        'tau_v': (zeros.clone(), zeros.clone()),
        'err_u': math.inf,
        'u_converged': False,
        'u_unconverged': 0,
        'inner_iterations': 0,
        'cg_iterations': 0,
    })


def u_step(state, z_field, operator, params, logger=None):
    """Splitting iteration [Q^T Q + (a1 + a2) I] u+ = -(Q^T R + R^T Q + R^T R) u + B^T z + a1 w + a2 v"""
    coupling = params.alpha1 + params.alpha2

    def apply_normal_q(x):
        return operator.apply_q_adjoint(operator.apply_q(x)) + coupling * x

    w_field = to_quaternion_field(state.w)
    v_field = to_quaternion_field(state.v)
    rhs_fixed = operator.apply_b_adjoint(z_field) + params.alpha1 * w_field + params.alpha2 * v_field

    u = state.u
    errs = []
    steps = []
    norms = [qdot(u, u)]
    cg_iterations = 0
    converged = False
    for inner in range(1, params.max_inner_u + 1):
        if operator.has_residual:
            qu = operator.apply_q(u)
            ru = operator.apply_r(u)
            rhs = rhs_fixed - operator.apply_q_adjoint(ru) - operator.apply_r_adjoint(qu + ru)
        else:
            rhs = rhs_fixed
        rhs_norm = math.sqrt(qdot(rhs, rhs))
        result = qcg(apply_normal_q, rhs, tol=params.cg_tol * rhs_norm, max_iter=params.max_cg, x0=u,
                     logger=logger)
        cg_iterations += result.iterations
        u_new = u + params.damping * (result.x - u)
        _check_finite(u_new, 'the u iterate')
        err_u = relative_change(u, u_new)
        errs.append(err_u)
        steps.append(qdot(u_new - u, u_new - u))
        norms.append(qdot(u_new, u_new))
        u = u_new
        if is_diverging(steps, norms):
            raise NumericalError('u splitting iteration diverges: step {:.3e} -> {:.3e}, |u| {:.3e} -> {:.3e} over '
                                 '{} iterations; increase alpha1 + alpha2 or lower the damping'.format(
                                     math.sqrt(steps[-DIVERGENCE_WINDOW - 1]), math.sqrt(steps[-1]),
                                     math.sqrt(norms[-DIVERGENCE_WINDOW - 2]), math.sqrt(norms[-1]),
                                     DIVERGENCE_WINDOW))
        if not operator.has_residual or err_u <= params.tol:
            converged = True
            break

    if not converged:
        # slow divergence: growth over the whole run instead of one window
        if len(steps) > DIVERGENCE_WINDOW and is_diverging(steps, norms, window=len(steps) - 1):
            raise NumericalError('u splitting iteration diverges: step {:.3e} -> {:.3e}, |u| {:.3e} -> {:.3e} after '
                                 '{} iterations; increase alpha1 + alpha2 or lower the damping'.format(
                                     math.sqrt(steps[0]), math.sqrt(steps[-1]), math.sqrt(norms[0]),
                                     math.sqrt(norms[-1]), inner))
        state.u_unconverged += 1
        if logger is not None:
            logger.warning('u splitting iteration stopped after {} iterations, relative change {:.3e} > tol {:.3e}'
                           .format(inner, errs[-1], params.tol))
    state.u = u
    state.err_u = errs[-1]
    state.u_converged = converged
    state.inner_iterations = inner
    state.cg_iterations = cg_iterations
    return state


def is_diverging(steps, norms, window=DIVERGENCE_WINDOW, factor=DIVERGENCE_FACTOR):
    """True when over the last window iterations the squared step norm rose by factor to a window maximum
    while the squared iterate norm grew by factor as well.

    steps[k] is ||u_k+1 - u_k||^2 and norms[k] is ||u_k||^2, so norms is one longer than steps.
    """
    if len(steps) <= window:
        return False
    recent = steps[-window - 1:]
    if not recent[0] > 0 or recent[-1] < max(recent) or recent[-1] < factor * recent[0]:
        return False
    return norms[-1] >= factor * norms[-window - 2]


def solve_s_subproblem(rhs, beta, method='fft', tol=1e-10, max_iter=None):
    """Solve (I + beta Dx^T Dx + beta Dy^T Dy) s = rhs per channel"""
    if method == 'fft':
        denom = 1. + beta * laplacian_symbol(tuple(rhs.shape[-2:]), dtype=rhs.dtype, device=rhs.device)
        return torch.fft.irfft2(torch.fft.rfft2(rhs) / denom, s=tuple(rhs.shape[-2:]))
    if method == 'cg':
        def apply_system(s):
            return s + beta * (grad_x_adjoint(grad_x(s)) + grad_y_adjoint(grad_y(s)))

        rhs_norm = math.sqrt(qdot(rhs, rhs))
        return qcg(apply_system, rhs, tol=tol * rhs_norm, max_iter=max_iter).x
    raise ConfigError('Unknown s-subproblem method: {}'.format(method))


def sv_shrinkage(mu, alpha_sv, beta):
    """t-step of the w-subproblem: saturation group (P channels 0, 1) and value group (P channel 2)"""

    def shrink(zx, zy):
        tx0, ty0, tx1, ty1 = shrink_sv(zx[0], zy[0], zx[1], zy[1], mu / beta)
        tx2, ty2 = shrink_v(zx[2], zy[2], alpha_sv * mu / beta)
        return torch.stack([tx0, tx1, tx2]), torch.stack([ty0, ty1, ty2])

    return shrink


def colour_shrinkage(mu, beta):
    """t-step of the v-subproblem: one group over the gradients of all RGB channels"""

    def shrink(zx, zy):
        shrunk = group_shrink(tuple(zx) + tuple(zy), mu / beta)
        return torch.stack(shrunk[:3]), torch.stack(shrunk[3:])

    return shrink


def _admm_tv_prox(q, s, tau, shrink, beta, sweeps, admm_tol=0., s_method='fft'):
    """ADMM for min_s sum_g thr_g * ||D s_g|| + 1/2 ||s - q||^2 with t = D s.

    shrink: maps (zx, zy) to the grouped soft-thresholded (tx, ty)
    Returns the new s and the multipliers (tau_x, tau_y).
    """
    tau_x, tau_y = tau
    for _ in range(sweeps):
        # Step one: grouped shrinkage of D s - tau / beta
        zx = grad_x(s) - tau_x / beta
        zy = grad_y(s) - tau_y / beta
        tx, ty = shrink(zx, zy)

        # Step two: exact linear solve
        rhs = q + grad_x_adjoint(tau_x + beta * tx) + grad_y_adjoint(tau_y + beta * ty)
        s_new = solve_s_subproblem(rhs, beta, method=s_method)

        # Step three: multiplier update
        tau_x = tau_x + beta * (tx - grad_x(s_new))
        tau_y = tau_y + beta * (ty - grad_y(s_new))

        change = relative_change(s, s_new)
        s = s_new
        if admm_tol > 0 and change <= admm_tol:
            break
    return s, (tau_x, tau_y)


def w_step(state, params):
    """SVTV proximal step in the P coordinates: min lambda1 SVTV(w) + alpha1/2 ||w - u||^2"""
    u_img = state.u[1:]
    svtv_active, _ = regularizer_activity(params)
    if not svtv_active:
        state.w = u_img.clone()
        state.s_w = apply_p(state.w)
        return state
    if params.reset_multipliers:
        state.tau_w = (torch.zeros_like(u_img), torch.zeros_like(u_img))
    mu = params.lambda1 / params.alpha1
    shrink = sv_shrinkage(mu, params.alpha_sv, params.beta)
    s, state.tau_w = _admm_tv_prox(apply_p(u_img), state.s_w, state.tau_w, shrink, params.beta, params.max_admm,
                                   admm_tol=params.admm_tol, s_method=params.s_method)
    state.s_w = s
    state.w = apply_p_inverse(s)
    return state


def v_step(state, params):
    """CTV proximal step on the RGB channels: min lambda2 CTV(v) + alpha2/2 ||v - u||^2"""
    u_img = state.u[1:]
    _, ctv_active = regularizer_activity(params)
    if not ctv_active:
        state.v = u_img.clone()
        state.s_v = state.v.clone()
        return state
    if params.reset_multipliers:
        state.tau_v = (torch.zeros_like(u_img), torch.zeros_like(u_img))
    shrink = colour_shrinkage(params.lambda2 / params.alpha2, params.beta)
    s, state.tau_v = _admm_tv_prox(u_img, state.s_v, state.tau_v, shrink, params.beta, params.max_admm,
                                   admm_tol=params.admm_tol, s_method=params.s_method)
    state.s_v = s
    state.v = s
    return state


def _as_field(u):
    return u if u.shape[0] == 4 else to_quaternion_field(u)


def fidelity(u, z, operator):
    """1/2 ||B u - z||^2 through the extended operator"""
    residual = operator.apply_b(_as_field(u)) - _as_field(z)
    return 0.5 * torch.sum(residual ** 2).item()


def energy(u, z, operator, params):
    """Model objective lambda1 SVTV(u) + lambda2 CTV2(u) + 1/2 ||Q u + r - z||^2"""
    params = validate_solver_params(params)
    u_img = _as_field(u)[1:]
    svtv_active, ctv_active = regularizer_activity(params)
    value = fidelity(u, z, operator)
    if svtv_active:
        value += params.lambda1 * svtv_value(u_img, params.alpha_sv)
    if ctv_active:
        value += params.lambda2 * ctv2_value(u_img)
    return value


def penalized_energy(u, w, v, z, operator, params):
    """Coupled objective in (u, w, v) decreased by the alternating scheme.

    The couplings act on the whole field, so the real part of u is penalised as well.
    """
    params = validate_solver_params(params)
    u_field = _as_field(u)
    svtv_active, ctv_active = regularizer_activity(params)
    value = fidelity(u, z, operator)
    value += 0.5 * params.alpha1 * torch.sum((_as_field(w) - u_field) ** 2).item()
    value += 0.5 * params.alpha2 * torch.sum((_as_field(v) - u_field) ** 2).item()
    if svtv_active:
        value += params.lambda1 * svtv_value(w, params.alpha_sv)
    if ctv_active:
        value += params.lambda2 * ctv2_value(v)
    return value


def restore(z, blur, params, logger=None, tb_writer=None, print_freq=10):
    """Restore a degraded (3, H, W) image.

    :param z: observed image, float64 tensor (3, H, W)
    :param blur: a cross-channel blur description or a QuaternionBlurOperator
    :param params: solver parameters (see config.cstv_config.make_solver_params)
    :return: edict report with the restored image, iteration count, energy trace and diagnostics
    """
    params = validate_solver_params(params)
    if z.dim() != 3 or z.shape[0] != 3 or z.numel() == 0:
        raise ConfigError('Expect a non-empty (3, H, W) image, got shape {}'.format(tuple(z.shape)))
    _check_finite(z, 'the observed image')
    shape = tuple(z.shape[-2:])
    if isinstance(blur, QuaternionBlurOperator):
        operator = blur
        if operator.shape != shape:
            raise ConfigError('Operator shape {} does not match the image shape {}'.format(operator.shape, shape))
    else:
        operator = QuaternionBlurOperator.from_blur(blur, shape, device=z.device)

    z_field = to_quaternion_field(z)
    state = init_state(z_field, params)
    svtv_active, ctv_active = regularizer_activity(params)

    iter_time = AverageMeter('Time', ':6.3f')
    energies = AverageMeter('Energy', ':.6e')
    changes = AverageMeter('Err', ':.3e')
    progress = ProgressMeter(params.max_outer, [iter_time, energies, changes], prefix="Restore - Iter: ")

    if logger is not None:
        logger.info('Restoring a {}x{} image, model {}, |R|/|B| = {:.4f}'.format(
            shape[0], shape[1], params.model, operator.residual_ratio()))

    energy_trace = []
    converged = False
    err = math.inf
    iteration = 0
    for iteration in range(1, params.max_outer + 1):
        start_time = time.time()
        u_prev, w_prev, v_prev = state.u, state.w, state.v

        u_step(state, z_field, operator, params, logger=logger)
        w_step(state, params)
        v_step(state, params)

        err = relative_change(v_prev, state.v)
        if params.strict_stop:
            err = max(err, relative_change(u_prev, state.u), relative_change(w_prev, state.w))

        objective = energy(state.u, z_field, operator, params)
        penalized = penalized_energy(state.u, state.w, state.v, z_field, operator, params)
        if not math.isfinite(objective) or not math.isfinite(penalized):
            raise NumericalError('Non-finite energy at iteration {}'.format(iteration))
        energy_trace.append({'iteration': iteration, 'energy': objective, 'penalized': penalized, 'err': err,
                             'err_u': state.err_u})

        iter_time.update(time.time() - start_time)
        energies.update(objective)
        changes.update(err)
        if logger is not None and ((iteration % print_freq) == 0 or iteration == 1):
            logger.info(progress.get_message(iteration))
        if tb_writer is not None:
            tb_writer.add_scalar('Energy/objective', objective, iteration)
            tb_writer.add_scalar('Energy/penalized', penalized, iteration)
            tb_writer.add_scalar('Stop/err', err, iteration)
            tb_writer.add_scalar('Stop/err_u', state.err_u, iteration)

        if err <= params.tol:
            converged = True
            break

    restored, real_part_norm = from_quaternion_field(state.u)
    if logger is not None:
        logger.info('Finished after {} iterations (converged: {}), final change {:.3e}, real part norm {:.3e}'.format(
            iteration, converged, err, real_part_norm))

    return edict({
        'restored': restored,
        'iterations': iteration,
        'final_change': err,
        'converged': converged,
        'energy_trace': energy_trace,
        'diagnostics': {
            'real_part_norm': real_part_norm,
            'residual_ratio': operator.residual_ratio(),
            'least_squares': not (svtv_active or ctv_active),
            'u_unconverged_steps': state.u_unconverged,
        },
    })


def write_energy_trace(energy_trace, path):
    with open(path, 'w', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=ENERGY_TRACE_FIELDS)
        writer.writeheader()
        for row in energy_trace:
            writer.writerow({k: row[k] for k in ENERGY_TRACE_FIELDS})

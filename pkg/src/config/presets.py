import numpy as np

preset_names = ["symmetric_va", "asymmetric_vb"]

# Noise and stopping constants of the experiment protocols
NOISE_SIGMA = 0.01
STOP_TOL = 1e-5

# Symmetric setup: every block blurred by the same Gaussian
W_SYMMETRIC = np.array([
    [0.7, 0.15, 0.15],
    [0.15, 0.7, 0.15],
    [0.15, 0.15, 0.7]
])

KERNELS_SYMMETRIC = [
    [('G', 5, 5), ('G', 5, 5), ('G', 5, 5)],
    [('G', 5, 5), ('G', 5, 5), ('G', 5, 5)],
    [('G', 5, 5), ('G', 5, 5), ('G', 5, 5)],
]

# Asymmetric setup: (A, size) average, (M, length, angle) motion, (G, size, sigma) Gaussian
W_ASYMMETRIC = np.array([
    [0.7, 0.15, 0.15],
    [0.1, 0.8, 0.1],
    [0.05, 0.05, 0.9]
])

KERNELS_ASYMMETRIC = [
    [('A', 5), ('M', 11, 45), ('M', 21, 90)],
    [('M', 11, 45), ('A', 5), ('G', 5, 5)],
    [('M', 21, 90), ('G', 5, 5), ('A', 5)],
]

PRESETS = {
    "symmetric_va": (KERNELS_SYMMETRIC, W_SYMMETRIC),
    "asymmetric_vb": (KERNELS_ASYMMETRIC, W_ASYMMETRIC),
}

# Solver defaults. alpha1 + alpha2 = 1 keeps the u splitting contractive on the
# symmetric preset; smaller couplings can diverge on the gray mode at damping 1.
SOLVER_DEFAULTS = {
    "model": "cstv",
    "lambda1": 0.8e-3,
    "lambda2": 0.2e-3,
    "alpha1": 0.5,
    "alpha2": 0.5,
    "alpha_sv": 1.0,
    "beta": 1.0,
    "tol": STOP_TOL,
    "max_outer": 200,
    "max_inner_u": 50,
    "max_admm": 1,
    "damping": 1.0,
    "cg_tol": 1e-8,
    "max_cg": 200,
    "admm_tol": 0.,
    "s_method": "fft",
    "reset_multipliers": False,
    "strict_stop": False,
}

MODELS = ["cstv", "svtv", "ctv"]

# Sweep defaults
LAMBDA_GRID_POINTS = 10
SWEEP_WEIGHTS = {"psnr": 0.5, "ssim": 0.5}
ALPHA_SWEEP_WEIGHTS = {"ciede2000": 1.0}

import numpy as np
from scipy.linalg import solve_triangular
from simplex_models.errors import (
    ConstraintViolated, DimensionMismatch, NonpositiveAlpha, NotPositiveDefinite,
)
from simplex_models.models import Dataset
from simplex_models.simplex import alr_inverse


CONSTRAINT_TOL = 1e-10
TINY = np.finfo(float).tiny


def strictly_positive(samples):
    # floor underflowed entries so every row stays a valid log-model composition
    samples = np.maximum(samples, TINY)
    return samples / samples.sum(axis=1, keepdims=True)


#############################################
# DIRICHLET
#############################################
def sample_dirichlet(alpha, n, seed, labels=None):
    """n independent Dirichlet(alpha) compositions; the K=0 member of the a=b=0 family."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.ndim != 1 or alpha.shape[0] < 2:
        raise DimensionMismatch(f"alpha must be a vector of m >= 2 entries, got shape {alpha.shape}")
    if np.any(~(alpha > 0)):
        raise NonpositiveAlpha(f"Dirichlet concentrations must be positive, got {alpha}")
    rng = np.random.default_rng(seed)
    return Dataset(samples=strictly_positive(rng.dirichlet(alpha, size=n)), labels=labels)


#############################################
# LOGISTIC NORMAL
#############################################
def logistic_normal_moments(K, eta):
    """
    Mean and precision of y = alr(x) when K 1 = 0 and 1'eta = -m.
    The Jacobian prod x_j shifts the linear term to eta_{-m} + 1.
    """
    K = np.asarray(K, dtype=float)
    eta = np.asarray(eta, dtype=float)
    m = K.shape[0]
    if K.shape != (m, m) or eta.shape != (m,):
        raise DimensionMismatch(f"K must be m x m and eta length m, got {K.shape} and {eta.shape}")
    scale = max(1.0, float(np.abs(K).max()))
    if np.abs(K - K.T).max() > CONSTRAINT_TOL * scale:
        raise ConstraintViolated("the logistic normal needs a symmetric K")
    if np.abs(K.sum(axis=1)).max() > CONSTRAINT_TOL * scale:
        raise ConstraintViolated("the logistic normal needs K 1 = 0")
    if abs(eta.sum() + m) > CONSTRAINT_TOL * max(1.0, m):
        raise ConstraintViolated(f"the logistic normal needs 1'eta = -m, got {eta.sum():g}")

    precision = K[:-1, :-1]
    try:
        chol = np.linalg.cholesky(precision)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("K without its last row and column must be positive definite")
    mean = solve_triangular(chol.T, solve_triangular(chol, eta[:-1] + 1.0, lower=True), lower=False)
    return mean, precision, chol


def sample_logistic_normal(K, eta, n, seed, labels=None):
    """Draw y ~ N(mean, K_{-m,-m}^-1) and map through the additive logistic transform."""
    mean, _, chol = logistic_normal_moments(K, eta)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, mean.shape[0]))
    # L^-T z has covariance (L L')^-1
    y = mean + solve_triangular(chol, z.T, lower=True, trans="T").T
    return Dataset(samples=strictly_positive(alr_inverse(y)), labels=labels)

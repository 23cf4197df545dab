import numpy as np
import scipy.sparse as sp
from utils import root_logger
from simplex_models.errors import SingularUnpenalizedBlock
from loss_assembly.transforms import loss_fingerprint
from solver.coordinate_descent import ReducedProblem, coordinate_descent
from solver.models import FitPath, LambdaGrid


SINGULAR_TOL = 1e-12


def _effective_factors(problem, opts):
    """Penalty per unit lambda_K for every free variable."""
    eta = problem.kinds == "eta"
    return np.where(eta, problem.factors * opts.eta_penalty_ratio, problem.factors)


def unpenalized_solution(problem, opts):
    """
    (penalized mask, phi) where phi minimizes the smooth part with every
    penalized variable held at zero.
    """
    factors = _effective_factors(problem, opts)
    penalized = factors > 0
    phi = np.zeros(problem.dim)
    free = np.flatnonzero(~penalized)
    if free.size == 0:
        return penalized, phi

    Q_UU = problem.Q[free][:, free]
    Q_UU = Q_UU.toarray() if sp.issparse(Q_UU) else np.asarray(Q_UU)
    eigenvalues = np.linalg.eigvalsh(Q_UU)
    scale = max(1.0, float(np.abs(eigenvalues).max()))
    if eigenvalues.min() <= SINGULAR_TOL * scale:
        raise SingularUnpenalizedBlock(
            f"unpenalized block of size {free.size} is singular (min eigenvalue {eigenvalues.min():.3e}); "
            "increase delta or penalize the diagonal"
        )
    phi[free] = np.linalg.solve(Q_UU, problem.c[free])
    return penalized, phi


def lambda_max(loss, opts, problem=None):
    """Smallest lambda_K at which every penalized variable is exactly zero."""
    problem = ReducedProblem(loss, opts) if problem is None else problem
    penalized, phi = unpenalized_solution(problem, opts)
    if not penalized.any():
        return 0.0
    residual = problem.c - np.asarray(problem.Q @ phi)
    factors = _effective_factors(problem, opts)
    return float(np.max(np.abs(residual[penalized]) / factors[penalized]))


def fit_path(loss, opts, grid=None):
    """
    Warm-started fits along a strictly decreasing lambda grid: geometric from
    lambda_max down to ratio * lambda_max, or the grid's explicit lambdas.
    """
    grid = LambdaGrid() if grid is None else grid
    problem = ReducedProblem(loss, opts)
    lam_max = lambda_max(loss, opts, problem)
    if grid.lambdas is None and lam_max <= 0:
        root_logger.warning("lambda_max is zero; the path holds the single unpenalized fit")
        lambdas = np.array([0.0])
    else:
        lambdas = grid.values(lam_max)

    fits = []
    init = None
    for lam in lambdas:
        fit = coordinate_descent(loss, opts.at(lam), init=init, problem=problem)
        root_logger.debug(
            f"lambda={lam:.4g}: {fit.nonzero_off_diagonal()} off-diagonal nonzeros, "
            f"{fit.sweeps_used} sweeps, KKT {fit.kkt_violation:.2e}"
        )
        fits.append(fit)
        init = fit.params

    return FitPath(fits=fits, loss_fingerprint=loss_fingerprint(loss), lambda_max=lam_max)

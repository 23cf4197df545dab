import numpy as np
from joblib import Parallel, delayed
from sklearn.model_selection import KFold
from utils import root_logger
from simplex_models.errors import TooFewSamples
from weighting.boundary import resolve_truncation
from loss_assembly.builder import assemble, resolve_J
from loss_assembly.transforms import apply_diagonal_multiplier, transform_am1
from solver.models import LambdaGrid, SolverOptions
from solver.path import fit_path, lambda_max
from evaluation.models import CrossValidationResult, EstimateResult


def build_loss(data, spec, weights, J=None, delta=1.0, truncation=None):
    """assemble -> A^(m-1) transform when the mode asks for it -> diagonal multiplier."""
    loss = assemble(data, spec, weights, J, truncation=truncation)
    if spec.mode == "am1":
        loss = transform_am1(loss)
    return apply_diagonal_multiplier(loss, delta)


def _score_fold(data, spec, weights, J, delta, opts, lambdas, train, test):
    train_data, test_data = data.subset(train), data.subset(test)
    # the held-out loss reuses the training truncation
    truncation = resolve_truncation(train_data, weights, J)
    loss = build_loss(train_data, spec, weights, J, delta, truncation)
    path = fit_path(loss, opts, LambdaGrid(lambdas=list(lambdas)))
    held_out = assemble(test_data, spec, weights, J, truncation=truncation)
    return np.array([held_out.evaluate(fit.params, with_delta=False) for fit in path.fits])


def cross_validate(data, spec, weights, J=None, grid=None, folds=5, seed=0,
                   opts=None, delta=1.0, threads=1, lambdas=None):
    """
    K-fold choice of lambda on the held-out score-matching loss
    1/2 theta' Gamma_test theta - g_test' theta (no diagonal multiplier).
    All folds share one grid, taken from the full-data lambda_max unless
    `lambdas` is given. Ties go to the larger lambda. Rows are sorted
    lexicographically first, so the folds do not depend on input order.
    """
    n = data.n
    if folds < 2 or n < folds:
        raise TooFewSamples(f"{folds}-fold cross validation needs at least {max(folds, 2)} samples, got {n}")
    opts = SolverOptions() if opts is None else opts
    grid = LambdaGrid() if grid is None else grid
    J = resolve_J(data.m, J)
    data = data.subset(np.lexsort(data.samples.T[::-1]))

    if lambdas is None:
        if grid.lambdas is not None:
            lambdas = np.asarray(grid.lambdas)
        else:
            lam_max = lambda_max(build_loss(data, spec, weights, J, delta), opts)
            lambdas = grid.values(lam_max) if lam_max > 0 else np.array([0.0])
    lambdas = np.asarray(lambdas, dtype=float)

    splitter = KFold(n_splits=folds, shuffle=True, random_state=seed)
    scores = Parallel(n_jobs=threads, prefer="threads")(
        delayed(_score_fold)(data, spec, weights, J, delta, opts, lambdas, train, test)
        for train, test in splitter.split(data.samples)
    )
    scores = np.vstack(scores)
    curve = scores.mean(axis=0)
    se = scores.std(axis=0, ddof=1) / np.sqrt(folds)
    # argmin returns the first minimum, i.e. the largest lambda among ties
    best = int(np.argmin(curve))
    root_logger.info(f"Cross validation picked lambda={lambdas[best]:.4g} ({best + 1} of {len(lambdas)})")

    return CrossValidationResult(
        lambdas=lambdas, cv_curve=curve, cv_se=se, fold_scores=scores,
        lambda_star=float(lambdas[best]), index_star=best, folds=folds,
    )


def fit_with_cv(data, settings, seed=0, cross_validation=True):
    """
    Full estimation pipeline: truncation, assembly, A^(m-1) transform,
    diagonal multiplier, warm-started path and a cross-validated pick.
    """
    m, n = data.m, data.n
    weights = settings.weights(m)
    J = settings.dropped(m)
    delta = settings.resolve_delta(n, m)
    loss = build_loss(data, settings.spec, weights, J, delta)
    path = fit_path(loss, settings.solver, settings.grid)

    cv = None
    selected = path.fits[-1]
    if cross_validation and len(path) > 1:
        cv = cross_validate(
            data, settings.spec, weights, J, folds=settings.folds, seed=seed,
            opts=settings.solver, delta=delta, threads=settings.threads, lambdas=path.lambdas,
        )
        selected = path.fits[cv.index_star]

    return EstimateResult(
        path=path, cv=cv, selected=selected, J=J, delta=delta, weights=weights,
        settings_fingerprint=settings.fingerprint(),
    )

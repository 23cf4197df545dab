import numpy as np
from sklearn.metrics import auc
from config import Config
from simplex_models.errors import DegenerateTruth, DimensionMismatch
from evaluation.models import RocCurve


def _same_m(estimated, truth):
    if estimated.m != truth.m:
        raise DimensionMismatch(f"estimate has m={estimated.m}, truth m={truth.m}")


#############################################
# SUPPORT RECOVERY
#############################################
def tpr_fpr(estimated, truth, zero_tol=Config.SUPPORT_ZERO_TOL):
    """TPR and FPR of the off-diagonal support over ordered pairs, denominator m(m-1)."""
    _same_m(estimated, truth)
    m = truth.m
    true_edges = truth.off_support(zero_tol)
    found = estimated.off_support(zero_tol)
    positives = int(true_edges.sum())
    negatives = m * (m - 1) - positives
    if positives == 0 or negatives == 0:
        raise DegenerateTruth(f"truth has {positives} edges and {negatives} non-edges; TPR/FPR undefined")
    tpr = (found & true_edges).sum() / positives
    fpr = (found & ~true_edges).sum() / negatives
    return float(tpr), float(fpr)


def roc_from_points(path_points):
    """
    Close a set of (fpr, tpr) points at (0,0) and (1,1), keep the best tpr
    per fpr, and integrate by the trapezoid rule.
    """
    best = {0.0: 0.0, 1.0: 1.0}
    for fpr, tpr in path_points:
        best[fpr] = max(best.get(fpr, 0.0), tpr)
    fprs = np.array(sorted(best))
    tprs = np.array([best[f] for f in fprs])
    return RocCurve(
        points=list(zip(fprs.tolist(), tprs.tolist())),
        path_points=[(float(f), float(t)) for f, t in path_points],
        auc=float(np.clip(auc(fprs, tprs), 0.0, 1.0)),
    )


def roc_auc(path, truth, zero_tol=Config.SUPPORT_ZERO_TOL):
    """One (fpr, tpr) per path lambda, closed and integrated."""
    points = []
    for fit in path.fits:
        tpr, fpr = tpr_fpr(fit.params, truth, zero_tol)
        points.append((fpr, tpr))
    return roc_from_points(points)


def mean_roc(curves, grid=None):
    grid = np.linspace(0.0, 1.0, 101) if grid is None else np.asarray(grid)
    tprs = np.array([np.interp(grid, c.fpr, c.tpr) for c in curves])
    return grid, tprs.mean(axis=0)


#############################################
# ESTIMATION ERROR
#############################################
def _norms(D):
    return {
        "max": float(np.abs(D).max()),
        "frobenius": float(np.linalg.norm(D, "fro")),
        "spectral": float(np.linalg.norm(D, 2)),
    }


def norm_errors(estimated, truth, normalize=False):
    """Max, Frobenius and spectral norms of K_hat - K_0, optionally relative to K_0."""
    _same_m(estimated, truth)
    errors = _norms(estimated.K - truth.K)
    if normalize:
        reference = _norms(truth.K)
        if reference["frobenius"] == 0:
            raise DegenerateTruth("cannot normalize by the norms of a zero K")
        errors = {key: value / reference[key] for key, value in errors.items()}
    return errors


#############################################
# GRAPHS
#############################################
def node_degrees(edges, m):
    degrees = np.zeros(m, dtype=int)
    for j, k in edges:
        degrees[j] += 1
        degrees[k] += 1
    return degrees


def hub_nodes(edges, m, min_degree=5):
    degrees = node_degrees(edges, m)
    return [int(j) for j in np.flatnonzero(degrees >= min_degree)]

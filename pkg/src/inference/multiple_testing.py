import numpy as np
from statsmodels.stats.multitest import multipletests
from simplex_models.errors import POutOfRange


def by_adjust(p):
    """Benjamini-Yekutieli adjusted p-values, valid under arbitrary dependence."""
    p = np.asarray(p, dtype=float)
    if p.size == 0:
        return p.copy()
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise POutOfRange("p-values must lie in [0, 1]")
    return multipletests(p, method="fdr_by")[1]


def pair_family(m, symmetric):
    """(rows, cols) of the tested pairs: j < k when symmetric, all j != k otherwise."""
    if symmetric:
        return np.triu_indices(m, k=1)
    rows, cols = np.nonzero(~np.eye(m, dtype=bool))
    return rows, cols


def adjust_local(local_p, symmetric):
    """BY-adjust a local p matrix over its test family; mirror it when symmetric."""
    m = local_p.shape[0]
    rows, cols = pair_family(m, symmetric)
    adjusted = np.full((m, m), np.nan)
    adjusted[rows, cols] = by_adjust(local_p[rows, cols])
    if symmetric:
        adjusted[cols, rows] = adjusted[rows, cols]
    return adjusted

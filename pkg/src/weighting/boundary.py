import numpy as np
from simplex_models.errors import IndexOutOfRange, InvalidWeights
from simplex_models.models import Composition


def _values(x):
    return x.values if isinstance(x, Composition) else np.asarray(x, dtype=float)


def _check_indices(m, j, dropped):
    if not (0 <= j < m and 0 <= dropped < m):
        raise IndexOutOfRange(f"coordinates ({j}, {dropped}) out of range for m={m}")
    if j == dropped:
        raise IndexOutOfRange("the free coordinate cannot be the dropped one")


def free_coordinates(m, dropped):
    return [j for j in range(m) if j != dropped]


#############################################
# VECTORISED CORE
#############################################
def boundary_distance(xj, xd, C):
    return np.minimum(np.minimum(xj, xd), C)


def hphi_arrays(xj, xd, alpha, C):
    """
    h(phi) and its derivative along x_j (x_dropped = 1 - sum of the others),
    elementwise. Ties between minimizers get derivative 0.
    """
    xj = np.asarray(xj, dtype=float)
    xd = np.asarray(xd, dtype=float)
    phi = boundary_distance(xj, xd, C)
    if alpha == 0:
        return np.ones_like(phi), np.zeros_like(phi)

    sign = np.where((xj < xd) & (xj < C), 1.0, 0.0) - np.where((xd < xj) & (xd < C), 1.0, 0.0)
    value = np.power(phi, alpha)
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = alpha * np.power(phi, alpha - 1.0)
    deriv = np.where(sign != 0, slope * sign, 0.0)
    return value, deriv


def weight_columns(samples, alpha, C, dropped):
    """
    n x m arrays (h~_j, d_j h~_j) for one dropped coordinate; the dropped
    column is left at zero. `C` holds one truncation per free coordinate.
    """
    samples = np.asarray(samples, dtype=float)
    n, m = samples.shape
    H = np.zeros((n, m))
    dH = np.zeros((n, m))
    xd = samples[:, dropped]
    for slot, j in enumerate(free_coordinates(m, dropped)):
        H[:, j], dH[:, j] = hphi_arrays(samples[:, j], xd, float(alpha[j]), C[slot])
    return H, dH


#############################################
# SCALAR OPERATIONS
#############################################
def phi(x, j, C_j, dropped):
    values = _values(x)
    _check_indices(values.shape[0], j, dropped)
    return float(boundary_distance(values[j], values[dropped], C_j))


def hphi_and_deriv(x, j, alpha_j, C_j, dropped):
    """(phi^alpha_j, d/dx_j of phi^alpha_j) at a single composition."""
    values = _values(x)
    _check_indices(values.shape[0], j, dropped)
    value, deriv = hphi_arrays(values[j], values[dropped], float(alpha_j), C_j)
    return float(value), float(deriv)


#############################################
# TRUNCATION
#############################################
def select_truncation(data, pi, dropped):
    """
    C_j = type-1 empirical pi-quantile (the ceil(pi*n)-th smallest) of
    min(x_j, x_dropped, 1) over the samples, for each free coordinate j.
    """
    if not 0 < pi <= 1:
        raise InvalidWeights(f"pi must lie in (0, 1], got {pi}")
    samples = data.samples
    m = samples.shape[1]
    _check_indices(m, 0 if dropped != 0 else 1, dropped)
    xd = samples[:, dropped]
    C = [
        np.quantile(boundary_distance(samples[:, j], xd, 1.0), pi, method="inverted_cdf")
        for j in free_coordinates(m, dropped)
    ]
    return np.asarray(C, dtype=float)


def resolve_truncation(data, weights, J):
    if weights.C is not None:
        return {int(d): np.asarray(weights.C) for d in J}
    return {int(d): select_truncation(data, weights.pi, int(d)) for d in J}

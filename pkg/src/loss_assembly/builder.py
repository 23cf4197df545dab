import numpy as np
import scipy.sparse as sp
from config import Config
from utils import root_logger
from simplex_models.density import power
from simplex_models.errors import DomainError, EmptyJ, IndexOutOfRange, InvalidWeights
from weighting.boundary import free_coordinates, resolve_truncation, weight_columns
from weighting.exponents import validate_h_exponents
from loss_assembly.models import ParameterLayout, QuadraticScoreLoss


#############################################
# DROPPED COORDINATES
#############################################
def resolve_J(m, J=None, count=None, seed=None, policy="explicit"):
    """
    Dropped coordinates (0-based, sorted, unique).
      explicit: the given J, default the last coordinate
      random:   `count` coordinates drawn without replacement from `seed`
      even:     {i * floor(m / count) : i = 1..count}, shifted to 0-based
    """
    if policy == "random":
        count = Config.J_COUNT if count is None else count
        if count < 1:
            raise EmptyJ("at least one dropped coordinate is required")
        rng = np.random.default_rng(seed)
        J = rng.choice(m, size=min(count, m), replace=False)
    elif policy == "even":
        count = Config.J_COUNT if count is None else count
        if count < 1:
            raise EmptyJ("at least one dropped coordinate is required")
        step = max(m // count, 1)
        J = [min(i * step, m) - 1 for i in range(1, min(count, m) + 1)]
    elif policy == "explicit":
        J = [m - 1] if J is None else list(J)
    else:
        raise InvalidWeights(f"unknown J policy {policy!r}")

    J = sorted({int(d) for d in J})
    if not J:
        raise EmptyJ("at least one dropped coordinate is required")
    if J[0] < 0 or J[-1] >= m:
        raise IndexOutOfRange(f"dropped coordinates {J} out of range for m={m}")
    return tuple(J)


def _check_inputs(data, spec, weights, J, eta0):
    if weights.m != data.m:
        raise InvalidWeights(f"weights are for m={weights.m}, data has m={data.m}")
    J = resolve_J(data.m, J)
    report = validate_h_exponents(spec, weights, eta0)
    if not report.passed:
        raise InvalidWeights(f"h exponents fail the score-matching assumptions: {report.binding_constraint}")
    if spec.uses_log and np.any(data.samples <= 0):
        raise DomainError(f"a={spec.a}, b={spec.b} takes logs; data must be strictly positive")
    return J


#############################################
# SCORE FEATURES
#############################################
def score_features(samples, spec, j, d, xa=None):
    """
    Linear features of the first and second derivatives of log p along x_j,
    with x_d = 1 - sum of the others:
        d_j log p  = u' (kappa_.j, kappa_.d, eta_j, eta_d)
        d_jj log p = v' (kappa_.j, kappa_.d, eta_j, eta_d)
    Returns (U, V), each n x (2m + 2). a=0 reads x^0 as log x.
    """
    a, b = spec.a, spec.b
    xa = power(samples, a) if xa is None else xa
    xj, xd = samples[:, j], samples[:, d]
    A = 1.0 if a == 0 else a
    n, m = samples.shape

    with np.errstate(divide="ignore", invalid="ignore"):
        pj1, pd1 = np.power(xj, a - 1.0), np.power(xd, a - 1.0)
        pj2, pd2 = np.power(xj, a - 2.0), np.power(xd, a - 2.0)
        qj1, qd1 = np.power(xj, b - 1.0), np.power(xd, b - 1.0)
        qj2, qd2 = np.power(xj, b - 2.0), np.power(xd, b - 2.0)

        U = np.empty((n, 2 * m + 2))
        V = np.empty((n, 2 * m + 2))
        U[:, :m] = -pj1[:, None] * xa
        U[:, m:2 * m] = pd1[:, None] * xa
        U[:, 2 * m] = qj1
        U[:, 2 * m + 1] = -qd1

        V[:, :m] = -(a - 1.0) * pj2[:, None] * xa
        V[:, m:2 * m] = -(a - 1.0) * pd2[:, None] * xa
        cross = A * pj1 * pd1
        V[:, j] -= A * pj1 * pj1
        V[:, d] += cross
        V[:, m + j] += cross
        V[:, m + d] -= A * pd1 * pd1
        V[:, 2 * m] = (b - 1.0) * qj2
        V[:, 2 * m + 1] = (b - 1.0) * qd2
    return U, V


def _local_indices(m, j, d):
    return np.concatenate([
        np.arange(j * m, (j + 1) * m),
        np.arange(d * m, (d + 1) * m),
        [m * m + j, m * m + d],
    ])


def _active_rows(H, dH, j, d):
    """Rows where h~_j or its derivative is nonzero."""
    slope = dH[:, j]
    if not np.all(np.isfinite(slope)):
        bad = int(np.argmax(~np.isfinite(slope)))
        raise DomainError(
            f"h~ has an infinite derivative at row {bad}, coordinate {j + 1} (dropped {d + 1}); "
            "zero entries need h exponents of at least 1"
        )
    return (H[:, j] != 0) | (slope != 0)


def _pair_block(samples, xa, spec, j, d, H, dH, n):
    """(Gamma, g) contributions of free coordinate j for dropped d, local indexing."""
    rows = _active_rows(H, dH, j, d)
    if not rows.any():
        size = 2 * samples.shape[1] + 2
        return np.zeros((size, size)), np.zeros(size)
    U, V = score_features(samples[rows], spec, j, d, xa[rows])
    w, dw = H[rows, j], dH[rows, j]
    # rows with h~_j = 0 only carry the derivative term
    weighted, sloped = w != 0, dw != 0
    gamma = (U[weighted] * w[weighted, None]).T @ U[weighted] / n
    g = -(dw[sloped] @ U[sloped] + w[weighted] @ V[weighted]) / n
    if not (np.all(np.isfinite(gamma)) and np.all(np.isfinite(g))):
        raise DomainError(
            f"non-finite loss contribution at coordinate {j + 1} (dropped {d + 1}); "
            "zero entries need h vanishing fast enough at the boundary"
        )
    return gamma, g


#############################################
# ASSEMBLY
#############################################
def assemble(data, spec, weights, J=None, truncation=None, eta0=None):
    """
    Build Gamma and g of the generalized score-matching loss, averaged over
    the dropped coordinates J (default: the last coordinate). `truncation`
    maps dropped coordinate -> C vector and defaults to the weights' own
    rule; pass a training-set truncation to evaluate held-out data.
    """
    J = _check_inputs(data, spec, weights, J, eta0)
    samples = data.samples
    n, m = samples.shape
    if truncation is None:
        truncation = resolve_truncation(data, weights, J)
    xa = power(samples, spec.a)

    full = ParameterLayout(m=m, include_eta=True)
    dense = m <= Config.DENSE_MAX_M
    dim = full.dim
    Gamma = np.zeros((dim, dim)) if dense else None
    g = np.zeros(dim)
    coo_rows, coo_cols, coo_vals = [], [], []

    for d in J:
        H, dH = weight_columns(samples, weights.alpha, truncation[d], d)
        for j in free_coordinates(m, d):
            block, local_g = _pair_block(samples, xa, spec, j, d, H, dH, n)
            index = _local_indices(m, j, d)
            g[index] += local_g
            if dense:
                Gamma[np.ix_(index, index)] += block
            else:
                r, c = np.meshgrid(index, index, indexing="ij")
                coo_rows.append(r.ravel())
                coo_cols.append(c.ravel())
                coo_vals.append(block.ravel())
        root_logger.debug(f"Assembled dropped coordinate {d + 1} of m={m}")

    if not dense:
        Gamma = sp.coo_matrix(
            (np.concatenate(coo_vals), (np.concatenate(coo_rows), np.concatenate(coo_cols))),
            shape=(dim, dim),
        ).tocsr()
    Gamma = Gamma / len(J)
    g = g / len(J)
    if dense:
        Gamma = (Gamma + Gamma.T) / 2

    layout = ParameterLayout.for_spec(spec, m)
    if not spec.has_eta:
        Gamma = Gamma[:layout.dim, :layout.dim]
        g = g[:layout.dim]

    return QuadraticScoreLoss(
        Gamma=Gamma, g=g, J=J, weight_spec=weights, spec=spec, layout=layout,
        n=n, truncation={d: np.asarray(truncation[d]) for d in J},
    )


#############################################
# DIRECT ORACLE
#############################################
def empirical_loss_direct(data, spec, weights, params, J=None, truncation=None, eta0=None):
    """
    (1/n) sum_i sum_{j != d} [ 1/2 h~_j (d_j log p)^2 + (d_j h~_j)(d_j log p)
    + h~_j d_jj log p ], averaged over d in J, evaluated term by term.
    """
    J = _check_inputs(data, spec, weights, J, eta0)
    samples = data.samples
    n, m = samples.shape
    if truncation is None:
        truncation = resolve_truncation(data, weights, J)

    a, b = spec.a, spec.b
    A = 1.0 if a == 0 else a
    K = params.K
    eta = params.eta if spec.has_eta else np.zeros(m)
    xa = power(samples, a)
    total = 0.0

    for d in J:
        H, dH = weight_columns(samples, weights.alpha, truncation[d], d)
        for j in free_coordinates(m, d):
            rows = _active_rows(H, dH, j, d)
            h, dh = H[rows, j], dH[rows, j]
            x = samples[rows]
            xj, xd = x[:, j], x[:, d]
            lin_j, lin_d = xa[rows] @ K[:, j], xa[rows] @ K[:, d]
            with np.errstate(divide="ignore", invalid="ignore"):
                pj1, pd1 = xj ** (a - 1.0), xd ** (a - 1.0)
                score = -lin_j * pj1 + lin_d * pd1 + eta[j] * xj ** (b - 1.0) - eta[d] * xd ** (b - 1.0)
                curvature = (
                    -(a - 1.0) * (lin_j * xj ** (a - 2.0) + lin_d * xd ** (a - 2.0))
                    - A * (K[j, j] * pj1 ** 2 + K[d, d] * pd1 ** 2)
                    + A * (K[j, d] + K[d, j]) * pj1 * pd1
                    + (b - 1.0) * (eta[j] * xj ** (b - 2.0) + eta[d] * xd ** (b - 2.0))
                )
                terms = (
                    np.where(h != 0, 0.5 * h * score ** 2 + h * curvature, 0.0)
                    + np.where(dh != 0, dh * score, 0.0)
                )
            if not np.all(np.isfinite(terms)):
                raise DomainError(f"non-finite loss term at coordinate {j + 1} (dropped {d + 1})")
            total += terms.sum() / n
    return float(total / len(J))

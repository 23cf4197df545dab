import numpy as np
from simplex_models.errors import AsymmetricGamma, DimensionMismatch, DomainError
from simplex_models.models import (
    Composition, IdentifiabilityReport, ParameterSet, ValidityReport,
)


EIGEN_TOL = 1e-10
EXACT_TOL = 1e-12


#############################################
# POWERS
#############################################
def power(x, exponent):
    """x**exponent with the convention x**0 == log(x)."""
    if exponent == 0:
        return np.log(x)
    return np.power(x, exponent)


def inverse_or_one(exponent):
    return 1.0 if exponent == 0 else 1.0 / exponent


def _as_rows(x):
    values = x.values if isinstance(x, Composition) else np.asarray(x, dtype=float)
    return np.atleast_2d(values)


#############################################
# KERNEL
#############################################
def log_kernel_batch(spec, params, samples):
    rows = _as_rows(samples)
    if rows.shape[1] != params.m:
        raise DimensionMismatch(f"samples have {rows.shape[1]} components, parameters {params.m}")
    if spec.uses_log and np.any(rows <= 0):
        raise DomainError(f"a={spec.a}, b={spec.b} takes logs; entries must be strictly positive")

    xa = power(rows, spec.a)
    quadratic = np.einsum("ij,jk,ik->i", xa, params.K, xa)
    value = -0.5 * inverse_or_one(spec.a) * quadratic
    if spec.has_eta:
        value = value + inverse_or_one(spec.b) * (power(rows, spec.b) @ params.eta)
    return value


def log_kernel(spec, params, x):
    """
    Unnormalized log-density -(1/2a) x^a' K x^a + (1/b) eta' x^b of a single
    composition, with x^0 == log x and 1/0 == 1. No normalizing constant.
    """
    return float(log_kernel_batch(spec, params, x)[0])


#############################################
# NORMALIZABILITY
#############################################
def _is_symmetric(K):
    scale = max(1.0, float(np.max(np.abs(K))))
    return float(np.max(np.abs(K - K.T))) <= EXACT_TOL * scale


def _eig_scale(K):
    return max(1.0, float(np.max(np.abs(K))))


def _positive_definite(S):
    if S.size == 0:
        return False
    return float(np.linalg.eigvalsh(S).min()) > EIGEN_TOL * _eig_scale(S)


def _positive_semidefinite(S):
    return float(np.linalg.eigvalsh(S).min()) >= -EIGEN_TOL * _eig_scale(S)


def _rows_sum_to_zero(K):
    return float(np.max(np.abs(K.sum(axis=1)))) <= EIGEN_TOL * _eig_scale(K) * K.shape[0]


def check_normalizability(spec, params):
    """
    Tri-state check of the sufficient conditions for a finite normalizing
    constant. Quadratic-form positivity over the whole simplex is only
    certified through eigenvalue tests, so failing them yields "unproven".
    """
    a, b = spec.a, spec.b
    K, eta = params.K, params.eta
    if not spec.has_eta:
        eta = np.zeros_like(eta)
    m = params.m

    if a > 0 and b > 0:
        return ValidityReport(normalizable="proven", condition_hit="CC1", details="a>0 and b>0")

    if a > 0:
        if np.all(eta > -1):
            return ValidityReport(normalizable="proven", condition_hit="CC2", details="a>0, b=0, eta > -1")
        worst = int(np.argmin(eta))
        return ValidityReport(
            normalizable="violated",
            details=f"a>0, b=0 needs eta_j > -1 for all j; eta_{worst + 1} = {eta[worst]:g}",
        )

    symmetric_part = (K + K.T) / 2

    if b == 0 or not spec.has_eta:
        if _is_symmetric(K):
            if _positive_definite(K):
                return ValidityReport(normalizable="proven", condition_hit="Thm4-I", details="K symmetric positive definite")
            if _rows_sum_to_zero(K):
                if eta.sum() + m >= 0:
                    for k in range(m):
                        minor = np.delete(np.delete(K, k, axis=0), k, axis=1)
                        if _positive_definite(minor):
                            return ValidityReport(
                                normalizable="proven", condition_hit="Thm4-II",
                                details=f"K 1 = 0, K_(-{k + 1},-{k + 1}) positive definite, 1'eta + m = {eta.sum() + m:g} >= 0",
                            )
                if _positive_semidefinite(K) and np.all(eta > -1):
                    return ValidityReport(
                        normalizable="proven", condition_hit="Thm4-III",
                        details="K 1 = 0, K positive semidefinite, eta > -1",
                    )
        if _positive_definite(symmetric_part):
            return ValidityReport(
                normalizable="proven", condition_hit="CC3",
                details="symmetric part of K positive definite, so log(x)' K log(x) > 0 on the simplex",
            )
        if not spec.has_eta and _positive_semidefinite(symmetric_part):
            return ValidityReport(
                normalizable="proven", condition_hit="CC4",
                details="eta = 0 known and symmetric part of K positive semidefinite",
            )
        return ValidityReport(
            normalizable="unproven",
            details="a=0, b=0: no eigenvalue-checkable sufficient condition holds",
        )

    if _positive_semidefinite(symmetric_part):
        return ValidityReport(
            normalizable="proven", condition_hit="CC4",
            details="symmetric part of K positive semidefinite, so log(x)' K log(x) >= 0 on the simplex",
        )
    return ValidityReport(
        normalizable="unproven",
        details="a=0, b>0: positivity of log(x)' K log(x) over the simplex not certified",
    )


#############################################
# IDENTIFIABILITY
#############################################
def check_identifiability(a, b):
    """K and eta are identifiable unless a=1 or 2a=b>0."""
    if np.isclose(a, 1.0, rtol=0, atol=EXACT_TOL):
        if np.isclose(b, 1.0, rtol=0, atol=EXACT_TOL):
            return IdentifiabilityReport(identifiable=False, exception_case="I", details="a=b=1")
        if np.isclose(b, 2.0, rtol=0, atol=EXACT_TOL):
            return IdentifiabilityReport(identifiable=False, exception_case="II", details="a=1, b=2")
        return IdentifiabilityReport(
            identifiable=False, exception_case="III",
            details="a=1: K determined only up to terms absorbed when eta is fixed",
        )
    if b > 0 and np.isclose(2 * a, b, rtol=0, atol=EXACT_TOL):
        return IdentifiabilityReport(
            identifiable=False, exception_case="IV",
            details="2a=b>0: K1-K2 = 2(eta1-eta2) leaves the density unchanged",
        )
    return IdentifiabilityReport(identifiable=True)


#############################################
# AITCHISON CORRESPONDENCE
#############################################
def am1_from_aitchison(beta, gamma):
    """
    Map Aitchison's (beta, gamma) to (K, eta):
    kappa_jj = 2 sum_{i != j} gamma_ji, kappa_jk = -2 gamma_jk, eta = beta - 1.
    """
    beta = np.asarray(beta, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    m = beta.shape[0]
    if gamma.shape != (m, m):
        raise DimensionMismatch(f"gamma must be {m}x{m}, got {gamma.shape}")
    if np.any(gamma != gamma.T):
        raise AsymmetricGamma("gamma must be symmetric")
    if np.any(np.diag(gamma) != 0):
        raise AsymmetricGamma("gamma must have a zero diagonal")

    K = -2.0 * gamma
    np.fill_diagonal(K, 2.0 * gamma.sum(axis=1))
    return ParameterSet(K=K, eta=beta - 1.0)

import numpy as np
from simplex_models.errors import BandwidthTooLarge
from simplex_models.models import ParameterSet


def band_weights(m, s):
    """w_ij = 1 - |i-j|/(s+1) for 1 <= |i-j| <= s, else 0."""
    if s >= m:
        raise BandwidthTooLarge(f"bandwidth s={s} must be smaller than m={m}")
    if s < 0:
        raise BandwidthTooLarge(f"bandwidth must be nonnegative, got {s}")
    gaps = np.abs(np.subtract.outer(np.arange(m), np.arange(m)))
    return np.where((gaps >= 1) & (gaps <= s), 1.0 - gaps / (s + 1.0), 0.0)


def banded_K(m, s):
    """
    Banded ground truth as a weighted graph Laplacian: kappa_ij = -w_ij off the
    diagonal, kappa_ii = sum_j w_ij. K 1 = 0, K symmetric positive
    semidefinite, and every principal (m-1) minor positive definite for s >= 1.
    eta = 0.
    """
    W = band_weights(m, s)
    K = np.diag(W.sum(axis=1)) - W
    return ParameterSet(K=K, eta=np.zeros(m))


def aitchison_truth(m, s):
    """banded_K checked against the A^(m-1) constraints."""
    truth = banded_K(m, s)
    return ParameterSet.for_mode(truth.K, truth.eta, "am1")

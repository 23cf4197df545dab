import numpy as np
import scipy.sparse as sp
from utils import array_hash, stable_hash
from simplex_models.errors import DeltaBelowOne, IndexOutOfRange, NonpositiveN, WrongMode


#############################################
# DIAGONAL MULTIPLIER
#############################################
def diagonal_multiplier_bound(n, m, tau):
    """Upper end of the admissible range 1 < delta < 1 + sqrt((tau log m + log 4) / 2n)."""
    if n <= 0:
        raise NonpositiveN(f"n must be positive, got {n}")
    return 1.0 + float(np.sqrt((tau * np.log(m) + np.log(4.0)) / (2.0 * n)))


def apply_diagonal_multiplier(loss, delta):
    """Return the loss with diagonal multiplier delta; Gamma itself is left untouched."""
    if not delta >= 1.0:
        raise DeltaBelowOne(f"delta must be >= 1, got {delta}")
    return loss.model_copy(update={"delta": float(delta)})


#############################################
# A^(m-1) TRANSFORM
#############################################
def build_C_matrix(j, m):
    """
    (m-1) x m matrix whose rows are e_k - e_j for k != j, in increasing k.
    C(j) 1 = 0, and K[:, j] = C(j)' K_off[:, j] whenever K 1 = 0.
    Indices are 0-based.
    """
    if not 0 <= j < m:
        raise IndexOutOfRange(f"j={j} out of range for m={m}")
    C = np.zeros((m - 1, m))
    others = [k for k in range(m) if k != j]
    C[np.arange(m - 1), others] = 1.0
    C[:, j] = -1.0
    return C


def _block_C(m):
    return sp.block_diag([build_C_matrix(j, m) for j in range(m)], format="csr")


def transform_am1(loss):
    """
    Marginalize the diagonal of K out under K 1 = 0: with vec(K) = C' vec(K_off),
    Gamma~ = [[C G_K C', C G_Keta], [G_Keta' C', G_eta]] and g~ = (C g_K, g_eta).
    """
    if loss.spec.mode != "am1":
        raise WrongMode(f"transform_am1 needs mode am1, got {loss.spec.mode}")
    if loss.transformed:
        raise WrongMode("loss is already in the off-diagonal parametrization")

    m = loss.m
    k_dim = m * m
    C = _block_C(m)
    G = loss.Gamma
    G_K, G_Ke, G_e = G[:k_dim, :k_dim], G[:k_dim, k_dim:], G[k_dim:, k_dim:]

    if sp.issparse(G):
        top = C @ G_K @ C.T
        cross = C @ G_Ke
        Gamma = sp.bmat([[top, cross], [cross.T, G_e]], format="csr")
    else:
        top = np.asarray(C @ np.asarray(C @ G_K).T)
        cross = np.asarray(C @ G_Ke)
        Gamma = np.block([[top, cross], [cross.T, G_e]])
        Gamma = (Gamma + Gamma.T) / 2

    g = np.concatenate([C @ loss.g[:k_dim], loss.g[k_dim:]])
    layout = loss.layout.model_copy(update={"off_diagonal": True})
    return loss.model_copy(update={"Gamma": Gamma, "g": g, "layout": layout})


#############################################
# FINGERPRINT
#############################################
def loss_fingerprint(loss):
    G = loss.Gamma
    if sp.issparse(G):
        G = G.tocsr()
        G.sort_indices()
        gamma_hash = array_hash(G.data, G.indices, G.indptr)
    else:
        gamma_hash = array_hash(G)
    return stable_hash({
        "Gamma": gamma_hash,
        "g": array_hash(loss.g),
        "J": list(loss.J),
        "delta": loss.delta,
        "spec": loss.spec,
        "transformed": loss.transformed,
    })

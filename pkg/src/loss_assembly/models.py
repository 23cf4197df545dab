from typing import Any, Dict, Tuple
import numpy as np
import scipy.sparse as sp
from simplex_models.errors import IndexOutOfRange
from simplex_models.models import FrozenModel, ModelSpec, ParameterSet
from weighting.models import WeightSpec


# ----------------------------------------------------------------------
# parameter layout
# ----------------------------------------------------------------------
class ParameterLayout(FrozenModel):
    """
    Maps parameters to positions of theta.

    Untransformed: theta = (vec(K) column-major, eta); kappa_kj sits at j*m + k.
    Off-diagonal (A^(m-1)): theta = (vec(K_off), eta), column j holding the
    m-1 entries kappa_kj, k != j, in increasing k. The diagonal is derived
    from K 1 = 0.
    """

    m: int
    include_eta: bool = True
    off_diagonal: bool = False
    tie_pairs: bool = False

    @classmethod
    def for_spec(cls, spec, m, transformed=False):
        return cls(m=m, include_eta=spec.has_eta, off_diagonal=transformed, tie_pairs=spec.symmetric)

    @property
    def k_dim(self):
        return self.m * (self.m - 1) if self.off_diagonal else self.m * self.m

    @property
    def dim(self):
        return self.k_dim + (self.m if self.include_eta else 0)

    @property
    def block_index(self):
        index = {"K": slice(0, self.k_dim)}
        if self.include_eta:
            index["eta"] = slice(self.k_dim, self.dim)
        return index

    def k_index(self, k, j):
        m = self.m
        if not (0 <= k < m and 0 <= j < m):
            raise IndexOutOfRange(f"({k}, {j}) out of range for m={m}")
        if not self.off_diagonal:
            return j * m + k
        if k == j:
            raise IndexOutOfRange("diagonal entries are derived, not stored, in the off-diagonal layout")
        return j * (m - 1) + (k if k < j else k - 1)

    def eta_index(self, j):
        if not self.include_eta:
            raise IndexOutOfRange("this layout carries no eta")
        if not 0 <= j < self.m:
            raise IndexOutOfRange(f"eta index {j} out of range for m={self.m}")
        return self.k_dim + j

    def pack(self, params):
        m = self.m
        if params.m != m:
            raise IndexOutOfRange(f"parameters have m={params.m}, layout m={m}")
        if self.off_diagonal:
            k_part = np.concatenate([np.delete(params.K[:, j], j) for j in range(m)])
        else:
            k_part = params.K.ravel(order="F")
        if self.include_eta:
            return np.concatenate([k_part, params.eta])
        return k_part.copy()

    def unpack(self, theta):
        m = self.m
        theta = np.asarray(theta, dtype=float)
        if self.off_diagonal:
            K = np.zeros((m, m))
            for j in range(m):
                column = theta[j * (m - 1):(j + 1) * (m - 1)]
                K[np.arange(m) != j, j] = column
                K[j, j] = -column.sum()
        else:
            K = theta[:m * m].reshape((m, m), order="F")
        eta = theta[self.k_dim:self.dim] if self.include_eta else np.zeros(m)
        return ParameterSet(K=K, eta=eta)

    def variable_groups(self):
        """
        Free optimization variables as (theta positions, kind), kind one of
        "K_off", "K_diag", "eta". Tied symmetric pairs share one variable.
        """
        m = self.m
        groups = []
        if self.tie_pairs:
            for j in range(m):
                if not self.off_diagonal:
                    groups.append(((self.k_index(j, j),), "K_diag"))
                for k in range(j + 1, m):
                    groups.append(((self.k_index(k, j), self.k_index(j, k)), "K_off"))
        else:
            for j in range(m):
                for k in range(m):
                    if k == j and self.off_diagonal:
                        continue
                    groups.append(((self.k_index(k, j),), "K_diag" if k == j else "K_off"))
        if self.include_eta:
            groups.extend(((self.eta_index(j),), "eta") for j in range(m))
        return groups

    def tying_matrix(self):
        """Sparse P with theta = P @ phi over the free variables phi, plus their groups."""
        groups = self.variable_groups()
        rows, cols = [], []
        for column, (positions, _) in enumerate(groups):
            rows.extend(positions)
            cols.extend([column] * len(positions))
        P = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(self.dim, len(groups)))
        return P, groups


# ----------------------------------------------------------------------
# quadratic loss
# ----------------------------------------------------------------------
class QuadraticScoreLoss(FrozenModel):
    """
    L(theta) = 1/2 theta' Gamma_delta theta - g' theta, averaged over the
    dropped coordinates J. `Gamma` is stored without the diagonal
    multiplier; `gamma_delta()` applies it.
    """

    Gamma: Any
    g: np.ndarray
    J: Tuple[int, ...]
    weight_spec: WeightSpec
    spec: ModelSpec
    layout: ParameterLayout
    n: int
    delta: float = 1.0
    truncation: Dict[int, np.ndarray] = {}

    @property
    def m(self):
        return self.layout.m

    @property
    def transformed(self):
        return self.layout.off_diagonal

    @property
    def block_index(self):
        return self.layout.block_index

    @property
    def is_sparse(self):
        return sp.issparse(self.Gamma)

    def gamma_delta(self):
        """Gamma with its diagonal scaled by delta (K block only once transformed)."""
        if self.delta == 1.0:
            return self.Gamma
        scale = np.zeros(self.layout.dim)
        limit = self.layout.k_dim if self.transformed else self.layout.dim
        scale[:limit] = self.delta - 1.0
        bump = scale * self.Gamma.diagonal()
        if self.is_sparse:
            return (self.Gamma + sp.diags(bump)).tocsr()
        return self.Gamma + np.diag(bump)

    def dense_gamma(self, with_delta=True):
        G = self.gamma_delta() if with_delta else self.Gamma
        return G.toarray() if sp.issparse(G) else np.asarray(G)

    def value(self, theta, with_delta=True):
        theta = np.asarray(theta, dtype=float)
        G = self.gamma_delta() if with_delta else self.Gamma
        return float(0.5 * theta @ (G @ theta) - self.g @ theta)

    def evaluate(self, params, with_delta=True):
        return self.value(self.layout.pack(params), with_delta=with_delta)

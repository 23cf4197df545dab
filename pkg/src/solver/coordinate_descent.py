import numpy as np
import scipy.sparse as sp
from numba import njit
from utils import root_logger
from simplex_models.errors import ZeroDiagonal
from solver.models import FitResult


def soft_threshold(z, t):
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


#############################################
# SWEEP KERNELS
#############################################
@njit(nogil=True)
def _sweep_dense(Q, theta, grad, weights, order):
    # grad = Q theta - c is kept current; returns (max relative change, bad coordinate or -1)
    max_change = 0.0
    for t in order:
        q = Q[t, t]
        if q <= 0.0:
            if theta[t] == 0.0 and abs(grad[t]) <= weights[t]:
                continue
            return max_change, t
        z = q * theta[t] - grad[t]
        new = np.sign(z) * max(abs(z) - weights[t], 0.0) / q
        step = new - theta[t]
        if step != 0.0:
            grad += step * Q[t]
            theta[t] = new
            change = abs(step) / max(1.0, abs(new))
            if change > max_change:
                max_change = change
    return max_change, -1


@njit(nogil=True)
def _sweep_csc(data, indices, indptr, diag, theta, grad, weights, order):
    max_change = 0.0
    for t in order:
        q = diag[t]
        if q <= 0.0:
            if theta[t] == 0.0 and abs(grad[t]) <= weights[t]:
                continue
            return max_change, t
        z = q * theta[t] - grad[t]
        new = np.sign(z) * max(abs(z) - weights[t], 0.0) / q
        step = new - theta[t]
        if step != 0.0:
            for pos in range(indptr[t], indptr[t + 1]):
                grad[indices[pos]] += step * data[pos]
            theta[t] = new
            change = abs(step) / max(1.0, abs(new))
            if change > max_change:
                max_change = change
    return max_change, -1


#############################################
# REDUCED PROBLEM
#############################################
class ReducedProblem:
    """
    The penalized quadratic over the free variables phi (theta = P phi):
        1/2 phi' Q phi - c' phi + sum_t w_t |phi_t|
    with Q = P' Gamma_delta P, c = P' g. A tied symmetric pair carries
    weight 2 lambda_K because both kappa_jk and kappa_kj enter the l1 norm.
    """

    def __init__(self, loss, opts):
        self.loss = loss
        self.layout = loss.layout
        self.P, self.groups = self.layout.tying_matrix()
        Pt = self.P.T.tocsr()
        G = loss.gamma_delta()
        if sp.issparse(G):
            Q = (Pt @ G @ self.P).tocsc()
            Q = ((Q + Q.T) / 2).tocsc()
            Q.sort_indices()
            self.Q = Q
            self.diag = np.ascontiguousarray(Q.diagonal())
        else:
            Q = np.asarray(Pt @ np.asarray(Pt @ G).T)
            self.Q = np.ascontiguousarray((Q + Q.T) / 2)
            self.diag = np.ascontiguousarray(np.diag(self.Q))
        self.c = np.asarray(Pt @ loss.g, dtype=float)
        self.counts = np.asarray(self.P.sum(axis=0)).ravel()
        self.kinds = np.array([kind for _, kind in self.groups])
        self.factors = self._penalty_factors(opts)

    @property
    def dim(self):
        return len(self.groups)

    @property
    def is_sparse(self):
        return sp.issparse(self.Q)

    def _penalty_factors(self, opts):
        """Per-variable multipliers (of lambda_K or lambda_eta); 0 means unpenalized."""
        spec = self.loss.spec
        factors = np.zeros(self.dim)
        off = self.kinds == "K_off"
        factors[off] = self.counts[off]
        if opts.penalize_K_diagonal and not spec.symmetric:
            factors[self.kinds == "K_diag"] = 1.0
        elif opts.penalize_K_diagonal:
            root_logger.debug("K diagonal left unpenalized in a symmetric mode")
        if opts.penalize_eta:
            factors[self.kinds == "eta"] = 1.0
        return factors

    def penalty_weights(self, opts):
        lam_eta = opts.effective_lambda_eta
        lam = np.where(self.kinds == "eta", lam_eta, opts.lambda_K)
        return np.ascontiguousarray(lam * self.factors)

    def restrict(self, theta):
        return np.asarray(self.P.T @ theta, dtype=float) / self.counts

    def expand(self, phi):
        return np.asarray(self.P @ phi, dtype=float)

    def gradient(self, phi):
        return np.asarray(self.Q @ phi, dtype=float) - self.c

    def objective(self, phi, weights, grad=None):
        grad = self.gradient(phi) if grad is None else grad
        smooth = 0.5 * phi @ (grad + self.c) - self.c @ phi
        return float(smooth + weights @ np.abs(phi))

    def kkt(self, phi, weights, grad=None):
        grad = self.gradient(phi) if grad is None else grad
        moving = phi != 0
        residual = np.where(
            moving,
            np.abs(grad + weights * np.sign(phi)),
            np.maximum(np.abs(grad) - weights, 0.0),
        )
        return float(residual.max()) if residual.size else 0.0

    def sweep(self, phi, grad, weights, order):
        if self.is_sparse:
            return _sweep_csc(self.Q.data, self.Q.indices, self.Q.indptr, self.diag, phi, grad, weights, order)
        return _sweep_dense(self.Q, phi, grad, weights, order)


#############################################
# SOLVER
#############################################
def coordinate_descent(loss, opts, init=None, problem=None):
    """
    Minimize 1/2 theta' Gamma_delta theta - g' theta + lambda_K |K_off|_1
    + lambda_eta |eta|_1 by cyclic coordinate descent. After the first full
    sweep only the active set is swept until it settles; a full sweep then
    confirms convergence (relative change below tol and KKT residual below
    kkt_tol).
    """
    problem = ReducedProblem(loss, opts) if problem is None else problem
    weights = problem.penalty_weights(opts)

    if init is None:
        phi = np.zeros(problem.dim)
    else:
        phi = problem.restrict(loss.layout.pack(init))
    phi = np.ascontiguousarray(phi, dtype=float)
    grad = np.ascontiguousarray(problem.gradient(phi))

    order = np.arange(problem.dim, dtype=np.int64)
    if opts.shuffle_seed is not None:
        order = np.random.default_rng(opts.shuffle_seed).permutation(order).astype(np.int64)

    history = [problem.objective(phi, weights, grad)]
    full = True
    converged = False
    kkt = np.inf
    sweeps = 0

    while sweeps < opts.max_sweeps:
        visit = order if full else order[active[order]]
        change, bad = problem.sweep(phi, grad, weights, visit)
        sweeps += 1
        if bad >= 0:
            raise ZeroDiagonal(
                f"zero quadratic coefficient on free variable {bad} ({problem.kinds[bad]}); "
                "increase delta or check for degenerate data"
            )

        value = problem.objective(phi, weights, grad)
        if value > history[-1] + 1e-10 * max(1.0, abs(history[-1])):
            root_logger.warning(f"Objective rose from {history[-1]:.12g} to {value:.12g} in sweep {sweeps}")
        history.append(value)

        if change < opts.tol:
            if full:
                grad = problem.gradient(phi)
                kkt = problem.kkt(phi, weights, grad)
                if kkt <= opts.kkt_tol:
                    converged = True
                    break
            full = True
        elif full:
            active = (phi != 0) | (weights == 0)
            full = False

    if not converged:
        kkt = problem.kkt(phi, weights)
        root_logger.warning(
            f"Coordinate descent stopped after {sweeps} sweeps at lambda_K={opts.lambda_K:.4g} "
            f"with KKT residual {kkt:.3e}"
        )

    theta = problem.expand(phi)
    return FitResult(
        params=loss.layout.unpack(theta),
        theta=theta,
        lambda_K=opts.lambda_K,
        lambda_eta=opts.effective_lambda_eta,
        sweeps_used=sweeps,
        converged=converged,
        kkt_violation=kkt,
        objective=history[-1],
        objective_history=history,
    )
